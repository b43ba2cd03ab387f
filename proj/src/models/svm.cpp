#include "eegalign/models/svm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "eegalign/error.hpp"
#include "eegalign/harness/metrics.hpp"
#include "eegalign/trial.hpp"

namespace eegalign::models {
namespace {

constexpr double kTau = 1e-12;

// Given fixed scores s = Xw, the hinge sum over b is convex piecewise linear
// with breakpoints y_i - s_i; its slope rises by one at each breakpoint
// starting from -n_pos, so the minimizers are the interval between the
// n_pos-th and (n_pos+1)-th smallest breakpoints.
double optimal_bias(const Eigen::VectorXd& scores, const Eigen::VectorXd& y)
{
    std::vector<double> breaks(static_cast<std::size_t>(scores.size()));
    int n_pos = 0;
    for (Eigen::Index i = 0; i < scores.size(); ++i) {
        breaks[static_cast<std::size_t>(i)] = y(i) - scores(i);
        n_pos += y(i) > 0 ? 1 : 0;
    }
    std::sort(breaks.begin(), breaks.end());
    return 0.5 * (breaks[static_cast<std::size_t>(n_pos - 1)] + breaks[static_cast<std::size_t>(n_pos)]);
}

double hinge_sum(const Eigen::VectorXd& scores, const Eigen::VectorXd& y, double b)
{
    double sum = 0.0;
    for (Eigen::Index i = 0; i < scores.size(); ++i)
        sum += std::max(0.0, 1.0 - y(i) * (scores(i) + b));
    return sum;
}

}  // namespace

LinearMarginModel svm_fit(const Eigen::MatrixXd& x, std::span<const int> labels, double C, SvmOptions options)
{
    const Eigen::Index n = x.rows();
    if (n != static_cast<Eigen::Index>(labels.size()))
        throw Error(ErrorKind::DimensionMismatch, "svm_fit: sample and label counts differ");
    if (!(C > 0.0))
        throw Error(ErrorKind::InvalidArgument, "svm_fit: C must be positive");
    const auto classes = classes_of(labels);
    if (classes.size() != 2)
        throw Error(ErrorKind::MissingClass, "linear SVM needs exactly two classes");

    LinearMarginModel model;
    model.C = C;
    model.negative_class = classes[0];
    model.positive_class = classes[1];

    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i)
        y(i) = labels[static_cast<std::size_t>(i)] == model.positive_class ? 1.0 : -1.0;

    const Eigen::VectorXd diag = x.rowwise().squaredNorm();
    Eigen::VectorXd alpha = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd grad = Eigen::VectorXd::Constant(n, -1.0);
    Eigen::VectorXd w = Eigen::VectorXd::Zero(x.cols());

    double eps = 1e-3;
    long iter = 0;
    for (;;) {
        // Working-set selection with second-order information.
        double gmax = -std::numeric_limits<double>::infinity();
        Eigen::Index i = -1;
        for (Eigen::Index t = 0; t < n; ++t) {
            const bool up = (y(t) > 0 && alpha(t) < C) || (y(t) < 0 && alpha(t) > 0);
            if (up && -y(t) * grad(t) >= gmax) {
                gmax = -y(t) * grad(t);
                i = t;
            }
        }

        double gmax2 = -std::numeric_limits<double>::infinity();
        Eigen::Index j = -1;
        Eigen::VectorXd ki;
        if (i >= 0) {
            ki = x * x.row(i).transpose();
            double best = std::numeric_limits<double>::infinity();
            for (Eigen::Index t = 0; t < n; ++t) {
                const bool low = (y(t) > 0 && alpha(t) > 0) || (y(t) < 0 && alpha(t) < C);
                if (!low)
                    continue;
                gmax2 = std::max(gmax2, y(t) * grad(t));
                const double diff = gmax + y(t) * grad(t);
                if (diff > 0) {
                    double a = diag(i) + diag(t) - 2.0 * ki(t);
                    if (a <= 0)
                        a = kTau;
                    const double obj = -(diff * diff) / a;
                    if (obj <= best) {
                        best = obj;
                        j = t;
                    }
                }
            }
        }

        const bool optimal = i < 0 || j < 0 || gmax + gmax2 < eps;
        if (optimal || iter >= options.max_iter) {
            // Refresh the gradient from w and measure the duality gap.
            const Eigen::VectorXd scores = x * w;
            grad = (y.array() * scores.array() - 1.0).matrix();
            model.b = optimal_bias(scores, y);
            model.primal = 0.5 * w.squaredNorm() + C * hinge_sum(scores, y, model.b);
            model.dual = alpha.sum() - 0.5 * w.squaredNorm();
            const double gap = model.primal - model.dual;
            if (gap <= options.gap_tol * std::max(1.0, std::abs(model.primal))) {
                model.converged = true;
                break;
            }
            if (iter >= options.max_iter || eps < 1e-15)
                break;
            eps *= 0.1;
            continue;
        }

        const Eigen::VectorXd kj = x * x.row(j).transpose();
        const double old_ai = alpha(i);
        const double old_aj = alpha(j);
        const double qij = y(i) * y(j) * ki(j);
        if (y(i) != y(j)) {
            double quad = diag(i) + diag(j) + 2.0 * qij;
            if (quad <= 0)
                quad = kTau;
            const double delta = (-grad(i) - grad(j)) / quad;
            const double diff = alpha(i) - alpha(j);
            alpha(i) += delta;
            alpha(j) += delta;
            if (diff > 0) {
                if (alpha(j) < 0) {
                    alpha(j) = 0;
                    alpha(i) = diff;
                }
            } else if (alpha(i) < 0) {
                alpha(i) = 0;
                alpha(j) = -diff;
            }
            if (diff > 0) {
                if (alpha(i) > C) {
                    alpha(i) = C;
                    alpha(j) = C - diff;
                }
            } else if (alpha(j) > C) {
                alpha(j) = C;
                alpha(i) = C + diff;
            }
        } else {
            double quad = diag(i) + diag(j) - 2.0 * qij;
            if (quad <= 0)
                quad = kTau;
            const double delta = (grad(i) - grad(j)) / quad;
            const double sum = alpha(i) + alpha(j);
            alpha(i) -= delta;
            alpha(j) += delta;
            if (sum > C) {
                if (alpha(i) > C) {
                    alpha(i) = C;
                    alpha(j) = sum - C;
                }
            } else if (alpha(j) < 0) {
                alpha(j) = 0;
                alpha(i) = sum;
            }
            if (sum > C) {
                if (alpha(j) > C) {
                    alpha(j) = C;
                    alpha(i) = sum - C;
                }
            } else if (alpha(i) < 0) {
                alpha(i) = 0;
                alpha(j) = sum;
            }
        }

        const double di = alpha(i) - old_ai;
        const double dj = alpha(j) - old_aj;
        grad.array() += y.array() * (y(i) * di * ki.array() + y(j) * dj * kj.array());
        w += y(i) * di * x.row(i).transpose() + y(j) * dj * x.row(j).transpose();
        ++iter;
    }

    model.w = std::move(w);
    model.iterations = iter;
    return model;
}

double svm_decision(const Eigen::VectorXd& x, const LinearMarginModel& model)
{
    if (x.size() != model.w.size())
        throw Error(ErrorKind::DimensionMismatch, "svm: feature dimension mismatch");
    return model.w.dot(x) + model.b;
}

int svm_predict(const Eigen::VectorXd& x, const LinearMarginModel& model)
{
    return svm_decision(x, model) >= 0.0 ? model.positive_class : model.negative_class;
}

std::vector<int> svm_predict(const Eigen::MatrixXd& x, const LinearMarginModel& model)
{
    if (x.cols() != model.w.size())
        throw Error(ErrorKind::DimensionMismatch, "svm: feature dimension mismatch");
    const Eigen::VectorXd scores = x * model.w;
    std::vector<int> out;
    out.reserve(static_cast<std::size_t>(x.rows()));
    for (Eigen::Index i = 0; i < scores.size(); ++i)
        out.push_back(scores(i) + model.b >= 0.0 ? model.positive_class : model.negative_class);
    return out;
}

std::vector<double> default_c_grid()
{
    std::vector<double> grid;
    for (int e = -3; e <= 5; ++e)
        grid.push_back(std::ldexp(1.0, e));
    return grid;
}

SelectCResult select_C(const Eigen::MatrixXd& x, std::span<const int> labels, std::uint64_t seed,
                       std::span<const double> grid, int folds, SvmOptions options)
{
    if (x.rows() != static_cast<Eigen::Index>(labels.size()))
        throw Error(ErrorKind::DimensionMismatch, "select_C: sample and label counts differ");
    if (folds < 2)
        throw Error(ErrorKind::InvalidArgument, "select_C needs at least 2 folds");

    SelectCResult result;
    result.grid = grid.empty() ? default_c_grid() : std::vector<double>(grid.begin(), grid.end());
    std::sort(result.grid.begin(), result.grid.end());

    const auto classes = classes_of(labels);
    if (classes.size() != 2)
        throw Error(ErrorKind::MissingClass, "select_C needs exactly two classes");

    std::vector<int> fold_of(labels.size(), 0);
    std::mt19937_64 rng(seed);
    for (int c : classes) {
        std::vector<std::size_t> members;
        for (std::size_t i = 0; i < labels.size(); ++i)
            if (labels[i] == c)
                members.push_back(i);
        if (static_cast<int>(members.size()) < folds)
            throw Error(ErrorKind::InvalidArgument, "select_C: class " + std::to_string(c) + " has "
                                                        + std::to_string(members.size()) + " samples, needs "
                                                        + std::to_string(folds) + " for stratification");
        std::shuffle(members.begin(), members.end(), rng);
        for (std::size_t k = 0; k < members.size(); ++k)
            fold_of[members[k]] = static_cast<int>(k % static_cast<std::size_t>(folds));
    }

    // Split once; the same folds serve every C.
    struct Split {
        Eigen::MatrixXd train_x, test_x;
        std::vector<int> train_y, test_y;
    };
    std::vector<Split> splits(static_cast<std::size_t>(folds));
    for (int f = 0; f < folds; ++f) {
        auto& s = splits[static_cast<std::size_t>(f)];
        std::vector<Eigen::Index> train_idx;
        std::vector<Eigen::Index> test_idx;
        for (std::size_t i = 0; i < labels.size(); ++i) {
            (fold_of[i] == f ? test_idx : train_idx).push_back(static_cast<Eigen::Index>(i));
            (fold_of[i] == f ? s.test_y : s.train_y).push_back(labels[i]);
        }
        s.train_x = x(train_idx, Eigen::all);
        s.test_x = x(test_idx, Eigen::all);
    }

    double best = -1.0;
    for (double C : result.grid) {
        double total = 0.0;
        for (const auto& s : splits) {
            const auto model = svm_fit(s.train_x, s.train_y, C, options);
            ++result.n_fits;
            total += harness::balanced_accuracy(svm_predict(s.test_x, model), s.test_y);
        }
        const double mean = total / folds;
        result.mean_bca.push_back(mean);
        if (mean > best) {
            best = mean;
            result.C = C;
        }
    }
    return result;
}

}  // namespace eegalign::models
