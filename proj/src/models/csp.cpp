#include "eegalign/models/csp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "eegalign/error.hpp"
#include "gevd.hpp"

namespace eegalign::models {

CSPFilters csp_from_class_covariances(const Eigen::MatrixXd& class1, const Eigen::MatrixXd& class2, int n_filters)
{
    const Eigen::Index r = class1.rows();
    if (class1.cols() != r || class2.rows() != r || class2.cols() != r)
        throw Error(ErrorKind::DimensionMismatch, "CSP class covariances must be square and of equal size");
    if (n_filters < 2 || n_filters % 2 != 0)
        throw Error(ErrorKind::InvalidArgument, "CSP filter count must be even and >= 2");
    if (n_filters > r)
        throw Error(ErrorKind::InvalidArgument, "CSP filter count " + std::to_string(n_filters)
                                                    + " exceeds channel count " + std::to_string(r));

    const auto gevd = detail::generalized_eig(class1, class1 + class2, "CSP composite covariance");

    std::vector<int> picked;
    const int half = n_filters / 2;
    for (int k = 0; k < half; ++k) {
        picked.push_back(k);
        picked.push_back(static_cast<int>(r) - 1 - k);
    }
    std::stable_sort(picked.begin(), picked.end(), [&](int a, int b) {
        return std::abs(gevd.eigenvalues(a) - 0.5) > std::abs(gevd.eigenvalues(b) - 0.5);
    });

    CSPFilters out;
    out.filters.resize(n_filters, r);
    out.eigenvalues.resize(n_filters);
    for (int k = 0; k < n_filters; ++k) {
        out.filters.row(k) = gevd.eigenvectors.col(picked[k]).transpose();
        out.eigenvalues(k) = gevd.eigenvalues(picked[k]);
    }
    out.selected = std::move(picked);
    return out;
}

CSPFilters csp_fit(std::span<const Trial> trials, std::span<const int> labels, int n_filters,
                   std::optional<align::ShrinkageParam> shrink)
{
    if (trials.size() != labels.size())
        throw Error(ErrorKind::DimensionMismatch, "csp_fit: trial and label counts differ");
    const auto classes = classes_of(labels);
    if (classes.size() != 2)
        throw Error(ErrorKind::MissingClass, "CSP needs exactly two classes, found " + std::to_string(classes.size()));

    const Eigen::Index r = trials.front().n_channels();
    std::array<Eigen::MatrixXd, 2> sums{Eigen::MatrixXd::Zero(r, r), Eigen::MatrixXd::Zero(r, r)};
    std::array<int, 2> counts{0, 0};
    for (std::size_t i = 0; i < trials.size(); ++i) {
        if (trials[i].n_channels() != r)
            throw Error(ErrorKind::DimensionMismatch, "csp_fit: inconsistent channel count");
        const int c = labels[i] == classes[0] ? 0 : 1;
        sums[c] += align::covariance(trials[i], shrink).values();
        ++counts[c];
    }
    CSPFilters out = csp_from_class_covariances(sums[0] / counts[0], sums[1] / counts[1], n_filters);
    out.classes = {classes[0], classes[1]};
    return out;
}

Eigen::VectorXd csp_features(const Trial& trial, const CSPFilters& filters)
{
    if (trial.n_channels() != filters.filters.cols())
        throw Error(ErrorKind::DimensionMismatch, "csp_features: trial channel count does not match filters");
    const Eigen::MatrixXd projected = filters.filters * trial.data;
    Eigen::VectorXd out(projected.rows());
    for (Eigen::Index k = 0; k < projected.rows(); ++k) {
        const double power = projected.row(k).squaredNorm() / static_cast<double>(projected.cols());
        if (!(power > 0.0))
            throw Error(ErrorKind::InvalidArgument, "csp_features: zero-variance projected signal");
        out(k) = std::log(power);
    }
    return out;
}

Eigen::MatrixXd csp_features(std::span<const Trial> trials, const CSPFilters& filters)
{
    Eigen::MatrixXd out(static_cast<Eigen::Index>(trials.size()), filters.filters.rows());
    for (std::size_t i = 0; i < trials.size(); ++i)
        out.row(static_cast<Eigen::Index>(i)) = csp_features(trials[i], filters).transpose();
    return out;
}

}  // namespace eegalign::models
