#include "eegalign/models/lda.hpp"

#include <array>
#include <cmath>

#include "eegalign/error.hpp"
#include "eegalign/trial.hpp"

namespace eegalign::models {

LDAModel lda_fit(const Eigen::MatrixXd& features, std::span<const int> labels)
{
    if (features.rows() != static_cast<Eigen::Index>(labels.size()))
        throw Error(ErrorKind::DimensionMismatch, "lda_fit: feature rows and label count differ");
    const auto classes = classes_of(labels);
    if (classes.size() != 2)
        throw Error(ErrorKind::MissingClass, "LDA needs exactly two classes");

    const Eigen::Index d = features.cols();
    LDAModel model;
    model.negative_class = classes[0];
    model.positive_class = classes[1];

    std::array<Eigen::VectorXd, 2> mean{Eigen::VectorXd::Zero(d), Eigen::VectorXd::Zero(d)};
    std::array<int, 2> count{0, 0};
    for (Eigen::Index i = 0; i < features.rows(); ++i) {
        const int c = labels[static_cast<std::size_t>(i)] == model.positive_class ? 1 : 0;
        mean[c] += features.row(i).transpose();
        ++count[c];
    }
    if (count[0] < 2 || count[1] < 2)
        throw Error(ErrorKind::MissingClass, "LDA needs at least two samples per class");
    mean[0] /= count[0];
    mean[1] /= count[1];

    Eigen::MatrixXd scatter = Eigen::MatrixXd::Zero(d, d);
    for (Eigen::Index i = 0; i < features.rows(); ++i) {
        const int c = labels[static_cast<std::size_t>(i)] == model.positive_class ? 1 : 0;
        const Eigen::VectorXd centered = features.row(i).transpose() - mean[c];
        scatter.noalias() += centered * centered.transpose();
    }
    scatter /= static_cast<double>(features.rows() - 2);
    const double ridge = 1e-6 * scatter.trace() / static_cast<double>(d);
    scatter.diagonal().array() += ridge > 0 ? ridge : 1e-12;

    model.w = scatter.ldlt().solve(mean[1] - mean[0]);
    model.b = -0.5 * model.w.dot(mean[0] + mean[1]);
    if (!model.w.allFinite() || !std::isfinite(model.b))
        throw Error(ErrorKind::NonFinite, "lda_fit produced non-finite weights");
    return model;
}

double lda_decision(const Eigen::VectorXd& x, const LDAModel& model)
{
    if (x.size() != model.w.size())
        throw Error(ErrorKind::DimensionMismatch, "lda: feature dimension mismatch");
    return model.w.dot(x) + model.b;
}

int lda_predict(const Eigen::VectorXd& x, const LDAModel& model)
{
    return lda_decision(x, model) >= 0.0 ? model.positive_class : model.negative_class;
}

std::vector<int> lda_predict(const Eigen::MatrixXd& features, const LDAModel& model)
{
    std::vector<int> out;
    out.reserve(static_cast<std::size_t>(features.rows()));
    for (Eigen::Index i = 0; i < features.rows(); ++i)
        out.push_back(lda_predict(Eigen::VectorXd(features.row(i).transpose()), model));
    return out;
}

}  // namespace eegalign::models
