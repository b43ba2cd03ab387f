#include "eegalign/models/pca.hpp"

#include <cmath>

#include "eegalign/error.hpp"

namespace eegalign::models {

Eigen::VectorXd vectorize(const Trial& trial)
{
    Eigen::VectorXd out(trial.data.size());
    Eigen::Index k = 0;
    for (Eigen::Index c = 0; c < trial.data.rows(); ++c)
        for (Eigen::Index s = 0; s < trial.data.cols(); ++s)
            out(k++) = trial.data(c, s);
    return out;
}

Eigen::MatrixXd vectorize(std::span<const Trial> trials)
{
    if (trials.empty())
        return {};
    Eigen::MatrixXd out(static_cast<Eigen::Index>(trials.size()), trials.front().data.size());
    for (std::size_t i = 0; i < trials.size(); ++i) {
        if (trials[i].data.size() != out.cols())
            throw Error(ErrorKind::DimensionMismatch, "vectorize: trial shapes differ");
        out.row(static_cast<Eigen::Index>(i)) = vectorize(trials[i]).transpose();
    }
    return out;
}

PCAModel pca_fit(const Eigen::MatrixXd& x, int k)
{
    if (k < 1)
        throw Error(ErrorKind::InvalidArgument, "PCA needs k >= 1");
    const Eigen::Index n = x.rows();
    if (n < k || n < 2)
        throw Error(ErrorKind::InvalidArgument, "PCA with k = " + std::to_string(k) + " needs at least "
                                                    + std::to_string(std::max(k, 2)) + " training samples, got "
                                                    + std::to_string(n));

    PCAModel model;
    const Eigen::VectorXd mean_all = x.colwise().mean().transpose();
    const Eigen::VectorXd sd_all =
        ((x.rowwise() - mean_all.transpose()).colwise().squaredNorm().transpose() / static_cast<double>(n - 1))
            .cwiseSqrt();
    const double sd_scale = sd_all.size() > 0 ? sd_all.maxCoeff() : 0.0;
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
        if (sd_all(j) > 1e-12 * sd_scale && sd_all(j) > 0.0)
            model.kept_dims.push_back(j);
        else
            model.dropped_dims.push_back(j);
    }
    if (!model.dropped_dims.empty())
        model.warnings.push_back("dropped " + std::to_string(model.dropped_dims.size())
                                 + " zero-variance dimension(s)");
    if (model.kept_dims.empty())
        throw Error(ErrorKind::InvalidArgument, "PCA: every input dimension has zero variance");

    const auto d = static_cast<Eigen::Index>(model.kept_dims.size());
    model.mean.resize(d);
    model.stddev.resize(d);
    Eigen::MatrixXd z(n, d);
    for (Eigen::Index j = 0; j < d; ++j) {
        const Eigen::Index src = model.kept_dims[static_cast<std::size_t>(j)];
        model.mean(j) = mean_all(src);
        model.stddev(j) = sd_all(src);
        z.col(j) = (x.col(src).array() - model.mean(j)) / model.stddev(j);
    }

    Eigen::Index k_eff = std::min<Eigen::Index>({k, d, n});
    if (k_eff < k)
        model.warnings.push_back("reduced PCA dimension from " + std::to_string(k) + " to "
                                 + std::to_string(k_eff));

    Eigen::BDCSVD<Eigen::MatrixXd> svd(z, Eigen::ComputeThinV);
    model.projection = svd.matrixV().leftCols(k_eff).transpose();
    for (Eigen::Index r = 0; r < model.projection.rows(); ++r) {
        Eigen::Index arg = 0;
        model.projection.row(r).cwiseAbs().maxCoeff(&arg);
        if (model.projection(r, arg) < 0)
            model.projection.row(r) *= -1.0;
    }

    const Eigen::MatrixXd scores = z * model.projection.transpose();
    model.feature_min = scores.colwise().minCoeff().transpose();
    model.feature_max = scores.colwise().maxCoeff().transpose();
    return model;
}

Eigen::MatrixXd pca_apply(const Eigen::MatrixXd& x, const PCAModel& model)
{
    const Eigen::Index expected = static_cast<Eigen::Index>(model.kept_dims.size() + model.dropped_dims.size());
    if (x.cols() != expected)
        throw Error(ErrorKind::DimensionMismatch, "pca_apply: expected " + std::to_string(expected)
                                                      + " input dimensions, got " + std::to_string(x.cols()));
    const auto d = static_cast<Eigen::Index>(model.kept_dims.size());
    Eigen::MatrixXd z(x.rows(), d);
    for (Eigen::Index j = 0; j < d; ++j)
        z.col(j) = (x.col(model.kept_dims[static_cast<std::size_t>(j)]).array() - model.mean(j)) / model.stddev(j);

    Eigen::MatrixXd scores = z * model.projection.transpose();
    for (Eigen::Index j = 0; j < scores.cols(); ++j) {
        const double range = model.feature_max(j) - model.feature_min(j);
        scores.col(j) = (scores.col(j).array() - model.feature_min(j)) / (range > 0 ? range : 1.0);
    }
    return scores;
}

Eigen::VectorXd pca_apply(const Eigen::VectorXd& v, const PCAModel& model)
{
    return pca_apply(Eigen::MatrixXd(v.transpose()), model).row(0).transpose();
}

}  // namespace eegalign::models
