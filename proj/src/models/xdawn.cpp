#include "eegalign/models/xdawn.hpp"

#include "eegalign/error.hpp"
#include "gevd.hpp"

namespace eegalign::models {

XDawnFilters xdawn_fit(std::span<const Trial> trials, std::span<const int> labels, int n_components,
                       int target_class)
{
    if (trials.size() != labels.size())
        throw Error(ErrorKind::DimensionMismatch, "xdawn_fit: trial and label counts differ");
    if (trials.empty())
        throw Error(ErrorKind::InvalidArgument, "xdawn_fit on an empty trial set");
    const Eigen::Index r = trials.front().n_channels();
    const Eigen::Index t = trials.front().n_samples();
    if (n_components < 1 || n_components > r)
        throw Error(ErrorKind::InvalidArgument, "xDAWN component count must lie in [1, n_channels]");

    Eigen::MatrixXd evoked = Eigen::MatrixXd::Zero(r, t);
    Eigen::MatrixXd total = Eigen::MatrixXd::Zero(r, r);
    int n_target = 0;
    for (std::size_t i = 0; i < trials.size(); ++i) {
        const auto& x = trials[i].data;
        if (x.rows() != r || x.cols() != t)
            throw Error(ErrorKind::DimensionMismatch, "xdawn_fit: trial shapes differ");
        total.noalias() += x * x.transpose();
        if (labels[i] == target_class) {
            evoked += x;
            ++n_target;
        }
    }
    if (n_target == 0)
        throw Error(ErrorKind::MissingClass, "xdawn_fit: no target trials");
    evoked /= n_target;
    total /= static_cast<double>(trials.size());

    const auto gevd = detail::generalized_eig(evoked * evoked.transpose(), total, "xDAWN signal covariance");

    XDawnFilters out;
    out.filters.resize(n_components, r);
    out.eigenvalues.resize(n_components);
    for (int k = 0; k < n_components; ++k) {
        const Eigen::Index col = r - 1 - k;
        out.filters.row(k) = gevd.eigenvectors.col(col).transpose();
        out.eigenvalues(k) = gevd.eigenvalues(col);
    }
    out.evoked_template = std::move(evoked);
    out.target_class = target_class;
    return out;
}

Trial xdawn_apply(const Trial& trial, const XDawnFilters& filters)
{
    if (trial.n_channels() != filters.filters.cols())
        throw Error(ErrorKind::DimensionMismatch, "xdawn_apply: channel count does not match filters");
    Trial out = trial;
    out.data = filters.filters * trial.data;
    return out;
}

}  // namespace eegalign::models
