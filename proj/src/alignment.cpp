#include "eegalign/alignment.hpp"

#include "eegalign/error.hpp"

namespace eegalign::align {
namespace {

Eigen::MatrixXd scatter(const Trial& trial, std::optional<ShrinkageParam> shrink)
{
    Eigen::MatrixXd s = Eigen::MatrixXd::Zero(trial.n_channels(), trial.n_channels());
    s.selfadjointView<Eigen::Lower>().rankUpdate(trial.data);
    s.triangularView<Eigen::StrictlyUpper>() = s.transpose();
    const double eps = resolve_shrinkage(shrink, trial).epsilon;
    if (eps > 0.0) {
        const double scale = s.trace() / static_cast<double>(s.rows());
        s *= (1.0 - eps);
        s.diagonal().array() += eps * scale;
    }
    return s;
}

void check_dim(const ReferenceMatrix& ref, Eigen::Index dim, const char* op)
{
    if (ref.matrix.dim() != dim)
        throw Error(ErrorKind::DimensionMismatch,
                    std::string(op) + ": reference is " + std::to_string(ref.matrix.dim()) + "x"
                        + std::to_string(ref.matrix.dim()) + " but data has dimension " + std::to_string(dim));
}

}  // namespace

std::string to_string(ReferenceKind kind)
{
    switch (kind) {
    case ReferenceKind::RR: return "RR";
    case ReferenceKind::ER: return "ER";
    case ReferenceKind::RI: return "RI";
    case ReferenceKind::EI: return "EI";
    }
    return "?";
}

ReferenceKind reference_kind_from_string(const std::string& s)
{
    if (s == "RR") return ReferenceKind::RR;
    if (s == "ER") return ReferenceKind::ER;
    if (s == "RI") return ReferenceKind::RI;
    if (s == "EI") return ReferenceKind::EI;
    throw Error(ErrorKind::InvalidArgument, "unknown reference kind '" + s + "' (expected RR, ER, RI or EI)");
}

bool is_riemannian(ReferenceKind kind) noexcept
{
    return kind == ReferenceKind::RR || kind == ReferenceKind::RI;
}

bool uses_resting(ReferenceKind kind) noexcept
{
    return kind == ReferenceKind::RR || kind == ReferenceKind::ER;
}

ShrinkageParam::ShrinkageParam(double eps) : epsilon(eps)
{
    if (!(eps >= 0.0 && eps < 1.0))
        throw Error(ErrorKind::InvalidArgument, "shrinkage epsilon must lie in [0, 1)");
}

ShrinkageParam resolve_shrinkage(std::optional<ShrinkageParam> shrink, const Trial& trial)
{
    if (shrink)
        return *shrink;
    return ShrinkageParam(trial.n_samples() >= trial.n_channels() ? 0.0 : 0.01);
}

SPDMatrix covariance(const Trial& trial, std::optional<ShrinkageParam> shrink)
{
    validate(trial);
    try {
        return SPDMatrix(scatter(trial, shrink));
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::NotPositiveDefinite)
            rethrow_with_context(e, "covariance of a rank-deficient trial (consider shrinkage)");
        throw;
    }
}

std::vector<SPDMatrix> covariances(std::span<const Trial> trials, std::optional<ShrinkageParam> shrink)
{
    std::vector<SPDMatrix> out;
    out.reserve(trials.size());
    for (const auto& t : trials)
        out.push_back(covariance(t, shrink));
    return out;
}

ReferenceMatrix reference_from_covariances(std::span<const SPDMatrix> covs, ReferenceKind kind,
                                           spd::MeanOptions mean_options)
{
    if (covs.empty())
        throw Error(ErrorKind::InvalidArgument, "reference from an empty set");
    if (!is_riemannian(kind))
        return {spd::arithmetic_mean(covs), kind, static_cast<int>(covs.size()), std::nullopt};
    auto mean = spd::riemannian_mean(covs, mean_options);
    return {std::move(mean.mean), kind, static_cast<int>(covs.size()), std::nullopt, mean.converged};
}

ReferenceMatrix build_reference(std::span<const Trial> trials, ReferenceKind kind,
                                std::optional<ShrinkageParam> shrink, spd::MeanOptions mean_options)
{
    if (trials.empty())
        throw Error(ErrorKind::InvalidArgument, "reference from an empty trial list");
    const TrialKind expected = uses_resting(kind) ? TrialKind::Resting : TrialKind::Task;
    for (const auto& t : trials)
        if (t.kind != expected)
            throw Error(ErrorKind::InvalidArgument,
                        to_string(kind) + " reference expects "
                            + (expected == TrialKind::Resting ? "resting" : "task") + " trials");

    ReferenceMatrix ref = reference_from_covariances(covariances(trials, shrink), kind, mean_options);
    ref.shrink = shrink;
    return ref;
}

std::vector<Trial> ea_align(std::span<const Trial> trials, const ReferenceMatrix& ref)
{
    std::vector<Trial> out;
    if (trials.empty())
        return out;
    const Eigen::MatrixXd w = spd::spd_inv_sqrt(ref.matrix).values();
    out.reserve(trials.size());
    for (const auto& t : trials) {
        check_dim(ref, t.n_channels(), "ea_align");
        Trial aligned = t;
        aligned.data = w * t.data;
        out.push_back(std::move(aligned));
    }
    return out;
}

std::vector<SPDMatrix> ra_align(std::span<const SPDMatrix> covs, const ReferenceMatrix& ref)
{
    std::vector<SPDMatrix> out;
    if (covs.empty())
        return out;
    const Eigen::MatrixXd w = spd::spd_inv_sqrt(ref.matrix).values();
    out.reserve(covs.size());
    for (const auto& c : covs) {
        check_dim(ref, c.dim(), "ra_align");
        out.emplace_back(w * c.values() * w);
    }
    return out;
}

ReferenceMatrix incremental_reference(const ReferenceMatrix& prev, std::span<const Trial> new_trials)
{
    if (prev.kind != ReferenceKind::EI)
        throw Error(ErrorKind::InvalidArgument, "incremental update is defined for EI references only");
    if (new_trials.empty())
        return prev;

    Eigen::MatrixXd sum = prev.matrix.values() * static_cast<double>(prev.n_source_trials);
    for (const auto& t : new_trials) {
        validate(t);
        if (t.kind != TrialKind::Task)
            throw Error(ErrorKind::InvalidArgument, "EI reference expects task trials");
        check_dim(prev, t.n_channels(), "incremental_reference");
        sum += scatter(t, prev.shrink);
    }
    const int n = prev.n_source_trials + static_cast<int>(new_trials.size());
    return {SPDMatrix(sum / static_cast<double>(n), SPDMatrix::Unchecked{}), ReferenceKind::EI, n, prev.shrink};
}

}  // namespace eegalign::align
