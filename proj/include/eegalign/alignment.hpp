#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "eegalign/spd.hpp"
#include "eegalign/trial.hpp"

namespace eegalign::align {

using spd::SPDMatrix;

/// Which trials a reference is estimated from and with which mean:
/// RR/ER use resting epochs, RI/EI task trials; R* take the Riemannian mean,
/// E* the arithmetic mean.
enum class ReferenceKind { RR, ER, RI, EI };

std::string to_string(ReferenceKind kind);
ReferenceKind reference_kind_from_string(const std::string& s);
bool is_riemannian(ReferenceKind kind) noexcept;
bool uses_resting(ReferenceKind kind) noexcept;

/// Convex blend towards a scaled identity, epsilon in [0, 1).
struct ShrinkageParam {
    double epsilon = 0.0;

    explicit ShrinkageParam(double eps);
};

/// Resolved shrinkage: an explicit value, or 0 when n_samples >= n_channels
/// and 0.01 otherwise.
ShrinkageParam resolve_shrinkage(std::optional<ShrinkageParam> shrink, const Trial& trial);

struct ReferenceMatrix {
    SPDMatrix matrix;
    ReferenceKind kind;
    int n_source_trials = 0;
    std::optional<ShrinkageParam> shrink;  // as requested, before auto-resolution
    bool converged = true;                 // false if a Riemannian mean hit max_iter
};

/// X X^T followed by optional shrinkage. No 1/n_samples factor, no centering.
SPDMatrix covariance(const Trial& trial, std::optional<ShrinkageParam> shrink = std::nullopt);

std::vector<SPDMatrix> covariances(std::span<const Trial> trials,
                                   std::optional<ShrinkageParam> shrink = std::nullopt);

ReferenceMatrix build_reference(std::span<const Trial> trials, ReferenceKind kind,
                                std::optional<ShrinkageParam> shrink = std::nullopt,
                                spd::MeanOptions mean_options = {});

/// Same as build_reference but from precomputed covariances (no trial-kind
/// check). Used for augmented ERP covariances.
ReferenceMatrix reference_from_covariances(std::span<const SPDMatrix> covs, ReferenceKind kind,
                                           spd::MeanOptions mean_options = {});

/// X -> R^{-1/2} X for every trial; everything but the data is kept.
std::vector<Trial> ea_align(std::span<const Trial> trials, const ReferenceMatrix& ref);

/// Sigma -> R^{-1/2} Sigma R^{-1/2}.
std::vector<SPDMatrix> ra_align(std::span<const SPDMatrix> covs, const ReferenceMatrix& ref);

/// Count-weighted running update of an EI reference with additional trials.
ReferenceMatrix incremental_reference(const ReferenceMatrix& prev, std::span<const Trial> new_trials);

}  // namespace eegalign::align
