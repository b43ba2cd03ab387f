#pragma once

#include <cstdint>
#include <vector>

#include "eegalign/trial.hpp"

namespace eegalign {

struct SynthConfig {
    int n_subjects = 8;
    int n_trials_per_class = 60;
    int n_channels = 8;
    int n_samples = 128;
    double fs = 128.0;
    double noise_scale = 0.5;
    double mixing_condition = 5.0;  // exact condition number of each subject's mixing
    std::uint64_t seed = 0;
};

void validate(const SynthConfig& config);

/// Mixing matrix of subject `subject_index`: P_s * O with P_s symmetric
/// positive definite (random eigenbasis, eigenvalues spanning [1, condition])
/// and O an orthogonal matrix shared by all subjects of the dataset.
Eigen::MatrixXd synth_mixing(const SynthConfig& config, int subject_index);

/// Two-class motor-imagery-like data. Latent sources are white with unit
/// variance, except sources 0 and 1 whose variances are (1.4, 0.6) for class 0
/// and (0.6, 1.4) for class 1. Each task trial has one resting epoch (all
/// sources at unit variance) at the same index. Samples are rounded to
/// float32 so that archives round-trip exactly.
Dataset synth_mi(const SynthConfig& config);

/// ERP-like data: `n_trials_per_class` targets and 9x as many non-targets per
/// subject, in shuffled order. Targets carry a fixed evoked waveform on
/// sources 0 and 1; label 1 = target, 0 = non-target.
Dataset synth_erp(const SynthConfig& config);

/// The latent evoked waveform used by synth_erp (n_channels x n_samples).
Eigen::MatrixXd synth_erp_template(const SynthConfig& config);

}  // namespace eegalign
