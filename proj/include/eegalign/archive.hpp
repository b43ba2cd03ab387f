#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "eegalign/trial.hpp"

namespace eegalign {

/// On-disk layout: a directory holding `manifest.json` and two binary files
/// per subject (task trials and resting epochs).
///
/// Binary file: "EEGA", u32 version, u32 n_trials, u32 n_channels,
/// u32 n_samples, n_trials x i32 labels (-1 = unlabeled), then
/// n_trials x n_channels x n_samples float32, trial-major then channel-major.
/// All integers and floats are little-endian.
inline constexpr std::uint32_t kArchiveVersion = 1;
inline constexpr int kManifestSchemaVersion = 1;

Dataset load_archive(const std::filesystem::path& dir);

/// Samples are narrowed to float32; values that are not float-representable
/// lose precision, everything else round-trips exactly.
void save_archive(const Dataset& dataset, const std::filesystem::path& dir);

// Single-file codec, exposed for tests and tools.
std::vector<std::uint8_t> encode_trial_file(std::span<const Trial> trials, std::uint32_t n_channels);

struct DecodedTrials {
    std::vector<Eigen::MatrixXd> data;
    std::vector<int> labels;  // -1 = unlabeled
    std::uint32_t n_channels = 0;
    std::uint32_t n_samples = 0;
};

DecodedTrials decode_trial_file(std::span<const std::uint8_t> bytes);

}  // namespace eegalign
