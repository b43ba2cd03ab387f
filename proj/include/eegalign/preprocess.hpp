#pragma once

#include <optional>
#include <string>
#include <vector>

#include "eegalign/trial.hpp"

namespace eegalign::preprocess {

struct Band {
    double low_hz = 0.0;
    double high_hz = 0.0;
};

struct FIRFilter {
    Eigen::VectorXd coefficients;  // order + 1 taps, symmetric
    double fs = 0.0;
    Band band;

    int order() const noexcept { return static_cast<int>(coefficients.size()) - 1; }
};

/// Hamming-windowed sinc band-pass. Band edges are the half-amplitude (-6 dB)
/// points; taps are scaled for unit gain at the centre of the passband.
FIRFilter design_fir_bandpass(int order, Band band, double fs);

/// |H(f)| of the filter, by direct evaluation of the transfer function.
double amplitude_response(const FIRFilter& filter, double frequency_hz);

/// Direct-form convolution along each row, zero initial state, same length as
/// the input. `fs` is the signal's sampling rate and must equal filter.fs.
Eigen::MatrixXd filter_causal(const Eigen::MatrixXd& signal, double fs, const FIRFilter& filter);

Trial filter_causal(const Trial& trial, const FIRFilter& filter);

/// Continuous multichannel recording.
struct Recording {
    Eigen::MatrixXd data;
    double fs = 0.0;
    std::string subject;
};

struct Event {
    double time_s = 0.0;
    std::optional<int> label;
};

struct EpochSpec {
    double start_s = 0.0;
    double end_s = 0.0;
    TrialKind kind = TrialKind::Task;
};

struct EpochFailure {
    std::size_t event_index = 0;
    std::string message;
};

struct EpochResult {
    std::vector<Trial> trials;  // in event order, skipping failures
    std::vector<EpochFailure> failures;
};

/// Sample range for an event: [floor(fs*(t+start)), floor(fs*(t+end))).
std::pair<Eigen::Index, Eigen::Index> epoch_bounds(double fs, double event_time_s, const EpochSpec& spec);

EpochResult epoch(const Recording& recording, const std::vector<Event>& events, const EpochSpec& spec);

/// Keeps every factor-th sample starting at index 0. No anti-alias filtering.
Trial downsample(const Trial& trial, int factor);

/// Elementwise mean of the trials.
Trial erp_template(std::span<const Trial> trials);

/// Stacks [template; trial] into a trial with twice the channels.
Trial augment_erp(const Trial& trial, const Trial& tpl);

}  // namespace eegalign::preprocess
