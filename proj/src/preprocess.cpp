#include "eegalign/preprocess.hpp"

#include <cmath>
#include <numbers>

#include "eegalign/error.hpp"

namespace eegalign::preprocess {
namespace {

double sinc(double x)
{
    if (x == 0.0)
        return 1.0;
    const double px = std::numbers::pi * x;
    return std::sin(px) / px;
}

void check_same_shape(const Trial& a, const Trial& b, const char* op)
{
    if (a.n_channels() != b.n_channels() || a.n_samples() != b.n_samples())
        throw Error(ErrorKind::DimensionMismatch, std::string(op) + ": trial shapes differ");
}

}  // namespace

FIRFilter design_fir_bandpass(int order, Band band, double fs)
{
    if (order < 2 || order % 2 != 0)
        throw Error(ErrorKind::InvalidArgument, "FIR order must be even and >= 2");
    if (!(fs > 0.0) || !(band.low_hz > 0.0) || !(band.low_hz < band.high_hz) || !(band.high_hz < fs / 2))
        throw Error(ErrorKind::InvalidArgument, "band must satisfy 0 < low < high < fs/2");

    // Cutoffs as fractions of the sampling rate.
    const double f1 = band.low_hz / fs;
    const double f2 = band.high_hz / fs;
    const int n_taps = order + 1;
    const double mid = order / 2.0;

    FIRFilter filter;
    filter.fs = fs;
    filter.band = band;
    filter.coefficients.resize(n_taps);
    for (int k = 0; k < n_taps; ++k) {
        const double m = k - mid;
        const double ideal = 2 * f2 * sinc(2 * f2 * m) - 2 * f1 * sinc(2 * f1 * m);
        const double window = 0.54 - 0.46 * std::cos(2 * std::numbers::pi * k / order);
        filter.coefficients(k) = ideal * window;
    }
    // Mirror so that c[k] == c[order - k] holds bit-exactly.
    for (int k = 0; k < n_taps / 2; ++k)
        filter.coefficients(order - k) = filter.coefficients(k);

    const double centre = 0.5 * (band.low_hz + band.high_hz);
    filter.coefficients /= amplitude_response(filter, centre);
    return filter;
}

double amplitude_response(const FIRFilter& filter, double frequency_hz)
{
    const double w = 2 * std::numbers::pi * frequency_hz / filter.fs;
    double re = 0.0;
    double im = 0.0;
    for (Eigen::Index k = 0; k < filter.coefficients.size(); ++k) {
        re += filter.coefficients(k) * std::cos(w * static_cast<double>(k));
        im -= filter.coefficients(k) * std::sin(w * static_cast<double>(k));
    }
    return std::hypot(re, im);
}

Eigen::MatrixXd filter_causal(const Eigen::MatrixXd& signal, double fs, const FIRFilter& filter)
{
    if (fs != filter.fs)
        throw Error(ErrorKind::InvalidArgument, "filter designed for " + std::to_string(filter.fs)
                                                    + " Hz applied to a " + std::to_string(fs) + " Hz signal");
    const auto& c = filter.coefficients;
    const Eigen::Index taps = c.size();
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(signal.rows(), signal.cols());
    for (Eigen::Index t = 0; t < signal.cols(); ++t) {
        const Eigen::Index kmax = std::min<Eigen::Index>(taps - 1, t);
        for (Eigen::Index k = 0; k <= kmax; ++k)
            out.col(t) += c(k) * signal.col(t - k);
    }
    return out;
}

Trial filter_causal(const Trial& trial, const FIRFilter& filter)
{
    Trial out = trial;
    out.data = filter_causal(trial.data, trial.fs, filter);
    return out;
}

std::pair<Eigen::Index, Eigen::Index> epoch_bounds(double fs, double event_time_s, const EpochSpec& spec)
{
    if (!(spec.end_s > spec.start_s))
        throw Error(ErrorKind::InvalidArgument, "epoch window end must exceed start");
    // The tiny offset keeps products such as 250 * 3.5 from flooring one sample low.
    constexpr double kSlack = 1e-9;
    const auto first = static_cast<Eigen::Index>(std::floor(fs * (event_time_s + spec.start_s) + kSlack));
    const auto last = static_cast<Eigen::Index>(std::floor(fs * (event_time_s + spec.end_s) + kSlack));
    return {first, last};
}

EpochResult epoch(const Recording& recording, const std::vector<Event>& events, const EpochSpec& spec)
{
    if (!(recording.fs > 0.0))
        throw Error(ErrorKind::InvalidArgument, "recording sampling rate must be positive");
    EpochResult result;
    for (std::size_t i = 0; i < events.size(); ++i) {
        const auto [first, last] = epoch_bounds(recording.fs, events[i].time_s, spec);
        if (first < 0 || last > recording.data.cols() || last <= first) {
            result.failures.push_back({i, "window [" + std::to_string(first) + ", " + std::to_string(last)
                                              + ") outside recording of " + std::to_string(recording.data.cols())
                                              + " samples"});
            continue;
        }
        Trial t;
        t.data = recording.data.middleCols(first, last - first);
        t.fs = recording.fs;
        t.label = events[i].label;
        t.subject = recording.subject;
        t.kind = spec.kind;
        result.trials.push_back(std::move(t));
    }
    return result;
}

Trial downsample(const Trial& trial, int factor)
{
    if (factor < 1)
        throw Error(ErrorKind::InvalidArgument, "downsample factor must be >= 1");
    const Eigen::Index n_out = (trial.n_samples() + factor - 1) / factor;
    if (n_out < 1)
        throw Error(ErrorKind::InvalidArgument, "downsampling leaves no samples");
    Trial out = trial;
    out.data.resize(trial.n_channels(), n_out);
    for (Eigen::Index j = 0; j < n_out; ++j)
        out.data.col(j) = trial.data.col(j * factor);
    out.fs = trial.fs / factor;
    return out;
}

Trial erp_template(std::span<const Trial> trials)
{
    if (trials.empty())
        throw Error(ErrorKind::InvalidArgument, "ERP template of an empty trial set");
    Trial out = trials.front();
    for (std::size_t i = 1; i < trials.size(); ++i) {
        check_same_shape(trials.front(), trials[i], "erp_template");
        out.data += trials[i].data;
    }
    out.data /= static_cast<double>(trials.size());
    out.label.reset();
    return out;
}

Trial augment_erp(const Trial& trial, const Trial& tpl)
{
    check_same_shape(trial, tpl, "augment_erp");
    Trial out = trial;
    out.data.resize(2 * trial.n_channels(), trial.n_samples());
    out.data.topRows(trial.n_channels()) = tpl.data;
    out.data.bottomRows(trial.n_channels()) = trial.data;
    return out;
}

}  // namespace eegalign::preprocess
