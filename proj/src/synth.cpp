#include "eegalign/synth.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "eegalign/error.hpp"

namespace eegalign {
namespace {

enum class Stream : std::uint32_t { Shared = 1, Mixing = 2, Trials = 3 };

std::mt19937_64 make_rng(std::uint64_t seed, int subject, Stream stream)
{
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(subject), static_cast<std::uint32_t>(stream)};
    return std::mt19937_64(seq);
}

Eigen::MatrixXd gaussian(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols)
{
    std::normal_distribution<double> normal;
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
        for (Eigen::Index i = 0; i < rows; ++i)
            m(i, j) = normal(rng);
    return m;
}

Eigen::MatrixXd random_orthogonal(std::mt19937_64& rng, Eigen::Index n)
{
    const Eigen::HouseholderQR<Eigen::MatrixXd> qr(gaussian(rng, n, n));
    Eigen::MatrixXd q = qr.householderQ();
    const Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (Eigen::Index j = 0; j < n; ++j)
        if (r(j, j) < 0)
            q.col(j) = -q.col(j);
    return q;
}

Eigen::MatrixXd to_float_precision(const Eigen::MatrixXd& m)
{
    return m.cast<float>().cast<double>();
}

std::vector<std::string> channel_names(int n)
{
    std::vector<std::string> names;
    for (int i = 1; i <= n; ++i)
        names.push_back("C" + std::to_string(i));
    return names;
}

std::string subject_id(int index)
{
    std::string id = std::to_string(index + 1);
    return "S" + std::string(id.size() < 2 ? 2 - id.size() : 0, '0') + id;
}

Trial make_trial(Eigen::MatrixXd data, const SynthConfig& config, std::optional<int> label,
                 const std::string& subject, TrialKind kind)
{
    Trial t;
    t.data = to_float_precision(data);
    t.fs = config.fs;
    t.label = label;
    t.subject = subject;
    t.kind = kind;
    return t;
}

std::vector<int> shuffled_labels(std::mt19937_64& rng, int count_a, int label_a, int count_b, int label_b)
{
    std::vector<int> labels(static_cast<std::size_t>(count_a), label_a);
    labels.insert(labels.end(), static_cast<std::size_t>(count_b), label_b);
    std::shuffle(labels.begin(), labels.end(), rng);
    return labels;
}

}  // namespace

void validate(const SynthConfig& c)
{
    if (c.n_subjects < 1 || c.n_trials_per_class < 1 || c.n_channels < 1 || c.n_samples < 1)
        throw Error(ErrorKind::InvalidArgument, "synthetic counts must all be >= 1");
    if (!(c.fs > 0.0))
        throw Error(ErrorKind::InvalidArgument, "fs must be positive");
    if (!(c.noise_scale >= 0.0) || !std::isfinite(c.noise_scale))
        throw Error(ErrorKind::InvalidArgument, "noise_scale must be >= 0");
    if (!(c.mixing_condition >= 1.0) || !std::isfinite(c.mixing_condition))
        throw Error(ErrorKind::InvalidArgument, "mixing_condition must be >= 1");
}

Eigen::MatrixXd synth_mixing(const SynthConfig& config, int subject_index)
{
    validate(config);
    const Eigen::Index n = config.n_channels;
    auto shared_rng = make_rng(config.seed, -1, Stream::Shared);
    const Eigen::MatrixXd shared = random_orthogonal(shared_rng, n);

    auto rng = make_rng(config.seed, subject_index, Stream::Mixing);
    const Eigen::MatrixXd basis = random_orthogonal(rng, n);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    Eigen::VectorXd spectrum(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double u = (i == 0) ? 0.0 : (i == n - 1) ? 1.0 : unit(rng);
        spectrum(i) = std::pow(config.mixing_condition, u);
    }
    return basis * spectrum.asDiagonal() * basis.transpose() * shared;
}

Dataset synth_mi(const SynthConfig& config)
{
    validate(config);
    if (config.n_channels < 2)
        throw Error(ErrorKind::InvalidArgument, "synth_mi needs at least 2 channels");

    Dataset ds;
    ds.task_kind = TaskKind::MI;
    ds.label_map = {{0, "left_hand"}, {1, "right_hand"}};
    const auto names = channel_names(config.n_channels);

    const double high = std::sqrt(1.4);
    const double low = std::sqrt(0.6);
    for (int s = 0; s < config.n_subjects; ++s) {
        const Eigen::MatrixXd mixing = synth_mixing(config, s);
        auto rng = make_rng(config.seed, s, Stream::Trials);
        SubjectRecord rec;
        rec.id = subject_id(s);
        rec.channel_names = names;

        const auto labels = shuffled_labels(rng, config.n_trials_per_class, 0, config.n_trials_per_class, 1);
        for (int label : labels) {
            Eigen::MatrixXd latent = gaussian(rng, config.n_channels, config.n_samples);
            latent.row(0) *= (label == 0) ? high : low;
            latent.row(1) *= (label == 0) ? low : high;
            Eigen::MatrixXd x = mixing * latent
                + config.noise_scale * gaussian(rng, config.n_channels, config.n_samples);
            rec.trials.push_back(make_trial(std::move(x), config, label, rec.id, TrialKind::Task));

            Eigen::MatrixXd rest = mixing * gaussian(rng, config.n_channels, config.n_samples)
                + config.noise_scale * gaussian(rng, config.n_channels, config.n_samples);
            rec.resting.push_back(make_trial(std::move(rest), config, std::nullopt, rec.id, TrialKind::Resting));
        }
        ds.subjects.push_back(std::move(rec));
    }
    return ds;
}

Eigen::MatrixXd synth_erp_template(const SynthConfig& config)
{
    Eigen::MatrixXd tpl = Eigen::MatrixXd::Zero(config.n_channels, config.n_samples);
    auto bump = [&](double centre, double width, double amplitude, Eigen::Index row) {
        for (Eigen::Index k = 0; k < tpl.cols(); ++k) {
            const double t = static_cast<double>(k) / config.fs;
            tpl(row, k) += amplitude * std::exp(-0.5 * std::pow((t - centre) / width, 2));
        }
    };
    // Late positive component on source 0, earlier negative one on source 1.
    bump(0.30, 0.06, 0.8, 0);
    if (config.n_channels > 1)
        bump(0.18, 0.04, -0.6, 1);
    return tpl;
}

Dataset synth_erp(const SynthConfig& config)
{
    validate(config);

    Dataset ds;
    ds.task_kind = TaskKind::ERP;
    ds.label_map = {{0, "non_target"}, {1, "target"}};
    const auto names = channel_names(config.n_channels);
    const Eigen::MatrixXd tpl = synth_erp_template(config);

    for (int s = 0; s < config.n_subjects; ++s) {
        const Eigen::MatrixXd mixing = synth_mixing(config, s);
        auto rng = make_rng(config.seed, s, Stream::Trials);
        SubjectRecord rec;
        rec.id = subject_id(s);
        rec.channel_names = names;

        const auto labels = shuffled_labels(rng, config.n_trials_per_class, 1, 9 * config.n_trials_per_class, 0);
        for (int label : labels) {
            Eigen::MatrixXd latent = config.noise_scale * gaussian(rng, config.n_channels, config.n_samples);
            if (label == 1)
                latent += tpl;
            rec.trials.push_back(make_trial(mixing * latent, config, label, rec.id, TrialKind::Task));
        }
        ds.subjects.push_back(std::move(rec));
    }
    return ds;
}

}  // namespace eegalign
