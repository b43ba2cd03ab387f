#pragma once

// Random generators and reference implementations for tests. Oracles use
// Eigen's solvers directly and never call into the library under test.

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <atomic>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <unistd.h>
#include <random>
#include <string>
#include <vector>

#include "eegalign/error.hpp"
#include "eegalign/spd.hpp"
#include "eegalign/trial.hpp"

namespace testing {

using Rng = std::mt19937_64;

inline double uniform(Rng& rng, double lo, double hi)
{
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline int uniform_int(Rng& rng, int lo, int hi)
{
    return std::uniform_int_distribution<int>(lo, hi)(rng);
}

inline Eigen::MatrixXd gaussian(Rng& rng, Eigen::Index rows, Eigen::Index cols)
{
    std::normal_distribution<double> n(0.0, 1.0);
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
        for (Eigen::Index i = 0; i < rows; ++i)
            m(i, j) = n(rng);
    return m;
}

inline Eigen::MatrixXd random_orthogonal(Rng& rng, Eigen::Index n)
{
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(gaussian(rng, n, n));
    return qr.householderQ() * Eigen::MatrixXd::Identity(n, n);
}

// Eigenvalues log-uniform in [1/sqrt(cond), sqrt(cond)], random basis.
inline Eigen::MatrixXd random_spd(Rng& rng, Eigen::Index n, double cond = 100.0)
{
    const Eigen::MatrixXd q = random_orthogonal(rng, n);
    Eigen::VectorXd ev(n);
    for (Eigen::Index i = 0; i < n; ++i)
        ev(i) = std::exp(uniform(rng, -0.5, 0.5) * std::log(cond));
    Eigen::MatrixXd m = q * ev.asDiagonal() * q.transpose();
    return 0.5 * (m + m.transpose());
}

// Random matrix with singular values in [1, cond].
inline Eigen::MatrixXd random_invertible(Rng& rng, Eigen::Index n, double cond = 20.0)
{
    Eigen::VectorXd sv(n);
    for (Eigen::Index i = 0; i < n; ++i)
        sv(i) = std::exp(uniform(rng, 0.0, std::log(cond)));
    return random_orthogonal(rng, n) * sv.asDiagonal() * random_orthogonal(rng, n);
}

inline eegalign::Trial random_trial(Rng& rng, Eigen::Index channels, Eigen::Index samples,
                                    std::optional<int> label = std::nullopt)
{
    eegalign::Trial t;
    t.data = gaussian(rng, channels, samples);
    t.fs = 128.0;
    t.label = label;
    return t;
}

inline double rel_fro(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b)
{
    return (a - b).norm() / std::max(1e-300, b.norm());
}

// f(M) for symmetric M through a plain eigendecomposition.
template <class F>
Eigen::MatrixXd sym_fn(const Eigen::MatrixXd& m, F f)
{
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (m + m.transpose()));
    Eigen::VectorXd v = es.eigenvalues();
    for (Eigen::Index i = 0; i < v.size(); ++i)
        v(i) = f(v(i));
    return es.eigenvectors() * v.asDiagonal() * es.eigenvectors().transpose();
}

inline Eigen::MatrixXd sqrtm(const Eigen::MatrixXd& m)
{
    return sym_fn(m, [](double x) { return std::sqrt(x); });
}

inline Eigen::MatrixXd inv_sqrtm(const Eigen::MatrixXd& m)
{
    return sym_fn(m, [](double x) { return 1.0 / std::sqrt(x); });
}

// P1^{1/2} (P1^{-1/2} P2 P1^{-1/2})^{1/2} P1^{1/2}
inline Eigen::MatrixXd geodesic_midpoint(const Eigen::MatrixXd& p1, const Eigen::MatrixXd& p2)
{
    const Eigen::MatrixXd s = sqrtm(p1);
    const Eigen::MatrixXd is = inv_sqrtm(p1);
    return s * sqrtm(is * p2 * is) * s;
}

// Generalized eigenvalues of (P2, P1) are those of P1^{-1} P2.
inline double distance_oracle(const Eigen::MatrixXd& p1, const Eigen::MatrixXd& p2)
{
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ges(p2, p1);
    double s = 0.0;
    for (Eigen::Index i = 0; i < ges.eigenvalues().size(); ++i) {
        const double l = std::log(ges.eigenvalues()(i));
        s += l * l;
    }
    return std::sqrt(s);
}

// Enumerates every class; strict < keeps the smallest id on ties.
inline int argmin_oracle(const Eigen::MatrixXd& cov, const std::map<int, eegalign::spd::SPDMatrix>& means)
{
    int best = 0;
    double best_d = INFINITY;
    for (const auto& [c, m] : means) {
        const double d = distance_oracle(m.values(), cov);
        if (d < best_d) {
            best_d = d;
            best = c;
        }
    }
    return best;
}

// (1/n) sum X X^T with explicit loops.
inline Eigen::MatrixXd batch_ei(const std::vector<eegalign::Trial>& trials)
{
    const auto c = trials.front().n_channels();
    Eigen::MatrixXd r = Eigen::MatrixXd::Zero(c, c);
    for (const auto& t : trials)
        for (Eigen::Index i = 0; i < c; ++i)
            for (Eigen::Index j = 0; j < c; ++j)
                for (Eigen::Index k = 0; k < t.n_samples(); ++k)
                    r(i, j) += t.data(i, k) * t.data(j, k);
    return r / static_cast<double>(trials.size());
}

// Two-sided p of Student's t by composite Simpson integration of the density.
inline double student_t_two_sided_p(double t, double df, int intervals = 20000)
{
    const double c = std::exp(std::lgamma((df + 1) / 2) - std::lgamma(df / 2)) / std::sqrt(df * M_PI);
    auto pdf = [&](double x) { return c * std::pow(1 + x * x / df, -(df + 1) / 2); };
    const double a = std::fabs(t);
    const double h = a / intervals;
    double s = pdf(0) + pdf(a);
    for (int i = 1; i < intervals; ++i)
        s += (i % 2 ? 4.0 : 2.0) * pdf(i * h);
    const double central = s * h / 3.0;  // integral over [0, |t|]
    return 1.0 - 2.0 * central;
}

// |sum_k h[k] e^{-i w k}|
inline double dtft_amplitude(const Eigen::VectorXd& h, double f, double fs)
{
    double re = 0.0, im = 0.0;
    for (Eigen::Index k = 0; k < h.size(); ++k) {
        const double w = 2.0 * M_PI * f / fs * static_cast<double>(k);
        re += h(k) * std::cos(w);
        im -= h(k) * std::sin(w);
    }
    return std::hypot(re, im);
}

// scipy.signal.firwin(51, [8, 30], pass_zero=False, fs=250, window="hamming"),
// first half; the second half mirrors it.
inline const std::vector<double>& scipy_firwin_50_8_30_250()
{
    static const std::vector<double> half{
        0.00096593296087116385, 0.00034180302274877596, -2.4674639464241699e-06, 0.00030460444794150533,
        0.0015661855444581729,  0.0036181194327450945,  0.0055045368094609496,   0.0056739271126173066,
        0.0028585867821157231,  -0.0027745348899794312, -0.0090613044265211752,  -0.012610745417429927,
        -0.010878222815759214,  -0.0044821345470849273, 0.0018656934126545059,   0.0010008938770144915,
        -0.012712485085326712,  -0.038940001206873735,  -0.069173758636644225,   -0.088745062446259307,
        -0.082920753901888286,  -0.044523390091432996,  0.020807852728692466,    0.094880938762324479,
        0.15332338421108352,    0.17549034289306426};
    return half;
}

// Small temp directory removed on scope exit.
struct TempDir {
    std::filesystem::path path;
    explicit TempDir(const std::string& tag)
    {
        static std::atomic<int> counter{0};
        path = std::filesystem::temp_directory_path() /
               ("eegalign_test_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        std::filesystem::remove_all(path);
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
};

}  // namespace testing

#define CHECK_ERROR_KIND(expr, expected_kind)                                   \
    do {                                                                        \
        bool thrown_ = false;                                                   \
        try {                                                                   \
            (void)(expr);                                                       \
        } catch (const eegalign::Error& e_) {                                   \
            thrown_ = true;                                                     \
            CHECK_MESSAGE(e_.kind() == (expected_kind), e_.what());             \
        }                                                                       \
        CHECK_MESSAGE(thrown_, "expected eegalign::Error from " #expr);         \
    } while (0)
