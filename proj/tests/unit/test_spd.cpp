#include "doctest.h"

#include <cmath>

#include "eegalign/spd.hpp"
#include "oracles.hpp"

using namespace eegalign;
using namespace eegalign::spd;
using testing::Rng;

namespace {

SPDMatrix diag(std::initializer_list<double> v)
{
    Eigen::VectorXd d(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double x : v)
        d(i++) = x;
    return SPDMatrix(Eigen::MatrixXd(d.asDiagonal()));
}

SPDMatrix random_spd(Rng& rng, Eigen::Index n, double cond = 100.0)
{
    return SPDMatrix(testing::random_spd(rng, n, cond));
}

}  // namespace

TEST_CASE("SPDMatrix construction")
{
    Eigen::MatrixXd m(2, 2);
    m << 2, 1e-12, 0, 2;
    CHECK(SPDMatrix(m).values()(0, 1) == doctest::Approx(5e-13));
    m << 2, 1, 0, 2;
    CHECK_ERROR_KIND(SPDMatrix(m), ErrorKind::InvalidArgument);
    m << 1, 2, 2, 1;
    CHECK_ERROR_KIND(SPDMatrix(m), ErrorKind::NotPositiveDefinite);
    m << 1, NAN, NAN, 1;
    CHECK_ERROR_KIND(SPDMatrix(m), ErrorKind::NonFinite);
    CHECK_ERROR_KIND(SPDMatrix(Eigen::MatrixXd::Identity(2, 3)), ErrorKind::DimensionMismatch);
}

TEST_CASE("sym_eig")
{
    const auto id = sym_eig(SPDMatrix::identity(3));
    CHECK(id.eigenvalues == Eigen::VectorXd::Ones(3));

    const auto d = sym_eig(diag({1.0, 4.0}));
    CHECK(d.eigenvalues(0) == doctest::Approx(4.0));
    CHECK(d.eigenvalues(1) == doctest::Approx(1.0));
    CHECK(std::abs(d.eigenvectors(1, 0)) == doctest::Approx(1.0));
    CHECK(std::abs(d.eigenvectors(0, 1)) == doctest::Approx(1.0));

    Rng rng(1);
    for (int iter = 0; iter < 50; ++iter) {
        const auto n = testing::uniform_int(rng, 1, 12);
        const SPDMatrix m = random_spd(rng, n, 1e4);
        const auto e = sym_eig(m);
        const Eigen::MatrixXd rec = e.eigenvectors * e.eigenvalues.asDiagonal() * e.eigenvectors.transpose();
        CHECK(testing::rel_fro(rec, m.values()) < 1e-9);
        CHECK((e.eigenvectors.transpose() * e.eigenvectors - Eigen::MatrixXd::Identity(n, n)).norm() < 1e-10);
        for (Eigen::Index i = 1; i < n; ++i)
            CHECK(e.eigenvalues(i - 1) >= e.eigenvalues(i));
        for (Eigen::Index j = 0; j < n; ++j) {
            Eigen::Index k = 0;
            while (std::abs(e.eigenvectors(k, j)) <= 1e-12)
                ++k;
            CHECK(e.eigenvectors(k, j) > 0);
        }
    }
}

TEST_CASE("spd_power")
{
    CHECK(spd_power(SPDMatrix::identity(4), -0.5).values().isApprox(Eigen::MatrixXd::Identity(4, 4)));
    CHECK(spd_power(diag({4, 9}), 0.5).values().isApprox(diag({2, 3}).values(), 1e-14));

    Rng rng(2);
    for (int iter = 0; iter < 50; ++iter) {
        const auto n = testing::uniform_int(rng, 1, 10);
        const SPDMatrix m = random_spd(rng, n, 1e3);
        const Eigen::MatrixXd s = spd_power(m, 0.5).values();
        CHECK(testing::rel_fro(s * s, m.values()) < 1e-9);
        const Eigen::MatrixXd w = spd_inv_sqrt(m).values();
        CHECK((w * m.values() * w - Eigen::MatrixXd::Identity(n, n)).norm() < 1e-9);
        const double a = testing::uniform(rng, -2, 2), b = testing::uniform(rng, -2, 2);
        CHECK(testing::rel_fro(spd_power(m, a).values() * spd_power(m, b).values(), spd_power(m, a + b).values()) <
              1e-9);
        // oracle: plain eigendecomposition
        CHECK(testing::rel_fro(spd_power(m, a).values(), testing::sym_fn(m.values(), [a](double x) {
                                   return std::pow(x, a);
                               })) < 1e-9);
    }
}

TEST_CASE("conditioning floor")
{
    const SPDMatrix bad = diag({1.0, 1e-14});
    CHECK_ERROR_KIND(spd_power(bad, -0.5), ErrorKind::IllConditioned);
    CHECK_ERROR_KIND(spd_log(bad), ErrorKind::IllConditioned);
    CHECK_NOTHROW(spd_power(bad, 0.5));
    CHECK_NOTHROW(spd_power(diag({1.0, 1e-11}), -0.5));
}

TEST_CASE("spd_log and sym_exp")
{
    CHECK(spd_log(SPDMatrix::identity(3)).norm() == 0.0);
    CHECK(spd_log(diag({M_E, M_E * M_E})).isApprox(diag({1, 2}).values(), 1e-14));

    Rng rng(3);
    for (int iter = 0; iter < 50; ++iter) {
        const SPDMatrix m = random_spd(rng, testing::uniform_int(rng, 1, 10), 1e4);
        CHECK(testing::rel_fro(sym_exp(spd_log(m)).values(), m.values()) < 1e-9);
    }
}

TEST_CASE("riemannian_distance")
{
    CHECK(riemannian_distance(SPDMatrix::identity(3), SPDMatrix::identity(3)) == 0.0);
    CHECK(riemannian_distance(SPDMatrix::identity(2), diag({std::exp(2.0), std::exp(-2.0)})) ==
          doctest::Approx(2.0 * std::sqrt(2.0)).epsilon(1e-14));
    CHECK_ERROR_KIND(riemannian_distance(SPDMatrix::identity(2), SPDMatrix::identity(3)),
                     ErrorKind::DimensionMismatch);

    Rng rng(4);
    for (int iter = 0; iter < 200; ++iter) {
        const auto n = testing::uniform_int(rng, 2, 16);
        const SPDMatrix p1 = random_spd(rng, n), p2 = random_spd(rng, n);
        const Eigen::MatrixXd c = testing::random_invertible(rng, n);
        const double d = riemannian_distance(p1, p2);
        // metric axioms
        CHECK(d >= 0.0);
        CHECK(riemannian_distance(p1, p1) < 1e-10);
        CHECK(std::abs(d - riemannian_distance(p2, p1)) < 1e-10);
        // independent generalized-eigenvalue oracle
        CHECK(std::abs(d - testing::distance_oracle(p1.values(), p2.values())) < 1e-9 * std::max(1.0, d));
        // congruence invariance
        const double dc = riemannian_distance(congruence(p1, c), congruence(p2, c));
        CHECK(std::abs(dc - d) / d < 1e-8);
    }
}

TEST_CASE("riemannian_mean examples")
{
    const std::vector<SPDMatrix> one{diag({3, 5})};
    CHECK(riemannian_mean(one).mean.values().isApprox(one[0].values(), 1e-14));

    const std::vector<SPDMatrix> pair{diag({1, 4}), diag({4, 1})};
    const auto r = riemannian_mean(pair);
    CHECK(r.converged);
    CHECK((r.mean.values() - diag({2, 2}).values()).norm() < 1e-9);
    CHECK(r.options.tol == 1e-9);
    CHECK(r.options.max_iter == 50);

    CHECK_ERROR_KIND(riemannian_mean({}), ErrorKind::InvalidArgument);
    CHECK_ERROR_KIND(riemannian_mean(pair, {0.0, 50}), ErrorKind::InvalidArgument);
    const std::vector<SPDMatrix> mixed{SPDMatrix::identity(2), SPDMatrix::identity(3)};
    CHECK_ERROR_KIND(riemannian_mean(mixed), ErrorKind::DimensionMismatch);
}

TEST_CASE("riemannian_mean: two-matrix closed form")
{
    Rng rng(5);
    for (int iter = 0; iter < 100; ++iter) {
        const auto n = testing::uniform_int(rng, 2, 10);
        const std::vector<SPDMatrix> ps{random_spd(rng, n), random_spd(rng, n)};
        const auto r = riemannian_mean(ps);
        CHECK(r.converged);
        CHECK(testing::rel_fro(r.mean.values(), testing::geodesic_midpoint(ps[0].values(), ps[1].values())) < 1e-7);
    }
}

TEST_CASE("riemannian_mean: commuting diagonal sets give the geometric mean")
{
    Rng rng(6);
    for (int iter = 0; iter < 50; ++iter) {
        const auto n = testing::uniform_int(rng, 1, 6);
        const int count = testing::uniform_int(rng, 1, 8);
        std::vector<SPDMatrix> ps;
        Eigen::VectorXd log_sum = Eigen::VectorXd::Zero(n);
        for (int k = 0; k < count; ++k) {
            Eigen::VectorXd d(n);
            for (Eigen::Index i = 0; i < n; ++i)
                d(i) = std::exp(testing::uniform(rng, -2, 2));
            log_sum += d.array().log().matrix();
            ps.emplace_back(Eigen::MatrixXd(d.asDiagonal()));
        }
        const Eigen::VectorXd geo = (log_sum / count).array().exp();
        CHECK((riemannian_mean(ps).mean.values() - Eigen::MatrixXd(geo.asDiagonal())).cwiseAbs().maxCoeff() < 1e-9);
    }
}

TEST_CASE("riemannian_mean: congruence equivariance")
{
    Rng rng(7);
    for (int iter = 0; iter < 30; ++iter) {
        const auto n = testing::uniform_int(rng, 2, 8);
        std::vector<SPDMatrix> ps, qs;
        const Eigen::MatrixXd c = testing::random_invertible(rng, n, 5.0);
        for (int k = 0; k < testing::uniform_int(rng, 2, 6); ++k) {
            ps.push_back(random_spd(rng, n, 20.0));
            qs.push_back(congruence(ps.back(), c));
        }
        const Eigen::MatrixXd lhs = riemannian_mean(qs).mean.values();
        const Eigen::MatrixXd rhs = c.transpose() * riemannian_mean(ps).mean.values() * c;
        CHECK(testing::rel_fro(lhs, rhs) < 1e-6);
    }
}

TEST_CASE("riemannian_mean: non-convergence is flagged")
{
    Rng rng(8);
    std::vector<SPDMatrix> ps;
    for (int k = 0; k < 5; ++k)
        ps.push_back(random_spd(rng, 6, 1e4));
    const auto r = riemannian_mean(ps, {1e-300, 1});
    CHECK_FALSE(r.converged);
    CHECK(r.iterations == 1);
    CHECK(r.final_step_norm > 0.0);
    CHECK_ERROR_KIND(riemannian_mean_or_throw(ps, {1e-300, 1}), ErrorKind::NoConvergence);
}

TEST_CASE("arithmetic_mean")
{
    const std::vector<SPDMatrix> one{diag({3, 5})};
    CHECK(arithmetic_mean(one) == one[0]);
    const std::vector<SPDMatrix> two{SPDMatrix::identity(2), diag({3, 1})};
    CHECK(arithmetic_mean(two).values() == diag({2, 1}).values());
    CHECK_ERROR_KIND(arithmetic_mean({}), ErrorKind::InvalidArgument);

    Rng rng(9);
    std::vector<SPDMatrix> ps, qs;
    const Eigen::MatrixXd c = testing::random_invertible(rng, 4);
    for (int k = 0; k < 5; ++k) {
        ps.push_back(random_spd(rng, 4));
        qs.push_back(congruence(ps.back(), c));
    }
    CHECK(testing::rel_fro(arithmetic_mean(qs).values(), c.transpose() * arithmetic_mean(ps).values() * c) < 1e-12);
}
