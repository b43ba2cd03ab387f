#include "doctest.h"

#include <cmath>

#include "eegalign/alignment.hpp"
#include "eegalign/models/csp.hpp"
#include "eegalign/models/lda.hpp"
#include "eegalign/models/mdrm.hpp"
#include "eegalign/models/pca.hpp"
#include "eegalign/models/svm.hpp"
#include "eegalign/models/xdawn.hpp"
#include "oracles.hpp"

using namespace eegalign;
using namespace eegalign::models;
using spd::SPDMatrix;
using testing::Rng;

namespace {

Trial trial_of(Eigen::MatrixXd data, std::optional<int> label = std::nullopt)
{
    Trial t;
    t.data = std::move(data);
    t.fs = 100.0;
    t.label = label;
    return t;
}

SPDMatrix diag2(double a, double b)
{
    return SPDMatrix(Eigen::Vector2d(a, b).asDiagonal().toDenseMatrix());
}

// Two Gaussian clouds in d dimensions, means +-mu.
void clouds(Rng& rng, int n_per_class, const Eigen::VectorXd& mu, Eigen::MatrixXd& x, std::vector<int>& y)
{
    const auto d = mu.size();
    x.resize(2 * n_per_class, d);
    y.clear();
    for (int i = 0; i < 2 * n_per_class; ++i) {
        const int c = i % 2;
        x.row(i) = (testing::gaussian(rng, d, 1) + (c ? mu : Eigen::VectorXd(-mu))).transpose();
        y.push_back(c);
    }
}

// Two-class trials whose class covariances differ along a random basis.
std::vector<Trial> csp_trials(Rng& rng, int n, Eigen::Index channels, std::vector<int>& y)
{
    const Eigen::MatrixXd mix = testing::random_invertible(rng, channels, 5.0);
    std::vector<Trial> out;
    y.clear();
    for (int i = 0; i < n; ++i) {
        const int c = i % 2;
        Eigen::MatrixXd s = testing::gaussian(rng, channels, 64);
        s.row(0) *= c ? 2.0 : 0.5;
        s.row(1) *= c ? 0.5 : 2.0;
        out.push_back(trial_of(mix * s, c));
        y.push_back(c);
    }
    return out;
}

}  // namespace

TEST_CASE("mdrm_fit examples")
{
    Rng rng(1);
    const std::vector<SPDMatrix> one{SPDMatrix(testing::random_spd(rng, 3)), SPDMatrix(testing::random_spd(rng, 3))};
    const std::vector<int> y{0, 1};
    const auto m = mdrm_fit(one, y);
    CHECK(testing::rel_fro(m.class_means.at(0).values(), one[0].values()) < 1e-12);
    CHECK(testing::rel_fro(m.class_means.at(1).values(), one[1].values()) < 1e-12);
    CHECK(m.unconverged_classes.empty());

    const std::vector<SPDMatrix> dup{one[0], one[0], one[1], one[1]};
    const auto md = mdrm_fit(dup, std::vector<int>{0, 0, 1, 1});
    CHECK(testing::rel_fro(md.class_means.at(0).values(), one[0].values()) < 1e-12);

    std::vector<SPDMatrix> covs;
    std::vector<int> labels;
    for (int i = 0; i < 12; ++i) {
        covs.emplace_back(testing::random_spd(rng, 4));
        labels.push_back(i % 2);
    }
    const auto mr = mdrm_fit(covs, labels);
    for (int c : {0, 1}) {
        std::vector<SPDMatrix> members;
        for (std::size_t i = 0; i < covs.size(); ++i)
            if (labels[i] == c)
                members.push_back(covs[i]);
        CHECK(mr.class_means.at(c) == spd::riemannian_mean(members).mean);
    }

    CHECK_ERROR_KIND(mdrm_fit(std::span(covs).first(2), std::vector<int>{0, 0}), ErrorKind::MissingClass);
    CHECK_ERROR_KIND(mdrm_fit(covs, std::vector<int>{0, 1}), ErrorKind::DimensionMismatch);
}

TEST_CASE("mdrm_fit flags classes whose mean did not converge")
{
    Rng rng(2);
    std::vector<SPDMatrix> covs;
    std::vector<int> labels;
    for (int i = 0; i < 6; ++i) {
        covs.emplace_back(testing::random_spd(rng, 5, 1e4));
        labels.push_back(i % 2);
    }
    const auto m = mdrm_fit(covs, labels, {1e-300, 2});
    CHECK(m.unconverged_classes == std::vector<int>{0, 1});
    CHECK(m.class_means.size() == 2);
}

TEST_CASE("mdrm_predict examples")
{
    MDRMModel m;
    m.class_means.emplace(3, diag2(0.5, 1.0));
    m.class_means.emplace(5, diag2(2.0, 1.0));
    CHECK(mdrm_predict(diag2(2.0, 1.0), m) == 5);
    CHECK(mdrm_predict(diag2(0.5, 1.0), m) == 3);
    // equidistant: delta(I, diag(2,1)) = delta(I, diag(1/2,1)) = log 2
    CHECK(mdrm_predict(SPDMatrix::identity(2), m) == 3);
    MDRMModel swapped;
    swapped.class_means.emplace(3, diag2(2.0, 1.0));
    swapped.class_means.emplace(5, diag2(0.5, 1.0));
    CHECK(mdrm_predict(SPDMatrix::identity(2), swapped) == 3);
    CHECK_ERROR_KIND(mdrm_predict(SPDMatrix::identity(3), m), ErrorKind::DimensionMismatch);
}

TEST_CASE("mdrm_predict equals the brute-force argmin")
{
    Rng rng(3);
    for (int iter = 0; iter < 300; ++iter) {
        const auto n = testing::uniform_int(rng, 2, 8);
        MDRMModel m;
        for (int c = 0, k = testing::uniform_int(rng, 2, 4); c < k; ++c)
            m.class_means.emplace(c * 2 + 1, SPDMatrix(testing::random_spd(rng, n)));
        const SPDMatrix cov(testing::random_spd(rng, n));
        CHECK(mdrm_predict(cov, m) == testing::argmin_oracle(cov.values(), m.class_means));
    }
}

TEST_CASE("CSP on commuting class covariances")
{
    Eigen::MatrixXd s1 = Eigen::Vector2d(4, 1).asDiagonal();
    Eigen::MatrixXd s2 = Eigen::Vector2d(1, 4).asDiagonal();
    const auto f = csp_from_class_covariances(s1, s2, 2);
    REQUIRE(f.filters.rows() == 2);
    Eigen::VectorXd ev = f.eigenvalues;
    std::sort(ev.data(), ev.data() + ev.size());
    CHECK(ev(0) == doctest::Approx(0.2));
    CHECK(ev(1) == doctest::Approx(0.8));
    for (int r = 0; r < 2; ++r) {
        CHECK(std::min(std::abs(f.filters(r, 0)), std::abs(f.filters(r, 1))) < 1e-12);
        CHECK(f.filters.row(r) * (s1 + s2) * f.filters.row(r).transpose() == doctest::Approx(1.0));
    }

    const auto eq = csp_from_class_covariances(s1, s1, 2);
    CHECK(eq.eigenvalues.isApprox(Eigen::Vector2d(0.5, 0.5)));

    CHECK_ERROR_KIND(csp_from_class_covariances(s1, s2, 3), ErrorKind::InvalidArgument);
    CHECK_ERROR_KIND(csp_from_class_covariances(s1, s2, 4), ErrorKind::InvalidArgument);
}

TEST_CASE("CSP eigenvalue properties")
{
    Rng rng(4);
    for (int iter = 0; iter < 30; ++iter) {
        const auto n = testing::uniform_int(rng, 2, 10);
        const Eigen::MatrixXd a = testing::random_spd(rng, n), b = testing::random_spd(rng, n);
        const int k = 2 * testing::uniform_int(rng, 1, static_cast<int>(n) / 2);
        const auto f = csp_from_class_covariances(a, b, k);
        const auto g = csp_from_class_covariances(b, a, k);
        CHECK(f.filters.rows() == k);
        for (Eigen::Index i = 0; i < k; ++i) {
            CHECK(f.eigenvalues(i) > 0.0);
            CHECK(f.eigenvalues(i) < 1.0);
            const double norm = f.filters.row(i) * (a + b) * f.filters.row(i).transpose();
            CHECK(std::abs(norm - 1.0) < 1e-8);
        }
        // swapping the classes maps lambda to 1 - lambda
        std::vector<double> lf(f.eigenvalues.data(), f.eigenvalues.data() + k);
        std::vector<double> lg;
        for (Eigen::Index i = 0; i < k; ++i)
            lg.push_back(1.0 - g.eigenvalues(i));
        std::sort(lf.begin(), lf.end());
        std::sort(lg.begin(), lg.end());
        for (int i = 0; i < k; ++i)
            CHECK(std::abs(lf[i] - lg[i]) < 1e-8);
    }
}

TEST_CASE("CSP features")
{
    Rng rng(5);
    std::vector<int> y;
    const auto trials = csp_trials(rng, 40, 6, y);
    const auto f = csp_fit(trials, y, 4);
    const Eigen::VectorXd x = csp_features(trials[0], f);
    CHECK(x.size() == 4);
    for (Eigen::Index k = 0; k < 4; ++k) {
        const Eigen::RowVectorXd proj = f.filters.row(k) * trials[0].data;
        CHECK(x(k) == doctest::Approx(std::log(proj.squaredNorm() / proj.size())).epsilon(1e-12));
    }
    Trial scaled = trials[0];
    scaled.data *= 3.0;
    CHECK((csp_features(scaled, f) - x - Eigen::VectorXd::Constant(4, 2 * std::log(3.0))).norm() < 1e-10);

    // rows of unit mean square project to features of 0
    const auto id = csp_from_class_covariances(Eigen::MatrixXd::Identity(2, 2), 3 * Eigen::MatrixXd::Identity(2, 2), 2);
    Eigen::MatrixXd white(2, 4);
    white << 1, -1, 1, -1, -1, -1, 1, 1;
    const Eigen::MatrixXd data = id.filters.inverse() * white;
    CHECK(csp_features(trial_of(data), id).norm() < 1e-12);

    CHECK_ERROR_KIND(csp_features(trial_of(Eigen::MatrixXd::Zero(6, 10)), f), ErrorKind::InvalidArgument);
    CHECK_ERROR_KIND(csp_features(trial_of(Eigen::MatrixXd::Ones(5, 10)), f), ErrorKind::DimensionMismatch);
    CHECK_ERROR_KIND(csp_fit(trials, std::vector<int>(trials.size(), 0), 2), ErrorKind::MissingClass);
}

TEST_CASE("CSP filters are scale invariant; CSP+LDA predictions too")
{
    Rng rng(6);
    std::vector<int> y;
    const auto trials = csp_trials(rng, 60, 6, y);
    std::vector<Trial> train(trials.begin(), trials.begin() + 40), test(trials.begin() + 40, trials.end());
    const std::vector<int> y_train(y.begin(), y.begin() + 40);
    const auto f = csp_fit(train, y_train, 4);
    const auto lda = lda_fit(csp_features(train, f), y_train);
    const auto base = lda_predict(csp_features(test, f), lda);
    for (double c : {1e-3, 0.7, 5.0, 1e4}) {
        auto st = train, se = test;
        for (auto& t : st)
            t.data *= c;
        for (auto& t : se)
            t.data *= c;
        const auto fc = csp_fit(st, y_train, 4);
        for (Eigen::Index r = 0; r < 4; ++r) {
            const double cosine = std::abs(f.filters.row(r).normalized().dot(fc.filters.row(r).normalized()));
            CHECK(cosine == doctest::Approx(1.0).epsilon(1e-9));
        }
        const auto lc = lda_fit(csp_features(st, fc), y_train);
        CHECK(lda_predict(csp_features(se, fc), lc) == base);
    }
}

TEST_CASE("LDA examples")
{
    Rng rng(7);
    Eigen::VectorXd mu(3);
    mu << 4, 0, 0;
    Eigen::MatrixXd x;
    std::vector<int> y;
    clouds(rng, 50, mu, x, y);
    const auto m = lda_fit(x, y);
    CHECK(std::abs(m.w.normalized().dot(mu.normalized())) > 0.95);
    CHECK(lda_predict(x, m) == y);

    const Eigen::RowVectorXd shift = Eigen::RowVectorXd::Constant(3, 17.0);
    const Eigen::MatrixXd xs = x.rowwise() + shift;
    CHECK(lda_predict(xs, lda_fit(xs, y)) == lda_predict(x, m));

    CHECK_ERROR_KIND(lda_fit(x.topRows(3), std::vector<int>{0, 1, 0}), ErrorKind::MissingClass);
    CHECK_ERROR_KIND(lda_fit(x, std::vector<int>(x.rows(), 1)), ErrorKind::MissingClass);
}

TEST_CASE("LDA agrees with a direct-solve oracle")
{
    Rng rng(8);
    for (int iter = 0; iter < 20; ++iter) {
        const auto d = testing::uniform_int(rng, 1, 6);
        Eigen::MatrixXd x;
        std::vector<int> y;
        clouds(rng, 30, testing::gaussian(rng, d, 1), x, y);
        // oracle
        Eigen::VectorXd m0 = Eigen::VectorXd::Zero(d), m1 = Eigen::VectorXd::Zero(d);
        for (Eigen::Index i = 0; i < x.rows(); ++i)
            (y[i] ? m1 : m0) += x.row(i).transpose() / 30.0;
        Eigen::MatrixXd s = Eigen::MatrixXd::Zero(d, d);
        for (Eigen::Index i = 0; i < x.rows(); ++i) {
            const Eigen::VectorXd c = x.row(i).transpose() - (y[i] ? m1 : m0);
            s += c * c.transpose();
        }
        s /= static_cast<double>(x.rows() - 2);
        s += 1e-6 * s.trace() / d * Eigen::MatrixXd::Identity(d, d);
        const Eigen::VectorXd w = s.fullPivLu().solve(m1 - m0);
        const double b = -0.5 * w.dot(m0 + m1);

        const auto m = lda_fit(x, y);
        CHECK((m.w - w).norm() < 1e-9 * w.norm());
        CHECK(std::abs(m.b - b) < 1e-9 * std::max(1.0, std::abs(b)));

        // invertible affine map of features keeps predictions
        const Eigen::MatrixXd a = testing::random_invertible(rng, d, 10.0);
        const Eigen::RowVectorXd t = testing::gaussian(rng, 1, d);
        const Eigen::MatrixXd xa = (x * a).rowwise() + t;
        const Eigen::MatrixXd test = testing::gaussian(rng, 50, d);
        const Eigen::MatrixXd test_a = (test * a).rowwise() + t;
        CHECK(lda_predict(test_a, lda_fit(xa, y)) == lda_predict(test, m));
    }
}

TEST_CASE("xDAWN: the top filter lies in the template subspace")
{
    Rng rng(9);
    for (int iter = 0; iter < 10; ++iter) {
        const Eigen::Index r = 6, t = 40;
        const Eigen::MatrixXd q = testing::random_orthogonal(rng, r);
        const Eigen::MatrixXd basis = q.leftCols(2);  // subspace S
        // Orthonormal time courses: two for the template, r for the noise.
        const Eigen::MatrixXd time = testing::random_orthogonal(rng, t).leftCols(2 + r).transpose();
        const Eigen::MatrixXd tpl = basis * Eigen::Vector2d(3.0, 1.5).asDiagonal() * time.topRows(2);
        const Eigen::MatrixXd noise = 0.8 * time.bottomRows(r);  // exactly isotropic energy

        std::vector<Trial> trials;
        std::vector<int> y;
        for (int i = 0; i < 10; ++i) {
            trials.push_back(trial_of(i < 2 ? tpl : noise, i < 2));
            y.push_back(i < 2);
        }
        const auto f = xdawn_fit(trials, y, 2, 1);
        CHECK(f.filters.rows() == 2);
        CHECK(f.eigenvalues(0) >= f.eigenvalues(1));
        CHECK(f.evoked_template.isApprox(tpl));
        const Eigen::VectorXd w = f.filters.row(0).transpose().normalized();
        const double outside = (w - basis * (basis.transpose() * w)).norm();
        CHECK(outside < 1e-6);
    }
}

TEST_CASE("xDAWN with all components is an invertible transform")
{
    Rng rng(10);
    const Eigen::Index r = 4, t = 6;
    const Eigen::MatrixXd mix = testing::random_invertible(rng, r);
    const Eigen::MatrixXd tpl = testing::gaussian(rng, r, t);
    std::vector<Trial> train, test;
    std::vector<int> y_train, y_test;
    for (int i = 0; i < 160; ++i) {
        const int c = i % 4 == 0;
        Trial tr = trial_of(mix * (testing::gaussian(rng, r, t) + (c ? tpl : Eigen::MatrixXd::Zero(r, t))), c);
        (i < 120 ? train : test).push_back(tr);
        (i < 120 ? y_train : y_test).push_back(c);
    }
    const auto f = xdawn_fit(train, y_train, static_cast<int>(r), 1);
    CHECK(Eigen::FullPivLU<Eigen::MatrixXd>(f.filters).rank() == r);

    std::vector<Trial> ftrain, ftest;
    for (const auto& x : train)
        ftrain.push_back(xdawn_apply(x, f));
    for (const auto& x : test)
        ftest.push_back(xdawn_apply(x, f));
    CHECK(ftrain[0].n_channels() == r);
    const auto raw = lda_predict(vectorize(test), lda_fit(vectorize(train), y_train));
    const auto filtered = lda_predict(vectorize(ftest), lda_fit(vectorize(ftrain), y_train));
    CHECK(raw == filtered);
}

TEST_CASE("xDAWN errors")
{
    Rng rng(11);
    std::vector<Trial> trials{trial_of(testing::gaussian(rng, 3, 10)), trial_of(testing::gaussian(rng, 3, 10))};
    CHECK_ERROR_KIND(xdawn_fit(trials, std::vector<int>{0, 0}, 2, 1), ErrorKind::MissingClass);
    CHECK_ERROR_KIND(xdawn_fit(trials, std::vector<int>{0, 1}, 4, 1), ErrorKind::InvalidArgument);
    const auto f = xdawn_fit(trials, std::vector<int>{0, 1}, 2, 1);
    CHECK_ERROR_KIND(xdawn_apply(trial_of(testing::gaussian(rng, 4, 10)), f), ErrorKind::DimensionMismatch);
}

TEST_CASE("PCA")
{
    Rng rng(12);
    SUBCASE("full-rank projection is a rotation")
    {
        const Eigen::MatrixXd x = testing::gaussian(rng, 50, 5);
        const auto m = pca_fit(x, 5);
        CHECK((m.projection * m.projection.transpose() - Eigen::MatrixXd::Identity(5, 5)).norm() < 1e-10);
        CHECK((m.projection.transpose() * m.projection - Eigen::MatrixXd::Identity(5, 5)).norm() < 1e-10);
    }
    SUBCASE("training features fall in [0, 1]; test features are not clamped")
    {
        const Eigen::MatrixXd x = testing::gaussian(rng, 60, 30);
        const auto m = pca_fit(x, 20);
        const Eigen::MatrixXd f = pca_apply(x, m);
        CHECK(f.cols() == 20);
        CHECK(f.minCoeff() >= -1e-12);
        CHECK(f.maxCoeff() <= 1 + 1e-12);
        const Eigen::MatrixXd far = 100.0 * testing::gaussian(rng, 5, 30);
        const Eigen::MatrixXd g = pca_apply(far, m);
        CHECK((g.maxCoeff() > 1.0 || g.minCoeff() < 0.0));
    }
    SUBCASE("projection matches the covariance eigenvectors")
    {
        const Eigen::MatrixXd x = testing::gaussian(rng, 80, 6) * testing::random_invertible(rng, 6);
        const auto m = pca_fit(x, 3);
        Eigen::MatrixXd z = x.rowwise() - x.colwise().mean();
        for (Eigen::Index j = 0; j < z.cols(); ++j)
            z.col(j) /= std::sqrt(z.col(j).squaredNorm() / (z.rows() - 1));
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(z.transpose() * z);
        for (Eigen::Index k = 0; k < 3; ++k) {
            const Eigen::VectorXd v = es.eigenvectors().col(5 - k);
            CHECK(std::abs(std::abs(v.dot(m.projection.row(k).transpose())) - 1.0) < 1e-9);
        }
    }
    SUBCASE("zero-variance dimensions are dropped with a warning")
    {
        Eigen::MatrixXd x = testing::gaussian(rng, 30, 4);
        x.col(2).setConstant(7.0);
        const auto m = pca_fit(x, 2);
        CHECK(m.dropped_dims == std::vector<Eigen::Index>{2});
        CHECK_FALSE(m.warnings.empty());
        CHECK(pca_apply(x, m).cols() == 2);
    }
    SUBCASE("errors")
    {
        CHECK_ERROR_KIND(pca_fit(testing::gaussian(rng, 5, 10), 20), ErrorKind::InvalidArgument);
        CHECK_ERROR_KIND(pca_fit(Eigen::MatrixXd::Ones(10, 3), 2), ErrorKind::InvalidArgument);
        const auto m = pca_fit(testing::gaussian(rng, 30, 4), 2);
        CHECK_ERROR_KIND(pca_apply(testing::gaussian(rng, 2, 5), m), ErrorKind::DimensionMismatch);
    }
}

TEST_CASE("SVM examples")
{
    Eigen::MatrixXd x(2, 2);
    x << 1, 0, -1, 0;
    const std::vector<int> y{1, 0};
    const auto m = svm_fit(x, y, 100.0);
    CHECK(m.converged);
    CHECK(std::abs(m.w(1)) < 1e-9);
    CHECK(m.w(0) == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(std::abs(m.b) < 1e-9);
    CHECK(svm_predict(Eigen::VectorXd(Eigen::Vector2d(0.5, 3.0)), m) == 1);
    CHECK(svm_predict(Eigen::VectorXd(Eigen::Vector2d(-0.5, 3.0)), m) == 0);

    CHECK_ERROR_KIND(svm_fit(x, std::vector<int>{1, 1}, 1.0), ErrorKind::MissingClass);
    CHECK_ERROR_KIND(svm_fit(x, y, 0.0), ErrorKind::InvalidArgument);
    CHECK_ERROR_KIND(svm_predict(Eigen::VectorXd(Eigen::Vector3d(0, 0, 0)), m), ErrorKind::DimensionMismatch);
}

TEST_CASE("SVM duality gap, separability, and duplicated points")
{
    Rng rng(13);
    for (int iter = 0; iter < 10; ++iter) {
        const auto d = testing::uniform_int(rng, 2, 8);
        Eigen::MatrixXd x;
        std::vector<int> y;
        clouds(rng, 25, 0.6 * testing::gaussian(rng, d, 1), x, y);
        const double C = std::pow(2.0, testing::uniform_int(rng, -3, 5));
        const auto m = svm_fit(x, y, C);
        CHECK(m.converged);
        CHECK(m.primal - m.dual <= 1e-6 * std::max(1.0, m.primal));
        CHECK(m.primal >= m.dual - 1e-9);
        // recompute the primal at the returned (w, b)
        double hinge = 0.0;
        for (Eigen::Index i = 0; i < x.rows(); ++i) {
            const double yi = y[i] == m.positive_class ? 1.0 : -1.0;
            hinge += std::max(0.0, 1.0 - yi * (m.w.dot(x.row(i).transpose()) + m.b));
        }
        CHECK(std::abs(0.5 * m.w.squaredNorm() + C * hinge - m.primal) < 1e-6 * std::max(1.0, m.primal));

        const SvmOptions tight{1e-13, 20'000'000};
        Eigen::MatrixXd xx(2 * x.rows(), d);
        xx << x, x;
        std::vector<int> yy = y;
        yy.insert(yy.end(), y.begin(), y.end());
        const auto dup = svm_fit(xx, yy, C, tight);
        const auto doubled = svm_fit(x, y, 2 * C, tight);
        const Eigen::MatrixXd probe = testing::gaussian(rng, 20, d);
        for (Eigen::Index i = 0; i < probe.rows(); ++i)
            CHECK(std::abs(svm_decision(probe.row(i).transpose(), dup) -
                           svm_decision(probe.row(i).transpose(), doubled)) < 1e-6);
    }

    // separable data and large C: zero training hinge loss
    Eigen::VectorXd mu = Eigen::VectorXd::Zero(3);
    mu(0) = 6.0;
    Eigen::MatrixXd x;
    std::vector<int> y;
    clouds(rng, 30, mu, x, y);
    const auto m = svm_fit(x, y, 1e3);
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        const double yi = y[i] == m.positive_class ? 1.0 : -1.0;
        CHECK(yi * svm_decision(x.row(i).transpose(), m) >= 1.0 - 1e-4);
    }
}

TEST_CASE("select_C")
{
    Rng rng(14);
    CHECK(default_c_grid().size() == 9);
    CHECK(default_c_grid().front() == 0.125);
    CHECK(default_c_grid().back() == 32.0);

    Eigen::VectorXd mu = Eigen::VectorXd::Zero(2);
    mu(0) = 10.0;
    Eigen::MatrixXd x;
    std::vector<int> y;
    clouds(rng, 20, mu, x, y);
    const auto r = select_C(x, y, 7);
    CHECK(r.n_fits == 45);
    CHECK(r.grid.size() == 9);
    for (double s : r.mean_bca)
        CHECK(s == 1.0);
    CHECK(r.C == 0.125);

    Eigen::MatrixXd xn;
    clouds(rng, 20, 0.3 * testing::gaussian(rng, 4, 1), xn, y);
    const auto a = select_C(xn, y, 3);
    const auto b = select_C(xn, y, 3);
    CHECK(a.C == b.C);
    CHECK(a.mean_bca == b.mean_bca);
    CHECK(std::find(a.grid.begin(), a.grid.end(), a.C) != a.grid.end());

    CHECK_ERROR_KIND(select_C(xn.topRows(8), std::span(y).first(8), 1), ErrorKind::InvalidArgument);
}
