#include "eegalign/spd.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <string>

#include "eegalign/error.hpp"

namespace eegalign::spd {
namespace {

void fix_signs(Eigen::MatrixXd& vectors)
{
    for (Eigen::Index j = 0; j < vectors.cols(); ++j) {
        for (Eigen::Index i = 0; i < vectors.rows(); ++i) {
            const double v = vectors(i, j);
            if (std::abs(v) > 1e-12) {
                if (v < 0)
                    vectors.col(j) = -vectors.col(j);
                break;
            }
        }
    }
}

Eigen::MatrixXd symmetrized(const Eigen::MatrixXd& m)
{
    return 0.5 * (m + m.transpose());
}

template <typename F>
Eigen::MatrixXd apply_function(const EigenDecomposition& eig, F&& f)
{
    Eigen::VectorXd mapped(eig.eigenvalues.size());
    for (Eigen::Index i = 0; i < mapped.size(); ++i)
        mapped(i) = f(eig.eigenvalues(i));
    return eig.eigenvectors * mapped.asDiagonal() * eig.eigenvectors.transpose();
}

void check_conditioning(const EigenDecomposition& eig, const char* op)
{
    const double lmax = eig.eigenvalues(0);
    const double lmin = eig.eigenvalues(eig.eigenvalues.size() - 1);
    if (!(lmin > kConditioningFloor * lmax))
        throw Error(ErrorKind::IllConditioned,
                    std::string(op) + ": smallest eigenvalue " + std::to_string(lmin)
                        + " is below the conditioning floor (1e-12 x largest)");
}

void check_same_dim(const SPDMatrix& a, const SPDMatrix& b)
{
    if (a.dim() != b.dim())
        throw Error(ErrorKind::DimensionMismatch, "SPD matrices of different dimension ("
                                                      + std::to_string(a.dim()) + " vs "
                                                      + std::to_string(b.dim()) + ")");
}

void check_common_dim(std::span<const SPDMatrix> ps)
{
    if (ps.empty())
        throw Error(ErrorKind::InvalidArgument, "mean of an empty set");
    for (const auto& p : ps)
        check_same_dim(p, ps.front());
}

}  // namespace

SPDMatrix::SPDMatrix(const Eigen::MatrixXd& m)
{
    if (m.rows() != m.cols() || m.rows() == 0)
        throw Error(ErrorKind::DimensionMismatch, "SPD matrix must be square and nonempty");
    if (!m.allFinite())
        throw Error(ErrorKind::NonFinite, "SPD matrix has non-finite entries");
    const double norm = m.norm();
    if ((m - m.transpose()).norm() > kSymmetryTolerance * norm)
        throw Error(ErrorKind::InvalidArgument, "matrix is not symmetric");
    values_ = symmetrized(m);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(values_, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success)
        throw Error(ErrorKind::NoConvergence, "eigenvalue solver failed");
    const auto& ev = solver.eigenvalues();
    const double lmax = ev(ev.size() - 1);
    const double floor = static_cast<double>(values_.rows()) * std::numeric_limits<double>::epsilon();
    if (!(lmax > 0.0) || !(ev(0) > floor * lmax))
        throw Error(ErrorKind::NotPositiveDefinite,
                    "matrix is not positive definite (smallest eigenvalue " + std::to_string(ev(0)) + ")");
}

SPDMatrix::SPDMatrix(const Eigen::MatrixXd& m, Unchecked) : values_(symmetrized(m)) {}

SPDMatrix SPDMatrix::identity(Eigen::Index dim)
{
    return SPDMatrix(Eigen::MatrixXd::Identity(dim, dim), Unchecked{});
}

EigenDecomposition sym_eig(const Eigen::MatrixXd& symmetric)
{
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(symmetric);
    if (solver.info() != Eigen::Success)
        throw Error(ErrorKind::NoConvergence, "symmetric eigensolver failed to converge");
    EigenDecomposition out;
    out.eigenvalues = solver.eigenvalues().reverse();
    out.eigenvectors = solver.eigenvectors().rowwise().reverse();
    fix_signs(out.eigenvectors);
    return out;
}

EigenDecomposition sym_eig(const SPDMatrix& m)
{
    return sym_eig(m.values());
}

SPDMatrix spd_power(const SPDMatrix& m, double alpha)
{
    const auto eig = sym_eig(m);
    if (alpha < 0)
        check_conditioning(eig, "spd_power");
    return {apply_function(eig, [alpha](double l) { return std::pow(l, alpha); }), SPDMatrix::Unchecked{}};
}

SPDMatrix spd_sqrt(const SPDMatrix& m)
{
    return spd_power(m, 0.5);
}

SPDMatrix spd_inv_sqrt(const SPDMatrix& m)
{
    return spd_power(m, -0.5);
}

Eigen::MatrixXd spd_log(const SPDMatrix& m)
{
    const auto eig = sym_eig(m);
    check_conditioning(eig, "spd_log");
    return symmetrized(apply_function(eig, [](double l) { return std::log(l); }));
}

SPDMatrix sym_exp(const Eigen::MatrixXd& symmetric)
{
    if (symmetric.rows() != symmetric.cols())
        throw Error(ErrorKind::DimensionMismatch, "matrix exponential of a non-square matrix");
    const auto eig = sym_eig(symmetrized(symmetric));
    return {apply_function(eig, [](double l) { return std::exp(l); }), SPDMatrix::Unchecked{}};
}

double riemannian_distance(const SPDMatrix& p1, const SPDMatrix& p2)
{
    check_same_dim(p1, p2);
    const Eigen::MatrixXd w = spd_inv_sqrt(p1).values();
    const Eigen::MatrixXd inner = symmetrized(w * p2.values() * w);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(inner, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success)
        throw Error(ErrorKind::NoConvergence, "eigensolver failed in riemannian_distance");
    double sum = 0.0;
    for (Eigen::Index i = 0; i < solver.eigenvalues().size(); ++i) {
        const double l = std::log(solver.eigenvalues()(i));
        sum += l * l;
    }
    return std::sqrt(sum);
}

SPDMatrix congruence(const SPDMatrix& p, const Eigen::MatrixXd& c)
{
    if (c.rows() != p.dim())
        throw Error(ErrorKind::DimensionMismatch, "congruence: transform rows must match matrix dimension");
    return SPDMatrix(symmetrized(c.transpose() * p.values() * c));
}

SPDMatrix arithmetic_mean(std::span<const SPDMatrix> ps)
{
    check_common_dim(ps);
    Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(ps.front().dim(), ps.front().dim());
    for (const auto& p : ps)
        sum += p.values();
    // Convex combination of SPD matrices stays SPD.
    return {sum / static_cast<double>(ps.size()), SPDMatrix::Unchecked{}};
}

MeanResult riemannian_mean(std::span<const SPDMatrix> ps, MeanOptions options)
{
    check_common_dim(ps);
    if (!(options.tol > 0.0) || options.max_iter < 1)
        throw Error(ErrorKind::InvalidArgument, "riemannian_mean needs tol > 0 and max_iter >= 1");

    const auto dim = ps.front().dim();
    MeanResult result{arithmetic_mean(ps), 0, 0.0, false, options};
    const double n = static_cast<double>(ps.size());

    Eigen::MatrixXd tangent(dim, dim);
    while (result.iterations < options.max_iter) {
        const auto eig = sym_eig(result.mean);
        check_conditioning(eig, "riemannian_mean");
        const Eigen::MatrixXd root = apply_function(eig, [](double l) { return std::sqrt(l); });
        const Eigen::MatrixXd inv_root = apply_function(eig, [](double l) { return 1.0 / std::sqrt(l); });

        tangent.setZero();
        for (const auto& p : ps) {
            const Eigen::MatrixXd whitened = symmetrized(inv_root * p.values() * inv_root);
            const auto w = sym_eig(whitened);
            if (!(w.eigenvalues(w.eigenvalues.size() - 1) > 0.0))
                throw Error(ErrorKind::NotPositiveDefinite, "riemannian_mean: whitened matrix lost definiteness");
            tangent += apply_function(w, [](double l) { return std::log(l); });
        }
        tangent /= n;

        result.final_step_norm = tangent.norm();
        result.mean = SPDMatrix(root * sym_exp(tangent).values() * root, SPDMatrix::Unchecked{});
        ++result.iterations;
        if (result.final_step_norm < options.tol) {
            result.converged = true;
            break;
        }
    }
    return result;
}

SPDMatrix riemannian_mean_or_throw(std::span<const SPDMatrix> ps, MeanOptions options)
{
    auto result = riemannian_mean(ps, options);
    if (!result.converged) {
        char step[32];
        std::snprintf(step, sizeof step, "%.3g", result.final_step_norm);
        throw Error(ErrorKind::NoConvergence,
                    "Riemannian mean did not converge in " + std::to_string(options.max_iter)
                        + " iterations (last step norm " + step + ")");
    }
    return std::move(result.mean);
}

}  // namespace eegalign::spd
