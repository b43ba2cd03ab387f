#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

namespace eegalign::spd {

/// Symmetric positive-definite matrix. Construction symmetrizes the input as
/// (M + M^T) / 2 after checking that it was symmetric to 1e-10 (relative
/// Frobenius), then requires every eigenvalue to be numerically positive.
class SPDMatrix {
public:
    struct Unchecked {};

    explicit SPDMatrix(const Eigen::MatrixXd& m);
    /// Symmetrizes only; for values that are SPD by construction (V f(L) V^T
    /// with f > 0).
    SPDMatrix(const Eigen::MatrixXd& m, Unchecked);

    static SPDMatrix identity(Eigen::Index dim);

    const Eigen::MatrixXd& values() const noexcept { return values_; }
    Eigen::Index dim() const noexcept { return values_.rows(); }

    bool operator==(const SPDMatrix& other) const { return values_ == other.values_; }

private:
    Eigen::MatrixXd values_;
};

inline constexpr double kSymmetryTolerance = 1e-10;
/// Eigenvalues below this fraction of the largest one make negative powers
/// and logarithms fail with IllConditioned.
inline constexpr double kConditioningFloor = 1e-12;

struct EigenDecomposition {
    Eigen::VectorXd eigenvalues;   // descending
    Eigen::MatrixXd eigenvectors;  // orthonormal columns, first nonzero entry positive
};

EigenDecomposition sym_eig(const SPDMatrix& m);

/// Same as sym_eig for a general symmetric matrix (eigenvalues may be <= 0).
EigenDecomposition sym_eig(const Eigen::MatrixXd& symmetric);

SPDMatrix spd_power(const SPDMatrix& m, double alpha);
SPDMatrix spd_sqrt(const SPDMatrix& m);
SPDMatrix spd_inv_sqrt(const SPDMatrix& m);

/// Principal logarithm; the result is symmetric but not SPD.
Eigen::MatrixXd spd_log(const SPDMatrix& m);

/// Exponential of a symmetric matrix.
SPDMatrix sym_exp(const Eigen::MatrixXd& symmetric);

/// Affine-invariant geodesic distance, via the eigenvalues of
/// P1^{-1/2} P2 P1^{-1/2}.
double riemannian_distance(const SPDMatrix& p1, const SPDMatrix& p2);

/// C^T P C.
SPDMatrix congruence(const SPDMatrix& p, const Eigen::MatrixXd& c);

struct MeanOptions {
    double tol = 1e-9;
    int max_iter = 50;
};

struct MeanResult {
    SPDMatrix mean;
    int iterations = 0;
    double final_step_norm = 0.0;  // Frobenius norm of the last averaged tangent
    bool converged = false;
    MeanOptions options;
};

/// Frechet mean under the affine-invariant metric by fixed-point iteration
/// from the arithmetic mean. Non-convergence is reported through `converged`,
/// not by throwing.
MeanResult riemannian_mean(std::span<const SPDMatrix> ps, MeanOptions options = {});

/// Riemannian mean that throws NoConvergence when the iteration cap is hit.
SPDMatrix riemannian_mean_or_throw(std::span<const SPDMatrix> ps, MeanOptions options = {});

SPDMatrix arithmetic_mean(std::span<const SPDMatrix> ps);

}  // namespace eegalign::spd
