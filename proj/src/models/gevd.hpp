#pragma once

#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "eegalign/error.hpp"

namespace eegalign::models::detail {

struct Gevd {
    Eigen::VectorXd eigenvalues;   // ascending
    Eigen::MatrixXd eigenvectors;  // columns, v^T B v = 1, first nonzero entry positive
};

// A v = lambda B v for symmetric A and symmetric positive-definite B.
inline Gevd generalized_eig(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, const std::string& what)
{
    const Eigen::MatrixXd bs = 0.5 * (b + b.transpose());
    Eigen::LLT<Eigen::MatrixXd> llt(bs);
    const double scale = bs.diagonal().cwiseAbs().maxCoeff();
    if (llt.info() != Eigen::Success || !(llt.matrixL().toDenseMatrix().diagonal().minCoeff() > 1e-8 * std::sqrt(scale)))
        throw Error(ErrorKind::NotPositiveDefinite,
                    what + " is singular; apply covariance shrinkage to the trials");

    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> solver(
        0.5 * (a + a.transpose()), bs, Eigen::ComputeEigenvectors | Eigen::Ax_lBx);
    if (solver.info() != Eigen::Success)
        throw Error(ErrorKind::NoConvergence, "generalized eigensolver failed for " + what);

    Gevd out{solver.eigenvalues(), solver.eigenvectors()};
    for (Eigen::Index j = 0; j < out.eigenvectors.cols(); ++j) {
        for (Eigen::Index i = 0; i < out.eigenvectors.rows(); ++i) {
            const double v = out.eigenvectors(i, j);
            if (std::abs(v) > 1e-12 * out.eigenvectors.col(j).cwiseAbs().maxCoeff()) {
                if (v < 0)
                    out.eigenvectors.col(j) = -out.eigenvectors.col(j);
                break;
            }
        }
    }
    return out;
}

}  // namespace eegalign::models::detail
