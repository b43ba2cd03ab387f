#pragma once

#include <span>
#include <string>
#include <vector>

#include "eegalign/trial.hpp"

namespace eegalign::models {

/// z-score -> top-k principal directions -> min-max rescale, all statistics
/// from the training data. Test data is not clamped to [0, 1].
struct PCAModel {
    std::vector<Eigen::Index> kept_dims;     // input dimensions with nonzero variance
    std::vector<Eigen::Index> dropped_dims;  // zero-variance dimensions
    Eigen::VectorXd mean;                    // over kept dims
    Eigen::VectorXd stddev;                  // over kept dims, n-1 divisor
    Eigen::MatrixXd projection;              // k x kept, orthonormal rows
    Eigen::VectorXd feature_min;
    Eigen::VectorXd feature_max;
    std::vector<std::string> warnings;

    Eigen::Index n_features() const noexcept { return projection.rows(); }
};

/// Channel rows concatenated into one vector.
Eigen::VectorXd vectorize(const Trial& trial);
Eigen::MatrixXd vectorize(std::span<const Trial> trials);

/// Rows of `x` are samples. Needs at least k rows; if fewer than k
/// dimensions survive, k is reduced to match (recorded as a warning).
PCAModel pca_fit(const Eigen::MatrixXd& x, int k = 20);

Eigen::VectorXd pca_apply(const Eigen::VectorXd& v, const PCAModel& model);
Eigen::MatrixXd pca_apply(const Eigen::MatrixXd& x, const PCAModel& model);

}  // namespace eegalign::models
