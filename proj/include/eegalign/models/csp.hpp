#pragma once

#include <array>
#include <optional>
#include <span>
#include <vector>

#include "eegalign/alignment.hpp"
#include "eegalign/trial.hpp"

namespace eegalign::models {

struct CSPFilters {
    Eigen::MatrixXd filters;       // n_filters x n_channels, w^T (S1 + S2) w = 1
    Eigen::VectorXd eigenvalues;   // generalized eigenvalue of each row, same order
    std::vector<int> selected;     // indices into the ascending spectrum
    std::array<int, 2> classes{};  // class ids; "class 1" is classes[0]
};

/// Common spatial patterns from two class-mean covariances: solves
/// S1 v = lambda (S1 + S2) v and keeps n_filters/2 vectors from each end of the
/// spectrum, ordered by |lambda - 0.5| descending.
CSPFilters csp_from_class_covariances(const Eigen::MatrixXd& class1, const Eigen::MatrixXd& class2,
                                      int n_filters);

/// Class-mean covariances are arithmetic means of per-trial X X^T.
CSPFilters csp_fit(std::span<const Trial> trials, std::span<const int> labels, int n_filters = 6,
                   std::optional<align::ShrinkageParam> shrink = std::nullopt);

/// log(mean_t (w_k^T x_t)^2) for each filter row.
Eigen::VectorXd csp_features(const Trial& trial, const CSPFilters& filters);

Eigen::MatrixXd csp_features(std::span<const Trial> trials, const CSPFilters& filters);

}  // namespace eegalign::models
