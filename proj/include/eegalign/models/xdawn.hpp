#pragma once

#include <optional>
#include <span>

#include "eegalign/alignment.hpp"
#include "eegalign/trial.hpp"

namespace eegalign::models {

struct XDawnFilters {
    Eigen::MatrixXd filters;          // n_components x n_channels
    Eigen::VectorXd eigenvalues;      // descending, one per filter
    Eigen::MatrixXd evoked_template;  // n_channels x n_samples
    int target_class = 1;
};

/// Spatial filters maximizing evoked-template energy over total signal
/// energy: GEVD of P P^T (P = target average) against the mean X X^T of all
/// trials. Filters are orthonormal under the latter.
XDawnFilters xdawn_fit(std::span<const Trial> trials, std::span<const int> labels, int n_components = 4,
                       int target_class = 1);

/// Projects the trial onto the filters; the result has n_components channels.
Trial xdawn_apply(const Trial& trial, const XDawnFilters& filters);

}  // namespace eegalign::models
