#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

namespace eegalign::models {

/// Binary Fisher discriminant. Decision values >= 0 map to `positive_class`
/// (the larger class id).
struct LDAModel {
    Eigen::VectorXd w;
    double b = 0.0;
    int positive_class = 1;
    int negative_class = 0;
};

/// Rows of `features` are samples. w = S_w^{-1} (mu_pos - mu_neg) where S_w
/// is the pooled within-class covariance plus a 1e-6 * trace/d ridge.
LDAModel lda_fit(const Eigen::MatrixXd& features, std::span<const int> labels);

double lda_decision(const Eigen::VectorXd& x, const LDAModel& model);
int lda_predict(const Eigen::VectorXd& x, const LDAModel& model);
std::vector<int> lda_predict(const Eigen::MatrixXd& features, const LDAModel& model);

}  // namespace eegalign::models
