#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace eegalign::models {

struct SvmOptions {
    /// Stop once primal - dual <= gap_tol * max(1, primal).
    double gap_tol = 1e-6;
    long max_iter = 20'000'000;
};

/// Linear soft-margin classifier, decision w^T x + b >= 0 -> positive_class
/// (the larger class id).
struct LinearMarginModel {
    Eigen::VectorXd w;
    double b = 0.0;
    double C = 1.0;
    int positive_class = 1;
    int negative_class = 0;
    bool converged = false;
    double primal = 0.0;
    double dual = 0.0;
    long iterations = 0;
};

/// Minimizes 1/2 |w|^2 + C sum_i hinge(y_i (w^T x_i + b)) with an
/// unregularized bias, by SMO on the dual. Rows of `x` are samples. The bias
/// is the midpoint of the primal-optimal interval for the final w.
LinearMarginModel svm_fit(const Eigen::MatrixXd& x, std::span<const int> labels, double C,
                          SvmOptions options = {});

double svm_decision(const Eigen::VectorXd& x, const LinearMarginModel& model);
int svm_predict(const Eigen::VectorXd& x, const LinearMarginModel& model);
std::vector<int> svm_predict(const Eigen::MatrixXd& x, const LinearMarginModel& model);

/// {2^-3, 2^-2, ..., 2^5}.
std::vector<double> default_c_grid();

struct SelectCResult {
    double C = 0.0;
    std::vector<double> grid;
    std::vector<double> mean_bca;  // one per grid value
    int n_fits = 0;
};

/// Stratified k-fold cross-validation over the grid; highest mean BCA wins,
/// ties go to the smaller C. Fold assignment depends only on `seed`.
SelectCResult select_C(const Eigen::MatrixXd& x, std::span<const int> labels, std::uint64_t seed,
                       std::span<const double> grid = {}, int folds = 5, SvmOptions options = {});

}  // namespace eegalign::models
