#pragma once

#include <map>
#include <span>
#include <vector>

namespace eegalign::harness {

/// Per-class sizes (m) and correct counts (n) of a binary problem.
struct ConfusionCounts {
    int m_pos = 0;
    int m_neg = 0;
    int n_pos = 0;
    int n_neg = 0;
};

double accuracy(std::span<const int> predictions, std::span<const int> labels);

/// Mean of the per-class accuracies n+/m+ and n-/m-.
double bca(const ConfusionCounts& counts);

/// Counts with `positive_class` as the + class; every other id counts as -.
ConfusionCounts confusion(std::span<const int> predictions, std::span<const int> labels, int positive_class);

/// BCA generalized to any number of classes present in `labels`.
double balanced_accuracy(std::span<const int> predictions, std::span<const int> labels);

/// Trapezoidal area under (x, y) normalized by x.back() - x.front().
double auc_curve(std::span<const double> x, std::span<const double> y);
double auc_curve(const std::map<int, double>& curve);

struct TTestResult {
    double t = 0.0;
    double p = 0.0;  // two-sided
    int df = 0;
};

/// Paired-sample t-test on a - b.
TTestResult paired_t_test(std::span<const double> a, std::span<const double> b);

/// P(T <= t) for Student's t with `df` degrees of freedom.
double student_t_cdf(double t, double df);

/// Regularized incomplete beta I_x(a, b).
double regularized_incomplete_beta(double a, double b, double x);

}  // namespace eegalign::harness
