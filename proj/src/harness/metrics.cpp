#include "eegalign/harness/metrics.hpp"

#include <cmath>
#include <limits>
#include <set>
#include <string>

#include "eegalign/error.hpp"

namespace eegalign::harness {
namespace {

void check_pair(std::span<const int> predictions, std::span<const int> labels)
{
    if (predictions.size() != labels.size())
        throw Error(ErrorKind::DimensionMismatch, "prediction and label counts differ");
    if (labels.empty())
        throw Error(ErrorKind::InvalidArgument, "metric of an empty prediction set");
}

// Lentz's continued fraction for the incomplete beta function.
double beta_continued_fraction(double a, double b, double x)
{
    constexpr int kMaxIter = 10000;
    constexpr double kEps = 1e-15;
    constexpr double kTiny = 1e-300;

    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::abs(d) < kTiny)
        d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny)
            d = kTiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny)
            c = kTiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny)
            d = kTiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny)
            c = kTiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::abs(delta - 1.0) < kEps)
            return h;
    }
    throw Error(ErrorKind::NoConvergence, "incomplete beta continued fraction did not converge");
}

}  // namespace

double accuracy(std::span<const int> predictions, std::span<const int> labels)
{
    check_pair(predictions, labels);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < labels.size(); ++i)
        correct += predictions[i] == labels[i] ? 1 : 0;
    return static_cast<double>(correct) / static_cast<double>(labels.size());
}

double bca(const ConfusionCounts& c)
{
    if (c.m_pos <= 0 || c.m_neg <= 0)
        throw Error(ErrorKind::MissingClass, "BCA needs both classes in the ground truth");
    if (c.n_pos < 0 || c.n_pos > c.m_pos || c.n_neg < 0 || c.n_neg > c.m_neg)
        throw Error(ErrorKind::InvalidArgument, "correct counts must lie within class sizes");
    const double a_pos = static_cast<double>(c.n_pos) / c.m_pos;
    const double a_neg = static_cast<double>(c.n_neg) / c.m_neg;
    return 0.5 * (a_pos + a_neg);
}

ConfusionCounts confusion(std::span<const int> predictions, std::span<const int> labels, int positive_class)
{
    check_pair(predictions, labels);
    ConfusionCounts c;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] == positive_class) {
            ++c.m_pos;
            c.n_pos += predictions[i] == labels[i] ? 1 : 0;
        } else {
            ++c.m_neg;
            c.n_neg += predictions[i] == labels[i] ? 1 : 0;
        }
    }
    return c;
}

double balanced_accuracy(std::span<const int> predictions, std::span<const int> labels)
{
    check_pair(predictions, labels);
    const std::set<int> classes(labels.begin(), labels.end());
    if (classes.size() == 2)
        return bca(confusion(predictions, labels, *classes.rbegin()));
    double sum = 0.0;
    for (int c : classes) {
        int m = 0;
        int n = 0;
        for (std::size_t i = 0; i < labels.size(); ++i) {
            if (labels[i] == c) {
                ++m;
                n += predictions[i] == c ? 1 : 0;
            }
        }
        sum += static_cast<double>(n) / m;
    }
    return sum / static_cast<double>(classes.size());
}

double auc_curve(std::span<const double> x, std::span<const double> y)
{
    if (x.size() != y.size())
        throw Error(ErrorKind::DimensionMismatch, "auc_curve: x and y lengths differ");
    if (x.size() < 2)
        throw Error(ErrorKind::InvalidArgument, "auc_curve needs at least two checkpoints");
    double area = 0.0;
    for (std::size_t i = 1; i < x.size(); ++i) {
        if (!(x[i] > x[i - 1]))
            throw Error(ErrorKind::InvalidArgument, "auc_curve: checkpoints must be strictly increasing");
        area += 0.5 * (y[i] + y[i - 1]) * (x[i] - x[i - 1]);
    }
    return area / (x.back() - x.front());
}

double auc_curve(const std::map<int, double>& curve)
{
    std::vector<double> x;
    std::vector<double> y;
    for (const auto& [k, v] : curve) {
        x.push_back(k);
        y.push_back(v);
    }
    return auc_curve(x, y);
}

double regularized_incomplete_beta(double a, double b, double x)
{
    if (!(a > 0.0) || !(b > 0.0) || !(x >= 0.0 && x <= 1.0))
        throw Error(ErrorKind::InvalidArgument, "incomplete beta needs a, b > 0 and x in [0, 1]");
    if (x == 0.0 || x == 1.0)
        return x;
    const double log_front =
        std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
    const double front = std::exp(log_front);
    // The continued fraction converges fast for x < (a+1)/(a+b+2); use the
    // symmetry I_x(a,b) = 1 - I_{1-x}(b,a) otherwise.
    if (x < (a + 1.0) / (a + b + 2.0))
        return front * beta_continued_fraction(a, b, x) / a;
    return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double student_t_cdf(double t, double df)
{
    if (!(df > 0.0))
        throw Error(ErrorKind::InvalidArgument, "Student t needs df > 0");
    if (std::isinf(t))
        return t > 0 ? 1.0 : 0.0;
    const double x = df / (df + t * t);
    const double tail = 0.5 * regularized_incomplete_beta(0.5 * df, 0.5, x);
    return t > 0 ? 1.0 - tail : tail;
}

TTestResult paired_t_test(std::span<const double> a, std::span<const double> b)
{
    if (a.size() != b.size())
        throw Error(ErrorKind::DimensionMismatch, "paired t-test needs equal-length samples");
    const std::size_t n = a.size();
    if (n < 2)
        throw Error(ErrorKind::InvalidArgument, "paired t-test needs at least two pairs");

    std::vector<double> d(n);
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        d[i] = a[i] - b[i];
        mean += d[i];
    }
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (double v : d)
        ss += (v - mean) * (v - mean);
    const double sd = std::sqrt(ss / static_cast<double>(n - 1));
    if (!(sd > 0.0))
        throw Error(ErrorKind::InvalidArgument, "paired t-test undefined: differences have zero variance");

    TTestResult r;
    r.df = static_cast<int>(n - 1);
    r.t = mean / (sd / std::sqrt(static_cast<double>(n)));
    r.p = 2.0 * student_t_cdf(-std::abs(r.t), r.df);
    return r;
}

}  // namespace eegalign::harness
