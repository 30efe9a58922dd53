#include "fewsel/stats.hpp"

#include <algorithm>
#include <cmath>

#include "fewsel/error.hpp"

namespace fewsel {

namespace {

double log_beta(double a, double b) { return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b); }

// Continued fraction for the incomplete beta (modified Lentz).
double beta_cont_fraction(double x, double a, double b) {
    constexpr double kTiny = 1e-300;
    constexpr double kEps = 1e-15;
    constexpr int kMaxIter = 200000;

    double c = 1.0;
    double d = 1.0 - (a + b) * x / (a + 1.0);
    if (std::abs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double result = d;

    for (int n = 1; n <= kMaxIter; ++n) {
        const double m = n;
        // even step
        double numer = m * (b - m) * x / ((a + 2.0 * m - 1.0) * (a + 2.0 * m));
        d = 1.0 + numer * d;
        if (std::abs(d) < kTiny) d = kTiny;
        c = 1.0 + numer / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        result *= d * c;
        // odd step
        numer = -(a + m) * (a + b + m) * x / ((a + 2.0 * m) * (a + 2.0 * m + 1.0));
        d = 1.0 + numer * d;
        if (std::abs(d) < kTiny) d = kTiny;
        c = 1.0 + numer / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double mult = d * c;
        result *= mult;
        if (std::abs(mult - 1.0) < kEps) break;
    }
    return result;
}

}  // namespace

double regularized_incomplete_beta(double x, double a, double b) {
    if (!(x >= 0.0 && x <= 1.0 && a > 0.0 && b > 0.0))
        throw ValidationError("regularized_incomplete_beta: arguments out of range");
    if (x == 0.0) return 0.0;
    if (x == 1.0) return 1.0;
    const double front = std::exp(a * std::log(x) + b * std::log(1.0 - x) - log_beta(a, b));
    // symmetry keeps the continued fraction in its fast-converging region
    if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_cont_fraction(x, a, b) / a;
    const double front_sym =
        std::exp(b * std::log(1.0 - x) + a * std::log(x) - log_beta(b, a));
    return 1.0 - front_sym * beta_cont_fraction(1.0 - x, b, a) / b;
}

double student_t_two_sided_p(double t, int df) {
    if (df < 1) throw ValidationError("degrees of freedom must be >= 1");
    if (t == 0.0) return 1.0;
    const double v = static_cast<double>(df);
    return regularized_incomplete_beta(v / (t * t + v), v / 2.0, 0.5);
}

TTestResult paired_ttest(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) throw ValidationError("paired t-test: length mismatch");
    if (a.size() < 2) throw ValidationError("paired t-test: need at least 2 pairs");

    const std::size_t n = a.size();
    std::vector<double> d(n);
    for (std::size_t i = 0; i < n; ++i) d[i] = a[i] - b[i];

    double mean = 0.0;
    for (const double v : d) mean += v;
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (const double v : d) ss += (v - mean) * (v - mean);
    const double sd = std::sqrt(ss / static_cast<double>(n - 1));

    TTestResult res;
    res.df = static_cast<int>(n) - 1;
    if (sd == 0.0) {
        // all differences equal; zero differences give the conventional (0, 1)
        if (mean == 0.0) {
            res.t = 0.0;
            res.p = 1.0;
        } else {
            res.t = mean > 0 ? HUGE_VAL : -HUGE_VAL;
            res.p = 0.0;
        }
        return res;
    }
    res.t = mean / (sd / std::sqrt(static_cast<double>(n)));
    res.p = student_t_two_sided_p(res.t, res.df);
    return res;
}

double median(std::vector<double> values) {
    if (values.empty()) throw ValidationError("median of empty set");
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    if (n % 2 == 1) return values[n / 2];
    return 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

std::map<std::string, double> aggregate_deltas(
    const std::map<std::string, double>& deltas,
    const std::map<std::string, std::string>& unit_to_category) {
    if (deltas.empty()) throw ValidationError("no deltas to aggregate");
    std::map<std::string, double> sums;
    std::map<std::string, std::size_t> counts;
    for (const auto& [unit, delta] : deltas) {
        const auto it = unit_to_category.find(unit);
        if (it == unit_to_category.end())
            throw ValidationError("unit '" + unit + "' has no category");
        sums[it->second] += delta;
        ++counts[it->second];
    }
    std::map<std::string, double> means;
    for (const auto& [cat, sum] : sums) means[cat] = sum / static_cast<double>(counts[cat]);
    return means;
}

}  // namespace fewsel
