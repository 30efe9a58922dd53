#pragma once

#include <map>
#include <string>
#include <vector>

namespace fewsel {

struct TTestResult {
    double t = 0.0;
    double p = 1.0;
    int df = 0;
};

// Regularized incomplete beta I_x(a, b), evaluated with the Lentz continued
// fraction. Accurate to ~1e-14 over the t-distribution's parameter range.
double regularized_incomplete_beta(double x, double a, double b);

// Two-sided Student-t tail probability: P(|T_df| >= |t|).
double student_t_two_sided_p(double t, int df);

// Paired two-sided Student's t-test on the per-index differences a - b.
// Sample standard deviation (n - 1); df = n - 1. All-zero differences give
// t = 0, p = 1 by convention.
TTestResult paired_ttest(const std::vector<double>& a, const std::vector<double>& b);

// Median with the usual midpoint rule for even sizes.
double median(std::vector<double> values);

// Arithmetic mean of per-unit values within each category. Inputs are
// expected to be medians over seeds already; every unit must be mapped.
std::map<std::string, double> aggregate_deltas(
    const std::map<std::string, double>& deltas,
    const std::map<std::string, std::string>& unit_to_category);

}  // namespace fewsel
