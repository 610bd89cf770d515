#pragma once

#include <string>
#include <vector>

#include "salref/rng.hpp"

namespace salref {

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // sample (n-1) standard deviation; 0 for a single value
};

MeanStd mean_std(const std::vector<double>& values);

// Table cell in the reporting convention, e.g. "1.3330±0.0084".
std::string format_mean_std(double mean, double std);

// Regularized incomplete beta I_x(a, b) via the Lentz continued fraction,
// accurate to about 1e-10 for the arguments used here.
double incomplete_beta(double a, double b, double x);

// Two-sided Student-t survival: P(|T| >= |t|) with nu degrees of freedom.
double student_t_two_sided_p(double t, double nu);

// Two-sided paired t-test over per-image scores. Throws when the paired
// differences have zero variance (the statistic is undefined).
double paired_t_test(const std::vector<double>& a, const std::vector<double>& b);

// Sign-flip permutation test on paired differences:
// p = (1 + #{ |mean_perm| >= |mean_observed| }) / (iterations + 1).
double permutation_test(const std::vector<double>& a, const std::vector<double>& b,
                        int iterations, Rng& rng);

}  // namespace salref
