#pragma once

// Significance tests behind the reported comparisons. Self-contained:
// Student-t tail probabilities come from a continued-fraction evaluation of
// the regularized incomplete beta function.

#include <span>
#include <string>

namespace gpprobe::stats {

struct StatsResult {
  std::string test_name;
  double t = 0.0;
  double df = 0.0;
  double p = 1.0;           // two-sided
  int direction = 0;        // sign of mean(x) - mean(y)
  int n = 0;
  double mean_difference = 0.0;
  // Zero variance: t is 0 (no difference, p = 1) or +-inf (p = 0).
  bool degenerate = false;
  std::string note;
};

// Regularized incomplete beta I_x(a, b).
double IncompleteBeta(double a, double b, double x);

// Two-sided p = 2 * (1 - CDF_t(|t|, df)). Throws for df <= 0.
double TwoSidedP(double t, double df);

// Paired t-test on d = x - y with an n - 1 denominator. Throws when the
// lengths differ or n < 2.
StatsResult PairedT(std::span<const double> x, std::span<const double> y);

// Welch's unequal-variance t-test with Welch-Satterthwaite df.
StatsResult WelchT(std::span<const double> x, std::span<const double> y);

// Exact two-sided binomial test of `successes` out of `n` against rate p0;
// sums the probabilities of all outcomes no more likely than the observed.
double BinomialTwoSidedP(int successes, int n, double p0 = 0.5);

double Mean(std::span<const double> x);
// Sample variance (n - 1 denominator).
double Variance(std::span<const double> x);

}  // namespace gpprobe::stats
