#include "gpprobe/stats.h"

#include <cmath>
#include <limits>
#include <vector>

#include "gpprobe/error.h"

namespace gpprobe::stats {

namespace {

constexpr int kMaxIterations = 10000;
constexpr double kTolerance = 1e-12;
constexpr double kTiny = 1e-300;

// Modified Lentz evaluation of the incomplete-beta continued fraction.
double BetaContinuedFraction(double a, double b, double x) {
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIterations; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kTolerance) return h;
  }
  throw ValidationError("incomplete beta: continued fraction did not converge");
}

}  // namespace

double IncompleteBeta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0)) throw ValidationError("incomplete beta: a, b must be > 0");
  if (x < 0.0 || x > 1.0) throw ValidationError("incomplete beta: x outside [0, 1]");
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                           a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return front * BetaContinuedFraction(a, b, x) / a;
  }
  return 1.0 - front * BetaContinuedFraction(b, a, 1.0 - x) / b;
}

double TwoSidedP(double t, double df) {
  if (!(df > 0.0)) throw ValidationError("t_sf: df must be positive");
  if (std::isnan(t)) throw ValidationError("t_sf: t is NaN");
  if (std::isinf(t)) return 0.0;
  const double x = df / (df + t * t);
  const double p = IncompleteBeta(0.5 * df, 0.5, x);
  return std::min(1.0, std::max(0.0, p));
}

double Mean(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v;
  return s / double(x.size());
}

double Variance(std::span<const double> x) {
  const double m = Mean(x);
  double ss = 0.0;
  for (double v : x) ss += (v - m) * (v - m);
  return ss / double(x.size() - 1);
}

namespace {

int Sign(double v) { return (v > 0.0) - (v < 0.0); }

void MarkDegenerate(StatsResult& r) {
  r.degenerate = true;
  r.note = "degenerate: no variance";
  if (r.mean_difference == 0.0) {
    r.t = 0.0;
    r.p = 1.0;
  } else {
    r.t = r.mean_difference > 0.0 ? std::numeric_limits<double>::infinity()
                                  : -std::numeric_limits<double>::infinity();
    r.p = 0.0;
  }
}

}  // namespace

StatsResult PairedT(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw ValidationError("paired t-test: samples differ in length");
  if (x.size() < 2) throw ValidationError("paired t-test: need at least 2 pairs");
  std::vector<double> d(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) d[i] = x[i] - y[i];
  StatsResult r;
  r.test_name = "paired_t";
  r.n = static_cast<int>(d.size());
  r.df = r.n - 1;
  r.mean_difference = Mean(d);
  r.direction = Sign(r.mean_difference);
  const double sd = std::sqrt(Variance(d));
  if (sd == 0.0) {
    MarkDegenerate(r);
    return r;
  }
  r.t = r.mean_difference / (sd / std::sqrt(double(r.n)));
  r.p = TwoSidedP(r.t, r.df);
  return r;
}

StatsResult WelchT(std::span<const double> x, std::span<const double> y) {
  if (x.size() < 2 || y.size() < 2) {
    throw ValidationError("welch t-test: each sample needs at least 2 values");
  }
  StatsResult r;
  r.test_name = "welch_t";
  r.n = static_cast<int>(x.size() + y.size());
  r.mean_difference = Mean(x) - Mean(y);
  r.direction = Sign(r.mean_difference);
  const double a = Variance(x) / double(x.size());
  const double b = Variance(y) / double(y.size());
  const double se2 = a + b;
  if (se2 == 0.0) {
    r.df = double(r.n - 2);
    MarkDegenerate(r);
    return r;
  }
  r.t = r.mean_difference / std::sqrt(se2);
  r.df = se2 * se2 /
         (a * a / double(x.size() - 1) + b * b / double(y.size() - 1));
  r.p = TwoSidedP(r.t, r.df);
  return r;
}

double BinomialTwoSidedP(int successes, int n, double p0) {
  if (n < 0 || successes < 0 || successes > n) {
    throw ValidationError("binomial test: need 0 <= successes <= n");
  }
  if (!(p0 > 0.0 && p0 < 1.0)) throw ValidationError("binomial test: p0 must be in (0,1)");
  const auto log_pmf = [&](int k) {
    return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0) +
           k * std::log(p0) + (n - k) * std::log1p(-p0);
  };
  const double observed = log_pmf(successes);
  double p = 0.0;
  for (int k = 0; k <= n; ++k) {
    const double lp = log_pmf(k);
    if (lp <= observed + 1e-9) p += std::exp(lp);
  }
  return std::min(1.0, p);
}

}  // namespace gpprobe::stats
