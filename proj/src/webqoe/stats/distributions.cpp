#include "webqoe/stats/distributions.hpp"

#include <algorithm>
#include <cmath>

#include "webqoe/core/textio.hpp"
#include "webqoe/errors.hpp"
#include "webqoe/scaling/probit.hpp"

namespace webqoe::stats {

namespace {

// Continued fraction for the incomplete beta, evaluated with the modified
// Lentz method. Converges in a handful of terms for x below the switch
// point used by reg_inc_beta.
double betacf(double a, double b, double x) {
  constexpr int kMaxIter = 300;
  constexpr double kEps = 3e-16;
  constexpr double kTiny = 1e-300;

  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) return h;
  }
  return h;
}

void check_df(int df) {
  if (df < 1) throw DomainError("t distribution: df must be >= 1, got " + std::to_string(df));
}

}  // namespace

double reg_inc_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0)) {
    throw DomainError("reg_inc_beta: a and b must be positive");
  }
  if (x < 0.0 || x > 1.0) {
    throw DomainError("reg_inc_beta: x " + fmt_double(x) + " outside [0,1]");
  }
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;

  const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                          a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(ln_front);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return front * betacf(a, b, x) / a;
  }
  return 1.0 - front * betacf(b, a, 1.0 - x) / b;
}

double t_pdf(double x, int df) {
  check_df(df);
  const double nu = df;
  const double ln =
      std::lgamma(0.5 * (nu + 1.0)) - std::lgamma(0.5 * nu) - 0.5 * std::log(nu * M_PI) -
      0.5 * (nu + 1.0) * std::log1p(x * x / nu);
  return std::exp(ln);
}

double t_cdf(double x, int df) {
  check_df(df);
  if (std::isinf(x)) return x > 0 ? 1.0 : 0.0;
  if (x == 0.0) return 0.5;
  const double nu = df;
  const double tail = 0.5 * reg_inc_beta(0.5 * nu, 0.5, nu / (nu + x * x));
  return x > 0 ? 1.0 - tail : tail;
}

double t_pvalue(double t, int df) {
  check_df(df);
  if (std::isinf(t)) return 0.0;
  const double nu = df;
  return reg_inc_beta(0.5 * nu, 0.5, nu / (nu + t * t));
}

double t_quantile(double p, int df) {
  check_df(df);
  if (!(p > 0.0 && p < 1.0)) {
    throw DomainError("t_quantile: p " + fmt_double(p) + " outside (0,1)");
  }
  if (p == 0.5) return 0.0;

  const double nu = df;
  const double z = scaling::probit(p);
  // Cornish-Fisher style seed; Newton plus a bisection bracket finishes it.
  double x = z * (1.0 + (z * z + 1.0) / (4.0 * nu));

  double lo, hi;
  if (p > 0.5) {
    lo = 0.0;
    hi = std::max(2.0 * x, 1.0);
    while (t_cdf(hi, df) < p) hi *= 2.0;
    x = std::clamp(x, lo, hi);
  } else {
    hi = 0.0;
    lo = std::min(2.0 * x, -1.0);
    while (t_cdf(lo, df) > p) lo *= 2.0;
    x = std::clamp(x, lo, hi);
  }

  for (int iter = 0; iter < 100; ++iter) {
    const double f = t_cdf(x, df) - p;
    if (f > 0.0) {
      hi = x;
    } else {
      lo = x;
    }
    const double d = t_pdf(x, df);
    double next = x - f / d;
    if (!std::isfinite(next) || next <= lo || next >= hi) {
      next = 0.5 * (lo + hi);
    }
    if (std::fabs(next - x) <= 1e-14 * std::max(1.0, std::fabs(next))) {
      return next;
    }
    x = next;
  }
  return x;
}

}  // namespace webqoe::stats
