#pragma once

namespace webqoe::stats {

// Regularized incomplete beta I_x(a, b) for a, b > 0, x in [0, 1].
double reg_inc_beta(double a, double b, double x);

double t_pdf(double x, int df);
double t_cdf(double x, int df);

// Two-sided p-value of a t statistic.
double t_pvalue(double t, int df);

// Inverse CDF of Student's t; p in (0, 1).
double t_quantile(double p, int df);

}  // namespace webqoe::stats
