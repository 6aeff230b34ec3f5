#pragma once

namespace webqoe::scaling {

// Standard normal CDF.
double normal_cdf(double z);

// Standard normal density.
double normal_pdf(double z);

// Inverse standard normal CDF on (0,1); throws DomainError outside.
double probit(double p);

}  // namespace webqoe::scaling
