#pragma once

namespace relaxsim {

// Standard normal CDF.
double norm_cdf(double x);

// Standard normal quantile on (0,1). Rational approximation refined by one
// Halley step; absolute error is at the level of double rounding.
// Throws DomainError outside (0,1).
double norm_quantile(double u);

} // namespace relaxsim
