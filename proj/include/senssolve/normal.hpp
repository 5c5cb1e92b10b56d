#pragma once

namespace senssolve {

// Standard normal distribution function.
double normal_cdf(double x);

// Upper tail 1 - normal_cdf(x), evaluated without cancellation for large x.
double normal_sf(double x);

// Inverse of normal_cdf on (0, 1). Returns -inf / +inf at 0 / 1.
double normal_quantile(double p);

}  // namespace senssolve
