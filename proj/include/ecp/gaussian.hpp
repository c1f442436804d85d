#pragma once

namespace ecp {

/// Standard normal cdf, Phi(x) = erfc(-x/sqrt(2))/2.
double norm_cdf(double x);

/// Inverse standard normal cdf. Acklam's rational approximation refined by
/// one Halley step; absolute error below 1e-13 on (0,1).
double norm_icdf(double p);

/// Bivariate standard normal cdf P(X <= x, Y <= y) with correlation rho,
/// following the Gauss-Legendre scheme of Drezner & Genz (2004) ("BVND").
/// Absolute error below 5e-16, well inside the 1e-7 contract.
double bvn_cdf(double x, double y, double rho);

}  // namespace ecp
