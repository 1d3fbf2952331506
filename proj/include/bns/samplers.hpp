#pragma once

#include "bns/rng.hpp"
#include "bns/specfun.hpp"

#include <span>
#include <vector>

namespace bns {

// Gamma(shape, scale). Marsaglia-Tsang; shapes below one are boosted through
// Gamma(shape + 1) * U^{1/shape}, evaluated in log space.
double sample_gamma(double shape, double scale, RngStream& rng);

// log of a Gamma(shape, 1) variate; finite even when the variate underflows
double sample_log_gamma(double shape, RngStream& rng);

double sample_beta(double a, double b, RngStream& rng);

// Dirichlet with the given positive weights. The last coordinate is set to one
// minus the sequential sum of the others so that the sequential sum is 1.
std::vector<double> sample_dirichlet(std::span<const double> weights, RngStream& rng);

// Generalized inverse Gaussian (Hormann-Leydold ratio-of-uniforms family)
double sample_gig(const GigParams& p, RngStream& rng);

// positive stable with Laplace transform exp(-w^alpha), 0 < alpha < 1
double sample_positive_stable(double alpha, RngStream& rng);

// inverse Gaussian with Laplace exponent delta (sqrt(gamma^2 + 2w) - gamma)
double sample_inverse_gaussian(double delta, double gamma, RngStream& rng);

double sample_lognormal(double mu, double sigma, RngStream& rng);

// |N(0, variance)|
double sample_half_normal(double variance, RngStream& rng);

// exp(-a U): the law with cdf (log y + a) / a on [e^{-a}, 1]
double sample_f_a(double a, RngStream& rng);

} // namespace bns
