#pragma once

#include <cstddef>
#include <optional>

namespace bns {

// Real dilogarithm Li2(x) = -int_0^x log(1-t)/t dt, defined for x <= 1.
double dilog(double x);

// Exponential integral E1(x) = int_x^inf e^{-t}/t dt for x > 0.
double expint_e1(double x);

// Modified Bessel function of the second kind. The half-integer closed form
// is used whenever |nu| is within 1e-9 of m + 1/2.
double bessel_k(double nu, double x);
double log_bessel_k(double nu, double x);

// General route through the integral representation, no half-integer shortcut.
double log_bessel_k_integral(double nu, double x);

// m such that |nu| = m + 1/2 (within 1e-9), if any.
std::optional<int> half_integer_order(double nu);

// log K_{m+1/2}(x) from the terminating series.
double log_bessel_k_half_integer(int m, double x);

struct GigParams {
    double nu = 0.0;
    double delta = 0.0;
    double gamma = 0.0;
};

void validate(const GigParams& p);

// density proportional to x^{nu-1} exp(-(delta^2/x + gamma^2 x)/2)
double gig_log_density(double x, const GigParams& p);
double gig_density(double x, const GigParams& p);

// E[X^r]
double gig_moment(const GigParams& p, double order);

double normal_log_density(double x, double mean, double variance);
double normal_density(double x, double mean, double variance);

// log of sum of exp(values) computed stably
double log_sum_exp(const double* values, std::size_t count);

} // namespace bns
