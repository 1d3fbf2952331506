#include "bns/samplers.hpp"

#include "bns/errors.hpp"

#include <cmath>
#include <numbers>

namespace bns {

namespace {

// log Gamma(shape, 1) for shape >= 1
double marsaglia_tsang_log(double shape, RngStream& rng)
{
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        const double x = rng.normal();
        double v = 1.0 + c * x;
        if (v <= 0.0) continue;
        v = v * v * v;
        const double u = rng.uniform();
        const double x2 = x * x;
        if (u < 1.0 - 0.0331 * x2 * x2 || std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v)))
            return std::log(d) + std::log(v);
    }
}

double gig_mode(double lambda, double omega)
{
    if (lambda >= 1.0) return (std::sqrt((lambda - 1.0) * (lambda - 1.0) + omega * omega) + (lambda - 1.0)) / omega;
    return omega / (std::sqrt((1.0 - lambda) * (1.0 - lambda) + omega * omega) + (1.0 - lambda));
}

double gig_rou_noshift(double lambda, double omega, RngStream& rng)
{
    const double t = 0.5 * (lambda - 1.0);
    const double s = 0.25 * omega;
    const double xm = gig_mode(lambda, omega);
    const double nc = t * std::log(xm) - s * (xm + 1.0 / xm);
    const double ym = ((lambda + 1.0) + std::sqrt((lambda + 1.0) * (lambda + 1.0) + omega * omega)) / omega;
    const double um = std::exp(0.5 * (lambda + 1.0) * std::log(ym) - s * (ym + 1.0 / ym) - nc);
    for (;;) {
        const double u = um * rng.uniform();
        const double v = rng.uniform();
        const double x = u / v;
        if (std::log(v) <= t * std::log(x) - s * (x + 1.0 / x) - nc) return x;
    }
}

double gig_rou_shift(double lambda, double omega, RngStream& rng)
{
    const double t = 0.5 * (lambda - 1.0);
    const double s = 0.25 * omega;
    const double xm = gig_mode(lambda, omega);
    const double nc = t * std::log(xm) - s * (xm + 1.0 / xm);
    // bounding rectangle from the roots of a cubic (Cardano)
    const double a = -(2.0 * (lambda + 1.0) / omega + xm);
    const double b = 2.0 * (lambda - 1.0) * xm / omega - 1.0;
    const double c = xm;
    const double p = b - a * a / 3.0;
    const double q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;
    const double fi = std::acos(-q / (2.0 * std::sqrt(-(p * p * p) / 27.0)));
    const double fak = 2.0 * std::sqrt(-p / 3.0);
    const double y1 = fak * std::cos(fi / 3.0) - a / 3.0;
    const double y2 = fak * std::cos(fi / 3.0 + 4.0 / 3.0 * std::numbers::pi) - a / 3.0;
    const double uplus = (y1 - xm) * std::exp(t * std::log(y1) - s * (y1 + 1.0 / y1) - nc);
    const double uminus = (y2 - xm) * std::exp(t * std::log(y2) - s * (y2 + 1.0 / y2) - nc);
    for (;;) {
        const double u = uminus + rng.uniform() * (uplus - uminus);
        const double v = rng.uniform();
        const double x = u / v + xm;
        if (x > 0.0 && std::log(v) <= t * std::log(x) - s * (x + 1.0 / x) - nc) return x;
    }
}

// three-piece hat for 0 <= lambda < 1, small omega
double gig_three_piece(double lambda, double omega, RngStream& rng)
{
    const double xm = gig_mode(lambda, omega);
    const double x0 = omega / (1.0 - lambda);
    const double k0 = std::exp((lambda - 1.0) * std::log(xm) - 0.5 * omega * (xm + 1.0 / xm));
    double area[3];
    double k1, k2;
    area[0] = k0 * x0;
    if (x0 >= 2.0 / omega) {
        k1 = 0.0;
        area[1] = 0.0;
        k2 = std::pow(x0, lambda - 1.0);
        area[2] = k2 * 2.0 * std::exp(-omega * x0 / 2.0) / omega;
    } else {
        k1 = std::exp(-omega);
        area[1] = lambda == 0.0 ? k1 * std::log(2.0 / (omega * omega))
                                : k1 / lambda * (std::pow(2.0 / omega, lambda) - std::pow(x0, lambda));
        k2 = std::pow(2.0 / omega, lambda - 1.0);
        area[2] = k2 * 2.0 * std::exp(-1.0) / omega;
    }
    const double total = area[0] + area[1] + area[2];
    for (;;) {
        double v = total * rng.uniform();
        double x, hx;
        if (v <= area[0]) {
            x = x0 * v / area[0];
            hx = k0;
        } else if ((v -= area[0]) <= area[1]) {
            if (lambda == 0.0) {
                x = omega * std::exp(std::exp(omega) * v);
                hx = k1 / x;
            } else {
                x = std::pow(std::pow(x0, lambda) + lambda / k1 * v, 1.0 / lambda);
                hx = k1 * std::pow(x, lambda - 1.0);
            }
        } else {
            v -= area[1];
            const double lo = std::max(x0, 2.0 / omega);
            x = -2.0 / omega * std::log(std::exp(-omega / 2.0 * lo) - omega / (2.0 * k2) * v);
            hx = k2 * std::exp(-omega / 2.0 * x);
        }
        const double u = rng.uniform() * hx;
        if (std::log(u) <= (lambda - 1.0) * std::log(x) - omega / 2.0 * (x + 1.0 / x)) return x;
    }
}

} // namespace

double sample_log_gamma(double shape, RngStream& rng)
{
    require(shape > 0.0 && std::isfinite(shape), "gamma shape must be positive and finite");
    if (shape >= 1.0) return marsaglia_tsang_log(shape, rng);
    const double boosted = marsaglia_tsang_log(shape + 1.0, rng);
    return boosted + std::log(rng.uniform()) / shape;
}

double sample_gamma(double shape, double scale, RngStream& rng)
{
    require(scale > 0.0 && std::isfinite(scale), "gamma scale must be positive and finite");
    return scale * std::exp(sample_log_gamma(shape, rng));
}

double sample_beta(double a, double b, RngStream& rng)
{
    require(a > 0.0 && b > 0.0, "beta parameters must be positive");
    if (a == 1.0) return -std::expm1(std::log(rng.uniform()) / b);
    if (b == 1.0) return std::exp(std::log(rng.uniform()) / a);
    const double la = sample_log_gamma(a, rng);
    const double lb = sample_log_gamma(b, rng);
    // X / (X + Y) = 1 / (1 + exp(lb - la))
    return 1.0 / (1.0 + std::exp(lb - la));
}

std::vector<double> sample_dirichlet(std::span<const double> weights, RngStream& rng)
{
    require(!weights.empty(), "dirichlet needs at least one weight");
    std::vector<double> out(weights.size());
    double top = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < weights.size(); ++i) {
        out[i] = sample_log_gamma(weights[i], rng);
        top = std::max(top, out[i]);
    }
    double total = 0.0;
    for (auto& v : out) {
        v = std::exp(v - top);
        total += v;
    }
    double partial = 0.0;
    for (std::size_t i = 0; i + 1 < out.size(); ++i) {
        out[i] /= total;
        partial += out[i];
    }
    out.back() = std::max(0.0, 1.0 - partial);
    return out;
}

double sample_gig(const GigParams& p, RngStream& rng)
{
    validate(p);
    if (p.delta == 0.0) return sample_gamma(p.nu, 2.0 / (p.gamma * p.gamma), rng);
    if (p.gamma == 0.0) return 0.5 * p.delta * p.delta / sample_gamma(-p.nu, 1.0, rng);
    const double lambda = std::abs(p.nu);
    const double omega = p.delta * p.gamma;
    const double alpha = p.delta / p.gamma;
    double x;
    if (lambda > 2.0 || omega > 3.0)
        x = gig_rou_shift(lambda, omega, rng);
    else if (lambda >= 1.0 - 2.25 * omega * omega || omega > 0.2)
        x = gig_rou_noshift(lambda, omega, rng);
    else
        x = gig_three_piece(lambda, omega, rng);
    return p.nu < 0.0 ? alpha / x : alpha * x;
}

double sample_positive_stable(double alpha, RngStream& rng)
{
    require(alpha > 0.0 && alpha < 1.0, "stable index must lie in (0, 1)");
    const double v = std::numbers::pi * rng.uniform();
    const double e = rng.exponential();
    const double log_s = std::log(std::sin(alpha * v)) - std::log(std::sin(v)) / alpha +
                         (1.0 - alpha) / alpha * (std::log(std::sin((1.0 - alpha) * v)) - std::log(e));
    return std::exp(log_s);
}

double sample_inverse_gaussian(double delta, double gamma, RngStream& rng)
{
    require(delta > 0.0 && gamma >= 0.0, "inverse Gaussian needs delta > 0, gamma >= 0");
    const double n = rng.normal();
    if (gamma == 0.0) return delta * delta / (n * n);
    // Michael-Schucany-Haas with mean delta/gamma and shape delta^2
    const double mu = delta / gamma;
    const double shape = delta * delta;
    const double y = n * n;
    const double x = mu + mu * mu * y / (2.0 * shape) -
                     mu / (2.0 * shape) * std::sqrt(4.0 * mu * shape * y + mu * mu * y * y);
    const double u = rng.uniform();
    return u <= mu / (mu + x) ? x : mu * mu / x;
}

double sample_lognormal(double mu, double sigma, RngStream& rng)
{
    require(sigma >= 0.0, "lognormal sigma must be non-negative");
    return std::exp(mu + sigma * rng.normal());
}

double sample_half_normal(double variance, RngStream& rng)
{
    require(variance > 0.0, "half-normal variance must be positive");
    return std::sqrt(variance) * std::abs(rng.normal());
}

double sample_f_a(double a, RngStream& rng)
{
    require(a > 0.0, "F_a needs a > 0");
    return std::exp(-a * rng.uniform());
}

} // namespace bns
