#include "bns/specfun.hpp"

#include "bns/errors.hpp"
#include "bns/quadrature.hpp"

#include <cmath>
#include <iterator>
#include <limits>
#include <numbers>
#include <vector>

namespace bns {

namespace {

constexpr double pi = std::numbers::pi;
constexpr double pi2_6 = pi * pi / 6.0;

double dilog_series(double x)
{
    double sum = 0.0;
    double power = x;
    for (int k = 1; k < 200; ++k) {
        const double term = power / (static_cast<double>(k) * k);
        sum += term;
        if (std::abs(term) <= 1e-17 * std::abs(sum)) break;
        power *= x;
    }
    return sum;
}

} // namespace

double dilog(double x)
{
    if (!(x <= 1.0)) throw DomainError("dilog: argument must be <= 1");
    if (x == 1.0) return pi2_6;
    if (x >= -0.5 && x <= 0.5) return dilog_series(x);
    if (x > 0.5) return pi2_6 - std::log(x) * std::log1p(-x) - dilog_series(1.0 - x);
    if (x >= -1.0) {
        const double l = std::log1p(-x);
        return -dilog_series(x / (x - 1.0)) - 0.5 * l * l;
    }
    const double l = std::log(-x);
    return -pi2_6 - 0.5 * l * l - dilog(1.0 / x);
}

double expint_e1(double x)
{
    if (!(x > 0.0)) throw DomainError("expint_e1: argument must be positive");
    if (x <= 1.0) {
        double sum = 0.0;
        double term = 1.0;
        for (int k = 1; k < 100; ++k) {
            term *= -x / k;
            const double add = -term / k;
            sum += add;
            if (std::abs(add) < 1e-18 * std::abs(sum)) break;
        }
        return -std::numbers::egamma - std::log(x) + sum;
    }
    // modified Lentz evaluation of the continued fraction
    const double tiny = 1e-300;
    double b = x + 1.0;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < 1000; ++i) {
        const double an = -static_cast<double>(i) * i;
        b += 2.0;
        d = 1.0 / (an * d + b);
        c = b + an / c;
        const double del = c * d;
        h *= del;
        if (std::abs(del - 1.0) < 1e-16) return h * std::exp(-x);
    }
    throw NumericError("expint_e1: continued fraction did not converge");
}

std::optional<int> half_integer_order(double nu)
{
    const double m = std::abs(nu) - 0.5;
    const double r = std::round(m);
    if (r >= 0.0 && std::abs(m - r) < 1e-9) return static_cast<int>(r);
    return std::nullopt;
}

double log_bessel_k_half_integer(int m, double x)
{
    if (!(x > 0.0)) throw DomainError("bessel_k: argument must be positive");
    if (m < 0) throw DomainError("bessel_k: negative half-integer index");
    // terms (m+k)!/(k!(m-k)!) (2x)^{-k}, accumulated in log space
    std::vector<double> logs(m + 1);
    double log_c = 0.0;
    const double log_2x = std::log(2.0 * x);
    for (int k = 0; k <= m; ++k) {
        logs[k] = log_c - k * log_2x;
        log_c += std::log(static_cast<double>(m + k + 1) * (m - k) / (k + 1.0));
    }
    return 0.5 * std::log(pi / (2.0 * x)) - x + log_sum_exp(logs.data(), logs.size());
}

double log_bessel_k_integral(double nu, double x)
{
    if (!(x > 0.0)) throw DomainError("bessel_k: argument must be positive");
    if (!std::isfinite(nu)) throw DomainError("bessel_k: order must be finite");
    nu = std::abs(nu);
    // K_nu(x) = int_0^inf exp(-x cosh t) cosh(nu t) dt
    auto g = [nu, x](double t) {
        const double nt = nu * t;
        const double log_cosh = nt + std::log1p(std::exp(-2.0 * nt)) - std::numbers::ln2;
        return -x * std::cosh(t) + log_cosh;
    };
    double peak = 0.0;
    if (nu * nu > x) {
        auto slope = [nu, x](double t) { return nu * std::tanh(nu * t) - x * std::sinh(t); };
        double lo = 0.0;
        double hi = std::asinh(nu / x) + 1.0;
        while (slope(hi) > 0.0) hi *= 2.0;
        for (int i = 0; i < 200 && hi - lo > 1e-15 * hi; ++i) {
            const double mid = 0.5 * (lo + hi);
            (slope(mid) > 0.0 ? lo : hi) = mid;
        }
        peak = 0.5 * (lo + hi);
    }
    const double g_peak = g(peak);
    const double drop = 50.0;
    double step = 1.0 / std::sqrt(x + nu * nu + 1.0);
    double right = peak + step;
    while (g(right) - g_peak > -drop) {
        step *= 2.0;
        right = peak + step;
    }
    double left = 0.0;
    if (peak > 0.0) {
        step = 1.0 / std::sqrt(x + nu * nu + 1.0);
        left = std::max(0.0, peak - step);
        while (left > 0.0 && g(left) - g_peak > -drop) {
            step *= 2.0;
            left = std::max(0.0, peak - step);
        }
    }
    auto f = [&](double t) { return std::exp(g(t) - g_peak); };
    const quad::Options opt{0.0, 1e-15, 400};
    double total = 0.0;
    if (peak > left) total += quad::integrate(f, left, peak, opt).value;
    total += quad::integrate(f, peak, right, opt).value;
    if (!(total > 0.0) || !std::isfinite(total)) throw NumericError("bessel_k: quadrature failed");
    return g_peak + std::log(total);
}

namespace {

// Taylor coefficients of 1 / Gamma(1 + z)
constexpr double inv_gamma_series[] = {
    1.0,
    0.57721566490153286061,
    -0.65587807152025388108,
    -0.042002635034095235529,
    0.1665386113822914895,
    -0.042197734555544336748,
    -0.0096219715278769735621,
    0.0072189432466630995424,
    -0.0011651675918590651121,
    -0.00021524167411495097282,
    0.00012805028238811618615,
    -0.000020134854780788238656,
    -1.2504934821426706573e-6,
    1.1330272319816958824e-6,
    -2.0563384169776071035e-7,
    6.1160951044814158179e-9,
    5.0020076444692229301e-9,
    -1.1812745704870201446e-9,
    1.0434267116911005105e-10,
    7.782263439905071254e-12,
    -3.6968056186422057082e-12,
    5.100370287454475979e-13,
    -2.0583260535665067832e-14,
    -5.3481225394230179824e-15,
    1.2267786282382607902e-15,
};

// log K_mu(x) and K_{mu+1}(x) / K_mu(x) for |mu| <= 1/2: Temme's series
// below x = 2, Steed's continued fraction above
std::pair<double, double> bessel_k_seed(double mu, double x)
{
    constexpr double eps = 1e-17;
    const double mu2 = mu * mu;
    if (x < 2.0) {
        double odd = 0.0, even = 0.0, pw = 1.0;
        for (std::size_t k = 0; k < std::size(inv_gamma_series); ++k) {
            (k % 2 == 0 ? even : odd) += inv_gamma_series[k] * pw;
            if (k % 2 == 1) pw *= mu2;
        }
        // even/odd parts in mu: 1/Gamma(1 +- mu) = even +- mu odd
        const double gam1 = -odd;
        const double gam2 = even;
        const double gampl = even + mu * odd;
        const double gammi = even - mu * odd;
        const double half = 0.5 * x;
        const double pimu = std::numbers::pi * mu;
        const double fact = std::abs(pimu) < 1e-15 ? 1.0 : pimu / std::sin(pimu);
        const double d = -std::log(half);
        const double e = mu * d;
        const double fact2 = std::abs(e) < 1e-15 ? 1.0 : std::sinh(e) / e;
        double ff = fact * (gam1 * std::cosh(e) + gam2 * fact2 * d);
        double sum = ff;
        const double ee = std::exp(e);
        double p = 0.5 * ee / gampl;
        double q = 0.5 / (ee * gammi);
        double c = 1.0;
        const double hh = half * half;
        double sum1 = p;
        for (int i = 1; i < 500; ++i) {
            const double di = i;
            ff = (di * ff + p + q) / (di * di - mu2);
            c *= hh / di;
            p /= di - mu;
            q /= di + mu;
            const double del = c * ff;
            sum += del;
            sum1 += c * (p - di * ff);
            if (std::abs(del) < std::abs(sum) * eps) break;
        }
        return {std::log(sum), sum1 * (2.0 / x) / sum};
    }
    double b = 2.0 * (1.0 + x);
    double d = 1.0 / b;
    double h = d, delh = d;
    double q1 = 0.0, q2 = 1.0;
    const double a1 = 0.25 - mu2;
    double q = a1, c = a1, a = -a1;
    double s = 1.0 + q * delh;
    for (int i = 2; i < 100000; ++i) {
        a -= 2.0 * (i - 1);
        c = -a * c / i;
        const double qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0;
        d = 1.0 / (b + a * d);
        delh = (b * d - 1.0) * delh;
        h += delh;
        const double dels = q * delh;
        s += dels;
        if (std::abs(dels / s) < eps) break;
    }
    h *= a1;
    return {0.5 * std::log(std::numbers::pi / (2.0 * x)) - x - std::log(s), (mu + x + 0.5 - h) / x};
}

} // namespace

double log_bessel_k(double nu, double x)
{
    if (!(x > 0.0)) throw DomainError("bessel_k: argument must be positive");
    if (!std::isfinite(nu)) throw DomainError("bessel_k: order must be finite");
    if (auto m = half_integer_order(nu)) return log_bessel_k_half_integer(*m, x);
    nu = std::abs(nu);
    const int steps = static_cast<int>(nu + 0.5);
    const double mu = nu - steps;
    auto [log_k, ratio] = bessel_k_seed(mu, x);
    // forward recurrence on the ratios K_{mu+i+1} / K_{mu+i}, stable for K
    for (int i = 0; i < steps; ++i) {
        log_k += std::log(ratio);
        ratio = 2.0 * (mu + i + 1) / x + 1.0 / ratio;
    }
    if (!std::isfinite(log_k)) throw NumericError("bessel_k: evaluation failed");
    return log_k;
}

double bessel_k(double nu, double x) { return std::exp(log_bessel_k(nu, x)); }

void validate(const GigParams& p)
{
    require(std::isfinite(p.nu) && std::isfinite(p.delta) && std::isfinite(p.gamma),
            "GIG parameters must be finite");
    require(p.delta >= 0.0 && p.gamma >= 0.0, "GIG delta and gamma must be non-negative");
    if (p.delta == 0.0) require(p.nu > 0.0 && p.gamma > 0.0, "GIG with delta = 0 needs nu > 0, gamma > 0");
    if (p.gamma == 0.0) require(p.nu < 0.0 && p.delta > 0.0, "GIG with gamma = 0 needs nu < 0, delta > 0");
}

double gig_log_density(double x, const GigParams& p)
{
    validate(p);
    if (!(x > 0.0)) return -std::numeric_limits<double>::infinity();
    if (p.delta == 0.0) {
        // Gamma(nu) with rate gamma^2 / 2
        const double rate = 0.5 * p.gamma * p.gamma;
        return p.nu * std::log(rate) - std::lgamma(p.nu) + (p.nu - 1.0) * std::log(x) - rate * x;
    }
    if (p.gamma == 0.0) {
        // inverse gamma with shape -nu and scale delta^2 / 2
        const double s = 0.5 * p.delta * p.delta;
        const double k = -p.nu;
        return k * std::log(s) - std::lgamma(k) - (k + 1.0) * std::log(x) - s / x;
    }
    return p.nu * std::log(p.gamma / p.delta) - std::numbers::ln2 - log_bessel_k(p.nu, p.delta * p.gamma) +
           (p.nu - 1.0) * std::log(x) - 0.5 * (p.delta * p.delta / x + p.gamma * p.gamma * x);
}

double gig_density(double x, const GigParams& p) { return std::exp(gig_log_density(x, p)); }

double gig_moment(const GigParams& p, double order)
{
    validate(p);
    if (p.delta == 0.0) {
        const double rate = 0.5 * p.gamma * p.gamma;
        return std::exp(std::lgamma(p.nu + order) - std::lgamma(p.nu) - order * std::log(rate));
    }
    if (p.gamma == 0.0) {
        const double s = 0.5 * p.delta * p.delta;
        const double k = -p.nu;
        if (order >= k) return std::numeric_limits<double>::infinity();
        return std::exp(std::lgamma(k - order) - std::lgamma(k) + order * std::log(s));
    }
    const double w = p.delta * p.gamma;
    return std::exp(order * std::log(p.delta / p.gamma) + log_bessel_k(p.nu + order, w) - log_bessel_k(p.nu, w));
}

double normal_log_density(double x, double mean, double variance)
{
    const double d = x - mean;
    return -0.5 * (std::log(2.0 * pi * variance) + d * d / variance);
}

double normal_density(double x, double mean, double variance)
{
    return std::exp(normal_log_density(x, mean, variance));
}

double log_sum_exp(const double* values, std::size_t count)
{
    double m = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < count; ++i) m = std::max(m, values[i]);
    if (!std::isfinite(m)) return m;
    double s = 0.0;
    for (std::size_t i = 0; i < count; ++i) s += std::exp(values[i] - m);
    return m + std::log(s);
}

} // namespace bns
