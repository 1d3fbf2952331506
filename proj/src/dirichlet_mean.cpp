#include "bns/dirichlet_mean.hpp"

#include "bns/quadrature.hpp"
#include "bns/samplers.hpp"

#include <algorithm>
#include <limits>
#include <memory>
#include <numbers>

namespace bns {

namespace {

constexpr double pi = std::numbers::pi;
constexpr int expect_nodes = 96;

} // namespace

BaseMeasure f_a_measure(double a)
{
    require(a > 0.0 && std::isfinite(a), "F_a needs a > 0");
    BaseMeasure m;
    m.name = "f_a";
    m.lo = std::exp(-a);
    m.hi = 1.0;
    m.sample = [a](RngStream& rng) { return sample_f_a(a, rng); };
    m.cdf = [a](double x) {
        if (x <= std::exp(-a)) return 0.0;
        if (x >= 1.0) return 1.0;
        return (std::log(x) + a) / a;
    };
    m.log_potential = [a](double x) { return f_a_log_potential(x, a); };
    m.expect = [a](const std::function<double(double)>& f) {
        return quad::gauss_legendre_integrate([&](double v) { return f(std::exp(-a * v)); }, 0.0, 1.0,
                                              expect_nodes);
    };
    return m;
}

BaseMeasure arcsine_measure(double lo, double hi)
{
    require(lo < hi, "arcsine measure needs lo < hi");
    BaseMeasure m;
    m.name = "arcsine";
    m.lo = lo;
    m.hi = hi;
    const double w = hi - lo;
    m.sample = [lo, w](RngStream& rng) {
        const double s = std::sin(0.5 * pi * rng.uniform());
        return lo + w * s * s;
    };
    m.cdf = [lo, w](double x) {
        const double t = (x - lo) / w;
        if (t <= 0.0) return 0.0;
        if (t >= 1.0) return 1.0;
        return 2.0 / pi * std::asin(std::sqrt(t));
    };
    // equilibrium measure of the interval: constant potential log(w / 4)
    m.log_potential = [w](double) { return std::log(0.25 * w); };
    m.expect = [lo, w](const std::function<double(double)>& f) {
        return 2.0 / pi * quad::gauss_legendre_integrate(
                              [&](double phi) {
                                  const double s = std::sin(phi);
                                  return f(lo + w * s * s);
                              },
                              0.0, 0.5 * pi, expect_nodes);
    };
    return m;
}

BaseMeasure uniform_measure(double lo, double hi)
{
    require(lo < hi, "uniform measure needs lo < hi");
    BaseMeasure m;
    m.name = "uniform";
    m.lo = lo;
    m.hi = hi;
    m.sample = [lo, hi](RngStream& rng) { return lo + (hi - lo) * rng.uniform(); };
    m.cdf = [lo, hi](double x) { return std::clamp((x - lo) / (hi - lo), 0.0, 1.0); };
    m.expect = [lo, hi](const std::function<double(double)>& f) {
        return quad::gauss_legendre_integrate(f, lo, hi, expect_nodes) / (hi - lo);
    };
    return m;
}

BaseMeasure point_mass(double c)
{
    BaseMeasure m;
    m.name = "point_mass";
    m.lo = c;
    m.hi = c;
    m.sample = [c](RngStream&) { return c; };
    m.cdf = [c](double x) { return x >= c ? 1.0 : 0.0; };
    m.expect = [c](const std::function<double(double)>& f) { return f(c); };
    return m;
}

BaseMeasure empirical_measure(std::vector<double> draws, std::string name)
{
    require(draws.size() >= 2, "empirical measure needs at least two draws");
    std::sort(draws.begin(), draws.end());
    require(draws.front() < draws.back(), "empirical measure needs distinct draws");
    auto sorted = std::make_shared<const std::vector<double>>(std::move(draws));
    BaseMeasure m;
    m.name = std::move(name);
    m.lo = sorted->front();
    m.hi = sorted->back();
    const double cells = static_cast<double>(sorted->size() - 1);
    m.sample = [sorted, cells](RngStream& rng) {
        const double u = rng.uniform() * cells;
        const auto k = std::min(static_cast<std::size_t>(u), sorted->size() - 2);
        const double f = u - static_cast<double>(k);
        return (*sorted)[k] + f * ((*sorted)[k + 1] - (*sorted)[k]);
    };
    m.cdf = [sorted, cells](double x) {
        const auto& s = *sorted;
        if (x <= s.front()) return 0.0;
        if (x >= s.back()) return 1.0;
        const auto it = std::upper_bound(s.begin(), s.end(), x);
        const auto k = static_cast<std::size_t>(it - s.begin()) - 1;
        const double span = s[k + 1] - s[k];
        const double f = span > 0.0 ? (x - s[k]) / span : 1.0;
        return (static_cast<double>(k) + f) / cells;
    };
    m.expect = [sorted](const std::function<double(double)>& f) {
        // midpoint rule over each interpolation cell
        const auto& s = *sorted;
        double sum = 0.0;
        for (std::size_t k = 0; k + 1 < s.size(); ++k) sum += f(0.5 * (s[k] + s[k + 1]));
        return sum / static_cast<double>(s.size() - 1);
    };
    return m;
}

double perfect_sample_mean(const MeanFunctionalSpec& spec, RngStream& rng, const CouplingConfig& cfg)
{
    return perfect_sample_mean_traced(spec, rng, cfg).value;
}

CouplingTrace perfect_sample_mean_traced(const MeanFunctionalSpec& spec, RngStream& rng, const CouplingConfig& cfg,
                                         const CouplingObserver& observe)
{
    require(static_cast<bool>(spec.base.sample), "Dirichlet mean: base measure has no sampler");
    const auto& draw = spec.base.sample;
    if (observe)
        return detail::couple_from_past(spec.mass, spec.base.lo, spec.base.hi, draw, rng, cfg, observe);
    return detail::couple_from_past(spec.mass, spec.base.lo, spec.base.hi, draw, rng, cfg, detail::NoObserver{});
}

double perfect_sample_mean_f_a(double mass, double a, RngStream& rng, const CouplingConfig& cfg)
{
    require(a > 0.0, "F_a needs a > 0");
    auto draw = [a](RngStream& r) { return std::exp(-a * r.uniform()); };
    return detail::couple_from_past(mass, std::exp(-a), 1.0, draw, rng, cfg, detail::NoObserver{}).value;
}

double f_a_log_potential(double x, double a)
{
    require(x > 0.0 && x <= 1.0 && a > 0.0, "F_a log potential: x must lie in (0, 1]");
    const double lx = std::log(x);
    return lx * lx / (2.0 * a) + lx + (dilog(x) + dilog(std::exp(-a) / x)) / a - pi * pi / (3.0 * a);
}

double log_potential(double x, const BaseMeasure& base)
{
    if (base.log_potential) return base.log_potential(x);
    require(static_cast<bool>(base.cdf), "log potential: base measure has no cdf");
    const double lo = base.lo, hi = base.hi;
    require(lo < hi, "log potential: degenerate base measure");
    const double hx = base.cdf(x);
    const quad::Options opt{1e-15, 1e-12, 2000};
    double total = 0.0;
    if (x > lo) {
        const double dist = x - lo;
        if (hx > 0.0) total += hx * std::log(dist);
        // int_lo^x (H(t) - H(x)) / (x - t) dt with t = x - s^2
        auto f = [&](double s) {
            if (s == 0.0) return 0.0;
            return 2.0 * (base.cdf(x - s * s) - hx) / s;
        };
        const double top = std::sqrt(dist);
        total += quad::integrate(f, 0.0, top, opt).value;
    }
    if (x < hi) {
        const double dist = hi - x;
        if (hx < 1.0) total += (1.0 - hx) * std::log(dist);
        auto f = [&](double s) {
            if (s == 0.0) return 0.0;
            return 2.0 * (base.cdf(x + s * s) - hx) / s;
        };
        total -= quad::integrate(f, 0.0, std::sqrt(dist), opt).value;
    }
    return total;
}

double cr_density(double x, const MeanFunctionalSpec& spec)
{
    const auto& base = spec.base;
    const double mass = spec.mass;
    require(base.lo < base.hi, "cr_density: base measure must not be degenerate");
    require(mass >= 1.0 - 1e-12, "cr_density: mass must be at least 1");
    if (!(x > base.lo && x < base.hi)) return 0.0;
    if (std::abs(mass - 1.0) <= 1e-12)
        return std::sin(pi * base.cdf(x)) * std::exp(-log_potential(x, base)) / pi;

    const double excess = mass - 1.0;
    auto kernel = [&](double u) {
        if (!(u > base.lo)) return 0.0;
        return std::sin(pi * mass * base.cdf(u)) * std::exp(-mass * log_potential(u, base));
    };
    const quad::Options opt{1e-14, 1e-10, 1000};
    if (excess >= 1.0) {
        auto f = [&](double u) { return std::pow(x - u, excess - 1.0) * kernel(u); };
        return excess / pi * quad::integrate(f, base.lo, x, opt).value;
    }
    // w = (x - u)^{mass - 1} removes the endpoint singularity
    auto f = [&](double w) { return kernel(x - std::pow(w, 1.0 / excess)); };
    return quad::integrate(f, 0.0, std::pow(x - base.lo, excess), opt).value / pi;
}

double dilog_density_m1(double x, double a)
{
    require(a > 0.0, "dilog density needs a > 0");
    const double lo = std::exp(-a);
    if (!(x > lo && x < 1.0)) return 0.0;
    const double lx = std::log(x);
    return std::sin(-pi * lx / a) / pi * std::exp(-f_a_log_potential(x, a));
}

double dilog_density_v(double v, double a)
{
    require(a > 0.0, "dilog density needs a > 0");
    if (!(v > 0.0 && v < 1.0)) return 0.0;
    const double tail = dilog(std::exp(-a * v)) + dilog(std::exp(-a * (1.0 - v)));
    return a / pi * std::sin(pi * v) * std::exp(-0.5 * a * v * v + pi * pi / (3.0 * a) - tail / a);
}

double dilog_density_general(double x, double mass, double a)
{
    require(mass >= 1.0 - 1e-12, "dilog density needs mass >= 1");
    if (std::abs(mass - 1.0) <= 1e-12) return dilog_density_m1(x, a);
    return cr_density(x, {mass, f_a_measure(a)});
}

double integer_decomposition_sample(int m, const BaseMeasure& base, RngStream& rng, DecompositionMethod method)
{
    require(m >= 1, "integer decomposition needs m >= 1");
    std::vector<double> means(m);
    if (method == DecompositionMethod::perfect) {
        const MeanFunctionalSpec spec{1.0, base};
        for (auto& v : means) v = perfect_sample_mean(spec, rng);
    } else {
        const MeanFunctionalSpec spec{1.0, base};
        RejectionSampler sampler([spec](double x) { return cr_density(x, spec); }, base.lo, base.hi);
        for (auto& v : means) {
            for (;;) {
                try {
                    v = sampler.sample(rng);
                    break;
                } catch (const EnvelopeError&) {
                }
            }
        }
    }
    const std::vector<double> ones(m, 1.0);
    const auto w = sample_dirichlet(ones, rng);
    double total = 0.0;
    for (int k = 0; k < m; ++k) total += w[k] * means[k];
    return total;
}

RejectionSampler::RejectionSampler(std::function<double(double)> density, double lo, double hi, int grid)
    : density_(std::move(density)), lo_(lo), hi_(hi)
{
    require(lo < hi && grid >= 4, "rejection sampler needs lo < hi and a grid of at least 4 points");
    std::vector<double> xs(grid + 1), fs(grid + 1);
    for (int i = 0; i <= grid; ++i) {
        xs[i] = lo + (hi - lo) * i / grid;
        fs[i] = density_(xs[i]);
        bound_ = std::max(bound_, fs[i]);
    }
    std::vector<int> order(grid + 1);
    for (int i = 0; i <= grid; ++i) order[i] = i;
    std::partial_sort(order.begin(), order.begin() + 3, order.end(), [&](int p, int q) { return fs[p] > fs[q]; });
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    for (int r = 0; r < 3; ++r) {
        const int k = order[r];
        double a = xs[std::max(k - 1, 0)], b = xs[std::min(k + 1, grid)];
        double c = b - g * (b - a), d = a + g * (b - a);
        double fc = density_(c), fd = density_(d);
        for (int it = 0; it < 80; ++it) {
            if (fc > fd) {
                b = d;
                d = c;
                fd = fc;
                c = b - g * (b - a);
                fc = density_(c);
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + g * (b - a);
                fd = density_(d);
            }
        }
        bound_ = std::max({bound_, fc, fd});
    }
    require(bound_ > 0.0 && std::isfinite(bound_), "rejection sampler: density bound must be positive and finite");
}

double RejectionSampler::sample(RngStream& rng)
{
    for (;;) {
        const double x = lo_ + (hi_ - lo_) * rng.uniform();
        const double u = rng.uniform();
        const double fx = density_(x);
        ++proposals_;
        if (fx > bound_) {
            bound_ = fx * (1.0 + 1e-6);
            ++refreshes_;
            throw EnvelopeError("rejection sampler: density exceeded the cached bound");
        }
        if (u * bound_ <= fx) {
            ++accepted_;
            return x;
        }
    }
}

double BetaLaw::density(double x) const
{
    if (!(x >= 0.0 && x <= 1.0)) return 0.0;
    const double log_norm = std::lgamma(alpha + beta) - std::lgamma(alpha) - std::lgamma(beta);
    // endpoint limits: zero, finite or infinite as the exponent is positive, zero or negative
    auto edge = [&](double shape) {
        if (shape > 1.0) return 0.0;
        return shape == 1.0 ? std::exp(log_norm) : std::numeric_limits<double>::infinity();
    };
    if (x == 0.0) return edge(alpha);
    if (x == 1.0) return edge(beta);
    return std::exp((alpha - 1.0) * std::log(x) + (beta - 1.0) * std::log1p(-x) + std::lgamma(alpha + beta) -
                    std::lgamma(alpha) - std::lgamma(beta));
}

BetaLaw arcsine_mean_law(double mass)
{
    require(mass > 0.0, "arcsine mean law needs mass > 0");
    return {mass + 0.5, mass + 0.5};
}

} // namespace bns
