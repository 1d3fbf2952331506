#include "bns/validation.hpp"

#include "bns/dirichlet_mean.hpp"
#include "bns/errors.hpp"
#include "bns/fourier_likelihood.hpp"
#include "bns/levy_models.hpp"
#include "bns/ou_gamma.hpp"
#include "bns/parallel.hpp"
#include "bns/samplers.hpp"
#include "bns/specfun.hpp"
#include "bns/stats.hpp"

#include <boost/math/distributions/beta.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/bessel.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <memory>
#include <numbers>
#include <sstream>

namespace bns::validation {

namespace {

using Clock = std::chrono::steady_clock;

std::string fmt(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

std::string fmt17(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// one criterion's stream family: seeds differ per criterion so they can be replayed alone
std::uint64_t criterion_seed(const Config& cfg, int id) { return cfg.seed * 1000003ULL + static_cast<std::uint64_t>(id); }

double gk_integrate(const std::function<double(double)>& f, double lo, double hi)
{
    return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, lo, hi, 3, 1e-14);
}

// cdf of a density on [lo, hi] by per-cell Gauss-Kronrod, linear between cells
std::function<double(double)> quadrature_cdf(const std::function<double(double)>& density, double lo, double hi,
                                             int cells)
{
    auto table = std::make_shared<std::vector<double>>(cells + 1, 0.0);
    const double h = (hi - lo) / cells;
    for (int i = 0; i < cells; ++i)
        (*table)[i + 1] = (*table)[i] + gk_integrate(density, lo + i * h, lo + (i + 1) * h);
    const double total = table->back();
    for (auto& v : *table) v /= total;
    return [table, lo, h, cells](double x) {
        const double u = (x - lo) / h;
        if (u <= 0.0) return 0.0;
        if (u >= cells) return 1.0;
        const int k = static_cast<int>(u);
        const double f = u - k;
        return (*table)[k] + f * ((*table)[k + 1] - (*table)[k]);
    };
}

template <class Draw>
std::vector<double> draws(std::size_t count, std::uint64_t seed, int threads, Draw&& draw)
{
    std::vector<double> out(count);
    parallel_for(count, threads, [&](std::size_t i) {
        RngStream rng(seed, i);
        out[i] = draw(rng);
    });
    return out;
}

std::size_t sized(Level level, std::size_t full, std::size_t fast) { return level == Level::full ? full : fast; }

CriterionResult arcsine_oracle(Level level, const Config& cfg)
{
    CriterionResult r;
    r.comparison = "min KS p-value > threshold and runtime < 60 s";
    r.threshold = 0.01;
    const std::size_t count = sized(level, 100000, 10000);
    const auto start = Clock::now();
    double min_p = 1.0;
    std::ostringstream d;
    int k = 0;
    for (double theta : {0.5, 1.5, 3.0}) {
        const MeanFunctionalSpec spec{theta, arcsine_measure()};
        auto xs = draws(count, criterion_seed(cfg, 1) + 17 * k++, cfg.threads,
                        [&](RngStream& rng) { return perfect_sample_mean(spec, rng); });
        const boost::math::beta_distribution<double> law(theta + 0.5, theta + 0.5);
        const auto ks = stats::ks_test(std::move(xs), [&](double x) {
            return x <= 0.0 ? 0.0 : x >= 1.0 ? 1.0 : boost::math::cdf(law, x);
        });
        min_p = std::min(min_p, ks.p_value);
        r.measurements["p_value_theta_" + fmt(theta)] = ks.p_value;
        d << "theta=" << theta << " D=" << fmt(ks.statistic) << " p=" << fmt(ks.p_value) << "; ";
    }
    r.seconds = std::chrono::duration<double>(Clock::now() - start).count();
    r.statistic = min_p;
    r.pass = min_p > r.threshold && r.seconds < 60.0;
    d << count << " draws per mass";
    r.details = d.str();
    return r;
}

CriterionResult dilog_consistency(Level level, const Config& cfg)
{
    CriterionResult r;
    r.comparison = "min KS p-value > threshold and max |integral - 1| < 1e-6";
    r.threshold = 0.01;
    const std::size_t count = sized(level, 100000, 0);
    double min_p = 1.0, worst_norm = 0.0;
    std::ostringstream d;
    int k = 0;
    boost::math::quadrature::tanh_sinh<double> ts;
    for (double a : {0.5, 1.0, 2.0}) {
        const double lo = std::exp(-a);
        auto density = [a](double x) { return dilog_density_m1(x, a); };
        const double norm = ts.integrate(density, lo, 1.0);
        worst_norm = std::max(worst_norm, std::abs(norm - 1.0));
        r.measurements["integral_a_" + fmt(a)] = norm;
        d << "a=" << a << " integral-1=" << fmt(norm - 1.0);
        if (count > 0) {
            auto xs = draws(count, criterion_seed(cfg, 2) + 17 * k++, cfg.threads,
                            [a](RngStream& rng) { return perfect_sample_mean_f_a(1.0, a, rng); });
            const auto ks = stats::ks_test(std::move(xs), quadrature_cdf(density, lo, 1.0, 4000));
            min_p = std::min(min_p, ks.p_value);
            r.measurements["p_value_a_" + fmt(a)] = ks.p_value;
            d << " D=" << fmt(ks.statistic) << " p=" << fmt(ks.p_value);
        }
        d << "; ";
    }
    r.measurements["max_normalisation_error"] = worst_norm;
    r.statistic = count > 0 ? min_p : worst_norm;
    if (count == 0) {
        r.comparison = "max |integral - 1| < threshold (KS part at the full level)";
        r.threshold = 1e-6;
        r.pass = worst_norm < 1e-6;
    } else {
        r.pass = min_p > r.threshold && worst_norm < 1e-6;
    }
    r.details = d.str() + "unit mass over F_a";
    return r;
}

struct ThetaA {
    double theta, a;
};
constexpr ThetaA cumulant_cases[] = {{1.0, 1.0}, {0.5, 2.0}, {2.0, 0.5}};

CriterionResult cumulant_suite(Level level, const Config& cfg)
{
    CriterionResult r;
    r.comparison = "max |empirical - exact| / SE < threshold over j = 1, 2, 3";
    r.threshold = 3.0;
    const std::size_t count = sized(level, 1000000, 20000);
    double worst = 0.0;
    std::ostringstream d;
    int k = 0;
    for (const auto [theta, a] : cumulant_cases) {
        const auto ys = draws(count, criterion_seed(cfg, 3) + 17 * k++, cfg.threads,
                              [&](RngStream& rng) { return sample_pair(theta, a, rng).carry(); });
        const auto c = stats::cumulant_estimate(ys);
        d << "(theta=" << theta << ", a=" << a << ")";
        for (int j = 1; j <= 3; ++j) {
            const double exact = theta * std::tgamma(j) / j * (1.0 - std::exp(-a * j));
            const double z = std::abs(c.value[j - 1] - exact) / c.std_error[j - 1];
            worst = std::max(worst, z);
            d << " k" << j << "=" << fmt(c.value[j - 1]) << " vs " << fmt(exact) << " (" << fmt(z) << " SE)";
        }
        d << "; ";
    }
    r.statistic = worst;
    r.pass = worst < r.threshold;
    r.details = d.str() + std::to_string(count) + " draws per case";
    return r;
}

CriterionResult laplace_identities(Level level, const Config& cfg)
{
    CriterionResult r;
    r.comparison = "max |empirical - exact| / (3 SE + cutoff bias) < 1, cutoff bias < 1e-6";
    r.threshold = 1.0;
    const std::size_t count = sized(level, 200000, 10000);
    const double cutoff = V0Stationary{}.cutoff;
    double worst = 0.0, worst_bias = 0.0;
    std::ostringstream d;
    int k = 0;
    for (const auto [theta, a] : cumulant_cases) {
        const auto ys = draws(count, criterion_seed(cfg, 4) + 17 * k++, cfg.threads,
                              [&](RngStream& rng) { return sample_pair(theta, a, rng).carry(); });
        const auto vs = draws(count, criterion_seed(cfg, 4) + 17 * k++, cfg.threads,
                              [&](RngStream& rng) { return sample_v0_stationary(theta, cutoff, rng); });
        for (double w : {0.5, 1.0, 2.0}) {
            std::vector<double> ey(count), ev(count);
            for (std::size_t i = 0; i < count; ++i) {
                ey[i] = std::exp(-w * ys[i]);
                ev[i] = std::exp(-w * vs[i]);
            }
            const auto my = stats::mean_estimate(ey);
            const auto mv = stats::mean_estimate(ev);
            const double exact_y = std::exp(theta * (dilog(-w) - dilog(-w * std::exp(-a))));
            const double exact_v = std::exp(theta * dilog(-w));
            // the truncated stationary law has exponent -theta [Li2(-w) - Li2(-w e^{-c})]
            const double truncated = std::exp(theta * (dilog(-w) - dilog(-w * std::exp(-cutoff))));
            const double bias = std::abs(truncated - exact_v);
            worst_bias = std::max(worst_bias, bias);
            worst = std::max(worst, std::abs(my.mean - exact_y) / (3.0 * my.std_error));
            worst = std::max(worst, std::abs(mv.mean - exact_v) / (3.0 * mv.std_error + bias));
            d << "(theta=" << theta << ", a=" << a << ", w=" << w << ") Y " << fmt(my.mean) << " vs " << fmt(exact_y)
              << ", v0 " << fmt(mv.mean) << " vs " << fmt(exact_v) << "; ";
        }
    }
    r.measurements["max_cutoff_bias"] = worst_bias;
    r.statistic = worst;
    r.pass = worst < r.threshold && worst_bias < 1e-6;
    r.details = d.str() + "cutoff " + fmt(cutoff) + ", bias bound " + fmt(worst_bias);
    return r;
}

// K_nu form of the integrand with an independent Bessel evaluation
double bessel_integrand_oracle(std::span<const double> x, const SVector& s, const OuGammaParams& p)
{
    const std::size_t n = x.size();
    double sum_a = 0.0, d2 = 0.0, sum_s = 0.0, sum_log_s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double c = x[i] - p.mu * p.delta_t;
        sum_a += c;
        d2 += c * c / s.s[i];
        sum_s += s.s[i];
        sum_log_s += std::log(s.s[i]);
    }
    const double nu = s.kappa - 0.5 * static_cast<double>(n);
    const double delta = std::sqrt(d2);
    const double gamma = std::sqrt(2.0 / s.scale + p.beta * p.beta * sum_s);
    return p.beta * sum_a - std::lgamma(s.kappa) - s.kappa * std::log(s.scale)
           - 0.5 * static_cast<double>(n) * std::log(2.0 * std::numbers::pi) - 0.5 * sum_log_s + std::log(2.0)
           + std::log(boost::math::cyl_bessel_k(nu, delta * gamma)) + nu * std::log(delta / gamma);
}

CriterionResult half_integer_identity(Level level, const Config& cfg)
{
    CriterionResult r;
    r.comparison = "max relative difference < threshold";
    r.threshold = 1e-12;
    const std::size_t count = sized(level, 10000, 10000);
    const double orders[] = {-1.5, -0.5, 0.5, 1.5, 2.5};
    RngStream rng(criterion_seed(cfg, 5));
    double worst = 0.0;
    for (std::size_t l = 0; l < count; ++l) {
        const double nu = orders[l % 5];
        // kappa = nu + n/2 must stay positive
        const std::size_t n = 4 + static_cast<std::size_t>(rng.uniform() * 4.0);
        OuGammaParams p{0.2 * rng.normal(), 0.5 * rng.normal(), 1.0, 1.0, 1.0, 0.5 + rng.uniform()};
        SVector s;
        s.scale = p.scale;
        s.kappa = nu + 0.5 * static_cast<double>(n);
        std::vector<double> x(n);
        for (std::size_t i = 0; i < n; ++i) {
            s.s.push_back(0.05 + rng.exponential());
            x[i] = p.mu + std::sqrt(s.s[i]) * rng.normal();
        }
        const double series = log_likelihood_integrand_half_integer(x, s, p);
        const double oracle = bessel_integrand_oracle(x, s, p);
        const double bessel = log_likelihood_integrand(x, s, p);
        worst = std::max({worst, std::abs(std::expm1(series - oracle)), std::abs(std::expm1(series - bessel))});
    }
    r.statistic = worst;
    r.pass = worst < r.threshold;
    r.details = std::to_string(count) + " random (returns, S-vector) draws, orders -3/2..5/2; K_nu from Boost";
    return r;
}

CriterionResult cross_method(Level level, const Config& cfg)
{
    CriterionResult r;
    r.comparison = "|L_fc / L_mc - 1| < threshold and runtime < 300 s";
    r.threshold = 0.05;
    const std::size_t b = sized(level, 1000000, 20000);
    const auto start = Clock::now();
    const OuGammaParams p{0.03, -0.5, 1.1, 0.7, 1.0, 0.9};
    RngStream rng(criterion_seed(cfg, 6));
    const auto data = simulate_returns(p, 2, V0Stationary{}, rng);
    LikelihoodOptions lo;
    lo.threads = cfg.threads;
    const auto mc = likelihood_mc(data.x, p, b, criterion_seed(cfg, 6) + 1, lo);
    FourierOptions fo;
    fo.threads = cfg.threads;
    const auto fc = likelihood_fc(data.x, ou_model_from(p), b, criterion_seed(cfg, 6) + 2, fo);
    r.seconds = std::chrono::duration<double>(Clock::now() - start).count();
    const double rel = std::abs(std::expm1(fc.log_value - mc.log_value));
    r.statistic = rel;
    r.pass = rel < r.threshold && r.seconds < 300.0;
    r.measurements["log_likelihood_mc"] = mc.log_value;
    r.measurements["log_likelihood_fc"] = fc.log_value;
    r.measurements["log_std_error_mc"] = mc.log_std_error;
    r.measurements["log_std_error_fc"] = fc.log_std_error;
    r.details = "x = (" + fmt(data.x[0]) + ", " + fmt(data.x[1]) + "), B = " + std::to_string(b) + ", mc "
                + fmt(mc.log_value) + " +- " + fmt(mc.log_std_error) + ", fc " + fmt(fc.log_value) + " +- "
                + fmt(fc.log_std_error);
    return r;
}

CriterionResult weber_sonine(Level, const Config& cfg)
{
    CriterionResult r;
    r.comparison = "max |lhs - rhs| < threshold";
    r.threshold = 1e-8;
    RngStream rng(criterion_seed(cfg, 7));
    double worst = 0.0;
    for (int k = 0; k < 20; ++k) {
        const double a = 3.0 * rng.uniform();
        const double tau = 0.05 + 3.0 * rng.uniform();
        worst = std::max(worst, std::abs(weber_sonine_lhs(a, tau) - weber_sonine_rhs(a, tau)));
    }
    r.statistic = worst;
    r.pass = worst < r.threshold;
    r.details = "20 random pairs, |A| in (0, 3), tau in (0.05, 3.05)";
    return r;
}

CriterionResult cosine_normaliser(Level level, const Config& cfg)
{
    CriterionResult r;
    r.comparison = "max |MC - C_n| / SE < threshold";
    r.threshold = 3.0;
    const std::size_t count = sized(level, 200000, 10000);
    RngStream setup(criterion_seed(cfg, 8));
    double worst = 0.0;
    std::ostringstream d;
    for (std::size_t n : {1u, 3u, 5u}) {
        std::vector<double> a(n), p(n);
        for (std::size_t i = 0; i < n; ++i) {
            a[i] = 0.2 + 1.5 * setup.uniform();
            p[i] = 0.5 + setup.uniform();
        }
        const auto vals = draws(count, criterion_seed(cfg, 8) + n, cfg.threads, [&](RngStream& rng) {
            double prod = 1.0;
            for (std::size_t i = 0; i < n; ++i) prod *= std::cos(sample_half_normal(p[i], rng) * a[i]);
            return 1.0 - prod;
        });
        const auto m = stats::mean_estimate(vals);
        const double exact = cosine_tilt_normalizer(a, p);
        const double z = std::abs(m.mean - exact) / m.std_error;
        worst = std::max(worst, z);
        d << "n=" << n << " " << fmt(m.mean) << " vs " << fmt(exact) << " (" << fmt(z) << " SE); ";
    }
    r.statistic = worst;
    r.pass = worst < r.threshold;
    r.details = d.str() + std::to_string(count) + " draws each";
    return r;
}

CriterionResult reconstruction(Level level, const Config& cfg)
{
    CriterionResult r;
    r.comparison = "max relative error < threshold and every weight sum is exactly 1";
    r.threshold = 1e-12;
    const std::size_t count = sized(level, 100000, 5000);
    std::vector<double> err(count);
    std::vector<char> exact_sum(count);
    const std::uint64_t seed = criterion_seed(cfg, 9);
    parallel_for(count, cfg.threads, [&](std::size_t l) {
        RngStream rng(seed, l);
        const std::size_t n = 1 + static_cast<std::size_t>(rng.uniform() * 12.0);
        const OuGammaParams p{0.0, 0.0, 0.3 + 2.0 * rng.uniform(), 0.2 + 2.0 * rng.uniform(), 0.5 + rng.uniform(),
                              0.2 + 2.0 * rng.uniform()};
        const auto path = sample_tau_path(p, n, V0Stationary{}, rng);
        double e = 0.0;
        SVector s;
        try {
            s = build_s_vector(path, p);
        } catch (const InconsistencyError&) {
            e = 1.0;
        }
        for (std::size_t i = 0; e < 1.0 && i < n; ++i)
            e = std::max(e, std::abs(p.scale * s.total * s.s[i] - path.tau[i]) / path.tau[i]);
        for (std::size_t i = 1; i < n; ++i) {
            const double next = std::exp(-p.a()) * path.v_start[i - 1] + path.gamma_parts[i - 1] * path.mean_parts[i - 1];
            e = std::max(e, std::abs(next - path.v_start[i]) / path.v_start[i]);
        }
        const double end = std::exp(-p.a()) * path.v_start[n - 1] + path.gamma_parts[n - 1] * path.mean_parts[n - 1];
        e = std::max(e, std::abs(end - path.v_end) / path.v_end);
        const auto direct = sample_s_vector(p, n, V0Stationary{}, rng);
        double sum_path = 0.0, sum_direct = 0.0;
        for (double w : s.weights) sum_path += w;
        for (double w : direct.weights) sum_direct += w;
        err[l] = e;
        exact_sum[l] = e < 1.0 && sum_path == 1.0 && sum_direct == 1.0;
    });
    const double worst = *std::max_element(err.begin(), err.end());
    const auto sums_ok = std::count(exact_sum.begin(), exact_sum.end(), 1);
    r.statistic = worst;
    r.measurements["exact_weight_sums"] = static_cast<double>(sums_ok);
    r.pass = worst < r.threshold && static_cast<std::size_t>(sums_ok) == count;
    r.details = std::to_string(count) + " paths of length 1..12; " + std::to_string(sums_ok)
                + " with weights summing to exactly 1";
    return r;
}

CriterionResult fggc_duality(Level, const Config&)
{
    CriterionResult r;
    r.comparison = "max |quadrature - mixture| < threshold for Phi and Lambda";
    r.threshold = 1e-8;
    const double theta = 1.3, a = 0.8;
    const FggcModel arc(theta, arcsine_measure());
    double worst_phi = 0.0, worst_lambda = 0.0;
    for (int k = 0; k < 20; ++k) {
        const double w = 0.05 * std::pow(400.0, k / 19.0);   // 0.05 .. 20
        const double v = 0.1 + 0.3 * (k % 7);
        worst_phi = std::max(worst_phi, std::abs(joint_phi_quadrature(arc, w, 0.0, a) - fggc_phi_mixture(*arc.fggc(), w, 0.0, a)));
        worst_phi = std::max(worst_phi, std::abs(joint_phi_quadrature(arc, w, v, a) - fggc_phi_mixture(*arc.fggc(), w, v, a)));
        worst_lambda = std::max(worst_lambda,
                                std::abs(lambda_quadrature(arc, v, w, a) - fggc_lambda_mixture(*arc.fggc(), v, w, a)));
    }
    r.measurements["max_phi_difference"] = worst_phi;
    r.measurements["max_lambda_difference"] = worst_lambda;
    r.statistic = std::max(worst_phi, worst_lambda);
    r.pass = r.statistic < r.threshold;
    r.details = "arcsine mixing, theta = 1.3, a = 0.8, 20-point (omega, v) grid; Phi " + fmt(worst_phi) + ", Lambda "
                + fmt(worst_lambda);
    return r;
}

std::string serialise(const EstimateReport& e)
{
    std::string out = e.method + " " + fmt17(e.log_value) + " " + fmt17(e.log_std_error);
    for (const auto& [k, v] : e.diagnostics) out += " " + k + "=" + fmt17(v);
    return out;
}

std::vector<ReproducibilityProbe> core_probes(const Config& cfg)
{
    const OuGammaParams p{0.03, -0.5, 1.1, 0.7, 1.0, 0.9};
    const int threads = cfg.threads;
    const std::uint64_t seed = criterion_seed(cfg, 11);
    auto data = [p, seed] {
        RngStream rng(seed);
        return simulate_returns(p, 3, V0Stationary{}, rng).x;
    };
    return {
        {"simulate", [=] {
             std::string out;
             for (double v : data()) out += fmt17(v) + "\n";
             return out;
         }},
        {"likelihood_mc", [=] {
             LikelihoodOptions o;
             o.threads = threads;
             return serialise(likelihood_mc(data(), p, 4000, seed, o));
         }},
        {"likelihood_fc", [=] {
             FourierOptions o;
             o.threads = threads;
             return serialise(likelihood_fc(data(), ou_model_from(p), 4000, seed, o));
         }},
        {"likelihood_general", [=] {
             GeneralOptions o;
             o.threads = threads;
             return serialise(likelihood_general(data(), ou_model_from(p), 4000, seed, o));
         }},
    };
}

CriterionResult reproducibility(Level, const Config& cfg)
{
    CriterionResult r;
    r.comparison = "number of probes whose repeated output differs == threshold";
    r.threshold = 0.0;
    auto probes = core_probes(cfg);
    probes.insert(probes.end(), cfg.probes.begin(), cfg.probes.end());
    int differing = 0;
    std::ostringstream d;
    for (const auto& probe : probes) {
        const std::string first = probe.run();
        const std::string second = probe.run();
        if (first != second) {
            ++differing;
            d << probe.name << " differs; ";
        }
    }
    r.statistic = differing;
    r.pass = differing == 0;
    d << probes.size() << " probes run twice at " << cfg.threads << " thread(s)";
    r.details = d.str();
    return r;
}

CriterionResult estimation_sanity(Level level, const Config& cfg)
{
    CriterionResult r;
    r.comparison = "datasets with higher log-likelihood at the truth >= threshold";
    const std::size_t datasets = sized(level, 100, 10);
    r.threshold = 0.95 * static_cast<double>(datasets);
    const OuGammaParams truth{0.05, -0.3, 1.2, 0.6, 1.0, 0.8};
    const std::size_t n = 50, b = 1000;
    int wins = 0;
    double min_gap = std::numeric_limits<double>::infinity();
    LikelihoodOptions lo;
    lo.threads = cfg.threads;
    for (std::size_t k = 0; k < datasets; ++k) {
        RngStream rng(criterion_seed(cfg, 12), k);
        const auto data = simulate_returns(truth, n, V0Stationary{}, rng);
        const auto sm = stats::mean_estimate(data.x);
        // standard error of the drift read off the sample mean
        const double se_mu = sm.std_error / truth.delta_t;
        OuGammaParams shifted = truth;
        shifted.mu += 5.0 * se_mu;
        // common random numbers: the same seed for both parameter values
        const std::uint64_t seed = criterion_seed(cfg, 12) + 1000 + k;
        const double at_truth = likelihood_mc(data.x, truth, b, seed, lo).log_value;
        const double at_shift = likelihood_mc(data.x, shifted, b, seed, lo).log_value;
        min_gap = std::min(min_gap, at_truth - at_shift);
        if (at_truth > at_shift) ++wins;
    }
    r.statistic = wins;
    r.measurements["min_log_likelihood_gap"] = min_gap;
    r.pass = wins >= r.threshold;
    r.details = std::to_string(wins) + " of " + std::to_string(datasets) + " datasets (n = 50, B = 1000, mu + 5 SE)";
    return r;
}

using Runner = CriterionResult (*)(Level, const Config&);

struct Entry {
    CriterionInfo info;
    Runner run;
};

const std::vector<Entry>& entries()
{
    static const std::vector<Entry> list = {
        {{1, "arcsine_oracle", false}, arcsine_oracle},
        {{2, "dilog_density_consistency", true}, dilog_consistency},
        {{3, "cumulant_suite", false}, cumulant_suite},
        {{4, "laplace_identities", false}, laplace_identities},
        {{5, "half_integer_bessel_identity", true}, half_integer_identity},
        {{6, "cross_method_likelihood", false}, cross_method},
        {{7, "weber_sonine", true}, weber_sonine},
        {{8, "cosine_tilt_normaliser", false}, cosine_normaliser},
        {{9, "exact_reconstruction", true}, reconstruction},
        {{10, "fggc_exponent_duality", true}, fggc_duality},
        {{11, "reproducibility", true}, reproducibility},
        {{12, "estimation_sanity", false}, estimation_sanity},
    };
    return list;
}

} // namespace

std::string to_string(Level level) { return level == Level::full ? "full" : "fast"; }

Level level_from_string(const std::string& name)
{
    if (name == "fast") return Level::fast;
    if (name == "full") return Level::full;
    throw DomainError("unknown validation level '" + name + "'");
}

bool Report::all_pass() const
{
    return std::all_of(results.begin(), results.end(), [](const CriterionResult& r) { return r.pass; });
}

const std::vector<CriterionInfo>& criteria()
{
    static const std::vector<CriterionInfo> list = [] {
        std::vector<CriterionInfo> out;
        for (const auto& e : entries()) out.push_back(e.info);
        return out;
    }();
    return list;
}

CriterionResult run_criterion(int id, Level level, const Config& cfg)
{
    for (const auto& e : entries()) {
        if (e.info.id != id) continue;
        const auto start = Clock::now();
        CriterionResult r;
        try {
            r = e.run(level, cfg);
        } catch (const std::exception& ex) {
            r.pass = false;
            r.statistic = std::numeric_limits<double>::quiet_NaN();
            r.details = std::string("error: ") + ex.what();
        }
        r.id = id;
        r.name = e.info.name;
        if (r.seconds == 0.0) r.seconds = std::chrono::duration<double>(Clock::now() - start).count();
        return r;
    }
    throw DomainError("unknown criterion " + std::to_string(id));
}

Report run(Level level, const Config& cfg)
{
    Report rep;
    rep.level = level;
    rep.seed = cfg.seed;
    rep.threads = cfg.threads;
    for (const auto& e : entries())
        if (level == Level::full || e.info.in_fast) rep.results.push_back(run_criterion(e.info.id, level, cfg));
    return rep;
}

} // namespace bns::validation
