#include "bns/ou_gamma.hpp"

#include "bns/errors.hpp"
#include "bns/parallel.hpp"
#include "bns/quadrature.hpp"
#include "bns/samplers.hpp"
#include "bns/stats.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace bns {

namespace {

constexpr double neg_inf = -std::numeric_limits<double>::infinity();

struct Drift {
    double mu_dt;
    double beta;
};

// log of the conditional density of x given tau = scale * total * s, integrated against total ~ Gamma(kappa)
double log_integrand_core(std::span<const double> x, const std::vector<double>& s, double kappa, double scale,
                          Drift drift, bool finite_sum)
{
    const std::size_t n = x.size();
    require(s.size() == n, "likelihood: S-vector and returns differ in length");
    require(kappa > 0.0 && scale > 0.0, "likelihood: kappa and scale must be positive");
    double sum_a = 0.0, d2 = 0.0, sum_s = 0.0, sum_log_s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double centred = x[i] - drift.mu_dt;
        if (!(s[i] > 0.0)) {
            if (centred == 0.0) continue;
            return neg_inf;
        }
        sum_a += centred;
        d2 += centred * centred / s[i];
        sum_s += s[i];
        sum_log_s += std::log(s[i]);
    }
    const double nd = static_cast<double>(n);
    const double nu = kappa - 0.5 * nd;
    const double g2 = 2.0 / scale + drift.beta * drift.beta * sum_s;
    const double common = drift.beta * sum_a - std::lgamma(kappa) - kappa * std::log(scale)
                          - 0.5 * nd * std::log(2.0 * std::numbers::pi) - 0.5 * sum_log_s;
    if (d2 == 0.0) {
        if (!(nu > 0.0)) throw NumericError("likelihood: zero returns with kappa <= n/2 give an infinite integrand");
        return common + std::lgamma(nu) + nu * std::log(2.0 / g2);
    }
    const double delta = std::sqrt(d2);
    const double gamma = std::sqrt(g2);
    if (!finite_sum)
        return common + std::log(2.0) + log_bessel_k(nu, delta * gamma) + nu * (std::log(delta) - std::log(gamma));

    const auto m = half_integer_order(nu);
    if (!m) throw DomainError("likelihood: kappa - n/2 is not a half-integer");
    const double z = delta * gamma;
    std::vector<double> terms(static_cast<std::size_t>(*m) + 1);
    for (int k = 0; k <= *m; ++k)
        terms[static_cast<std::size_t>(k)] = std::lgamma(*m + k + 1.0) - std::lgamma(*m - k + 1.0)
                                             - std::lgamma(k + 1.0) - k * std::log(2.0 * z);
    const double series = log_sum_exp(terms.data(), terms.size());
    const double ratio = std::log(delta) - std::log(gamma);
    const double front = nu > 0.0 ? -std::log(gamma) + *m * ratio : -std::log(delta) - *m * ratio;
    return common + 0.5 * std::log(2.0 * std::numbers::pi) - z + front + series;
}

GigParams posterior_core(std::span<const double> x, const std::vector<double>& s, double kappa, double scale,
                         Drift drift)
{
    require(s.size() == x.size(), "posterior: S-vector and returns differ in length");
    double d2 = 0.0, sum_s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double centred = x[i] - drift.mu_dt;
        if (centred != 0.0) {
            if (!(s[i] > 0.0)) throw NumericError("posterior: non-zero return over a zero-variance interval");
            d2 += centred * centred / s[i];
        }
        sum_s += s[i];
    }
    return {kappa - 0.5 * static_cast<double>(x.size()), std::sqrt(d2),
            std::sqrt(2.0 / scale + drift.beta * drift.beta * sum_s)};
}

Drift drift_of(const OuGammaParams& p) { return {p.mu * p.delta_t, p.beta}; }

void require_product_form(const V0Mode& mode)
{
    if (std::holds_alternative<V0Custom>(mode))
        throw DomainError("likelihood: a custom v0 has no Gamma-times-factor form");
    if (const auto* f = std::get_if<V0Fixed>(&mode); f && f->value != 0.0)
        throw DomainError("likelihood: a fixed v0 must be zero for the S-vector form");
}

double v0_shape(const OuGammaParams& p, const V0Mode& mode)
{
    if (const auto* st = std::get_if<V0Stationary>(&mode)) return p.theta * st->cutoff;
    if (const auto* pr = std::get_if<V0Product>(&mode)) return pr->gamma_shape;
    return 0.0;
}

EstimateReport finish_report(std::string method, std::span<const double> logs, std::size_t replications,
                             std::uint64_t seed, int threads)
{
    const auto est = stats::log_mean_exp(logs);
    EstimateReport r;
    r.method = std::move(method);
    r.log_value = est.log_mean;
    r.value = std::exp(est.log_mean);
    r.log_std_error = est.relative_std_error;
    r.std_error = r.value * est.relative_std_error;
    r.replications = replications;
    r.seed = seed;
    r.threads = threads;
    r.diagnostics["effective_sample_size"] = est.effective_sample_size;
    return r;
}

void add_v0_notes(EstimateReport& r, const V0Mode& mode)
{
    if (const auto* st = std::get_if<V0Stationary>(&mode)) {
        r.diagnostics["stationary_cutoff"] = st->cutoff;
        r.notes.push_back("stationary v0 drawn from the finite-cutoff product form");
    }
}

} // namespace

void validate(const OuGammaParams& p)
{
    require(std::isfinite(p.mu) && std::isfinite(p.beta), "OU-Gamma: mu and beta must be finite");
    require(p.theta > 0.0 && std::isfinite(p.theta), "OU-Gamma: theta must be positive");
    require(p.lambda > 0.0 && std::isfinite(p.lambda), "OU-Gamma: lambda must be positive");
    require(p.delta_t > 0.0 && std::isfinite(p.delta_t), "OU-Gamma: delta_t must be positive");
    require(p.scale > 0.0 && std::isfinite(p.scale), "OU-Gamma: scale must be positive");
}

V0Draw sample_v0(const OuGammaParams& p, const V0Mode& mode, RngStream& rng)
{
    V0Draw d;
    if (const auto* st = std::get_if<V0Stationary>(&mode)) {
        require(st->cutoff > 0.0, "stationary v0: cutoff must be positive");
        d.gamma_shape = p.theta * st->cutoff;
        d.gamma_part = sample_gamma(d.gamma_shape, 1.0, rng);
        d.factor = perfect_sample_mean_f_a(d.gamma_shape, st->cutoff, rng);
        d.product_form = true;
        d.value = p.scale * d.gamma_part * d.factor;
    } else if (const auto* f = std::get_if<V0Fixed>(&mode)) {
        require(f->value >= 0.0 && std::isfinite(f->value), "fixed v0 must be non-negative");
        d.value = f->value;
    } else if (const auto* pr = std::get_if<V0Product>(&mode)) {
        require(pr->gamma_shape > 0.0, "product v0: gamma shape must be positive");
        d.gamma_shape = pr->gamma_shape;
        d.gamma_part = sample_gamma(d.gamma_shape, 1.0, rng);
        d.factor = pr->factor ? pr->factor(rng) : 1.0;
        require(d.factor >= 0.0 && std::isfinite(d.factor), "product v0: factor must be non-negative");
        d.product_form = true;
        d.value = p.scale * d.gamma_part * d.factor;
    } else {
        const auto& c = std::get<V0Custom>(mode);
        require(static_cast<bool>(c.sampler), "custom v0: sampler is empty");
        d.value = c.sampler(rng);
        require(d.value >= 0.0 && std::isfinite(d.value), "custom v0 must be non-negative");
    }
    return d;
}

double sample_v0_stationary(double theta, double cutoff, RngStream& rng)
{
    require(theta > 0.0, "stationary v0: theta must be positive");
    OuGammaParams p;
    p.theta = theta;
    return sample_v0(p, V0Stationary{cutoff}, rng).value;
}

PairDraw sample_pair(double theta, double a, RngStream& rng, const CouplingConfig& cfg)
{
    require(theta > 0.0 && a > 0.0, "pair sampler: theta and a must be positive");
    PairDraw d;
    d.gamma_part = sample_gamma(theta * a, 1.0, rng);
    d.mean_part = perfect_sample_mean_f_a(theta * a, a, rng, cfg);
    return d;
}

TauPath random_times_tau(std::span<const double> deltas, const OuGammaParams& p, const V0Mode& mode, RngStream& rng)
{
    validate(p);
    TauPath path;
    path.v0 = sample_v0(p, mode, rng);
    const std::size_t n = deltas.size();
    path.tau.resize(n);
    path.gamma_parts.resize(n);
    path.mean_parts.resize(n);
    path.v_start.resize(n);
    double v = path.v0.value;
    for (std::size_t i = 0; i < n; ++i) {
        require(deltas[i] > 0.0 && std::isfinite(deltas[i]), "tau path: interval lengths must be positive");
        const double a = p.lambda * deltas[i];
        const auto pair = sample_pair(p.theta, a, rng);
        const double jump = p.scale * pair.gamma_part;
        path.v_start[i] = v;
        path.gamma_parts[i] = jump;
        path.mean_parts[i] = pair.mean_part;
        path.tau[i] = (-std::expm1(-a) * v + jump * (1.0 - pair.mean_part)) / p.lambda;
        v = std::exp(-a) * v + jump * pair.mean_part;
    }
    path.v_end = v;
    return path;
}

TauPath sample_tau_path(const OuGammaParams& p, std::size_t n, const V0Mode& mode, RngStream& rng)
{
    const std::vector<double> deltas(n, p.delta_t);
    return random_times_tau(deltas, p, mode, rng);
}

SimulatedReturns simulate_returns(const OuGammaParams& p, std::size_t n, const V0Mode& mode, RngStream& rng)
{
    SimulatedReturns out;
    out.path = sample_tau_path(p, n, mode, rng);
    out.x.resize(n);
    for (std::size_t i = 0; i < n; ++i)
        out.x[i] = p.mu * p.delta_t + p.beta * out.path.tau[i] + std::sqrt(out.path.tau[i]) * rng.normal();
    return out;
}

SVector build_s_vector(const TauPath& path, const OuGammaParams& p)
{
    validate(p);
    const bool with_v0 = path.v0.product_form;
    if (!with_v0 && path.v0.value != 0.0)
        throw DomainError("S-vector: v0 must be zero or of product form");
    const std::size_t n = path.tau.size();
    const double a = p.a();
    SVector out;
    out.scale = p.scale;
    out.kappa = p.theta * a * static_cast<double>(n) + (with_v0 ? path.v0.gamma_shape : 0.0);
    double total = with_v0 ? path.v0.gamma_part : 0.0;
    for (double g : path.gamma_parts) total += g / p.scale;
    out.total = total;
    if (!(total > 0.0)) throw NumericError("S-vector: total gamma mass underflowed");
    out.weights.resize(n + (with_v0 ? 1 : 0));
    for (std::size_t i = 0; i < n; ++i) out.weights[i] = path.gamma_parts[i] / p.scale / total;
    if (with_v0) out.weights[n] = path.v0.gamma_part / total;
    // the last weight closes the sequential sum at exactly one
    double partial = 0.0;
    for (std::size_t i = 0; i + 1 < out.weights.size(); ++i) partial += out.weights[i];
    out.weights.back() = std::max(0.0, 1.0 - partial);
    out.s.resize(n);
    double u = with_v0 ? out.weights[n] * path.v0.factor : 0.0;
    const double carry = -std::expm1(-a), keep = std::exp(-a);
    for (std::size_t i = 0; i < n; ++i) {
        const double m = path.mean_parts[i];
        out.s[i] = (carry * u + out.weights[i] * (1.0 - m)) / p.lambda;
        u = keep * u + out.weights[i] * m;
        const double rebuilt = p.scale * total * out.s[i];
        if (std::abs(rebuilt - path.tau[i]) > 1e-12 * std::max({std::abs(path.tau[i]), std::abs(rebuilt), 1e-300}))
            throw InconsistencyError("S-vector: tau is not reproduced by scale * total * s");
    }
    return out;
}

SVector sample_s_vector(const OuGammaParams& p, std::size_t n, const V0Mode& mode, RngStream& rng)
{
    validate(p);
    require_product_form(mode);
    const double a = p.a();
    const double shape = v0_shape(p, mode);
    std::vector<double> dir(n + (shape > 0.0 ? 1 : 0), p.theta * a);
    if (shape > 0.0) dir[n] = shape;
    SVector out;
    out.scale = p.scale;
    out.kappa = p.theta * a * static_cast<double>(n) + shape;
    out.weights = sample_dirichlet(dir, rng);
    double factor = 0.0;
    if (const auto* st = std::get_if<V0Stationary>(&mode))
        factor = perfect_sample_mean_f_a(shape, st->cutoff, rng);
    else if (const auto* pr = std::get_if<V0Product>(&mode))
        factor = pr->factor ? pr->factor(rng) : 1.0;
    out.s.resize(n);
    double u = shape > 0.0 ? out.weights[n] * factor : 0.0;
    const double carry = -std::expm1(-a), keep = std::exp(-a);
    for (std::size_t i = 0; i < n; ++i) {
        const double m = perfect_sample_mean_f_a(p.theta * a, a, rng);
        out.s[i] = (carry * u + out.weights[i] * (1.0 - m)) / p.lambda;
        u = keep * u + out.weights[i] * m;
    }
    return out;
}

GigParams posterior_gig_params(std::span<const double> x, const SVector& s, const OuGammaParams& p)
{
    return posterior_core(x, s.s, s.kappa, s.scale, drift_of(p));
}

double log_likelihood_integrand(std::span<const double> x, const SVector& s, const OuGammaParams& p)
{
    return log_integrand_core(x, s.s, s.kappa, s.scale, drift_of(p), false);
}

double log_likelihood_integrand_half_integer(std::span<const double> x, const SVector& s, const OuGammaParams& p)
{
    return log_integrand_core(x, s.s, s.kappa, s.scale, drift_of(p), true);
}

EstimateReport likelihood_mc(std::span<const double> x, const OuGammaParams& p, std::size_t replications,
                             std::uint64_t seed, const LikelihoodOptions& options)
{
    validate(p);
    require(replications > 0, "likelihood: replications must be positive");
    require(!x.empty(), "likelihood: no returns");
    require_product_form(options.v0);
    std::vector<double> logs(replications);
    parallel_for(replications, options.threads, [&](std::size_t l) {
        RngStream rng(seed, l);
        const auto s = sample_s_vector(p, x.size(), options.v0, rng);
        logs[l] = log_likelihood_integrand(x, s, p);
    });
    auto r = finish_report("s_vector", logs, replications, seed, options.threads);
    const double kappa = p.theta * p.a() * static_cast<double>(x.size()) + v0_shape(p, options.v0);
    r.params = {{"mu", p.mu}, {"beta", p.beta}, {"theta", p.theta},
                {"lambda", p.lambda}, {"delta_t", p.delta_t}, {"scale", p.scale}};
    r.diagnostics["kappa"] = kappa;
    r.diagnostics["bessel_order"] = kappa - 0.5 * static_cast<double>(x.size());
    add_v0_notes(r, options.v0);
    return r;
}

PosteriorEstimate bayes_posterior_mc(const std::vector<ParamFunctional>& functionals, const PriorSampler& prior,
                                     std::span<const double> x, std::size_t replications, std::uint64_t seed,
                                     const LikelihoodOptions& options)
{
    require(static_cast<bool>(prior), "posterior: prior sampler is empty");
    require(replications > 0, "posterior: replications must be positive");
    require(!x.empty(), "posterior: no returns");
    require_product_form(options.v0);
    const std::size_t k = functionals.size();
    std::vector<double> logs(replications);
    std::vector<double> values(replications * k);
    parallel_for(replications, options.threads, [&](std::size_t l) {
        RngStream rng(seed, l);
        const OuGammaParams theta = prior(rng);
        validate(theta);
        const auto s = sample_s_vector(theta, x.size(), options.v0, rng);
        logs[l] = log_likelihood_integrand(x, s, theta);
        for (std::size_t j = 0; j < k; ++j) values[l * k + j] = functionals[j](theta);
    });
    const auto evidence = stats::log_mean_exp(logs);
    double top = neg_inf;
    for (double v : logs) top = std::max(top, v);
    std::vector<double> w(replications);
    double sum_w = 0.0, sum_w2 = 0.0;
    for (std::size_t l = 0; l < replications; ++l) {
        w[l] = std::exp(logs[l] - top);
        sum_w += w[l];
        sum_w2 += w[l] * w[l];
    }
    PosteriorEstimate out;
    out.replications = replications;
    out.seed = seed;
    out.log_evidence = evidence.log_mean;
    out.effective_sample_size = sum_w * sum_w / sum_w2;
    out.values.assign(k, 0.0);
    out.std_errors.assign(k, 0.0);
    for (std::size_t j = 0; j < k; ++j) {
        double m = 0.0;
        for (std::size_t l = 0; l < replications; ++l) m += w[l] * values[l * k + j];
        m /= sum_w;
        double v = 0.0;
        for (std::size_t l = 0; l < replications; ++l) {
            const double d = values[l * k + j] - m;
            v += w[l] * w[l] * d * d;
        }
        out.values[j] = m;
        out.std_errors[j] = std::sqrt(v) / sum_w;
    }
    if (out.effective_sample_size < 0.01 * static_cast<double>(replications))
        out.warnings.push_back("effective sample size below 1% of the replications; estimates are unreliable");
    return out;
}

OuGammaParams component_params(const SuperpositionParams& p, std::size_t j)
{
    require(j < p.components.size(), "superposition: component index out of range");
    const auto& c = p.components[j];
    return {p.mu, p.beta, c.theta, c.lambda, p.delta_t, p.scale};
}

SuperposedPath superposition_tau(const SuperpositionParams& p, std::size_t n, const V0Mode& mode, RngStream& rng)
{
    require(!p.components.empty(), "superposition: no components");
    double weight_sum = 0.0;
    for (const auto& c : p.components) weight_sum += c.weight;
    require(std::abs(weight_sum - 1.0) <= 1e-12, "superposition: weights must sum to one");
    SuperposedPath out;
    out.tau.assign(n, 0.0);
    out.s.s.assign(n, 0.0);
    out.s.scale = p.scale;
    std::vector<SVector> parts;
    for (std::size_t j = 0; j < p.components.size(); ++j) {
        require(p.components[j].weight > 0.0, "superposition: weights must be positive");
        const auto cp = component_params(p, j);
        out.components.push_back(sample_tau_path(cp, n, mode, rng));
        parts.push_back(build_s_vector(out.components.back(), cp));
        out.s.kappa += parts.back().kappa;
        out.s.total += parts.back().total;
    }
    for (std::size_t j = 0; j < parts.size(); ++j) {
        const double w = p.components[j].weight;
        const double share = parts[j].total / out.s.total;
        for (std::size_t i = 0; i < n; ++i) {
            out.tau[i] += w * out.components[j].tau[i];
            out.s.s[i] += w * share * parts[j].s[i];
        }
        for (double q : parts[j].weights) out.s.weights.push_back(q * share);
    }
    return out;
}

EstimateReport superposition_likelihood_mc(std::span<const double> x, const SuperpositionParams& p,
                                           std::size_t replications, std::uint64_t seed,
                                           const LikelihoodOptions& options)
{
    require(replications > 0, "likelihood: replications must be positive");
    require(!x.empty(), "likelihood: no returns");
    require_product_form(options.v0);
    const Drift drift{p.mu * p.delta_t, p.beta};
    std::vector<double> logs(replications);
    parallel_for(replications, options.threads, [&](std::size_t l) {
        RngStream rng(seed, l);
        const auto path = superposition_tau(p, x.size(), options.v0, rng);
        logs[l] = log_integrand_core(x, path.s.s, path.s.kappa, p.scale, drift, false);
    });
    auto r = finish_report("superposition_s_vector", logs, replications, seed, options.threads);
    r.params = {{"mu", p.mu}, {"beta", p.beta}, {"delta_t", p.delta_t}, {"scale", p.scale},
                {"components", static_cast<double>(p.components.size())}};
    add_v0_notes(r, options.v0);
    return r;
}

TimeChangedPath time_changed_tau(std::size_t n, const OuGammaParams& p, const std::function<double(RngStream&)>& subordinator,
                                 const V0Mode& mode, RngStream& rng)
{
    require(static_cast<bool>(subordinator), "time change: subordinator sampler is empty");
    TimeChangedPath out;
    out.deltas.resize(n);
    for (auto& d : out.deltas) d = subordinator(rng);
    out.path = random_times_tau(out.deltas, p, mode, rng);
    return out;
}

// ---------------------------------------------------------------- densities

namespace {

double gamma_log_pdf(double y, double shape, double scale)
{
    return (shape - 1.0) * std::log(y) - y / scale - std::lgamma(shape) - shape * std::log(scale);
}

constexpr quad::Options density_quad{1e-300, 1e-10, 2000};

} // namespace

IncrementDensity::IncrementDensity(double theta, double a, double scale, std::size_t mixture_size, std::uint64_t seed)
    : theta_(theta), a_(a), scale_(scale), explicit_(std::abs(theta * a - 1.0) < 1e-12)
{
    require(theta > 0.0 && a > 0.0 && scale > 0.0, "increment density: parameters must be positive");
    if (explicit_) return;
    require(mixture_size > 0, "increment density: mixture size must be positive");
    RngStream rng(seed, 0);
    scales_.resize(mixture_size);
    for (auto& b : scales_) b = scale * (1.0 - perfect_sample_mean_f_a(theta * a, a, rng));
}

double IncrementDensity::operator()(double y) const
{
    if (y < 0.0) return 0.0;
    if (explicit_) {
        auto f = [&](double v) {
            const double b = -scale_ * std::expm1(-a_ * v);
            return std::exp(-y / b) / b * dilog_density_v(v, a_);
        };
        return quad::integrate(f, 0.0, 1.0, density_quad).value;
    }
    const double k = theta_ * a_;
    double sum = 0.0;
    for (double b : scales_)
        if (b > 0.0) sum += std::exp(gamma_log_pdf(y, k, b));
    return sum / static_cast<double>(scales_.size());
}

double IncrementDensity::via_mean_density(double y) const
{
    if (!explicit_) throw DomainError("increment density: the mean-density route needs theta a = 1");
    if (y < 0.0) return 0.0;
    auto f = [&](double m) {
        const double b = scale_ * (1.0 - m);
        return b > 0.0 ? std::exp(-y / b) / b * dilog_density_m1(m, a_) : 0.0;
    };
    return quad::integrate(f, std::exp(-a_), 1.0, density_quad).value;
}

double IncrementDensity::mean() const { return scale_ * theta_ * (a_ + std::expm1(-a_)); }

double option_density_q(double y, const OuGammaParams& p)
{
    validate(p);
    return IncrementDensity(p.theta, p.a(), p.scale)(y);
}

double conditional_price_density(double x, double v_start, double horizon, const OuGammaParams& p,
                                 std::size_t mixture_size)
{
    validate(p);
    require(horizon > 0.0 && v_start >= 0.0, "price density: horizon must be positive and v_start non-negative");
    const double a = p.lambda * horizon;
    const double held = -std::expm1(-a) * v_start;
    const double drift = p.mu * horizon;
    auto normal_at = [&](double jump) {
        const double tau = (held + jump) / p.lambda;
        if (!(tau > 0.0)) return 0.0;
        return normal_density(x, drift + p.beta * tau, tau);
    };
    const IncrementDensity q(p.theta, a, p.scale, mixture_size);
    const double k = q.shape();
    // E[phi(x | tau(b G))] with G ~ Gamma(k)
    auto given_scale = [&](double b) {
        if (k >= 1.0) {
            const double top = k + 40.0 * std::sqrt(k) + 40.0;
            auto f = [&](double g) { return g > 0.0 ? normal_at(b * g) * std::exp(gamma_log_pdf(g, k, 1.0)) : 0.0; };
            return quad::integrate(f, 0.0, top, density_quad).value;
        }
        // g = t^{1/k} removes the singularity at zero
        const double top = std::pow(60.0, k);
        auto f = [&](double t) {
            const double g = std::pow(t, 1.0 / k);
            return normal_at(b * g) * std::exp(-g - std::lgamma(k + 1.0));
        };
        return quad::integrate(f, 0.0, top, density_quad).value;
    };
    if (q.explicit_form()) {
        auto f = [&](double v) { return given_scale(-p.scale * std::expm1(-a * v)) * dilog_density_v(v, a); };
        return quad::integrate(f, 0.0, 1.0, {1e-300, 1e-9, 2000}).value;
    }
    double sum = 0.0;
    for (double b : q.mixture_scales()) sum += given_scale(b);
    return sum / static_cast<double>(q.mixture_scales().size());
}

// ---------------------------------------------------------------- moving averages

std::pair<double, double> dykstra_laud_pair(double theta, double a, RngStream& rng)
{
    require(theta > 0.0 && a > 0.0, "moving average: theta and a must be positive");
    const double t = sample_gamma(theta * a, 1.0, rng);
    const double m = perfect_sample_mean({theta * a, uniform_measure(0.0, a)}, rng);
    return {t, t * m};
}

std::pair<double, double> moving_average_pair(double theta, double a, RngStream& rng, const CouplingConfig& cfg)
{
    require(theta > 0.0 && a > 0.0, "moving average: theta and a must be positive");
    const double mass = theta * a;
    const double t = sample_gamma(mass, 1.0, rng);
    // joint coupling of the two means under one Dirichlet process; both
    // functionals take values in [0, 1]
    double s1 = 0.0, s2 = 0.0, r = 1.0;
    std::size_t step = 0;
    do {
        if (step++ >= cfg.max_steps) throw CouplingError("moving average: chains did not coalesce");
        const double log_u = std::log(rng.uniform());
        const double b = -std::expm1(log_u / mass);
        const double y = a * rng.uniform();
        const double e = std::exp(-y);
        s1 += r * b * e;
        s2 += r * b * y * e;
        r *= std::exp(log_u / mass);
    } while (r >= cfg.epsilon);
    return {t * (s1 + 0.5 * r), t * (s2 + 0.5 * r)};
}

} // namespace bns
