#include "bns/levy_models.hpp"

#include "bns/errors.hpp"
#include "bns/quadrature.hpp"
#include "bns/samplers.hpp"
#include "bns/specfun.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace bns {

namespace {

constexpr int mixture_nodes = 96;

const quad::Options exponent_opts{1e-300, 1e-11, 2000};

void require_exponent_args(double omega, double v, double a)
{
    require(omega >= 0.0 && v >= 0.0 && std::isfinite(omega) && std::isfinite(v),
            "Laplace exponent arguments must be non-negative and finite");
    require(a > 0.0 && std::isfinite(a), "a = lambda * delta must be positive");
}

double expect_f_a(double a, const std::function<double(double)>& f)
{
    return quad::gauss_legendre_integrate([&](double t) { return f(std::exp(-a * t)); }, 0.0, 1.0, mixture_nodes);
}

} // namespace

std::optional<double> LevyModel::joint_phi_closed_form(double, double, double) const { return std::nullopt; }
std::optional<double> LevyModel::stationary_closed_form(double) const { return std::nullopt; }

double LevyModel::sample_stationary(RngStream&) const
{
    throw DomainError("model " + name() + " has no sampler for its stationary law");
}

// ---------------------------------------------------------------- gamma

GammaModel::GammaModel(double theta, double scale, double stationary_cutoff)
    : theta_(theta), scale_(scale), cutoff_(stationary_cutoff), fggc_{theta, point_mass(scale)}
{
    require(theta > 0.0 && std::isfinite(theta), "gamma model: theta must be positive");
    require(scale > 0.0 && std::isfinite(scale), "gamma model: scale must be positive");
    require(stationary_cutoff > 0.0, "gamma model: cutoff must be positive");
}

std::map<std::string, double> GammaModel::parameters() const { return {{"theta", theta_}, {"scale", scale_}}; }

double GammaModel::psi(double omega) const { return theta_ * std::log1p(scale_ * omega); }

std::optional<double> GammaModel::joint_phi_closed_form(double omega, double v, double a) const
{
    require_exponent_args(omega, v, a);
    const double w = scale_ * omega;
    const double k = scale_ * (omega - v) / (1.0 + w);
    return theta_ * (a * std::log1p(w) - dilog(k) + dilog(k * std::exp(-a)));
}

std::optional<double> GammaModel::stationary_closed_form(double omega) const
{
    require(omega >= 0.0, "Laplace exponent argument must be non-negative");
    return -theta_ * dilog(-scale_ * omega);
}

double GammaModel::sample_stationary(RngStream& rng) const
{
    const double mass = theta_ * cutoff_;
    const double t = sample_gamma(mass, 1.0, rng);
    return scale_ * t * perfect_sample_mean_f_a(mass, cutoff_, rng);
}

// ---------------------------------------------------------------- stable

StableModel::StableModel(double alpha, double scale) : alpha_(alpha), scale_(scale)
{
    require(alpha > 0.0 && alpha < 1.0, "stable model: alpha must lie in (0, 1)");
    require(scale > 0.0, "stable model: scale must be positive");
}

std::map<std::string, double> StableModel::parameters() const { return {{"alpha", alpha_}, {"scale", scale_}}; }

double StableModel::psi(double omega) const { return scale_ * std::pow(omega, alpha_); }

std::optional<double> StableModel::stationary_closed_form(double omega) const
{
    return scale_ * std::pow(omega, alpha_) / alpha_;
}

double StableModel::sample_stationary(RngStream& rng) const
{
    return std::pow(scale_ / alpha_, 1.0 / alpha_) * sample_positive_stable(alpha_, rng);
}

// ---------------------------------------------------------------- inverse Gaussian

InverseGaussianModel::InverseGaussianModel(double delta, double gamma) : delta_(delta), gamma_(gamma)
{
    require(delta > 0.0 && gamma > 0.0, "inverse Gaussian model: delta and gamma must be positive");
}

std::map<std::string, double> InverseGaussianModel::parameters() const
{
    return {{"delta", delta_}, {"gamma", gamma_}};
}

double InverseGaussianModel::psi(double omega) const
{
    return delta_ * omega / std::sqrt(gamma_ * gamma_ + 2.0 * omega);
}

std::optional<double> InverseGaussianModel::stationary_closed_form(double omega) const
{
    // delta (sqrt(gamma^2 + 2 w) - gamma) without cancellation
    return 2.0 * delta_ * omega / (std::sqrt(gamma_ * gamma_ + 2.0 * omega) + gamma_);
}

double InverseGaussianModel::sample_stationary(RngStream& rng) const
{
    return sample_inverse_gaussian(delta_, gamma_, rng);
}

// ---------------------------------------------------------------- lognormal

namespace {

// log int phi(z) exp(c z + d - omega e^{mu + sigma z}) dz; the exponent is
// concave with curvature at most -1, so +-14 around the peak loses < e^{-98}.
double lognormal_log_integral(double omega, double mu, double sigma, double c, double d)
{
    auto g = [&](double z) { return -0.5 * z * z + c * z + d - omega * std::exp(mu + sigma * z); };
    auto slope = [&](double z) { return -z + c - omega * sigma * std::exp(mu + sigma * z); };
    double hi = c, lo = c;
    double step = 1.0;
    while (slope(lo) < 0.0) {
        lo -= step;
        step *= 2.0;
    }
    for (int i = 0; i < 200 && hi - lo > 1e-13 * (1.0 + std::abs(lo)); ++i) {
        const double mid = 0.5 * (lo + hi);
        (slope(mid) > 0.0 ? lo : hi) = mid;
    }
    const double peak = 0.5 * (lo + hi);
    const double gp = g(peak);
    const auto r = quad::integrate([&](double z) { return std::exp(g(z) - gp); }, peak - 14.0, peak + 14.0,
                                   {0.0, 1e-14, 400});
    return gp + std::log(r.value) - 0.5 * std::log(2.0 * std::numbers::pi);
}

} // namespace

LognormalModel::LognormalModel(double mu, double sigma) : mu_(mu), sigma_(sigma)
{
    require(std::isfinite(mu) && sigma > 0.0 && std::isfinite(sigma), "lognormal model: sigma must be positive");
    mean_ = std::exp(mu + 0.5 * sigma * sigma);
    log_omega_.resize(table_size);
    log_psi_.resize(table_size);
    slope_.resize(table_size);
    const double l0 = std::log(table_lo), l1 = std::log(table_hi);
    for (int k = 0; k < table_size; ++k) {
        log_omega_[k] = l0 + (l1 - l0) * k / (table_size - 1);
        const double w = std::exp(log_omega_[k]);
        const double p = psi_direct(w);
        log_psi_[k] = std::log(p);
        slope_[k] = w * psi_derivative_direct(w) / p;
    }
}

std::map<std::string, double> LognormalModel::parameters() const { return {{"mu", mu_}, {"sigma", sigma_}}; }

double LognormalModel::psi_direct(double omega) const
{
    require(omega >= 0.0, "Laplace exponent argument must be non-negative");
    if (omega == 0.0) return 0.0;
    if (omega * mean_ <= 0.1) {
        // -log1p(E[expm1(-w X)]) avoids cancellation for small arguments
        auto f = [&](double z) {
            return std::exp(-0.5 * z * z) * std::expm1(-omega * std::exp(mu_ + sigma_ * z));
        };
        const double lo = std::min(-15.0, sigma_ - 15.0), hi = 15.0 + sigma_;
        const auto r = quad::integrate(f, lo, hi, {0.0, 1e-14, 400});
        return -std::log1p(r.value / std::sqrt(2.0 * std::numbers::pi));
    }
    return -lognormal_log_integral(omega, mu_, sigma_, 0.0, 0.0);
}

double LognormalModel::psi_derivative_direct(double omega) const
{
    const double num = lognormal_log_integral(omega, mu_, sigma_, sigma_, mu_);
    const double den = lognormal_log_integral(omega, mu_, sigma_, 0.0, 0.0);
    return std::exp(num - den);
}

double LognormalModel::psi(double omega) const
{
    require(omega >= 0.0, "Laplace exponent argument must be non-negative");
    if (omega < table_lo) {
        const double second = std::exp(2.0 * mu_ + 2.0 * sigma_ * sigma_);
        return omega * mean_ - 0.5 * omega * omega * (second - mean_ * mean_);
    }
    if (omega > table_hi) return psi_direct(omega);
    // cubic Hermite in (log omega, log psi) with exact slopes
    const double h = log_omega_[1] - log_omega_[0];
    const double u = (std::log(omega) - log_omega_[0]) / h;
    const int k = std::clamp(static_cast<int>(u), 0, table_size - 2);
    const double t = u - k;
    const double t2 = t * t, t3 = t2 * t;
    const double y = (2 * t3 - 3 * t2 + 1) * log_psi_[k] + (t3 - 2 * t2 + t) * h * slope_[k] +
                     (-2 * t3 + 3 * t2) * log_psi_[k + 1] + (t3 - t2) * h * slope_[k + 1];
    return std::exp(y);
}

// ---------------------------------------------------------------- FGGC

FggcModel::FggcModel(double theta, BaseMeasure mixing, double stationary_cutoff)
    : spec_{theta, std::move(mixing)}, cutoff_(stationary_cutoff)
{
    require(theta > 0.0 && std::isfinite(theta), "FGGC model: theta must be positive");
    require(spec_.mixing.lo >= 0.0, "FGGC model: mixing law must live on [0, inf)");
    require(static_cast<bool>(spec_.mixing.expect) && static_cast<bool>(spec_.mixing.sample),
            "FGGC model: mixing law needs a sampler and an expectation");
    arcsine_unit_ = spec_.mixing.name == "arcsine" && spec_.mixing.lo == 0.0 && spec_.mixing.hi == 1.0;
    stationary_base_ = fggc_q_tilde_measure(spec_, cutoff_);
}

std::map<std::string, double> FggcModel::parameters() const
{
    return {{"theta", spec_.theta}, {"mixing_lo", spec_.mixing.lo}, {"mixing_hi", spec_.mixing.hi}};
}

double FggcModel::psi(double omega) const
{
    require(omega >= 0.0, "Laplace exponent argument must be non-negative");
    if (arcsine_unit_) return 2.0 * spec_.theta * std::log1p(omega / (2.0 * (1.0 + std::sqrt(1.0 + omega))));
    return spec_.theta * spec_.mixing.expect([omega](double w) { return std::log1p(omega * w); });
}

double FggcModel::sample_stationary(RngStream& rng) const
{
    const double mass = spec_.theta * cutoff_;
    const double t = sample_gamma(mass, 1.0, rng);
    return t * perfect_sample_mean({mass, stationary_base_}, rng);
}

// ---------------------------------------------------------------- registry

std::shared_ptr<const LevyModel> make_model(const std::string& name, const std::map<std::string, double>& params)
{
    auto get = [&](const std::string& key, double fallback) {
        const auto it = params.find(key);
        return it == params.end() ? fallback : it->second;
    };
    auto need = [&](const std::string& key) {
        const auto it = params.find(key);
        if (it == params.end()) throw DomainError("model " + name + " needs parameter " + key);
        return it->second;
    };
    if (name == "gamma") return std::make_shared<GammaModel>(need("theta"), get("scale", 1.0));
    if (name == "stable") return std::make_shared<StableModel>(need("alpha"), get("scale", 1.0));
    if (name == "inverse_gaussian" || name == "ig")
        return std::make_shared<InverseGaussianModel>(need("delta"), need("gamma"));
    if (name == "lognormal") return std::make_shared<LognormalModel>(get("mu", 0.0), get("sigma", 1.0));
    if (name == "fggc_arcsine") return std::make_shared<FggcModel>(need("theta"), arcsine_measure());
    if (name == "fggc_uniform") return std::make_shared<FggcModel>(need("theta"), uniform_measure(0.0, 1.0));
    throw DomainError("unknown model: " + name);
}

std::vector<std::string> model_names()
{
    return {"gamma", "stable", "inverse_gaussian", "lognormal", "fggc_arcsine", "fggc_uniform"};
}

// ---------------------------------------------------------------- exponents

double joint_phi_quadrature(const LevyModel& model, double omega, double v, double a)
{
    require_exponent_args(omega, v, a);
    if (omega == 0.0 && v == 0.0) return 0.0;
    auto f = [&](double t) {
        const double u = std::exp(-a * t);
        return model.psi(v * u - omega * std::expm1(-a * t));
    };
    const auto r = quad::integrate(f, 0.0, 1.0, exponent_opts);
    if (!r.converged) throw NumericError("Phi exponent: quadrature did not converge");
    return a * r.value;
}

double lambda_quadrature(const LevyModel& model, double v, double omega, double a)
{
    require_exponent_args(omega, v, a);
    if (v == 0.0) return 0.0;
    auto f = [&](double t) {
        const double u = std::exp(-a * t);
        const double base = -omega * std::expm1(-a * t);
        return model.psi(v * u + base) - model.psi(base);
    };
    const auto r = quad::integrate(f, 0.0, 1.0, exponent_opts);
    if (!r.converged) throw NumericError("Lambda exponent: quadrature did not converge");
    return a * r.value;
}

double joint_phi_exponent(const LevyModel& model, double omega, double v, double a)
{
    require_exponent_args(omega, v, a);
    if (auto c = model.joint_phi_closed_form(omega, v, a)) return *c;
    return joint_phi_quadrature(model, omega, v, a);
}

double phi_exponent(const LevyModel& model, double omega, double a) { return joint_phi_exponent(model, omega, 0.0, a); }

double lambda_exponent(const LevyModel& model, double v, double omega, double a)
{
    require_exponent_args(omega, v, a);
    if (auto c = model.joint_phi_closed_form(omega, v, a)) return *c - *model.joint_phi_closed_form(omega, 0.0, a);
    return lambda_quadrature(model, v, omega, a);
}

double stationary_exponent(const LevyModel& model, double omega)
{
    require(omega >= 0.0 && std::isfinite(omega), "Laplace exponent argument must be non-negative");
    if (auto c = model.stationary_closed_form(omega)) return *c;
    if (omega == 0.0) return 0.0;
    auto f = [&](double s) { return model.psi(omega * std::exp(-s)); };
    double total = 0.0;
    double s = 0.0;
    const double chunk = 8.0;
    for (;;) {
        const auto r = quad::integrate(f, s, s + chunk, exponent_opts);
        total += r.value;
        s += chunk;
        const double edge = f(s);
        if (edge == 0.0) return total;
        if (edge <= 1e-16 * total) {
            // geometric tail with the local decay rate
            const double rate = std::log(f(s - 1.0) / edge);
            if (!(rate > 0.0)) throw DivergenceError("stationary exponent: psi does not decay at zero");
            return total + edge / rate;
        }
        if (s > 4000.0) throw DivergenceError("stationary exponent: integral does not converge");
    }
}

PhiTable make_phi_table(double a, std::size_t size, std::uint64_t seed)
{
    require(a > 0.0 && size > 0, "phi table needs a > 0 and a positive size");
    PhiTable table{a, seed, std::vector<double>(size)};
    RngStream rng(seed, 0x7ab1e);
    for (auto& u : table.draws) u = sample_f_a(a, rng);
    return table;
}

double phi_hat(const PhiTable& table, const LevyModel& model, double omega, double v)
{
    require_exponent_args(omega, v, table.a);
    double sum = 0.0;
    for (double u : table.draws) sum += model.psi(v * u + omega * (1.0 - u));
    return table.a * sum / static_cast<double>(table.draws.size());
}

double fggc_phi_mixture(const FggcSpec& spec, double omega, double v, double a)
{
    require_exponent_args(omega, v, a);
    return spec.theta * a * expect_f_a(a, [&](double u) {
               return spec.mixing.expect([&](double w) { return std::log1p(w * (omega * (1.0 - u) + v * u)); });
           });
}

double fggc_lambda_mixture(const FggcSpec& spec, double v, double omega, double a)
{
    require_exponent_args(omega, v, a);
    return spec.theta * a * expect_f_a(a, [&](double u) {
               return spec.mixing.expect([&](double w) {
                   const double r = u * w / (1.0 + w * (1.0 - u) * omega);
                   return std::log1p(v * r);
               });
           });
}

BaseMeasure fggc_q_measure(const FggcSpec& spec, double a)
{
    require(a > 0.0, "Q_a needs a > 0");
    const BaseMeasure h = spec.mixing;
    BaseMeasure m;
    m.name = "q_a";
    m.lo = 0.0;
    m.hi = -std::expm1(-a) * h.hi;
    m.sample = [h, a](RngStream& rng) {
        const double u = sample_f_a(a, rng);
        return (1.0 - u) * h.sample(rng);
    };
    m.cdf = [h, a](double x) {
        if (x <= 0.0) return 0.0;
        return h.expect([&](double w) {
            if (w <= x) return 1.0;
            return std::clamp(-std::log1p(-x / w) / a, 0.0, 1.0);
        });
    };
    m.expect = [h, a](const std::function<double(double)>& f) {
        return expect_f_a(a, [&](double u) { return h.expect([&](double w) { return f((1.0 - u) * w); }); });
    };
    return m;
}

BaseMeasure fggc_q_tilde_measure(const FggcSpec& spec, double a)
{
    require(a > 0.0, "Q_a needs a > 0");
    const BaseMeasure h = spec.mixing;
    BaseMeasure m;
    m.name = "q_tilde_a";
    m.lo = std::exp(-a) * h.lo;
    m.hi = h.hi;
    m.sample = [h, a](RngStream& rng) {
        const double u = sample_f_a(a, rng);
        return u * h.sample(rng);
    };
    m.cdf = [h, a](double x) {
        if (x <= 0.0) return 0.0;
        return h.expect([&](double w) {
            if (w <= x) return 1.0;
            return std::clamp((std::log(x / w) + a) / a, 0.0, 1.0);
        });
    };
    m.expect = [h, a](const std::function<double(double)>& f) {
        return expect_f_a(a, [&](double u) { return h.expect([&](double w) { return f(u * w); }); });
    };
    return m;
}

BaseMeasure fggc_q_conditional_measure(const FggcSpec& spec, double a, double omega)
{
    require(a > 0.0 && omega >= 0.0, "Q_{a|omega} needs a > 0 and omega >= 0");
    const BaseMeasure h = spec.mixing;
    const double ea = std::exp(-a);
    auto map = [omega](double u, double w) { return u * w / (1.0 + w * (1.0 - u) * omega); };
    BaseMeasure m;
    m.name = "q_conditional";
    m.lo = map(ea, h.lo);
    m.hi = h.hi;
    m.sample = [h, a, map](RngStream& rng) {
        const double u = sample_f_a(a, rng);
        return map(u, h.sample(rng));
    };
    m.cdf = [h, a, omega](double x) {
        if (x <= 0.0) return 0.0;
        return h.expect([&](double w) {
            if (w <= x) return 1.0;
            const double ubar = x * (1.0 + w * omega) / (w * (1.0 + x * omega));
            return std::clamp((std::log(ubar) + a) / a, 0.0, 1.0);
        });
    };
    m.expect = [h, a, map](const std::function<double(double)>& f) {
        return expect_f_a(a, [&](double u) { return h.expect([&](double w) { return f(map(u, w)); }); });
    };
    return m;
}

IncrementPair fggc_increment_pair(const FggcSpec& spec, double a, RngStream& rng, const CouplingConfig& cfg)
{
    require(a > 0.0, "increment pair needs a > 0");
    const double mass = spec.theta * a;
    const double t = sample_gamma(mass, 1.0, rng);
    // joint stick-breaking for the means of ((1 - U) W, U W)
    const double ea = std::exp(-a);
    const double lo1 = 0.0, hi1 = (1.0 - ea) * spec.mixing.hi;
    const double lo2 = ea * spec.mixing.lo, hi2 = spec.mixing.hi;
    const double width = std::max(hi1 - lo1, hi2 - lo2);
    double s1 = 0.0, s2 = 0.0, r = 1.0;
    std::size_t step = 0;
    do {
        if (step++ >= cfg.max_steps) throw CouplingError("increment pair: chains did not coalesce");
        const double log_u = std::log(rng.uniform());
        const double keep = std::exp(log_u / mass);
        const double b = -std::expm1(log_u / mass);
        const double u = sample_f_a(a, rng);
        const double w = spec.mixing.sample(rng);
        s1 += r * b * (1.0 - u) * w;
        s2 += r * b * u * w;
        r *= keep;
    } while (r * width >= cfg.epsilon);
    const double m1 = s1 + r * 0.5 * (lo1 + hi1);
    const double m2 = s2 + r * 0.5 * (lo2 + hi2);
    return {t, t * m1, t * m2};
}

} // namespace bns
