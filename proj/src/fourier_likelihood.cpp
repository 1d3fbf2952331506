#include "bns/fourier_likelihood.hpp"

#include "bns/dirichlet_mean.hpp"
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

constexpr double pi = std::numbers::pi;

struct Centred {
    std::vector<double> abs_a;
    double sum = 0.0;
};

Centred centre(std::span<const double> x, const OuModel& m)
{
    require(!x.empty(), "likelihood: no returns");
    Centred c;
    c.abs_a.resize(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        require(std::isfinite(x[i]), "likelihood: returns must be finite");
        const double d = x[i] - m.mu * m.delta_t;
        c.sum += d;
        c.abs_a[i] = std::abs(d);
    }
    return c;
}

// log |prod cos(y_i a_i)| and its sign
std::pair<double, signed char> log_cosine_product(std::span<const double> y, std::span<const double> abs_a)
{
    double log_abs = 0.0;
    signed char sign = 1;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double c = std::cos(y[i] * abs_a[i]);
        if (c == 0.0) return {-std::numeric_limits<double>::infinity(), 0};
        if (c < 0.0) sign = static_cast<signed char>(-sign);
        log_abs += std::log(std::abs(c));
    }
    return {log_abs, sign};
}

double half_normal_log_density(double y, double variance)
{
    return 0.5 * std::log(2.0 / (pi * variance)) - y * y / (2.0 * variance);
}

struct SignedLog {
    double log_abs = -std::numeric_limits<double>::infinity();
    signed char sign = 0;
};

// exp(la) - exp(lb) on the log scale
SignedLog log_difference(double la, double lb)
{
    if (la == lb) return {};
    if (la > lb) return {la + std::log1p(-std::exp(lb - la)), 1};
    return {lb + std::log1p(-std::exp(la - lb)), -1};
}

struct Replicate {
    double log_abs = 0.0;      // importance weight times the cosine product
    signed char sign = 1;
    double log_weight = 0.0;   // importance weight alone, for the normaliser
};

ExponentEngine make_engine(const OuModel& m, ExponentSource source, std::size_t table_size, std::uint64_t seed)
{
    return ExponentEngine(m.bdlp, m.a(), source, table_size, seed);
}

Replicate q2_replicate(const Centred& c, const OuModel& m, const ExponentEngine& e, const FourierOptions& o,
                       RngStream& rng)
{
    const std::size_t n = c.abs_a.size();
    const double v = m.bdlp->sample_stationary(rng);
    const auto cw = c_weights(n, m.a(), CMode::decaying);
    const auto cp = o.c_mode == CMode::decaying ? cw : c_weights(n, m.a(), o.c_mode);
    std::vector<double> y(n);
    double lw = 0.0, c_sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double prec = cp[i] * v / m.lambda + o.b_shift;
        if (!(prec > 0.0)) throw NumericError("Fourier likelihood: zero proposal precision; set a positive b-shift");
        y[i] = sample_half_normal(1.0 / prec, rng);
        lw += 0.5 * std::log(pi / (2.0 * prec)) - v * (cw[i] - cp[i]) * y[i] * y[i] / (2.0 * m.lambda);
        c_sum += cw[i];
    }
    lw -= v * m.beta * m.beta * c_sum / (2.0 * m.lambda) + o.b_shift * static_cast<double>(n) * m.beta * m.beta / 2.0;
    const auto ctx = make_joint_laplace_context(y, m.beta, m.a(), m.lambda);
    for (std::size_t i = 0; i < n; ++i) {
        const double w = ctx.omega[i] / m.lambda;
        lw -= e.phi(w);
        if (i + 1 < n) lw -= e.lambda(ctx.v[i] / m.lambda, w);
    }
    const auto [lc, sign] = log_cosine_product(y, c.abs_a);
    return {lw + lc, sign, lw};
}

Replicate q1_replicate(const Centred& c, const OuModel& m, const FggcSpec& spec, const BaseMeasure& q_base,
                       const FourierOptions& o, RngStream& rng)
{
    const std::size_t n = c.abs_a.size();
    const double a = m.a();
    const double mass = spec.theta * a;
    const double v = m.bdlp->sample_stationary(rng);
    const auto cw = c_weights(n, a, CMode::decaying);
    std::vector<double> y(n);
    double lw = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double t = sample_gamma(mass, 1.0, rng);
        const double r = perfect_sample_mean({mass, q_base}, rng);
        const double prec = (cw[i] * v + t * r) / m.lambda + o.b_shift;
        if (!(prec > 0.0)) throw NumericError("Fourier likelihood: zero proposal precision; set a positive b-shift");
        y[i] = sample_half_normal(1.0 / prec, rng);
        lw += 0.5 * std::log(pi / (2.0 * prec)) - prec * m.beta * m.beta / 2.0;
    }
    const auto ctx = make_joint_laplace_context(y, m.beta, a, m.lambda);
    const BaseMeasure& h = spec.mixing;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double w = ctx.omega[i] / m.lambda;
        auto draw = [&](RngStream& r) {
            const double u = sample_f_a(a, r);
            const double mix = h.sample(r);
            return u * mix / (1.0 + mix * (1.0 - u) * w);
        };
        const double g = sample_gamma(mass, 1.0, rng);
        const double mean = detail::couple_from_past(mass, 0.0, h.hi, draw, rng, CouplingConfig{}, detail::NoObserver{}).value;
        lw -= ctx.v[i] / m.lambda * g * mean;
    }
    const auto [lc, sign] = log_cosine_product(y, c.abs_a);
    return {lw + lc, sign, lw};
}

EstimateReport assemble(std::string method, const Centred& c, const OuModel& m, const std::vector<Replicate>& reps,
                        std::size_t replications, std::uint64_t seed, int threads)
{
    std::vector<double> la(reps.size()), lw(reps.size());
    std::vector<signed char> sg(reps.size());
    for (std::size_t l = 0; l < reps.size(); ++l) {
        la[l] = reps[l].log_abs;
        sg[l] = reps[l].sign;
        lw[l] = reps[l].log_weight;
    }
    const double n = static_cast<double>(c.abs_a.size());
    const double front = m.beta * c.sum - n * std::log(pi);
    const auto est = stats::signed_log_mean_exp(la, sg);
    const auto norm = stats::log_mean_exp(lw);
    EstimateReport r;
    r.method = std::move(method);
    r.log_value = front + est.log_mean;
    r.value = std::exp(r.log_value);
    r.log_std_error = est.relative_std_error;
    r.std_error = r.value * est.relative_std_error;
    r.replications = replications;
    r.seed = seed;
    r.threads = threads;
    r.params = {{"mu", m.mu}, {"beta", m.beta}, {"lambda", m.lambda}, {"delta_t", m.delta_t}};
    for (const auto& [k, v] : m.bdlp->parameters()) r.params[m.bdlp->name() + "." + k] = v;
    r.diagnostics["effective_sample_size"] = est.effective_sample_size;
    r.diagnostics["log_normalizer"] = norm.log_mean;
    r.notes.push_back("background process: " + m.bdlp->name());
    return r;
}

} // namespace

void validate(const OuModel& m)
{
    require(static_cast<bool>(m.bdlp), "OU model: background process is missing");
    require(std::isfinite(m.mu) && std::isfinite(m.beta), "OU model: mu and beta must be finite");
    require(m.lambda > 0.0 && std::isfinite(m.lambda), "OU model: lambda must be positive");
    require(m.delta_t > 0.0 && std::isfinite(m.delta_t), "OU model: delta_t must be positive");
}

OuModel ou_model_from(const OuGammaParams& p, double stationary_cutoff)
{
    validate(p);
    return {std::make_shared<GammaModel>(p.theta, p.scale, stationary_cutoff), p.mu, p.beta, p.lambda, p.delta_t};
}

double weber_sonine_rhs(double abs_a, double tau)
{
    require(tau > 0.0, "Weber-Sonine: tau must be positive");
    return std::exp(-abs_a * abs_a / (2.0 * tau)) / std::sqrt(2.0 * pi * tau);
}

double weber_sonine_lhs(double abs_a, double tau)
{
    require(tau > 0.0, "Weber-Sonine: tau must be positive");
    const double top = std::sqrt(90.0 / tau);
    auto f = [&](double y) { return std::cos(y * abs_a) * std::exp(-0.5 * y * y * tau); };
    // one piece per half period keeps each panel smooth
    const int pieces = std::max(1, static_cast<int>(std::ceil(top * abs_a / pi)));
    double total = 0.0;
    for (int k = 0; k < pieces; ++k)
        total += quad::integrate(f, top * k / pieces, top * (k + 1) / pieces, {1e-16, 1e-13, 200}).value;
    return total / pi;
}

JointLaplaceContext make_joint_laplace_context(std::span<const double> y, double beta, double a, double lambda)
{
    require(a > 0.0 && lambda > 0.0, "joint Laplace context: a and lambda must be positive");
    const std::size_t n = y.size();
    JointLaplaceContext ctx;
    ctx.a = a;
    ctx.lambda = lambda;
    ctx.omega.resize(n);
    ctx.s.assign(n, 0.0);
    ctx.v.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) ctx.omega[i] = 0.5 * (y[i] * y[i] + beta * beta);
    // t_l = e^{a(l-1)} s_l = (1 - e^{-a}) omega_l + e^{-a} t_{l+1}; v_i = t_{i+1}
    const double carry = -std::expm1(-a), keep = std::exp(-a);
    double t = 0.0;
    for (std::size_t l = n; l-- > 0;) {
        if (l + 1 < n) ctx.v[l] = t;
        t = carry * ctx.omega[l] + keep * t;
        ctx.s[l] = std::exp(-a * static_cast<double>(l)) * t;
    }
    return ctx;
}

std::string to_string(ExponentSource s)
{
    switch (s) {
    case ExponentSource::automatic: return "automatic";
    case ExponentSource::closed_form: return "closed_form";
    case ExponentSource::quadrature: return "quadrature";
    case ExponentSource::phi_hat: return "phi_hat";
    }
    return "unknown";
}

ExponentSource exponent_source_from_string(const std::string& name)
{
    for (auto s : {ExponentSource::automatic, ExponentSource::closed_form, ExponentSource::quadrature,
                   ExponentSource::phi_hat})
        if (to_string(s) == name) return s;
    throw DomainError("unknown exponent source: " + name);
}

ExponentEngine::ExponentEngine(std::shared_ptr<const LevyModel> model, double a, ExponentSource source,
                               std::size_t table_size, std::uint64_t table_seed)
    : model_(std::move(model)), a_(a), source_(source)
{
    require(static_cast<bool>(model_), "exponent engine: model is missing");
    require(a > 0.0, "exponent engine: a must be positive");
    const bool closed = model_->joint_phi_closed_form(1.0, 1.0, a).has_value();
    if (source_ == ExponentSource::automatic) source_ = closed ? ExponentSource::closed_form : ExponentSource::quadrature;
    if (source_ == ExponentSource::closed_form && !closed)
        throw DomainError("exponent engine: " + model_->name() + " has no closed-form Phi");
    if (source_ == ExponentSource::phi_hat) table_ = make_phi_table(a, table_size, table_seed);
}

double ExponentEngine::joint_phi(double omega, double v) const
{
    switch (source_) {
    case ExponentSource::closed_form: return *model_->joint_phi_closed_form(omega, v, a_);
    case ExponentSource::phi_hat: return phi_hat(table_, *model_, omega, v);
    default: return joint_phi_quadrature(*model_, omega, v, a_);
    }
}

double ExponentEngine::lambda(double v, double omega) const
{
    switch (source_) {
    case ExponentSource::closed_form:
        return *model_->joint_phi_closed_form(omega, v, a_) - *model_->joint_phi_closed_form(omega, 0.0, a_);
    case ExponentSource::phi_hat: return phi_hat(table_, *model_, omega, v) - phi_hat(table_, *model_, omega, 0.0);
    default: return lambda_quadrature(*model_, v, omega, a_);
    }
}

double ExponentEngine::stationary(double omega) const { return stationary_exponent(*model_, omega); }

std::vector<double> c_weights(std::size_t n, double a, CMode mode)
{
    std::vector<double> c(n);
    const double carry = -std::expm1(-a);
    for (std::size_t i = 0; i < n; ++i)
        c[i] = mode == CMode::decaying ? carry * std::exp(-a * static_cast<double>(i)) : carry;
    return c;
}

double log_joint_laplace_l1(std::span<const double> y, const OuModel& m, const ExponentEngine& e)
{
    validate(m);
    if (y.empty()) return 0.0;
    const auto ctx = make_joint_laplace_context(y, m.beta, m.a(), m.lambda);
    double out = -e.stationary(ctx.s[0] / m.lambda);
    for (std::size_t i = 0; i < y.size(); ++i) out -= e.joint_phi(ctx.omega[i] / m.lambda, ctx.v[i] / m.lambda);
    return out;
}

double log_joint_laplace_l2(std::span<const double> y, const OuModel& m, const ExponentEngine& e, CMode mode)
{
    validate(m);
    if (y.empty()) return 0.0;
    const auto ctx = make_joint_laplace_context(y, m.beta, m.a(), m.lambda);
    const auto c = c_weights(y.size(), m.a(), mode);
    double weighted = 0.0, out = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        weighted += c[i] * ctx.omega[i];
        out -= e.phi(ctx.omega[i] / m.lambda);
    }
    return out - e.stationary(weighted / m.lambda);
}

EstimateReport likelihood_fc(std::span<const double> x, const OuModel& m, std::size_t replications, std::uint64_t seed,
                             const FourierOptions& options)
{
    validate(m);
    require(replications > 0, "likelihood: replications must be positive");
    require(options.b_shift >= 0.0, "likelihood: b-shift must be non-negative");
    if (!m.bdlp->has_stationary_sampler())
        throw DomainError("Fourier likelihood: " + m.bdlp->name() + " has no stationary sampler; use the cosine-tilt method");
    const auto c = centre(x, m);
    std::vector<Replicate> reps(replications);
    std::string method;
    if (options.method == FourierMethod::q1) {
        const FggcSpec* spec = m.bdlp->fggc();
        if (!spec) throw DomainError("Fourier likelihood: Q1 needs a finite GGC background process");
        const BaseMeasure q_base = fggc_q_measure(*spec, m.a());
        parallel_for(replications, options.threads, [&](std::size_t l) {
            RngStream rng(seed, l);
            reps[l] = q1_replicate(c, m, *spec, q_base, options, rng);
        });
        method = "fourier_q1";
    } else {
        const auto engine = make_engine(m, options.source, options.phi_table_size, seed);
        parallel_for(replications, options.threads, [&](std::size_t l) {
            RngStream rng(seed, l);
            reps[l] = q2_replicate(c, m, engine, options, rng);
        });
        method = "fourier_q2";
        auto r = assemble(method, c, m, reps, replications, seed, options.threads);
        r.notes.push_back("exponent source: " + to_string(engine.source()));
        r.notes.push_back(std::string("c weights: ") + (options.c_mode == CMode::decaying ? "decaying" : "constant"));
        r.diagnostics["b_shift"] = options.b_shift;
        return r;
    }
    auto r = assemble(method, c, m, reps, replications, seed, options.threads);
    r.notes.push_back("exponent source: mixture sampling");
    r.diagnostics["b_shift"] = options.b_shift;
    return r;
}

Q2Draw q2_sample(const OuModel& m, std::size_t n, const ExponentEngine& e, RngStream& rng, CMode mode)
{
    validate(m);
    Q2Draw d;
    d.v = m.bdlp->sample_stationary(rng);
    const auto c = c_weights(n, m.a(), mode);
    d.y.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double prec = c[i] * d.v / m.lambda;
        if (!(prec > 0.0)) throw NumericError("Q2 sampler: zero proposal precision");
        // exp(-Phi) <= 1 is the acceptance probability of a half-normal proposal
        for (;;) {
            ++d.proposals;
            const double y = sample_half_normal(1.0 / prec, rng);
            const double w = 0.5 * (y * y + m.beta * m.beta) / m.lambda;
            if (rng.uniform() < std::exp(-e.phi(w))) {
                d.y[i] = y;
                break;
            }
        }
    }
    return d;
}

double cosine_tilt_normalizer(std::span<const double> abs_a, std::span<const double> p)
{
    require(abs_a.size() == p.size(), "cosine tilt: size mismatch");
    double e = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        require(p[i] > 0.0, "cosine tilt: scales must be positive");
        e += abs_a[i] * abs_a[i] * p[i] / 2.0;
    }
    return -std::expm1(-e);
}

CosineTiltDraw cosine_tilt_sample(std::span<const double> abs_a, std::span<const double> p, RngStream& rng)
{
    const std::size_t n = abs_a.size();
    if (!(cosine_tilt_normalizer(abs_a, p) > 0.0)) throw DomainError("cosine tilt: all centred returns are zero");
    std::vector<double> tail(n + 1, 0.0);  // sum_{i >= k} a_i^2 p_i / 2
    for (std::size_t k = n; k-- > 0;) tail[k] = tail[k + 1] + abs_a[k] * abs_a[k] * p[k] / 2.0;
    CosineTiltDraw d;
    d.y.resize(n);
    d.tilt.resize(n);
    double prefix = 1.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double lam = prefix * std::exp(-tail[k + 1]);
        d.tilt[k] = lam;
        const double ak = abs_a[k], pk = p[k];
        const double e = std::exp(-ak * ak * pk / 2.0);
        // 1 - lam cos = (1 - |lam|) + |lam| (1 -+ cos): a two-part mixture with non-negative parts
        const double w0 = 1.0 - std::abs(lam);
        const double w1 = lam >= 0.0 ? lam * (1.0 - e) : -lam * (1.0 + e);
        double y;
        if (w0 + w1 <= 0.0 || rng.uniform() * (w0 + w1) < w0) {
            y = sample_half_normal(pk, rng);
        } else if (lam < 0.0) {
            do y = sample_half_normal(pk, rng);
            while (rng.uniform() * 2.0 >= 1.0 + std::cos(y * ak));
        } else if (ak * ak * pk > 2.0) {
            do y = sample_half_normal(pk, rng);
            while (rng.uniform() * 2.0 >= 1.0 - std::cos(y * ak));
        } else {
            // y^2 H(y) proposal (a scaled chi with three degrees of freedom), as 1 - cos(z) <= z^2 / 2
            for (;;) {
                const double z1 = rng.normal(), z2 = rng.normal(), z3 = rng.normal();
                y = std::sqrt(pk * (z1 * z1 + z2 * z2 + z3 * z3));
                const double arg = y * ak;
                const double bound = 0.5 * arg * arg;
                if (bound > 0.0 && rng.uniform() * bound < 1.0 - std::cos(arg)) break;
            }
        }
        d.y[k] = y;
        prefix *= std::cos(y * ak);
    }
    return d;
}

std::string to_string(UpsilonSource s)
{
    switch (s) {
    case UpsilonSource::automatic: return "automatic";
    case UpsilonSource::tau_paths: return "tau_paths";
    case UpsilonSource::half_normal: return "half_normal";
    }
    return "automatic";
}

UpsilonSource upsilon_source_from_string(const std::string& name)
{
    if (name == "automatic") return UpsilonSource::automatic;
    if (name == "tau_paths") return UpsilonSource::tau_paths;
    if (name == "half_normal") return UpsilonSource::half_normal;
    throw DomainError("unknown upsilon source '" + name + "'");
}

EstimateReport likelihood_general(std::span<const double> x, const OuModel& m, std::size_t replications,
                                  std::uint64_t seed, const GeneralOptions& options)
{
    validate(m);
    require(replications > 0, "likelihood: replications must be positive");
    const auto c = centre(x, m);
    const std::size_t n = c.abs_a.size();
    std::vector<double> p = options.p.empty() ? std::vector<double>(n, 1.0) : options.p;
    require(p.size() == n, "likelihood: one half-normal scale per return");
    const double cn = cosine_tilt_normalizer(c.abs_a, p);
    const double log_cn = std::log(cn);
    const auto engine = make_engine(m, options.source, options.phi_table_size, seed);
    auto log_omega = [&](const std::vector<double>& y) {
        double lh = 0.0;
        for (std::size_t i = 0; i < n; ++i) lh += half_normal_log_density(y[i], p[i]);
        return log_joint_laplace_l1(y, m, engine) - lh;
    };
    const FggcSpec* spec = m.bdlp->fggc();
    const bool paths_ok = spec && m.bdlp->has_stationary_sampler();
    UpsilonSource ups_source = options.upsilon;
    if (ups_source == UpsilonSource::automatic)
        ups_source = paths_ok ? UpsilonSource::tau_paths : UpsilonSource::half_normal;
    if (ups_source == UpsilonSource::tau_paths && !paths_ok)
        throw DomainError("likelihood: tau paths need a finite GGC background process with a stationary sampler");
    // log of pi^n times the tau-path integrand, so both sources estimate E[Omega(y_H)]
    auto log_upsilon_path = [&](RngStream& rng) {
        double v = m.bdlp->sample_stationary(rng);
        double out = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const auto inc = fggc_increment_pair(*spec, m.a(), rng);
            const double tau = ((1.0 - std::exp(-m.a())) * v + inc.jump_part) / m.lambda;
            v = std::exp(-m.a()) * v + inc.carry_part;
            if (!(tau > 0.0)) throw NumericError("likelihood: integrated variance is not positive");
            out += -0.5 * m.beta * m.beta * tau + 0.5 * std::log(pi / (2.0 * tau));
        }
        return out;
    };
    std::vector<double> la(replications), lu(replications);
    std::vector<signed char> sg(replications);
    parallel_for(replications, options.threads, [&](std::size_t l) {
        RngStream rng(seed, l);
        double upsilon;
        if (ups_source == UpsilonSource::tau_paths) {
            upsilon = log_upsilon_path(rng);
        } else {
            std::vector<double> yh(n);
            for (std::size_t i = 0; i < n; ++i) yh[i] = sample_half_normal(p[i], rng);
            upsilon = log_omega(yh);
        }
        lu[l] = upsilon;
        if (cn > 0.0) {
            const auto tilt = cosine_tilt_sample(c.abs_a, p, rng);
            const auto d = log_difference(upsilon, log_cn + log_omega(tilt.y));
            la[l] = d.log_abs;
            sg[l] = d.sign;
        } else {
            la[l] = upsilon;
            sg[l] = 1;
        }
    });
    const double front = m.beta * c.sum - static_cast<double>(n) * std::log(pi);
    const auto est = stats::signed_log_mean_exp(la, sg);
    const auto ups = stats::log_mean_exp(lu);
    EstimateReport r;
    r.method = "cosine_tilt";
    r.log_value = front + est.log_mean;
    r.value = std::exp(r.log_value);
    r.log_std_error = est.relative_std_error;
    r.std_error = r.value * est.relative_std_error;
    r.replications = replications;
    r.seed = seed;
    r.threads = options.threads;
    r.params = {{"mu", m.mu}, {"beta", m.beta}, {"lambda", m.lambda}, {"delta_t", m.delta_t}};
    for (const auto& [k, v] : m.bdlp->parameters()) r.params[m.bdlp->name() + "." + k] = v;
    r.diagnostics["effective_sample_size"] = est.effective_sample_size;
    r.diagnostics["tilt_normalizer"] = cn;
    r.diagnostics["log_upsilon"] = ups.log_mean - static_cast<double>(n) * std::log(pi);
    r.diagnostics["upsilon_relative_std_error"] = ups.relative_std_error;
    r.notes.push_back("background process: " + m.bdlp->name());
    r.notes.push_back("exponent source: " + to_string(engine.source()));
    r.notes.push_back("cosine-free term: " + to_string(ups_source));
    if (cn == 0.0) r.notes.push_back("all centred returns are zero; the estimate is the normaliser term alone");
    return r;
}

PosteriorEstimate bayes_posterior_fc(const std::vector<ModelFunctional>& functionals, const ModelPrior& prior,
                                     std::span<const double> x, std::size_t replications, std::uint64_t seed,
                                     const FourierOptions& options)
{
    require(static_cast<bool>(prior), "posterior: prior sampler is empty");
    require(replications > 0, "posterior: replications must be positive");
    const std::size_t k = functionals.size();
    std::vector<double> la(replications), values(replications * k);
    std::vector<signed char> sg(replications);
    parallel_for(replications, options.threads, [&](std::size_t l) {
        RngStream rng(seed, l);
        const OuModel m = prior(rng);
        validate(m);
        const auto c = centre(x, m);
        Replicate rep;
        if (options.method == FourierMethod::q1) {
            const FggcSpec* spec = m.bdlp->fggc();
            if (!spec) throw DomainError("posterior: Q1 needs a finite GGC background process");
            rep = q1_replicate(c, m, *spec, fggc_q_measure(*spec, m.a()), options, rng);
        } else {
            const auto engine = make_engine(m, options.source, options.phi_table_size, seed);
            rep = q2_replicate(c, m, engine, options, rng);
        }
        const double n = static_cast<double>(x.size());
        la[l] = rep.log_abs + m.beta * c.sum - n * std::log(pi);
        sg[l] = rep.sign;
        for (std::size_t j = 0; j < k; ++j) values[l * k + j] = functionals[j](m);
    });
    const auto evidence = stats::signed_log_mean_exp(la, sg);
    double top = -std::numeric_limits<double>::infinity();
    for (std::size_t l = 0; l < replications; ++l)
        if (sg[l] != 0) top = std::max(top, la[l]);
    std::vector<double> w(replications);
    double sum_w = 0.0, sum_abs = 0.0, sum_sq = 0.0;
    for (std::size_t l = 0; l < replications; ++l) {
        w[l] = sg[l] == 0 ? 0.0 : sg[l] * std::exp(la[l] - top);
        sum_w += w[l];
        sum_abs += std::abs(w[l]);
        sum_sq += w[l] * w[l];
    }
    PosteriorEstimate out;
    out.replications = replications;
    out.seed = seed;
    out.log_evidence = evidence.log_mean;
    out.effective_sample_size = sum_abs * sum_abs / sum_sq;
    out.values.assign(k, 0.0);
    out.std_errors.assign(k, 0.0);
    for (std::size_t j = 0; j < k; ++j) {
        double mean = 0.0;
        for (std::size_t l = 0; l < replications; ++l) mean += w[l] * values[l * k + j];
        mean /= sum_w;
        double var = 0.0;
        for (std::size_t l = 0; l < replications; ++l) {
            const double d = values[l * k + j] - mean;
            var += w[l] * w[l] * d * d;
        }
        out.values[j] = mean;
        out.std_errors[j] = std::sqrt(var) / std::abs(sum_w);
    }
    if (out.effective_sample_size < 0.01 * static_cast<double>(replications))
        out.warnings.push_back("effective sample size below 1% of the replications; estimates are unreliable");
    return out;
}

} // namespace bns
