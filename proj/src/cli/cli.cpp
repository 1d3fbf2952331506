#include "bns/cli.hpp"

#include "bns/dirichlet_mean.hpp"
#include "bns/errors.hpp"
#include "bns/fourier_likelihood.hpp"
#include "bns/levy_models.hpp"
#include "bns/ou_gamma.hpp"
#include "bns/parallel.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

namespace bns::cli {

namespace {

using json = nlohmann::ordered_json;

constexpr const char* estimate_schema = "bnsv.estimate.v1";
constexpr const char* posterior_schema = "bnsv.posterior.v1";
constexpr const char* validation_schema = "bnsv.validation.v1";

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::string trim(std::string s)
{
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

std::optional<double> parse_number(const std::string& text)
{
    const std::string t = trim(text);
    if (t.empty()) return std::nullopt;
    double v = 0.0;
    const char* begin = t.data();
    if (*begin == '+') ++begin;
    const auto [ptr, ec] = std::from_chars(begin, t.data() + t.size(), v);
    if (ec != std::errc() || ptr != t.data() + t.size() || !std::isfinite(v)) return std::nullopt;
    return v;
}

struct Globals {
    std::uint64_t seed = 1;
    int threads = 1;
    std::string out;
    std::string config;
};

struct ModelArgs {
    std::string model = "gamma";
    double mu = 0.0, beta = 0.0, lambda = 1.0, dt = 1.0;
    double theta = 1.0, scale = 1.0;
    double alpha = 0.5;
    double ig_delta = 1.0, ig_gamma = 1.0;
    double ln_mu = 0.0, ln_sigma = 1.0;
    double cutoff = 40.0;
};

void add_model_options(CLI::App* app, ModelArgs& m)
{
    app->add_option("--model", m.model, "background process: gamma, stable, inverse_gaussian, lognormal, "
                                        "fggc_arcsine, fggc_uniform")
        ->capture_default_str();
    app->add_option("--mu", m.mu, "drift")->capture_default_str();
    app->add_option("--beta", m.beta, "volatility risk premium")->capture_default_str();
    app->add_option("--lambda", m.lambda, "mean-reversion rate")->capture_default_str();
    app->add_option("--dt", m.dt, "observation spacing")->capture_default_str();
    app->add_option("--theta", m.theta, "gamma or FGGC shape rate")->capture_default_str();
    app->add_option("--scale", m.scale, "gamma or stable scale")->capture_default_str();
    app->add_option("--alpha", m.alpha, "stable index")->capture_default_str();
    app->add_option("--ig-delta", m.ig_delta, "inverse Gaussian delta")->capture_default_str();
    app->add_option("--ig-gamma", m.ig_gamma, "inverse Gaussian gamma")->capture_default_str();
    app->add_option("--ln-mu", m.ln_mu, "lognormal log-mean")->capture_default_str();
    app->add_option("--ln-sigma", m.ln_sigma, "lognormal log-sd")->capture_default_str();
    app->add_option("--v0-cutoff", m.cutoff, "truncation of the stationary volatility series")->capture_default_str();
}

std::map<std::string, double> bdlp_params(const ModelArgs& m)
{
    if (m.model == "gamma") return {{"theta", m.theta}, {"scale", m.scale}};
    if (m.model == "stable") return {{"alpha", m.alpha}, {"scale", m.scale}};
    if (m.model == "inverse_gaussian") return {{"delta", m.ig_delta}, {"gamma", m.ig_gamma}};
    if (m.model == "lognormal") return {{"mu", m.ln_mu}, {"sigma", m.ln_sigma}};
    if (m.model == "fggc_arcsine" || m.model == "fggc_uniform") return {{"theta", m.theta}};
    throw DomainError("unknown model '" + m.model + "'");
}

OuGammaParams gamma_params(const ModelArgs& m, const std::string& what)
{
    if (m.model != "gamma") throw DomainError(what + " needs --model gamma");
    OuGammaParams p{m.mu, m.beta, m.theta, m.lambda, m.dt, m.scale};
    validate(p);
    return p;
}

OuModel general_model(const ModelArgs& m)
{
    if (m.model == "gamma") return ou_model_from(gamma_params(m, "gamma"), m.cutoff);
    OuModel out;
    out.bdlp = make_model(m.model, bdlp_params(m));
    out.mu = m.mu;
    out.beta = m.beta;
    out.lambda = m.lambda;
    out.delta_t = m.dt;
    validate(out);
    return out;
}

json model_echo(const ModelArgs& m)
{
    json j;
    j["model"] = m.model;
    j["mu"] = m.mu;
    j["beta"] = m.beta;
    j["lambda"] = m.lambda;
    j["dt"] = m.dt;
    for (const auto& [k, v] : bdlp_params(m)) j[m.model + "." + k] = v;
    j["v0_cutoff"] = m.cutoff;
    return j;
}

json map_json(const std::map<std::string, double>& m)
{
    json j = json::object();
    for (const auto& [k, v] : m) j[k] = v;
    return j;
}

// --out if given, otherwise the command's stream
class Sink {
public:
    Sink(const std::string& path, std::ostream& fallback) : path_(path), fallback_(fallback)
    {
        if (!path.empty()) {
            file_.open(path, std::ios::binary | std::ios::trunc);
            if (!file_) throw IoError("cannot open '" + path + "' for writing");
        }
    }
    std::ostream& stream() { return path_.empty() ? fallback_ : file_; }
    void close()
    {
        if (path_.empty()) return;
        file_.close();
        if (!file_) throw IoError("failed writing '" + path_ + "'");
    }

private:
    std::string path_;
    std::ostream& fallback_;
    std::ofstream file_;
};

ReturnsSeries read_returns(const std::string& path, std::istream& in)
{
    if (path == "-") return parse_returns_csv(in, "<stdin>");
    std::ifstream file(path, std::ios::binary);
    if (!file) throw IoError("cannot open '" + path + "'");
    return parse_returns_csv(file, path);
}

// spacing shared by all rows, or an error if it varies
double common_spacing(const ReturnsSeries& data, double fallback)
{
    if (!data.deltas || data.deltas->empty()) return fallback;
    const double d = data.deltas->front();
    for (double v : *data.deltas)
        if (v != d) throw DomainError("unequal spacing in the returns is only supported by simulate");
    return d;
}

std::string resolved_source(const EstimateReport& r, const std::string& fallback)
{
    const std::string key = "exponent source: ";
    for (const auto& n : r.notes)
        if (n.rfind(key, 0) == 0) return n.substr(key.size());
    return fallback;
}

// ---------------------------------------------------------------- simulate

struct SimulateArgs {
    ModelArgs model;
    std::size_t n = 100;
    double spacing_mean = 0.0;
    std::optional<double> v0;
    std::string latent;
};

void write_latent(std::ostream& os, const TauPath& path)
{
    os << "tau,T,M,v_start\n";
    for (std::size_t i = 0; i < path.tau.size(); ++i)
        os << format_double(path.tau[i]) << ',' << format_double(path.gamma_parts[i]) << ','
           << format_double(path.mean_parts[i]) << ',' << format_double(path.v_start[i]) << '\n';
}

int cmd_simulate(const Globals& g, const SimulateArgs& a, std::ostream& out)
{
    const auto p = gamma_params(a.model, "simulate");
    const V0Mode mode = a.v0 ? V0Mode{V0Fixed{*a.v0}} : V0Mode{V0Stationary{a.model.cutoff}};
    RngStream rng(g.seed);
    ReturnsSeries series;
    TauPath path;
    if (a.spacing_mean > 0.0) {
        std::vector<double> deltas(a.n);
        for (auto& d : deltas) d = a.spacing_mean * rng.exponential();
        path = random_times_tau(deltas, p, mode, rng);
        series.x.resize(a.n);
        for (std::size_t i = 0; i < a.n; ++i)
            series.x[i] = p.mu * deltas[i] + p.beta * path.tau[i] + std::sqrt(path.tau[i]) * rng.normal();
        series.deltas = deltas;
    } else {
        if (a.spacing_mean < 0.0) throw DomainError("simulate: --spacing-mean must be positive");
        auto sim = simulate_returns(p, a.n, mode, rng);
        series.x = std::move(sim.x);
        path = std::move(sim.path);
    }
    Sink sink(g.out, out);
    write_returns_csv(sink.stream(), series);
    sink.close();
    std::string latent = a.latent;
    if (latent.empty() && !g.out.empty()) latent = g.out + ".latent.csv";
    if (!latent.empty()) {
        Sink lat(latent, out);
        write_latent(lat.stream(), path);
        lat.close();
    }
    return exit_ok;
}

// ---------------------------------------------------------------- fit

struct FitArgs {
    ModelArgs model;
    std::string input;
    std::string method = "exact";
    std::size_t replications = 10000;
    std::string source = "automatic";
    std::string c_mode = "decaying";
    std::string upsilon = "automatic";
    double b_shift = 0.0;
    std::vector<double> p;
};

CMode c_mode_from(const std::string& s)
{
    if (s == "decaying") return CMode::decaying;
    if (s == "constant") return CMode::constant;
    throw DomainError("unknown c-mode '" + s + "'");
}

json estimate_json(const std::string& command, const EstimateReport& r, std::size_t n, const std::string& source,
                   json config)
{
    json j;
    j["schema"] = estimate_schema;
    j["command"] = command;
    j["method"] = r.method;
    j["log_likelihood"] = r.log_value;
    j["log_std_error"] = r.log_std_error;
    j["likelihood"] = r.value;
    j["std_error"] = r.std_error;
    j["replications"] = r.replications;
    j["seed"] = r.seed;
    j["threads"] = r.threads;
    j["n_returns"] = n;
    j["exponent_source"] = source;
    j["params"] = map_json(r.params);
    j["diagnostics"] = map_json(r.diagnostics);
    j["notes"] = r.notes;
    j["config"] = std::move(config);
    return j;
}

int cmd_fit(const Globals& g, FitArgs a, std::istream& in, std::ostream& out)
{
    const auto data = read_returns(a.input, in);
    if (data.x.empty()) throw DomainError("fit: the returns file has no rows");
    a.model.dt = common_spacing(data, a.model.dt);
    EstimateReport r;
    std::string source = "closed_form";
    if (a.method == "exact") {
        LikelihoodOptions o;
        o.v0 = V0Stationary{a.model.cutoff};
        o.threads = g.threads;
        r = likelihood_mc(data.x, gamma_params(a.model, "fit --method exact"), a.replications, g.seed, o);
    } else if (a.method == "fc" || a.method == "fc-q1" || a.method == "fc-q2") {
        FourierOptions o;
        o.method = a.method == "fc-q1" ? FourierMethod::q1 : FourierMethod::q2;
        o.source = exponent_source_from_string(a.source);
        o.c_mode = c_mode_from(a.c_mode);
        o.b_shift = a.b_shift;
        o.threads = g.threads;
        r = likelihood_fc(data.x, general_model(a.model), a.replications, g.seed, o);
        source = resolved_source(r, a.source);
    } else if (a.method == "general") {
        GeneralOptions o;
        o.source = exponent_source_from_string(a.source);
        o.upsilon = upsilon_source_from_string(a.upsilon);
        o.threads = g.threads;
        if (a.p.size() == 1) o.p.assign(data.x.size(), a.p.front());
        else o.p = a.p;
        r = likelihood_general(data.x, general_model(a.model), a.replications, g.seed, o);
        source = resolved_source(r, a.source);
    } else {
        throw DomainError("unknown method '" + a.method + "' (exact, fc, fc-q1, fc-q2, general)");
    }
    json config = model_echo(a.model);
    config["input"] = a.input;
    config["method"] = a.method;
    config["replications"] = a.replications;
    config["source"] = a.source;
    config["c_mode"] = a.c_mode;
    config["upsilon"] = a.upsilon;
    config["b_shift"] = a.b_shift;
    config["p"] = a.p;
    config["seed"] = g.seed;
    config["threads"] = g.threads;
    Sink sink(g.out, out);
    sink.stream() << estimate_json("fit", r, data.x.size(), source, std::move(config)).dump(2) << '\n';
    sink.close();
    return exit_ok;
}

// ---------------------------------------------------------------- bayes

struct BayesArgs {
    ModelArgs model;
    std::string input;
    std::string method = "exact";
    std::size_t replications = 10000;
    std::string source = "automatic";
    std::vector<std::string> priors;
};

struct PriorBox {
    std::string name;
    double lo = 0.0, hi = 0.0;
};

double* model_field(ModelArgs& m, const std::string& name)
{
    static const std::map<std::string, double ModelArgs::*> fields = {
        {"mu", &ModelArgs::mu},         {"beta", &ModelArgs::beta},         {"lambda", &ModelArgs::lambda},
        {"theta", &ModelArgs::theta},   {"scale", &ModelArgs::scale},       {"alpha", &ModelArgs::alpha},
        {"ig-delta", &ModelArgs::ig_delta}, {"ig-gamma", &ModelArgs::ig_gamma}, {"ln-mu", &ModelArgs::ln_mu},
        {"ln-sigma", &ModelArgs::ln_sigma}};
    const auto it = fields.find(name);
    if (it == fields.end()) throw DomainError("prior: unknown parameter '" + name + "'");
    return &(m.*(it->second));
}

PriorBox parse_prior(const std::string& text)
{
    const auto eq = text.find('=');
    const auto colon = text.find(':', eq == std::string::npos ? 0 : eq);
    if (eq == std::string::npos || colon == std::string::npos)
        throw DomainError("prior '" + text + "' is not of the form name=lo:hi");
    PriorBox b;
    b.name = trim(text.substr(0, eq));
    const auto lo = parse_number(text.substr(eq + 1, colon - eq - 1));
    const auto hi = parse_number(text.substr(colon + 1));
    if (!lo || !hi || !(*lo < *hi)) throw DomainError("prior '" + text + "' needs numbers lo < hi");
    b.lo = *lo;
    b.hi = *hi;
    return b;
}

int cmd_bayes(const Globals& g, BayesArgs a, std::istream& in, std::ostream& out)
{
    const auto data = read_returns(a.input, in);
    if (data.x.empty()) throw DomainError("bayes: the returns file has no rows");
    a.model.dt = common_spacing(data, a.model.dt);
    if (a.priors.empty()) throw DomainError("bayes: give at least one --prior name=lo:hi");
    std::vector<PriorBox> boxes;
    for (const auto& t : a.priors) {
        boxes.push_back(parse_prior(t));
        ModelArgs probe = a.model;
        model_field(probe, boxes.back().name);
    }
    auto draw = [&](RngStream& rng) {
        ModelArgs m = a.model;
        for (const auto& b : boxes) *model_field(m, b.name) = b.lo + (b.hi - b.lo) * rng.uniform();
        return m;
    };
    PosteriorEstimate post;
    if (a.method == "exact") {
        gamma_params(a.model, "bayes --method exact");
        std::vector<ParamFunctional> fs;
        std::vector<std::string> names;
        for (const auto& b : boxes) {
            const std::string name = b.name;
            fs.push_back([name](const OuGammaParams& p) {
                if (name == "mu") return p.mu;
                if (name == "beta") return p.beta;
                if (name == "lambda") return p.lambda;
                if (name == "theta") return p.theta;
                if (name == "scale") return p.scale;
                throw DomainError("bayes --method exact: parameter '" + name + "' is not an OU-Gamma parameter");
            });
        }
        LikelihoodOptions o;
        o.v0 = V0Stationary{a.model.cutoff};
        o.threads = g.threads;
        post = bayes_posterior_mc(fs, [&](RngStream& rng) { return gamma_params(draw(rng), "bayes"); }, data.x,
                                  a.replications, g.seed, o);
    } else if (a.method == "fc" || a.method == "fc-q1" || a.method == "fc-q2") {
        std::vector<ModelFunctional> fs;
        for (std::size_t k = 0; k < boxes.size(); ++k) {
            const std::string name = boxes[k].name;
            fs.push_back([name](const OuModel& m) {
                if (name == "mu") return m.mu;
                if (name == "beta") return m.beta;
                if (name == "lambda") return m.lambda;
                const auto params = m.bdlp->parameters();
                static const std::map<std::string, std::string> keys = {
                    {"theta", "theta"}, {"scale", "scale"}, {"alpha", "alpha"}, {"ig-delta", "delta"},
                    {"ig-gamma", "gamma"}, {"ln-mu", "mu"}, {"ln-sigma", "sigma"}};
                const auto it = params.find(keys.at(name));
                if (it == params.end()) throw DomainError("bayes: parameter '" + name + "' does not belong to the model");
                return it->second;
            });
        }
        FourierOptions o;
        o.method = a.method == "fc-q1" ? FourierMethod::q1 : FourierMethod::q2;
        o.source = exponent_source_from_string(a.source);
        o.threads = g.threads;
        post = bayes_posterior_fc(fs, [&](RngStream& rng) { return general_model(draw(rng)); }, data.x,
                                  a.replications, g.seed, o);
    } else {
        throw DomainError("unknown method '" + a.method + "' (exact, fc, fc-q1, fc-q2)");
    }
    json j;
    j["schema"] = posterior_schema;
    j["command"] = "bayes";
    j["method"] = a.method;
    json params = json::array();
    for (std::size_t k = 0; k < boxes.size(); ++k) {
        json e;
        e["name"] = boxes[k].name;
        e["prior_lo"] = boxes[k].lo;
        e["prior_hi"] = boxes[k].hi;
        e["mean"] = post.values[k];
        e["std_error"] = post.std_errors[k];
        params.push_back(e);
    }
    j["parameters"] = params;
    j["effective_sample_size"] = post.effective_sample_size;
    j["log_evidence"] = post.log_evidence;
    j["replications"] = post.replications;
    j["seed"] = post.seed;
    j["threads"] = g.threads;
    j["n_returns"] = data.x.size();
    j["warnings"] = post.warnings;
    json config = model_echo(a.model);
    config["input"] = a.input;
    config["method"] = a.method;
    config["replications"] = a.replications;
    config["source"] = a.source;
    config["priors"] = a.priors;
    config["seed"] = g.seed;
    config["threads"] = g.threads;
    j["config"] = config;
    Sink sink(g.out, out);
    sink.stream() << j.dump(2) << '\n';
    sink.close();
    return exit_ok;
}

// ---------------------------------------------------------------- density

struct DensityArgs {
    ModelArgs model;
    std::string name;
    double a = 1.0;
    double mass = 1.0;
    double v_start = 1.0;
    double horizon = 1.0;
    std::optional<double> lo, hi;
    std::size_t points = 2001;
};

std::vector<double> uniform_grid(double lo, double hi, std::size_t points)
{
    std::vector<double> g(points);
    for (std::size_t k = 0; k < points; ++k)
        g[k] = k + 1 == points ? hi : lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(points - 1);
    return g;
}

// nodes hi * u^power, dense next to a singular endpoint at zero
std::vector<double> power_grid(double hi, std::size_t points, double power)
{
    auto g = uniform_grid(0.0, 1.0, points);
    for (auto& v : g) v = hi * std::pow(v, power);
    return g;
}

// nodes graded towards both ends as u^q / (u^q + (1 - u)^q); an open end drops its node
std::vector<double> graded_grid(double lo, double hi, std::size_t points, double q, bool open_lo, bool open_hi)
{
    const double step = 1.0 / static_cast<double>(points + (open_lo ? 1 : 0) + (open_hi ? 1 : 0) - 1);
    std::vector<double> g(points);
    for (std::size_t k = 0; k < points; ++k) {
        const double u = step * static_cast<double>(k + (open_lo ? 1 : 0));
        const double l = std::pow(u, q), r = std::pow(1.0 - u, q);
        g[k] = lo + (hi - lo) * l / (l + r);
    }
    return g;
}

int cmd_density(const Globals& g, const DensityArgs& a, std::ostream& out)
{
    if (a.points < 2) throw DomainError("density: --points must be at least 2");
    std::function<double(double)> f;
    std::vector<double> grid;
    auto bounded = [&](double lo, double hi) { grid = uniform_grid(a.lo.value_or(lo), a.hi.value_or(hi), a.points); };
    if (a.name == "dilog-m1") {
        f = [&](double x) { return dilog_density_m1(x, a.a); };
        bounded(std::exp(-a.a), 1.0);
    } else if (a.name == "dilog-v") {
        f = [&](double v) { return dilog_density_v(v, a.a); };
        bounded(0.0, 1.0);
    } else if (a.name == "dilog-general") {
        f = [&](double x) { return dilog_density_general(x, a.mass, a.a); };
        bounded(std::exp(-a.a), 1.0);
    } else if (a.name == "fggc-arcsine") {
        const auto law = arcsine_mean_law(a.model.theta);
        f = [law](double x) { return law.density(x); };
        bounded(0.0, 1.0);
    } else if (a.name == "cr-uniform") {
        const MeanFunctionalSpec spec{a.mass, uniform_measure(0.0, 1.0)};
        f = [spec](double x) { return cr_density(x, spec); };
        bounded(0.0, 1.0);
    } else if (a.name == "increment") {
        const auto p = gamma_params(a.model, "density increment");
        auto d = std::make_shared<IncrementDensity>(p.theta, p.a(), p.scale, 4096, g.seed);
        f = [d](double y) { return y <= 0.0 ? 0.0 : (*d)(y); };
        const double hi = a.hi.value_or(p.scale * (d->shape() + 45.0));
        if (a.lo || a.hi) bounded(0.0, hi);
        else grid = power_grid(hi, a.points, std::max(1.0, 3.0 / d->shape()));
    } else if (a.name == "price") {
        const auto p = gamma_params(a.model, "density price");
        f = [&, p](double x) { return conditional_price_density(x, a.v_start, a.horizon, p); };
        const double decay = -std::expm1(-p.lambda * a.horizon) / p.lambda;
        const double tau_mean = a.v_start * decay + p.theta * p.scale * (a.horizon - decay);
        const double centre = p.mu * a.horizon + p.beta * tau_mean;
        const double half = 14.0 * std::sqrt(std::max(tau_mean, 1e-6)) + 10.0 * std::abs(p.beta) * tau_mean;
        bounded(centre - half, centre + half);
    } else {
        throw DomainError("unknown density '" + a.name
                          + "' (dilog-m1, dilog-v, dilog-general, fggc-arcsine, cr-uniform, increment, price)");
    }
    if (!a.lo && !a.hi && grid.size() > 2) {
        const bool open_lo = !std::isfinite(f(grid.front())), open_hi = !std::isfinite(f(grid.back()));
        if (open_lo || open_hi) grid = graded_grid(grid.front(), grid.back(), a.points, 4.0, open_lo, open_hi);
    }
    Sink sink(g.out, out);
    auto& os = sink.stream();
    os << "x,density\n";
    for (double x : grid) os << format_double(x) << ',' << format_double(f(x)) << '\n';
    sink.close();
    return exit_ok;
}

// ---------------------------------------------------------------- sample-mean

struct SampleMeanArgs {
    std::string base = "f_a";
    double mass = 1.0;
    double a = 1.0;
    double lo = 0.0, hi = 1.0;
    std::size_t count = 1000;
};

int cmd_sample_mean(const Globals& g, const SampleMeanArgs& a, std::ostream& out)
{
    BaseMeasure base;
    if (a.base == "f_a") base = f_a_measure(a.a);
    else if (a.base == "arcsine") base = arcsine_measure(a.lo, a.hi);
    else if (a.base == "uniform") base = uniform_measure(a.lo, a.hi);
    else throw DomainError("unknown base '" + a.base + "' (f_a, arcsine, uniform)");
    const MeanFunctionalSpec spec{a.mass, base};
    std::vector<double> values(a.count);
    parallel_for(a.count, g.threads, [&](std::size_t i) {
        RngStream rng(g.seed, i);
        values[i] = a.base == "f_a" ? perfect_sample_mean_f_a(a.mass, a.a, rng) : perfect_sample_mean(spec, rng);
    });
    Sink sink(g.out, out);
    sink.stream() << "m\n";
    for (double v : values) sink.stream() << format_double(v) << '\n';
    sink.close();
    return exit_ok;
}

// ---------------------------------------------------------------- validate

int cmd_validate(const Globals& g, bool seed_given, const std::string& level, std::ostream& out)
{
    validation::Config cfg;
    if (seed_given) cfg.seed = g.seed;
    cfg.threads = g.threads;
    cfg.probes = command_probes(g.threads);
    const auto rep = validation::run(validation::level_from_string(level), cfg);
    json j;
    j["schema"] = validation_schema;
    j["level"] = validation::to_string(rep.level);
    j["seed"] = rep.seed;
    j["threads"] = rep.threads;
    j["all_pass"] = rep.all_pass();
    json list = json::array();
    for (const auto& r : rep.results) {
        json e;
        e["id"] = r.id;
        e["name"] = r.name;
        e["pass"] = r.pass;
        e["statistic"] = r.statistic;
        e["threshold"] = r.threshold;
        e["comparison"] = r.comparison;
        e["details"] = r.details;
        e["seconds"] = r.seconds;
        e["measurements"] = map_json(r.measurements);
        list.push_back(e);
    }
    j["criteria"] = list;
    Sink sink(g.out, out);
    sink.stream() << j.dump(2) << '\n';
    sink.close();
    return rep.all_pass() ? exit_ok : exit_validation;
}

// ---------------------------------------------------------------- config injection

bool given_on_command_line(const std::vector<std::string>& args, const std::string& key)
{
    const std::string flag = "--" + key;
    return std::any_of(args.begin(), args.end(),
                       [&](const std::string& a) { return a == flag || a.rfind(flag + "=", 0) == 0; });
}

std::optional<std::string> config_path(const std::vector<std::string>& args)
{
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) return args[i + 1];
        if (args[i].rfind("--config=", 0) == 0) return args[i].substr(9);
    }
    return std::nullopt;
}

// config entries become flags; flags already on the command line win
std::vector<std::string> with_config(const std::vector<std::string>& args, const std::vector<std::string>& commands)
{
    const auto path = config_path(args);
    if (!path) return args;
    std::ifstream file(*path, std::ios::binary);
    if (!file) throw IoError("cannot open config '" + *path + "'");
    const auto entries = parse_config(file, *path);
    std::vector<std::string> global, local;
    for (const auto& [k, v] : entries) {
        if (k == "config") throw DomainError("config '" + *path + "': nested config files are not supported");
        if (given_on_command_line(args, k)) continue;
        const bool is_global = k == "seed" || k == "threads" || k == "out";
        (is_global ? global : local).push_back("--" + k + "=" + v);
    }
    std::vector<std::string> out = global;
    auto cmd = std::find_first_of(args.begin(), args.end(), commands.begin(), commands.end());
    out.insert(out.end(), args.begin(), cmd);
    if (cmd != args.end()) {
        out.push_back(*cmd);
        out.insert(out.end(), local.begin(), local.end());
        out.insert(out.end(), cmd + 1, args.end());
    } else {
        out.insert(out.end(), local.begin(), local.end());
    }
    return out;
}

} // namespace

// ---------------------------------------------------------------- public helpers

std::string format_double(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

ReturnsSeries parse_returns_csv(std::istream& in, const std::string& source)
{
    ReturnsSeries out;
    std::string line;
    std::size_t lineno = 0;
    bool header = false, with_delta = false;
    auto fail = [&](const std::string& what) {
        throw DomainError("returns CSV " + source + " line " + std::to_string(lineno) + ": " + what);
    };
    while (std::getline(in, line)) {
        ++lineno;
        if (lineno == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line = line.substr(3);
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(trim(cell));
        if (line.back() == ',') cells.push_back("");
        if (!header) {
            if (cells.size() == 1 && cells[0] == "x") with_delta = false;
            else if (cells.size() == 2 && cells[0] == "x" && cells[1] == "delta") with_delta = true;
            else fail("expected the header 'x' or 'x,delta', got '" + line + "'");
            header = true;
            if (with_delta) out.deltas.emplace();
            continue;
        }
        if (cells.size() != (with_delta ? 2u : 1u))
            fail("expected " + std::string(with_delta ? "2 fields" : "1 field") + ", got " + std::to_string(cells.size()));
        const auto x = parse_number(cells[0]);
        if (!x) fail("'" + cells[0] + "' is not a finite number");
        out.x.push_back(*x);
        if (with_delta) {
            const auto d = parse_number(cells[1]);
            if (!d || !(*d > 0.0)) fail("delta '" + cells[1] + "' is not a positive number");
            out.deltas->push_back(*d);
        }
    }
    if (in.bad()) throw IoError("failed reading " + source);
    if (!header) throw DomainError("returns CSV " + source + ": missing header 'x' or 'x,delta'");
    return out;
}

void write_returns_csv(std::ostream& os, const ReturnsSeries& series)
{
    const bool with_delta = series.deltas.has_value();
    if (with_delta && series.deltas->size() != series.x.size())
        throw DomainError("returns: deltas and returns differ in length");
    os << (with_delta ? "x,delta\n" : "x\n");
    for (std::size_t i = 0; i < series.x.size(); ++i) {
        os << format_double(series.x[i]);
        if (with_delta) os << ',' << format_double((*series.deltas)[i]);
        os << '\n';
    }
}

std::vector<std::pair<std::string, std::string>> parse_config(std::istream& in, const std::string& source)
{
    std::vector<std::pair<std::string, std::string>> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw DomainError("config " + source + " line " + std::to_string(lineno) + ": expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty() || key.find_first_of(" \t") != std::string::npos)
            throw DomainError("config " + source + " line " + std::to_string(lineno) + ": invalid key '" + key + "'");
        out.emplace_back(key, value);
    }
    return out;
}

int run(const std::vector<std::string>& raw_args, std::istream& in, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Monte Carlo likelihoods for OU stochastic volatility models", "bnsv"};
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    app.require_subcommand(1);
    app.fallthrough();
    Globals g;
    auto* seed_opt = app.add_option("--seed", g.seed, "random seed")->capture_default_str();
    app.add_option("--threads", g.threads, "worker threads")->capture_default_str()->check(CLI::PositiveNumber);
    app.add_option("--out", g.out, "output file (default: standard output)");
    app.add_option("--config", g.config, "file of 'key = value' lines; command-line flags win");

    SimulateArgs sim;
    auto* simulate = app.add_subcommand("simulate", "synthetic OU-Gamma returns and latent variables");
    add_model_options(simulate, sim.model);
    simulate->add_option("--n", sim.n, "number of returns")->capture_default_str();
    simulate->add_option("--spacing-mean", sim.spacing_mean, "exponential random spacing with this mean (0: fixed dt)")
        ->capture_default_str();
    simulate->add_option("--v0", sim.v0, "fixed initial volatility (default: stationary draw)");
    simulate->add_option("--latent", sim.latent, "latent CSV path (default: <out>.latent.csv when --out is given)");

    FitArgs fit;
    auto* fit_cmd = app.add_subcommand("fit", "log-likelihood estimate");
    add_model_options(fit_cmd, fit.model);
    fit_cmd->add_option("--input", fit.input, "returns CSV, '-' for standard input")->required();
    fit_cmd->add_option("--method", fit.method, "exact, fc (= fc-q2), fc-q1, general")->capture_default_str();
    fit_cmd->add_option("--B", fit.replications, "Monte Carlo replications")->capture_default_str();
    fit_cmd->add_option("--source", fit.source, "exponent source: automatic, closed_form, quadrature, phi_hat")
        ->capture_default_str();
    fit_cmd->add_option("--c-mode", fit.c_mode, "decaying or constant")->capture_default_str();
    fit_cmd->add_option("--upsilon", fit.upsilon, "automatic, tau_paths, half_normal")->capture_default_str();
    fit_cmd->add_option("--b-shift", fit.b_shift, "constant added to every tau")->capture_default_str();
    fit_cmd->add_option("--p", fit.p, "half-normal variances (one value or one per return)")
        ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll)
        ->delimiter(',');

    BayesArgs bayes;
    auto* bayes_cmd = app.add_subcommand("bayes", "posterior means under uniform priors");
    add_model_options(bayes_cmd, bayes.model);
    bayes_cmd->add_option("--input", bayes.input, "returns CSV, '-' for standard input")->required();
    bayes_cmd->add_option("--method", bayes.method, "exact, fc (= fc-q2), fc-q1")->capture_default_str();
    bayes_cmd->add_option("--B", bayes.replications, "Monte Carlo replications")->capture_default_str();
    bayes_cmd->add_option("--source", bayes.source, "exponent source")->capture_default_str();
    bayes_cmd->add_option("--prior", bayes.priors, "uniform prior name=lo:hi (repeatable)")
        ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);

    DensityArgs dens;
    auto* density = app.add_subcommand("density", "tabulate a density on a grid");
    add_model_options(density, dens.model);
    density->add_option("--name", dens.name,
                        "dilog-m1, dilog-v, dilog-general, fggc-arcsine, cr-uniform, increment (uses --theta "
                        "--lambda --dt --scale), price")
        ->required();
    density->add_option("--a", dens.a, "F_a parameter")->capture_default_str();
    density->add_option("--mass", dens.mass, "Dirichlet mass")->capture_default_str();
    density->add_option("--v-start", dens.v_start, "volatility at the start (price)")->capture_default_str();
    density->add_option("--horizon", dens.horizon, "horizon (price)")->capture_default_str();
    density->add_option("--lo", dens.lo, "grid start");
    density->add_option("--hi", dens.hi, "grid end");
    density->add_option("--points", dens.points, "grid points")->capture_default_str();

    SampleMeanArgs sm;
    auto* sample_mean = app.add_subcommand("sample-mean", "perfect draws of a Dirichlet mean functional");
    sample_mean->add_option("--base", sm.base, "f_a, arcsine, uniform")->capture_default_str();
    sample_mean->add_option("--mass", sm.mass, "Dirichlet mass")->capture_default_str();
    sample_mean->add_option("--a", sm.a, "F_a parameter")->capture_default_str();
    sample_mean->add_option("--lo", sm.lo, "support start (arcsine, uniform)")->capture_default_str();
    sample_mean->add_option("--hi", sm.hi, "support end (arcsine, uniform)")->capture_default_str();
    sample_mean->add_option("--count", sm.count, "number of draws")->capture_default_str();

    std::string level = "fast";
    auto* validate_cmd = app.add_subcommand("validate", "run the invariant and acceptance suites");
    validate_cmd->add_option("--level", level, "fast or full")->capture_default_str();

    try {
        const std::vector<std::string> commands = {"simulate", "fit", "bayes", "density", "sample-mean", "validate"};
        auto args = with_config(raw_args, commands);
        std::reverse(args.begin(), args.end());
        try {
            app.parse(args);
        } catch (const CLI::ParseError& e) {
            const int code = app.exit(e, out, err);
            return code == 0 ? exit_ok : exit_usage;
        }
        if (simulate->parsed()) return cmd_simulate(g, sim, out);
        if (fit_cmd->parsed()) return cmd_fit(g, fit, in, out);
        if (bayes_cmd->parsed()) return cmd_bayes(g, bayes, in, out);
        if (density->parsed()) return cmd_density(g, dens, out);
        if (sample_mean->parsed()) return cmd_sample_mean(g, sm, out);
        if (validate_cmd->parsed()) return cmd_validate(g, seed_opt->count() > 0, level, out);
        return exit_usage;
    } catch (const DomainError& e) {
        err << "error: " << e.what() << '\n';
        return exit_usage;
    } catch (const IoError& e) {
        err << "error: " << e.what() << '\n';
        return exit_usage;
    } catch (const std::exception& e) {
        err << "numeric failure: " << e.what() << '\n';
        return exit_numeric;
    }
}

std::vector<validation::ReproducibilityProbe> command_probes(int threads)
{
    const std::vector<std::string> model = {"--theta", "1.1", "--lambda", "0.7", "--scale", "0.9",
                                            "--beta", "-0.5", "--mu", "0.03"};
    const std::string t = std::to_string(threads);
    auto capture = [](std::vector<std::string> args, const std::string& input) {
        std::istringstream in(input);
        std::ostringstream out, err;
        const int code = run(args, in, out, err);
        return "exit " + std::to_string(code) + "\n" + out.str() + err.str();
    };
    auto simulated = [=] {
        std::vector<std::string> args = {"--seed", "7", "simulate", "--n", "3"};
        args.insert(args.end(), model.begin(), model.end());
        std::istringstream in;
        std::ostringstream out, err;
        run(args, in, out, err);
        return out.str();
    };
    auto fit = [=](std::vector<std::string> extra) {
        return [=] {
            std::vector<std::string> args = {"--seed", "11", "--threads", t, "fit", "--input", "-", "--B", "2000"};
            args.insert(args.end(), model.begin(), model.end());
            args.insert(args.end(), extra.begin(), extra.end());
            return capture(args, simulated());
        };
    };
    std::vector<validation::ReproducibilityProbe> probes;
    probes.push_back({"cli simulate", [=] {
                          const auto dir = std::filesystem::temp_directory_path();
                          const auto path = (dir / ("bnsv_probe_" + std::to_string(threads) + ".csv")).string();
                          std::vector<std::string> args = {"--seed", "7", "--out", path, "simulate", "--n", "20",
                                                           "--spacing-mean", "0.8"};
                          args.insert(args.end(), model.begin(), model.end());
                          std::string text = capture(args, "");
                          for (const auto& p : {path, path + ".latent.csv"}) {
                              std::ifstream f(p, std::ios::binary);
                              text += std::string(std::istreambuf_iterator<char>(f), {});
                              std::filesystem::remove(p);
                          }
                          return text;
                      }});
    probes.push_back({"cli fit exact", fit({"--method", "exact"})});
    probes.push_back({"cli fit fc", fit({"--method", "fc"})});
    probes.push_back({"cli fit fc-q1", fit({"--method", "fc-q1"})});
    probes.push_back({"cli fit general", fit({"--method", "general"})});
    probes.push_back({"cli bayes", [=] {
                          std::vector<std::string> args = {"--seed", "13", "--threads", t, "bayes", "--input", "-",
                                                           "--B", "500", "--prior", "mu=-0.2:0.2"};
                          args.insert(args.end(), model.begin(), model.end());
                          return capture(args, simulated());
                      }});
    probes.push_back({"cli density", [=] {
                          return capture({"--seed", "3", "density", "--name", "increment", "--theta", "1.3",
                                          "--lambda", "0.5", "--points", "50"},
                                         "");
                      }});
    probes.push_back({"cli sample-mean", [=] {
                          return capture({"--seed", "5", "--threads", t, "sample-mean", "--base", "arcsine", "--mass",
                                          "0.7", "--count", "200"},
                                         "");
                      }});
    return probes;
}

} // namespace bns::cli
