#pragma once

#include "bns/dirichlet_mean.hpp"
#include "bns/report.hpp"
#include "bns/rng.hpp"
#include "bns/specfun.hpp"

#include <functional>
#include <span>
#include <variant>
#include <vector>

namespace bns {

// OU-Gamma stochastic volatility: returns x_i = mu dt + beta tau_i + sqrt(tau_i) eps_i,
// volatility driven by a Gamma(theta t, scale) subordinator at rate lambda.
struct OuGammaParams {
    double mu = 0.0;
    double beta = 0.0;
    double theta = 1.0;
    double lambda = 1.0;
    double delta_t = 1.0;
    double scale = 1.0;

    double a() const { return lambda * delta_t; }
};

void validate(const OuGammaParams& p);

// Initial volatility. Stationary and product laws are multiplied by `scale`;
// fixed and custom values are used as given.
struct V0Stationary {
    double cutoff = 40.0;  // v0 = T_{theta c} M_{theta c} over F_c
};
struct V0Fixed {
    double value = 0.0;
};
struct V0Product {
    double gamma_shape = 1.0;                  // v0 = Gamma(shape) * factor
    std::function<double(RngStream&)> factor;  // empty means factor 1
};
struct V0Custom {
    std::function<double(RngStream&)> sampler;
};
using V0Mode = std::variant<V0Stationary, V0Fixed, V0Product, V0Custom>;

struct V0Draw {
    double value = 0.0;
    double gamma_part = 0.0;   // unit-scale gamma factor (product forms only)
    double factor = 0.0;
    double gamma_shape = 0.0;
    bool product_form = false;
};

V0Draw sample_v0(const OuGammaParams& p, const V0Mode& mode, RngStream& rng);
// unit-scale T_{theta c} M_{theta c} over F_c
double sample_v0_stationary(double theta, double cutoff, RngStream& rng);

// T_{theta a} and the mass-theta a mean over F_a; the pair is
// (Z(a) - Y, Y) = (T (1 - M), T M) in unit scale.
struct PairDraw {
    double gamma_part = 0.0;
    double mean_part = 0.0;
    double jump() const { return gamma_part * (1.0 - mean_part); }
    double carry() const { return gamma_part * mean_part; }
};

PairDraw sample_pair(double theta, double a, RngStream& rng, const CouplingConfig& cfg = {});

struct TauPath {
    std::vector<double> tau;
    std::vector<double> gamma_parts;  // scale * T_i
    std::vector<double> mean_parts;   // M_i
    std::vector<double> v_start;      // volatility at the start of interval i
    double v_end = 0.0;
    V0Draw v0;
};

TauPath sample_tau_path(const OuGammaParams& p, std::size_t n, const V0Mode& mode, RngStream& rng);

// returns x_i = mu dt + beta tau_i + sqrt(tau_i) eps_i along a fresh path
struct SimulatedReturns {
    std::vector<double> x;
    TauPath path;
};

SimulatedReturns simulate_returns(const OuGammaParams& p, std::size_t n, const V0Mode& mode, RngStream& rng);

// tau_i = scale * total * s_i with total ~ Gamma(kappa) independent of s
struct SVector {
    std::vector<double> s;
    std::vector<double> weights;  // Dirichlet weights P_1..P_n, then the v0 weight if present
    double total = 0.0;
    double kappa = 0.0;
    double scale = 1.0;
};

// decomposes a path; throws InconsistencyError if tau and scale * total * s disagree
SVector build_s_vector(const TauPath& path, const OuGammaParams& p);
// direct Dirichlet draw; `total` is not drawn and stays zero
SVector sample_s_vector(const OuGammaParams& p, std::size_t n, const V0Mode& mode, RngStream& rng);

// Posterior law of scale * total given the returns and s
GigParams posterior_gig_params(std::span<const double> x, const SVector& s, const OuGammaParams& p);

// log of the conditional likelihood of x given s (the Bessel form)
double log_likelihood_integrand(std::span<const double> x, const SVector& s, const OuGammaParams& p);
// same through the terminating series; requires kappa - n/2 to be a half-integer
double log_likelihood_integrand_half_integer(std::span<const double> x, const SVector& s, const OuGammaParams& p);

struct LikelihoodOptions {
    V0Mode v0 = V0Stationary{};
    int threads = 1;
};

EstimateReport likelihood_mc(std::span<const double> x, const OuGammaParams& p, std::size_t replications,
                             std::uint64_t seed, const LikelihoodOptions& options = {});

// Importance-sampling posterior under the prior: weights are the likelihood integrands.
using PriorSampler = std::function<OuGammaParams(RngStream&)>;
using ParamFunctional = std::function<double(const OuGammaParams&)>;

struct PosteriorEstimate {
    std::vector<double> values;
    std::vector<double> std_errors;
    double effective_sample_size = 0.0;
    double log_evidence = 0.0;
    std::size_t replications = 0;
    std::uint64_t seed = 0;
    std::vector<std::string> warnings;
};

PosteriorEstimate bayes_posterior_mc(const std::vector<ParamFunctional>& functionals, const PriorSampler& prior,
                                     std::span<const double> x, std::size_t replications, std::uint64_t seed,
                                     const LikelihoodOptions& options = {});

// ---------------------------------------------------------------- superposition

struct SuperpositionComponent {
    double weight = 1.0;
    double theta = 1.0;
    double lambda = 1.0;
};

struct SuperpositionParams {
    double mu = 0.0;
    double beta = 0.0;
    double delta_t = 1.0;
    double scale = 1.0;
    std::vector<SuperpositionComponent> components;
};

OuGammaParams component_params(const SuperpositionParams& p, std::size_t j);

struct SuperposedPath {
    std::vector<double> tau;
    std::vector<TauPath> components;
    SVector s;
};

// tau_i = sum_j w_j tau_i^{(j)}, with a combined S-vector (kappa = sum of component kappas)
SuperposedPath superposition_tau(const SuperpositionParams& p, std::size_t n, const V0Mode& mode, RngStream& rng);

EstimateReport superposition_likelihood_mc(std::span<const double> x, const SuperpositionParams& p,
                                           std::size_t replications, std::uint64_t seed,
                                           const LikelihoodOptions& options = {});

// ---------------------------------------------------------------- random times

TauPath random_times_tau(std::span<const double> deltas, const OuGammaParams& p, const V0Mode& mode, RngStream& rng);

struct TimeChangedPath {
    std::vector<double> deltas;
    TauPath path;
};

// interval lengths drawn iid from `subordinator`, then tau given the lengths
TimeChangedPath time_changed_tau(std::size_t n, const OuGammaParams& p, const std::function<double(RngStream&)>& subordinator,
                                 const V0Mode& mode, RngStream& rng);

// ---------------------------------------------------------------- densities

// density of scale * T_{theta a} (1 - M): explicit when theta a = 1, otherwise
// a mixture over a fixed set of perfect draws of M
class IncrementDensity {
public:
    IncrementDensity(double theta, double a, double scale = 1.0, std::size_t mixture_size = 4096,
                     std::uint64_t seed = 1);

    double operator()(double y) const;
    // explicit route through the density of M instead of that of -log(M)/a
    double via_mean_density(double y) const;
    double mean() const;
    bool explicit_form() const { return explicit_; }
    double shape() const { return theta_ * a_; }
    const std::vector<double>& mixture_scales() const { return scales_; }

private:
    double theta_, a_, scale_;
    bool explicit_;
    std::vector<double> scales_;
};

double option_density_q(double y, const OuGammaParams& p);

// density of the log-price increment over `horizon` given the volatility at its start
double conditional_price_density(double x, double v_start, double horizon, const OuGammaParams& p,
                                 std::size_t mixture_size = 256);

// ---------------------------------------------------------------- moving averages

// (T_{theta a}, T_{theta a} times the mean of the uniform law on [0, a])
std::pair<double, double> dykstra_laud_pair(double theta, double a, RngStream& rng);

// (G(g1), G(g2)) for a Gamma random measure with base theta on [0, a],
// g1(y) = e^{-y} and g2(y) = y e^{-y}
std::pair<double, double> moving_average_pair(double theta, double a, RngStream& rng, const CouplingConfig& cfg = {});

} // namespace bns
