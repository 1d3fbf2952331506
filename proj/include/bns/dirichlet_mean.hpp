#pragma once

#include "bns/errors.hpp"
#include "bns/rng.hpp"
#include "bns/specfun.hpp"

#include <cmath>
#include <cstddef>
#include <functional>
#include <string>
#include <vector>

namespace bns {

// Probability law H on a bounded interval [lo, hi].
struct BaseMeasure {
    std::string name;
    double lo = 0.0;
    double hi = 1.0;
    std::function<double(RngStream&)> sample;
    std::function<double(double)> cdf;
    // x -> int log|t - x| H(dt); empty means compute from the cdf by quadrature
    std::function<double(double)> log_potential;
    // f -> int f dH; empty means unavailable
    std::function<double(const std::function<double(double)>&)> expect;
};

BaseMeasure f_a_measure(double a);
BaseMeasure arcsine_measure(double lo = 0.0, double hi = 1.0);
BaseMeasure uniform_measure(double lo, double hi);
BaseMeasure point_mass(double c);
// linear interpolation of the empirical cdf of the given draws
BaseMeasure empirical_measure(std::vector<double> draws, std::string name = "empirical");

// Law of the random mean int x P(dx) where P is a Dirichlet process with
// total mass `mass` and base H.
struct MeanFunctionalSpec {
    double mass = 1.0;
    BaseMeasure base;
};

struct CouplingConfig {
    double epsilon = 1e-10;
    std::size_t max_steps = 50'000'000;
};

struct CouplingTrace {
    double value = 0.0;
    std::size_t steps = 0;
    double gap = 0.0;
};

namespace detail {

// Coupling from the past for Y <- B X + (1 - B) Y with B ~ Beta(1, mass).
// The composed map after n steps is y -> S + R y; the two extreme chains
// started at lo and hi differ by R (hi - lo), and the output is the midpoint.
template <class Draw, class Observer>
CouplingTrace couple_from_past(double mass, double lo, double hi, Draw&& draw, RngStream& rng,
                               const CouplingConfig& cfg, Observer&& observe)
{
    require(mass > 0.0 && std::isfinite(mass), "Dirichlet mean: mass must be positive");
    require(cfg.epsilon > 0.0, "Dirichlet mean: epsilon must be positive");
    const double width = hi - lo;
    double s = 0.0;
    double r = 1.0;
    std::size_t step = 0;
    do {
        if (step >= cfg.max_steps)
            throw CouplingError("Dirichlet mean: chains did not coalesce within max_steps");
        const double log_u = std::log(rng.uniform());
        const double keep = std::exp(log_u / mass);
        const double b = -std::expm1(log_u / mass);
        const double x = draw(rng);
        s += r * b * x;
        r *= keep;
        ++step;
        observe(step, s + r * hi, s + r * lo, b);
    } while (r * width >= cfg.epsilon);
    return {s + r * 0.5 * (lo + hi), step, r * width};
}

struct NoObserver {
    void operator()(std::size_t, double, double, double) const {}
};

} // namespace detail

double perfect_sample_mean(const MeanFunctionalSpec& spec, RngStream& rng, const CouplingConfig& cfg = {});

using CouplingObserver = std::function<void(std::size_t step, double upper, double lower, double b)>;
CouplingTrace perfect_sample_mean_traced(const MeanFunctionalSpec& spec, RngStream& rng,
                                         const CouplingConfig& cfg = {}, const CouplingObserver& observe = {});

// specialised for base F_a
double perfect_sample_mean_f_a(double mass, double a, RngStream& rng, const CouplingConfig& cfg = {});

// int log|t - x| H(dt)
double log_potential(double x, const BaseMeasure& base);

// closed form of the log potential of F_a
double f_a_log_potential(double x, double a);

// Density of the random mean for mass >= 1 (mass 1 via the sine formula,
// larger masses via the integrated form).
double cr_density(double x, const MeanFunctionalSpec& spec);

// density of the mean over F_a with mass 1
double dilog_density_m1(double x, double a);
// density of -log(M) / a for the same mean
double dilog_density_v(double v, double a);
// density of the mean over F_a with mass >= 1
double dilog_density_general(double x, double mass, double a);

enum class DecompositionMethod { perfect, rejection };

// Mean with integer mass m: Dirichlet(1,...,1) mixture of m independent mass-1 means.
double integer_decomposition_sample(int m, const BaseMeasure& base, RngStream& rng,
                                    DecompositionMethod method = DecompositionMethod::perfect);

// Rejection from the uniform proposal on [lo, hi] under a cached bound.
class RejectionSampler {
public:
    RejectionSampler(std::function<double(double)> density, double lo, double hi, int grid = 512);

    // Throws EnvelopeError (after raising the bound) if a proposal exceeds it.
    double sample(RngStream& rng);

    double bound() const { return bound_; }
    double acceptance_rate() const { return proposals_ == 0 ? 0.0 : double(accepted_) / double(proposals_); }
    std::size_t refreshes() const { return refreshes_; }

private:
    std::function<double(double)> density_;
    double lo_, hi_, bound_ = 0.0;
    std::size_t proposals_ = 0, accepted_ = 0, refreshes_ = 0;
};

// Beta law of the mean of the arcsine base at the given mass
struct BetaLaw {
    double alpha = 1.0;
    double beta = 1.0;
    double mean() const { return alpha / (alpha + beta); }
    double variance() const
    {
        const double s = alpha + beta;
        return alpha * beta / (s * s * (s + 1.0));
    }
    double density(double x) const;
};

BetaLaw arcsine_mean_law(double mass);

} // namespace bns
