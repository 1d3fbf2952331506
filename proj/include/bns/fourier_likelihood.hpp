#pragma once

#include "bns/levy_models.hpp"
#include "bns/ou_gamma.hpp"
#include "bns/report.hpp"
#include "bns/rng.hpp"

#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace bns {

// Returns x_i = mu dt + beta tau_i + sqrt(tau_i) eps_i with volatility
// dv = -lambda v dt + dZ(lambda t) for the background subordinator `bdlp`.
struct OuModel {
    std::shared_ptr<const LevyModel> bdlp;
    double mu = 0.0;
    double beta = 0.0;
    double lambda = 1.0;
    double delta_t = 1.0;

    double a() const { return lambda * delta_t; }
};

void validate(const OuModel& m);
// the OU-Gamma model as a general OU model with a Gamma(theta, scale) background process
OuModel ou_model_from(const OuGammaParams& p, double stationary_cutoff = 40.0);

// (2 pi tau)^{-1/2} exp(-a^2 / (2 tau))
double weber_sonine_rhs(double abs_a, double tau);
// (1 / pi) int_0^inf cos(y |a|) exp(-y^2 tau / 2) dy by quadrature
double weber_sonine_lhs(double abs_a, double tau);

// omega_i = (y_i^2 + beta^2) / 2, s_l = (1 - e^{-a}) sum_{i >= l} omega_i e^{-a(i-1)},
// v_i = e^{a i} s_{i+1} (v_n = 0)
struct JointLaplaceContext {
    std::vector<double> omega;
    std::vector<double> s;
    std::vector<double> v;
    double a = 1.0;
    double lambda = 1.0;
};

JointLaplaceContext make_joint_laplace_context(std::span<const double> y, double beta, double a, double lambda);

enum class ExponentSource { automatic, closed_form, quadrature, phi_hat };

std::string to_string(ExponentSource s);
ExponentSource exponent_source_from_string(const std::string& name);

// Phi, Lambda and the stationary exponent of a model at fixed a, from one source
class ExponentEngine {
public:
    ExponentEngine(std::shared_ptr<const LevyModel> model, double a, ExponentSource source = ExponentSource::automatic,
                   std::size_t table_size = 4096, std::uint64_t table_seed = 1);

    double phi(double omega) const { return joint_phi(omega, 0.0); }
    double joint_phi(double omega, double v) const;
    double lambda(double v, double omega) const;
    double stationary(double omega) const;

    ExponentSource source() const { return source_; }
    const LevyModel& model() const { return *model_; }
    double a() const { return a_; }

private:
    std::shared_ptr<const LevyModel> model_;
    double a_;
    ExponentSource source_;
    PhiTable table_;
};

// c_i for the second transform: decaying (1 - e^{-a}) e^{-a(i-1)} or constant (1 - e^{-a})
enum class CMode { decaying, constant };

std::vector<double> c_weights(std::size_t n, double a, CMode mode);

// log E[exp(-sum omega_i tau_i)] with omega_i = (y_i^2 + beta^2) / 2
double log_joint_laplace_l1(std::span<const double> y, const OuModel& m, const ExponentEngine& e);
double log_joint_laplace_l2(std::span<const double> y, const OuModel& m, const ExponentEngine& e,
                            CMode mode = CMode::decaying);

enum class FourierMethod { q1, q2 };

struct FourierOptions {
    FourierMethod method = FourierMethod::q2;
    ExponentSource source = ExponentSource::automatic;
    CMode c_mode = CMode::decaying;
    double b_shift = 0.0;          // adds b to every tau
    std::size_t phi_table_size = 4096;
    int threads = 1;
};

EstimateReport likelihood_fc(std::span<const double> x, const OuModel& m, std::size_t replications, std::uint64_t seed,
                             const FourierOptions& options = {});

// exact draw from Q2(y, v): v from the stationary law, then each y_i from the
// density proportional to exp(-y^2 v c_i / (2 lambda)) exp(-Phi(omega_i / lambda))
struct Q2Draw {
    double v = 0.0;
    std::vector<double> y;
    std::size_t proposals = 0;
};

Q2Draw q2_sample(const OuModel& m, std::size_t n, const ExponentEngine& e, RngStream& rng,
                 CMode mode = CMode::decaying);

// ---------------------------------------------------------------- cosine tilt

// C_n = 1 - exp(-sum a_i^2 p_i / 2)
double cosine_tilt_normalizer(std::span<const double> abs_a, std::span<const double> p);

// draw from [1 - prod cos(y_i |a_i|)] prod H(y_i | p_i) / C_n, H half-normal with variance p_i
struct CosineTiltDraw {
    std::vector<double> y;
    std::vector<double> tilt;  // lambda_k: the cosine weight multiplying cos(y_k |a_k|) at step k
};

CosineTiltDraw cosine_tilt_sample(std::span<const double> abs_a, std::span<const double> p, RngStream& rng);

// how the cosine-free term E[prod e^{-beta^2 tau_i / 2} (2 pi tau_i)^{-1/2}] is estimated
enum class UpsilonSource { automatic, tau_paths, half_normal };

std::string to_string(UpsilonSource s);
UpsilonSource upsilon_source_from_string(const std::string& name);

struct GeneralOptions {
    std::vector<double> p;  // half-normal variances; empty means all one
    UpsilonSource upsilon = UpsilonSource::automatic;  // automatic: tau paths for finite GGC models
    ExponentSource source = ExponentSource::automatic;
    std::size_t phi_table_size = 4096;
    int threads = 1;
};

EstimateReport likelihood_general(std::span<const double> x, const OuModel& m, std::size_t replications,
                                  std::uint64_t seed, const GeneralOptions& options = {});

// Self-normalised posterior functionals with the Fourier likelihood weights
using ModelPrior = std::function<OuModel(RngStream&)>;
using ModelFunctional = std::function<double(const OuModel&)>;

PosteriorEstimate bayes_posterior_fc(const std::vector<ModelFunctional>& functionals, const ModelPrior& prior,
                                     std::span<const double> x, std::size_t replications, std::uint64_t seed,
                                     const FourierOptions& options = {});

} // namespace bns
