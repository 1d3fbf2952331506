#pragma once

#include "bns/dirichlet_mean.hpp"
#include "bns/rng.hpp"

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace bns {

enum class LevyKind { gamma, stable, inverse_gaussian, lognormal, fggc };

// psi(w) = theta E[log(1 + w W)], W ~ mixing
struct FggcSpec {
    double theta = 1.0;
    BaseMeasure mixing;
};

// Laplace exponent psi of the background driving subordinator at time one,
// E[exp(-w Z(1))] = exp(-psi(w)).
class LevyModel {
public:
    virtual ~LevyModel() = default;

    virtual LevyKind kind() const = 0;
    virtual std::string name() const = 0;
    virtual std::map<std::string, double> parameters() const = 0;
    virtual double psi(double omega) const = 0;

    // Phi(omega | v) = int_{e^{-a}}^1 psi(omega (1 - u) + v u) du / u when known in closed form
    virtual std::optional<double> joint_phi_closed_form(double omega, double v, double a) const;
    // exponent of the stationary law, int_0^1 psi(omega u) du / u, when known in closed form
    virtual std::optional<double> stationary_closed_form(double omega) const;

    virtual bool has_stationary_sampler() const { return false; }
    virtual double sample_stationary(RngStream& rng) const;

    virtual const FggcSpec* fggc() const { return nullptr; }
};

class GammaModel final : public LevyModel {
public:
    explicit GammaModel(double theta, double scale = 1.0, double stationary_cutoff = 40.0);
    LevyKind kind() const override { return LevyKind::gamma; }
    std::string name() const override { return "gamma"; }
    std::map<std::string, double> parameters() const override;
    double psi(double omega) const override;
    std::optional<double> joint_phi_closed_form(double omega, double v, double a) const override;
    std::optional<double> stationary_closed_form(double omega) const override;
    bool has_stationary_sampler() const override { return true; }
    double sample_stationary(RngStream& rng) const override;
    const FggcSpec* fggc() const override { return &fggc_; }
    double theta() const { return theta_; }
    double scale() const { return scale_; }

private:
    double theta_, scale_, cutoff_;
    FggcSpec fggc_;
};

class StableModel final : public LevyModel {
public:
    explicit StableModel(double alpha, double scale = 1.0);
    LevyKind kind() const override { return LevyKind::stable; }
    std::string name() const override { return "stable"; }
    std::map<std::string, double> parameters() const override;
    double psi(double omega) const override;
    std::optional<double> stationary_closed_form(double omega) const override;
    bool has_stationary_sampler() const override { return true; }
    double sample_stationary(RngStream& rng) const override;

private:
    double alpha_, scale_;
};

// OU process with inverse Gaussian IG(delta, gamma) stationary law
class InverseGaussianModel final : public LevyModel {
public:
    InverseGaussianModel(double delta, double gamma);
    LevyKind kind() const override { return LevyKind::inverse_gaussian; }
    std::string name() const override { return "inverse_gaussian"; }
    std::map<std::string, double> parameters() const override;
    double psi(double omega) const override;
    std::optional<double> stationary_closed_form(double omega) const override;
    bool has_stationary_sampler() const override { return true; }
    double sample_stationary(RngStream& rng) const override;

private:
    double delta_, gamma_;
};

// Z(1) lognormal; psi is tabulated once on a log-spaced grid
class LognormalModel final : public LevyModel {
public:
    explicit LognormalModel(double mu = 0.0, double sigma = 1.0);
    LevyKind kind() const override { return LevyKind::lognormal; }
    std::string name() const override { return "lognormal"; }
    std::map<std::string, double> parameters() const override;
    double psi(double omega) const override;
    // direct quadrature, bypassing the table
    double psi_direct(double omega) const;
    double psi_derivative_direct(double omega) const;

    static constexpr double table_lo = 1e-8;
    static constexpr double table_hi = 1e8;
    static constexpr int table_size = 512;

private:
    double mu_, sigma_, mean_;
    std::vector<double> log_omega_, log_psi_, slope_;
};

class FggcModel final : public LevyModel {
public:
    FggcModel(double theta, BaseMeasure mixing, double stationary_cutoff = 40.0);
    LevyKind kind() const override { return LevyKind::fggc; }
    std::string name() const override { return "fggc_" + spec_.mixing.name; }
    std::map<std::string, double> parameters() const override;
    double psi(double omega) const override;
    bool has_stationary_sampler() const override { return true; }
    double sample_stationary(RngStream& rng) const override;
    const FggcSpec* fggc() const override { return &spec_; }

private:
    FggcSpec spec_;
    double cutoff_;
    bool arcsine_unit_;
    BaseMeasure stationary_base_;
};

// Registry: gamma{theta, scale}, stable{alpha, scale}, inverse_gaussian{delta, gamma},
// lognormal{mu, sigma}, fggc_arcsine / fggc_uniform {theta}.
std::shared_ptr<const LevyModel> make_model(const std::string& name, const std::map<std::string, double>& params);
std::vector<std::string> model_names();

// Phi(omega) = Phi(omega | 0)
double phi_exponent(const LevyModel& model, double omega, double a);
double joint_phi_exponent(const LevyModel& model, double omega, double v, double a);
// Lambda(v | omega) = Phi(omega | v) - Phi(omega)
double lambda_exponent(const LevyModel& model, double v, double omega, double a);
// the same by quadrature only, ignoring closed forms
double joint_phi_quadrature(const LevyModel& model, double omega, double v, double a);
double lambda_quadrature(const LevyModel& model, double v, double omega, double a);
// varphi(omega) = int_0^inf psi(omega e^{-s}) ds
double stationary_exponent(const LevyModel& model, double omega);

// Monte Carlo exponent from a fixed table of F_a draws
struct PhiTable {
    double a = 1.0;
    std::uint64_t seed = 0;
    std::vector<double> draws;
};

PhiTable make_phi_table(double a, std::size_t size, std::uint64_t seed);
double phi_hat(const PhiTable& table, const LevyModel& model, double omega, double v = 0.0);

// FGGC mixture representations
double fggc_phi_mixture(const FggcSpec& spec, double omega, double v, double a);
double fggc_lambda_mixture(const FggcSpec& spec, double v, double omega, double a);

// law of (1 - U) W, of U W, and of U W / (1 + W (1 - U) omega), with U ~ F_a and W ~ mixing
BaseMeasure fggc_q_measure(const FggcSpec& spec, double a);
BaseMeasure fggc_q_tilde_measure(const FggcSpec& spec, double a);
BaseMeasure fggc_q_conditional_measure(const FggcSpec& spec, double a, double omega);

// jointly exact (Z(a) - Y, Y) with Y = int_0^a e^{s-a} dZ(s)
struct IncrementPair {
    double gamma_part = 0.0;
    double jump_part = 0.0;    // Z(a) - Y
    double carry_part = 0.0;   // Y
};

IncrementPair fggc_increment_pair(const FggcSpec& spec, double a, RngStream& rng, const CouplingConfig& cfg = {});

} // namespace bns
