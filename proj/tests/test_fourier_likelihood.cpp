#include "doctest.h"

#include "bns/errors.hpp"
#include "bns/fourier_likelihood.hpp"
#include "bns/quadrature.hpp"
#include "bns/samplers.hpp"
#include "bns/stats.hpp"
#include "support.hpp"

#include <cmath>
#include <numbers>

using namespace bns;

namespace {

const OuGammaParams gamma_params{0.03, -0.5, 1.1, 0.7, 1.0, 0.9};

std::vector<double> simulate_returns(const OuGammaParams& p, std::size_t n, std::uint64_t seed)
{
    RngStream rng(seed, 99);
    const auto path = sample_tau_path(p, n, V0Stationary{}, rng);
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i)
        x[i] = p.mu * p.delta_t + p.beta * path.tau[i] + std::sqrt(path.tau[i]) * rng.normal();
    return x;
}

void check_agree(const EstimateReport& a, const EstimateReport& b, double sigmas = 4.0)
{
    const double se = std::hypot(a.log_std_error, b.log_std_error);
    INFO(a.method << " " << a.log_value << " +- " << a.log_std_error << " vs " << b.method << " " << b.log_value
                  << " +- " << b.log_std_error);
    CHECK(std::abs(a.log_value - b.log_value) < sigmas * se);
}

} // namespace

TEST_CASE("Weber-Sonine cosine integral")
{
    CHECK(weber_sonine_rhs(0.0, 1.0) == doctest::Approx(1.0 / std::sqrt(2.0 * std::numbers::pi)).epsilon(1e-15));
    CHECK(std::abs(weber_sonine_lhs(1.0, 2.0) - weber_sonine_rhs(1.0, 2.0)) < 1e-8);
    RngStream rng(201);
    for (int k = 0; k < 20; ++k) {
        const double a = 6.0 * rng.uniform();
        const double tau = 0.02 + 3.0 * rng.uniform();
        CHECK(std::abs(weber_sonine_lhs(a, tau) - weber_sonine_rhs(a, tau)) < 1e-8);
        CHECK(weber_sonine_rhs(a, tau) ==
              doctest::Approx(weber_sonine_rhs(a / std::sqrt(tau), 1.0) / std::sqrt(tau)).epsilon(1e-13));
    }
}

TEST_CASE("joint Laplace context follows its definitions")
{
    const std::vector<double> y = {0.3, 1.4, 0.0, 2.2, 0.7};
    const double beta = 0.4, a = 0.35, lambda = 1.7;
    const auto ctx = make_joint_laplace_context(y, beta, a, lambda);
    const std::size_t n = y.size();
    for (std::size_t l = 0; l < n; ++l) {
        double s = 0.0;
        for (std::size_t i = l; i < n; ++i) s += ctx.omega[i] * std::exp(-a * static_cast<double>(i));
        s *= -std::expm1(-a);
        CHECK(ctx.s[l] == doctest::Approx(s).epsilon(1e-14));
        const double v = l + 1 < n ? std::exp(a * static_cast<double>(l + 1)) * ctx.s[l + 1] : 0.0;
        CHECK(ctx.v[l] == doctest::Approx(v).epsilon(1e-13));
        CHECK(ctx.omega[l] == doctest::Approx(0.5 * (y[l] * y[l] + beta * beta)));
    }
}

TEST_CASE("integrated variance splits along the context coefficients")
{
    // lambda sum omega_i tau_i = s_1 v0 + sum omega_i J_i + sum_{i<n} v_i Y_i on every path
    RngStream rng(202);
    for (int rep = 0; rep < 100; ++rep) {
        OuGammaParams p = gamma_params;
        p.lambda = 0.2 + 2.0 * rng.uniform();
        p.theta = 0.3 + 2.0 * rng.uniform();
        const std::size_t n = 2 + rep % 5;
        const auto path = sample_tau_path(p, n, V0Stationary{}, rng);
        std::vector<double> y(n);
        for (auto& v : y) v = 3.0 * rng.uniform();
        const auto ctx = make_joint_laplace_context(y, p.beta, p.a(), p.lambda);
        double lhs = 0.0, rhs = ctx.s[0] * path.v0.value;
        for (std::size_t i = 0; i < n; ++i) {
            lhs += p.lambda * ctx.omega[i] * path.tau[i];
            const double carry = path.gamma_parts[i] * path.mean_parts[i];
            rhs += ctx.omega[i] * (path.gamma_parts[i] - carry) + ctx.v[i] * carry;
        }
        CHECK(std::abs(lhs - rhs) <= 1e-12 * lhs);
    }
}

TEST_CASE("first joint transform against Monte Carlo over tau paths")
{
    const auto m = ou_model_from(gamma_params);
    const ExponentEngine e(m.bdlp, m.a());
    const std::vector<double> y = {0.8, 0.2, 1.5};
    const double l1 = log_joint_laplace_l1(y, m, e);
    RngStream rng(203);
    std::vector<double> vals(60000);
    for (auto& v : vals) {
        const auto path = sample_tau_path(gamma_params, 3, V0Stationary{}, rng);
        double ex = 0.0;
        for (std::size_t i = 0; i < 3; ++i) ex += 0.5 * (y[i] * y[i] + m.beta * m.beta) * path.tau[i];
        v = std::exp(-ex);
    }
    const auto est = stats::mean_estimate(vals);
    CHECK(std::abs(est.mean - std::exp(l1)) < 4.0 * est.std_error);
}

TEST_CASE("first and second transforms: bounds, sources and the empty case")
{
    const auto m = ou_model_from(gamma_params);
    const ExponentEngine closed(m.bdlp, m.a(), ExponentSource::closed_form);
    const ExponentEngine quad(m.bdlp, m.a(), ExponentSource::quadrature);
    const ExponentEngine table(m.bdlp, m.a(), ExponentSource::phi_hat, 65536, 3);
    OuModel flat = m;
    flat.beta = 0.0;
    const std::vector<double> zeros(4, 0.0);
    CHECK(log_joint_laplace_l1(zeros, flat, closed) == 0.0);
    CHECK(log_joint_laplace_l2(zeros, flat, closed) == 0.0);
    RngStream rng(204);
    for (int k = 0; k < 50; ++k) {
        std::vector<double> y(4);
        for (auto& v : y) v = 4.0 * rng.uniform();
        const double l1 = log_joint_laplace_l1(y, m, closed);
        const double l2 = log_joint_laplace_l2(y, m, closed);
        CHECK(l1 <= l2);
        CHECK(l1 - l2 > -50.0);
        CHECK(std::abs(log_joint_laplace_l1(y, m, quad) - l1) < 1e-9);
        CHECK(std::abs(log_joint_laplace_l1(y, m, table) - l1) < 1e-2 * std::abs(l1));
    }
    const auto lognormal = std::make_shared<LognormalModel>(0.0, 0.5);
    CHECK_THROWS_AS(ExponentEngine(lognormal, 1.0, ExponentSource::closed_form), DomainError);
    CHECK(ExponentEngine(lognormal, 1.0).source() == ExponentSource::quadrature);
    CHECK(exponent_source_from_string("phi_hat") == ExponentSource::phi_hat);
    CHECK_THROWS_AS(exponent_source_from_string("guess"), DomainError);
}

TEST_CASE("Q2 sampler draws the tilted half-normal conditionals")
{
    const auto m = ou_model_from(gamma_params);
    const ExponentEngine e(m.bdlp, m.a());
    const auto c = c_weights(2, m.a(), CMode::decaying);
    RngStream rng(205);
    std::vector<double> pit(3000);
    for (auto& u : pit) {
        const auto d = q2_sample(m, 2, e, rng);
        // probability integral transform of y_2 under its conditional law given v
        const double prec = c[1] * d.v / m.lambda;
        auto dens = [&](double y) {
            return std::exp(-0.5 * prec * y * y - e.phi(0.5 * (y * y + m.beta * m.beta) / m.lambda));
        };
        const double top = 12.0 / std::sqrt(prec);
        const double total = quad::integrate(dens, 0.0, top, {1e-300, 1e-10, 400}).value;
        u = quad::integrate(dens, 0.0, d.y[1], {1e-300, 1e-10, 400}).value / total;
    }
    CHECK(stats::ks_test(pit, [](double u) { return std::clamp(u, 0.0, 1.0); }).p_value > 0.001);
}

TEST_CASE("zero returns: all estimators reduce to a tau moment")
{
    OuGammaParams p = gamma_params;
    p.beta = 0.0;
    p.mu = 0.0;
    const auto m = ou_model_from(p);
    const std::vector<double> x(2, 0.0);
    RngStream rng(206);
    std::vector<double> vals(100000);
    for (auto& v : vals) {
        const auto path = sample_tau_path(p, 2, V0Stationary{}, rng);
        v = 1.0 / (2.0 * std::numbers::pi * std::sqrt(path.tau[0] * path.tau[1]));
    }
    const auto brute = stats::mean_estimate(vals);
    EstimateReport direct;
    direct.method = "tau_moment";
    direct.log_value = std::log(brute.mean);
    direct.log_std_error = brute.std_error / brute.mean;
    check_agree(likelihood_fc(x, m, 40000, 1), direct);
    check_agree(likelihood_fc(x, m, 40000, 2, {FourierMethod::q1}), direct);
    const auto general = likelihood_general(x, m, 40000, 3);
    CHECK(general.diagnostics.at("tilt_normalizer") == 0.0);
    check_agree(general, direct);
    check_agree(likelihood_mc(x, p, 40000, 4), direct);
}

TEST_CASE("Fourier estimators agree with the S-vector likelihood")
{
    const auto x = simulate_returns(gamma_params, 3, 1);
    const auto m = ou_model_from(gamma_params);
    const auto exact = likelihood_mc(x, gamma_params, 40000, 11);
    const auto q2 = likelihood_fc(x, m, 40000, 12);
    const auto q1 = likelihood_fc(x, m, 40000, 13, {FourierMethod::q1});
    const auto general = likelihood_general(x, m, 40000, 14);
    check_agree(q2, exact);
    check_agree(q1, exact);
    check_agree(general, exact);
    const auto constant = likelihood_fc(x, m, 40000, 15, {FourierMethod::q2, ExponentSource::automatic, CMode::constant});
    check_agree(constant, exact);
    const auto quadrature = likelihood_fc(x, m, 8000, 12, {FourierMethod::q2, ExponentSource::quadrature});
    const auto closed8 = likelihood_fc(x, m, 8000, 12);
    CHECK(std::abs(quadrature.log_value - closed8.log_value) < 1e-8);
}

TEST_CASE("Fourier estimators for non-gamma background processes")
{
    const std::vector<double> x = {0.5, -0.9, 0.2};
    for (const auto& bdlp : std::vector<std::shared_ptr<const LevyModel>>{
             std::make_shared<InverseGaussianModel>(1.2, 1.5), std::make_shared<StableModel>(0.6, 0.8),
             make_model("fggc_arcsine", {{"theta", 1.3}})}) {
        const OuModel m{bdlp, 0.02, -0.3, 0.8, 1.0};
        const auto q2 = likelihood_fc(x, m, 30000, 21);
        const auto general = likelihood_general(x, m, 30000, 22);
        check_agree(q2, general);
        if (bdlp->fggc()) check_agree(likelihood_fc(x, m, 30000, 23, {FourierMethod::q1}), general);
        else CHECK_THROWS_AS(likelihood_fc(x, m, 10, 1, {FourierMethod::q1}), DomainError);
    }
    const OuModel ln{std::make_shared<LognormalModel>(-0.5, 0.6), 0.0, 0.1, 0.9, 1.0};
    CHECK_THROWS_AS(likelihood_fc(x, ln, 10, 1), DomainError);
    const auto r = likelihood_general(x, ln, 4000, 5);
    CHECK(std::isfinite(r.log_value));
    CHECK(r.log_std_error < 0.2);
}

TEST_CASE("Fourier estimates are reproducible across thread counts and stable in B")
{
    const auto x = simulate_returns(gamma_params, 3, 1);
    const auto m = ou_model_from(gamma_params);
    FourierOptions one, three;
    three.threads = 3;
    CHECK(likelihood_fc(x, m, 3000, 7, one).log_value == likelihood_fc(x, m, 3000, 7, three).log_value);
    GeneralOptions g1, g3;
    g3.threads = 3;
    CHECK(likelihood_general(x, m, 2000, 7, g1).log_value == likelihood_general(x, m, 2000, 7, g3).log_value);
    check_agree(likelihood_fc(x, m, 5000, 8), likelihood_fc(x, m, 20000, 9), 3.0);
}

TEST_CASE("cosine-tilt normaliser and sampler")
{
    RngStream rng(207);
    for (std::size_t n : {1u, 3u, 5u}) {
        std::vector<double> a(n), p(n);
        for (std::size_t i = 0; i < n; ++i) {
            a[i] = 0.2 + rng.uniform();
            p[i] = 0.5 + rng.uniform();
        }
        std::vector<double> vals(200000);
        for (auto& v : vals) {
            double prod = 1.0;
            for (std::size_t i = 0; i < n; ++i) prod *= std::cos(sample_half_normal(p[i], rng) * a[i]);
            v = 1.0 - prod;
            CHECK(v >= 0.0);
            CHECK(v <= 2.0);
        }
        const auto m = stats::mean_estimate(vals);
        CHECK(std::abs(m.mean - cosine_tilt_normalizer(a, p)) < 4.0 * m.std_error);
        const auto d = cosine_tilt_sample(a, p, rng);
        double prefix = 1.0;
        for (std::size_t i = 0; i + 1 < n; ++i) prefix *= std::cos(d.y[i] * a[i]);
        CHECK(d.tilt[n - 1] == doctest::Approx(prefix).epsilon(1e-14));
    }
    // single coordinate: the density (1 - cos(y a)) H(y) / C_1, in both proposal regimes
    for (double a : {0.3, 2.5}) {
        const std::vector<double> av = {a}, pv = {1.0};
        std::vector<double> ys(30000);
        for (auto& y : ys) y = cosine_tilt_sample(av, pv, rng).y[0];
        auto dens = [&](double y) { return (1.0 - std::cos(y * a)) * std::exp(-0.5 * y * y); };
        auto cdf = test_support::tabulated_cdf(dens, 0.0, 12.0, 6000);
        CHECK(stats::ks_test(ys, cdf).p_value > 0.001);
    }
    // three coordinates: moments against importance weighting of half-normal draws
    const std::vector<double> a3 = {0.4, 1.1, 0.05}, p3 = {1.0, 0.7, 2.0};
    std::vector<double> direct(100000), weighted(100000);
    const double c3 = cosine_tilt_normalizer(a3, p3);
    for (std::size_t k = 0; k < direct.size(); ++k) {
        direct[k] = cosine_tilt_sample(a3, p3, rng).y[1];
        double prod = 1.0, y1 = 0.0;
        for (std::size_t i = 0; i < 3; ++i) {
            const double y = sample_half_normal(p3[i], rng);
            if (i == 1) y1 = y;
            prod *= std::cos(y * a3[i]);
        }
        weighted[k] = y1 * (1.0 - prod) / c3;
    }
    const auto md = stats::mean_estimate(direct), mw = stats::mean_estimate(weighted);
    CHECK(std::abs(md.mean - mw.mean) < 4.0 * std::hypot(md.std_error, mw.std_error));
    const std::vector<double> zero = {0.0, 0.0}, ones = {1.0, 1.0};
    CHECK(cosine_tilt_normalizer(zero, ones) == 0.0);
    CHECK_THROWS_AS(cosine_tilt_sample(zero, ones, rng), DomainError);
}

TEST_CASE("Fourier posterior weights")
{
    const auto x = simulate_returns(gamma_params, 3, 3);
    const auto m = ou_model_from(gamma_params);
    auto prior = [&](RngStream&) { return m; };
    const auto post = bayes_posterior_fc({[](const OuModel&) { return 1.0; }, [](const OuModel& q) { return q.lambda; }},
                                         prior, x, 3000, 31);
    CHECK(post.values[0] == 1.0);
    CHECK(post.values[1] == doctest::Approx(m.lambda).epsilon(1e-14));
    CHECK(post.log_evidence == doctest::Approx(likelihood_fc(x, m, 3000, 31).log_value).epsilon(1e-12));
}
