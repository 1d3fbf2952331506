#include "doctest.h"

#include "bns/errors.hpp"
#include "bns/ou_gamma.hpp"
#include "bns/quadrature.hpp"
#include "bns/samplers.hpp"
#include "bns/stats.hpp"
#include "support.hpp"

#include <boost/math/distributions/gamma.hpp>

#include <cmath>
#include <numbers>
#include <numeric>

using namespace bns;

namespace {

const OuGammaParams base{0.05, -0.4, 1.3, 0.6, 1.0, 0.8};

// int prod_i phi(x_i | mu dt + beta V s_i, V s_i) Gamma(V; kappa, scale) dV by direct quadrature
double direct_integrand(std::span<const double> x, const SVector& s, const OuGammaParams& p)
{
    auto f = [&](double v) {
        if (v <= 0.0) return 0.0;
        double log_f = (s.kappa - 1.0) * std::log(v) - v / s.scale - std::lgamma(s.kappa) - s.kappa * std::log(s.scale);
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double tau = v * s.s[i];
            log_f += normal_log_density(x[i], p.mu * p.delta_t + p.beta * tau, tau);
        }
        return std::exp(log_f);
    };
    const double top = s.scale * (s.kappa + 60.0 * std::sqrt(s.kappa) + 60.0);
    std::vector<double> cuts;
    for (int k = 0; k <= 40; ++k) cuts.push_back(top * std::pow(k / 40.0, 2.0));
    double total = 0.0;
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k)
        total += quad::integrate(f, cuts[k], cuts[k + 1], {1e-300, 1e-13, 2000}).value;
    return total;
}

} // namespace

TEST_CASE("pair sampler: gamma part and the carried mean")
{
    const double theta = 1.7, a = 0.7;
    RngStream rng(101);
    std::vector<double> t(40000), carry(40000);
    for (std::size_t i = 0; i < t.size(); ++i) {
        const auto d = sample_pair(theta, a, rng);
        t[i] = d.gamma_part;
        carry[i] = d.carry();
        CHECK(d.mean_part >= std::exp(-a));
        CHECK(d.mean_part <= 1.0);
    }
    boost::math::gamma_distribution<double> g(theta * a, 1.0);
    CHECK(stats::ks_test(t, [&](double x) { return boost::math::cdf(g, x); }).p_value > 0.001);
    const auto c = stats::cumulant_estimate(carry);
    for (int j = 1; j <= 3; ++j)
        CHECK(std::abs(c.value[j - 1] - theta * std::tgamma(j) / j * -std::expm1(-a * j)) < 4.0 * c.std_error[j - 1]);
    // joint transform E exp(-T - Y) = exp(-theta int_{e^{-a}}^1 log(2 + u) / u du)
    std::vector<double> e(t.size());
    for (std::size_t i = 0; i < e.size(); ++i) e[i] = std::exp(-t[i] - carry[i]);
    const auto m = stats::mean_estimate(e);
    const double exponent = theta * quad::integrate([](double u) { return std::log(2.0 + u) / u; }, std::exp(-a), 1.0).value;
    CHECK(std::abs(m.mean - std::exp(-exponent)) < 4.0 * m.std_error);
}

TEST_CASE("tau path decomposes into scale * total * s")
{
    RngStream rng(102);
    for (int rep = 0; rep < 300; ++rep) {
        const auto path = sample_tau_path(base, 12, V0Stationary{}, rng);
        const auto s = build_s_vector(path, base);
        CHECK(s.kappa == doctest::Approx(base.theta * (base.a() * 12 + 40.0)).epsilon(1e-14));
        const double sum = std::accumulate(s.weights.begin(), s.weights.end(), 0.0);
        CHECK(std::abs(sum - 1.0) < 1e-12);
        for (std::size_t i = 0; i < path.tau.size(); ++i) {
            CHECK(path.tau[i] > 0.0);
            CHECK(std::abs(base.scale * s.total * s.s[i] - path.tau[i]) <= 1e-12 * path.tau[i]);
        }
        // the volatility recursion links the stored starts
        for (std::size_t i = 1; i < path.tau.size(); ++i)
            CHECK(path.v_start[i] == doctest::Approx(std::exp(-base.a()) * path.v_start[i - 1]
                                                        + path.gamma_parts[i - 1] * path.mean_parts[i - 1])
                                         .epsilon(1e-13));
    }
    auto zero = sample_tau_path(base, 4, V0Fixed{0.0}, rng);
    CHECK(build_s_vector(zero, base).weights.size() == 4);
    auto fixed = sample_tau_path(base, 4, V0Fixed{0.5}, rng);
    CHECK_THROWS_AS(build_s_vector(fixed, base), DomainError);
    auto broken = zero;
    broken.tau[2] *= 1.0 + 1e-9;
    CHECK_THROWS_AS(build_s_vector(broken, base), InconsistencyError);
}

TEST_CASE("stationary v0 is preserved by the volatility recursion")
{
    RngStream rng(103);
    std::vector<double> start(20000), end(20000);
    for (std::size_t i = 0; i < start.size(); ++i) {
        start[i] = sample_v0(base, V0Stationary{}, rng).value;
        end[i] = sample_tau_path(base, 5, V0Stationary{}, rng).v_end;
    }
    CHECK(stats::ks_test_two_sample(start, end).p_value > 0.001);
    const auto mv = stats::mean_estimate(start);
    CHECK(std::abs(mv.mean - base.theta * base.scale) < 4.0 * mv.std_error);
    std::vector<double> unit(20000);
    for (auto& u : unit) u = sample_v0_stationary(1.0, 40.0, rng);
    std::vector<double> e1(unit.size());
    for (std::size_t i = 0; i < e1.size(); ++i) e1[i] = std::exp(-unit[i]);
    const auto me = stats::mean_estimate(e1);
    CHECK(std::abs(me.mean - std::exp(-std::numbers::pi * std::numbers::pi / 12.0)) < 4.0 * me.std_error);
    // a Gamma background process gives the stationary exponent -theta Li2(-scale w)
    for (double w : {0.3, 1.0, 4.0}) {
        std::vector<double> e(start.size());
        for (std::size_t i = 0; i < e.size(); ++i) e[i] = std::exp(-w * start[i]);
        const auto m = stats::mean_estimate(e);
        CHECK(std::abs(m.mean - std::exp(base.theta * dilog(-base.scale * w))) < 4.0 * m.std_error);
    }
}

TEST_CASE("tau is stationary with decaying autocorrelation")
{
    RngStream rng(115);
    const std::size_t reps = 30000;
    std::vector<std::vector<double>> cols(6, std::vector<double>(reps));
    for (std::size_t r = 0; r < reps; ++r) {
        const auto path = sample_tau_path(base, 6, V0Stationary{}, rng);
        for (std::size_t i = 0; i < 6; ++i) cols[i][r] = path.tau[i];
    }
    CHECK(stats::ks_test_two_sample(cols[0], cols[4]).p_value > 0.001);
    auto corr = [&](std::size_t i, std::size_t j) {
        const auto mi = stats::mean_estimate(cols[i]).mean, mj = stats::mean_estimate(cols[j]).mean;
        double sij = 0.0, sii = 0.0, sjj = 0.0;
        for (std::size_t r = 0; r < reps; ++r) {
            sij += (cols[i][r] - mi) * (cols[j][r] - mj);
            sii += (cols[i][r] - mi) * (cols[i][r] - mi);
            sjj += (cols[j][r] - mj) * (cols[j][r] - mj);
        }
        return sij / std::sqrt(sii * sjj);
    };
    const double c1 = corr(0, 1), c3 = corr(0, 3), c5 = corr(0, 5);
    CHECK(c1 > c3);
    CHECK(c3 > c5);
    CHECK(c5 > 0.0);
    // lag ratios follow the e^{-a} decay of the volatility
    CHECK(std::abs(c3 / c1 - std::exp(-2.0 * base.a())) < 0.1);
}

TEST_CASE("a single interval from zero volatility is the jump part")
{
    RngStream a(116), b(116);
    const auto path = sample_tau_path(base, 1, V0Fixed{0.0}, a);
    const auto pair = sample_pair(base.theta, base.a(), b);
    CHECK(base.lambda * path.tau[0] == doctest::Approx(base.scale * pair.jump()).epsilon(1e-15));
}

TEST_CASE("direct S-vector draws match the path decomposition")
{
    RngStream a(104), b(105);
    std::vector<double> s_direct, s_path;
    for (int rep = 0; rep < 20000; ++rep) {
        s_direct.push_back(sample_s_vector(base, 3, V0Stationary{}, a).s[1]);
        s_path.push_back(build_s_vector(sample_tau_path(base, 3, V0Stationary{}, b), base).s[1]);
    }
    CHECK(stats::ks_test_two_sample(s_direct, s_path).p_value > 0.001);
}

TEST_CASE("likelihood integrand against direct quadrature and the finite series")
{
    const std::vector<double> x = {0.3, -0.8, 1.1, 0.05};
    RngStream rng(106);
    for (int rep = 0; rep < 5; ++rep) {
        const auto s = sample_s_vector(base, x.size(), V0Stationary{}, rng);
        const double direct = direct_integrand(x, s, base);
        CHECK(std::abs(log_likelihood_integrand(x, s, base) - std::log(direct)) < 1e-9);
        const auto post = posterior_gig_params(x, s, base);
        CHECK(post.nu == doctest::Approx(s.kappa - 2.0));
    }
    // kappa - n/2 half-integer, positive and negative orders
    {
        const double shape = 4.5 - base.theta * base.a() * 4;  // nu = 2.5
        const auto s = sample_s_vector(base, x.size(), V0Product{shape, {}}, rng);
        REQUIRE(half_integer_order(s.kappa - 2.0).has_value());
        CHECK(std::abs(log_likelihood_integrand(x, s, base) - log_likelihood_integrand_half_integer(x, s, base)) < 1e-12);
    }
    OuGammaParams p = base;
    p.theta = 0.5;
    p.lambda = 1.0;
    const auto s = sample_s_vector(p, x.size(), V0Product{0.5, {}}, rng);  // kappa = 2.5, nu = 0.5
    CHECK(std::abs(log_likelihood_integrand(x, s, p) - log_likelihood_integrand_half_integer(x, s, p)) < 1e-12);
    for (double shape : {0.1, 0.2}) {  // nu = -1.5 with n = 8
        const std::vector<double> x8 = {0.3, -0.8, 1.1, 0.05, 0.2, -0.3, 0.4, -0.1};
        OuGammaParams q = p;
        q.theta = (2.5 - shape) / 8.0;
        const auto s8 = sample_s_vector(q, 8, V0Product{shape, {}}, rng);
        REQUIRE(s8.kappa - 4.0 == doctest::Approx(-1.5));
        CHECK(std::abs(log_likelihood_integrand(x8, s8, q) - log_likelihood_integrand_half_integer(x8, s8, q)) < 1e-12);
        CHECK(std::abs(log_likelihood_integrand(x8, s8, q) - std::log(direct_integrand(x8, s8, q))) < 1e-8);
    }
    CHECK_THROWS_AS(log_likelihood_integrand_half_integer(x, sample_s_vector(base, 4, V0Stationary{}, rng), base),
                    DomainError);
}

TEST_CASE("likelihood integrand with all returns at the drift")
{
    const OuGammaParams p = base;
    const std::vector<double> x(3, p.mu * p.delta_t);
    RngStream rng(107);
    const auto s = sample_s_vector(p, 3, V0Stationary{}, rng);
    CHECK(std::abs(log_likelihood_integrand(x, s, p) - std::log(direct_integrand(x, s, p))) < 1e-9);
    OuGammaParams q = p;
    q.theta = 0.1;
    const auto small = sample_s_vector(q, 3, V0Product{0.2, {}}, rng);
    CHECK_THROWS_AS(log_likelihood_integrand(x, small, q), NumericError);
}

TEST_CASE("S-vector likelihood agrees with a brute-force path average")
{
    const std::vector<double> x = {0.4, -0.2};
    const auto est = likelihood_mc(x, base, 40000, 7);
    RngStream rng(108);
    std::vector<double> dens(200000);
    for (auto& d : dens) {
        const auto path = sample_tau_path(base, 2, V0Stationary{}, rng);
        d = 1.0;
        for (std::size_t i = 0; i < 2; ++i)
            d *= normal_density(x[i], base.mu * base.delta_t + base.beta * path.tau[i], path.tau[i]);
    }
    const auto brute = stats::mean_estimate(dens);
    const double se = std::hypot(brute.std_error, est.std_error);
    CHECK(std::abs(est.value - brute.mean) < 4.0 * se);
    CHECK(est.diagnostics.at("kappa") == doctest::Approx(base.theta * (40.0 + 2.0 * base.a())));
    CHECK_THROWS_AS(likelihood_mc(x, base, 10, 1, {V0Fixed{1.0}, 1}), DomainError);
}

TEST_CASE("likelihood estimates do not depend on the thread count")
{
    const std::vector<double> x = {0.4, -0.2, 0.7};
    const auto one = likelihood_mc(x, base, 3000, 11, {V0Stationary{}, 1});
    const auto three = likelihood_mc(x, base, 3000, 11, {V0Stationary{}, 3});
    CHECK(one.log_value == three.log_value);
    CHECK(one.log_std_error == three.log_std_error);
    const auto other = likelihood_mc(x, base, 3000, 12, {V0Stationary{}, 1});
    CHECK(one.log_value != other.log_value);
}

TEST_CASE("posterior under a point-mass prior reduces to the likelihood")
{
    const std::vector<double> x = {0.4, -0.2, 0.7};
    auto prior = [](RngStream&) { return base; };
    const auto post = bayes_posterior_mc({[](const OuGammaParams& p) { return p.theta; }}, prior, x, 2000, 5);
    CHECK(post.values[0] == doctest::Approx(base.theta).epsilon(1e-14));
    CHECK(post.std_errors[0] < 1e-12);
    CHECK(post.log_evidence == doctest::Approx(likelihood_mc(x, base, 2000, 5).log_value).epsilon(1e-14));
}

TEST_CASE("posterior over two candidate parameter values")
{
    const std::vector<double> x = {0.9, -1.2, 1.5, -0.7};
    OuGammaParams lo = base, hi = base;
    hi.theta = 3.0;
    auto prior = [&](RngStream& rng) { return rng.uniform() < 0.5 ? lo : hi; };
    const auto post = bayes_posterior_mc({[&](const OuGammaParams& p) { return p.theta == hi.theta ? 1.0 : 0.0; }},
                                         prior, x, 40000, 21);
    const auto l_lo = likelihood_mc(x, lo, 40000, 22);
    const auto l_hi = likelihood_mc(x, hi, 40000, 23);
    const double expect = l_hi.value / (l_lo.value + l_hi.value);
    const double se = std::hypot(post.std_errors[0], expect * std::hypot(l_lo.log_std_error, l_hi.log_std_error));
    CHECK(std::abs(post.values[0] - expect) < 4.0 * se);
    CHECK(post.effective_sample_size > 1000.0);
}

TEST_CASE("superposition combines components into one S-vector")
{
    SuperpositionParams sp{0.02, -0.3, 1.0, 0.7, {{0.6, 0.8, 0.3}, {0.4, 1.5, 2.0}}};
    RngStream rng(109);
    for (int rep = 0; rep < 200; ++rep) {
        const auto path = superposition_tau(sp, 6, V0Stationary{}, rng);
        CHECK(path.s.kappa == doctest::Approx(0.8 * (40.0 + 6 * 0.3) + 1.5 * (40.0 + 6 * 2.0)));
        for (std::size_t i = 0; i < 6; ++i)
            CHECK(std::abs(sp.scale * path.s.total * path.s.s[i] - path.tau[i]) <= 1e-12 * path.tau[i]);
        const double sum = std::accumulate(path.s.weights.begin(), path.s.weights.end(), 0.0);
        CHECK(std::abs(sum - 1.0) < 1e-12);
    }
    // a single component reproduces the plain likelihood
    SuperpositionParams unbalanced = sp;
    unbalanced.components[0].weight = 0.5;
    CHECK_THROWS_AS(superposition_tau(unbalanced, 3, V0Stationary{}, rng), DomainError);
    SuperpositionParams one{base.mu, base.beta, base.delta_t, base.scale, {{1.0, base.theta, base.lambda}}};
    const std::vector<double> x = {0.4, -0.2, 0.7};
    const auto a = superposition_likelihood_mc(x, one, 20000, 3);
    const auto b = likelihood_mc(x, base, 20000, 4);
    CHECK(std::abs(a.log_value - b.log_value) < 4.0 * std::hypot(a.log_std_error, b.log_std_error));
}

TEST_CASE("random times and time-changed paths")
{
    const std::vector<double> equal(5, base.delta_t);
    RngStream a(110), b(110);
    const auto p1 = random_times_tau(equal, base, V0Stationary{}, a);
    const auto p2 = sample_tau_path(base, 5, V0Stationary{}, b);
    CHECK(p1.tau == p2.tau);

    // stationary volatility has mean theta * scale, so E tau_i = theta scale delta_i
    RngStream rng(111);
    auto sub = [](RngStream& r) { return sample_gamma(2.0, 0.25, r); };
    std::vector<double> ratio(20000);
    for (auto& r : ratio) {
        const auto tc = time_changed_tau(3, base, sub, V0Stationary{}, rng);
        r = tc.path.tau[1] / tc.deltas[1];
    }
    const auto m = stats::mean_estimate(ratio);
    CHECK(std::abs(m.mean - base.theta * base.scale) < 4.0 * m.std_error);
    const std::vector<double> bad = {1.0, 0.0};
    CHECK_THROWS_AS(random_times_tau(bad, base, V0Stationary{}, rng), DomainError);
}

TEST_CASE("increment density: explicit unit-mass form")
{
    const double a = 0.8, theta = 1.0 / a, scale = 1.3;
    const IncrementDensity q(theta, a, scale);
    REQUIRE(q.explicit_form());
    auto f = [&](double y) { return q(y); };
    const double mass = quad::integrate(f, 0.0, 60.0 * scale, {1e-300, 1e-11, 2000}).value;
    const double mean = quad::integrate([&](double y) { return y * q(y); }, 0.0, 60.0 * scale, {1e-300, 1e-11, 2000}).value;
    CHECK(std::abs(mass - 1.0) < 1e-8);
    CHECK(std::abs(mean - q.mean()) < 1e-8);
    for (double y : {0.01, 0.3, 1.0, 4.0}) CHECK(q(y) == doctest::Approx(q.via_mean_density(y)).epsilon(1e-8));

    RngStream rng(112);
    std::vector<double> jumps(30000);
    for (auto& j : jumps) j = scale * sample_pair(theta, a, rng).jump();
    auto cdf = test_support::tabulated_cdf(f, 0.0, 40.0, 4000);
    CHECK(stats::ks_test(jumps, cdf).p_value > 0.001);
}

TEST_CASE("increment density: mixture form")
{
    const double a = 0.5, theta = 1.2, scale = 0.9;
    const IncrementDensity q(theta, a, scale, 4096, 3);
    REQUIRE_FALSE(q.explicit_form());
    auto f = [&](double y) { return q(y); };
    const double mass = quad::integrate(f, 0.0, 40.0, {1e-300, 1e-10, 4000}).value;
    CHECK(std::abs(mass - 1.0) < 1e-6);
    RngStream rng(113);
    std::vector<double> jumps(30000);
    for (auto& j : jumps) j = scale * sample_pair(theta, a, rng).jump();
    const auto m = stats::mean_estimate(jumps);
    CHECK(std::abs(m.mean - q.mean()) < 4.0 * m.std_error);
    // tabulate in u = y^k, where the density is bounded at zero
    const double k = q.shape();
    auto in_u = [&](double u) { return u <= 0.0 ? 0.0 : q(std::pow(u, 1.0 / k)) * std::pow(u, 1.0 / k - 1.0) / k; };
    auto cdf_u = test_support::tabulated_cdf(in_u, 0.0, std::pow(15.0, k), 6000);
    CHECK(stats::ks_test(jumps, [&](double y) { return cdf_u(std::pow(y, k)); }).p_value > 0.001);
    CHECK(option_density_q(-1.0, base) == 0.0);
}

TEST_CASE("conditional price density integrates to one with the right mean")
{
    OuGammaParams p = base;
    const double horizon = 1.0 / (p.theta * p.lambda);  // unit mass: explicit route
    const double v_start = 0.7;
    auto dens = [&](double x) { return conditional_price_density(x, v_start, horizon, p); };
    const double lo = -12.0, hi = 12.0;
    const double mass = quad::integrate(dens, lo, hi, {1e-300, 1e-8, 400}).value;
    const double first = quad::integrate([&](double x) { return x * dens(x); }, lo, hi, {1e-300, 1e-8, 400}).value;
    const double a = p.lambda * horizon;
    const IncrementDensity q(p.theta, a, p.scale);
    const double mean_tau = (-std::expm1(-a) * v_start + q.mean()) / p.lambda;
    CHECK(std::abs(mass - 1.0) < 1e-6);
    CHECK(std::abs(first - (p.mu * horizon + p.beta * mean_tau)) < 1e-6);
}

TEST_CASE("moving-average functionals of a Gamma random measure")
{
    const double theta = 1.4, a = 1.2;
    RngStream rng(114);
    std::vector<double> g1(30000), g2(30000), carry(30000), dl(30000);
    for (std::size_t i = 0; i < g1.size(); ++i) {
        std::tie(g1[i], g2[i]) = moving_average_pair(theta, a, rng);
        carry[i] = sample_pair(theta, a, rng).carry();
        dl[i] = dykstra_laud_pair(theta, a, rng).second;
    }
    const auto m1 = stats::mean_estimate(g1), m2 = stats::mean_estimate(g2), m3 = stats::mean_estimate(dl);
    CHECK(std::abs(m1.mean - theta * (1.0 - std::exp(-a))) < 4.0 * m1.std_error);
    CHECK(std::abs(m2.mean - theta * (1.0 - (1.0 + a) * std::exp(-a))) < 4.0 * m2.std_error);
    CHECK(std::abs(m3.mean - theta * a * a / 2.0) < 4.0 * m3.std_error);
    // the exponential functional is the carried part of the increment
    CHECK(stats::ks_test_two_sample(g1, carry).p_value > 0.001);
}
