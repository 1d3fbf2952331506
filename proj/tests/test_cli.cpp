#include "doctest.h"

#include "bns/cli.hpp"
#include "bns/dirichlet_mean.hpp"
#include "bns/errors.hpp"

#include "json.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

using namespace bns;
using nlohmann::json;

namespace {

struct Outcome {
    int code;
    std::string out, err;
};

Outcome run_cli(std::vector<std::string> args, const std::string& input = "")
{
    std::istringstream in(input);
    std::ostringstream out, err;
    const int code = cli::run(args, in, out, err);
    return {code, out.str(), err.str()};
}

std::string read_file(const std::filesystem::path& p)
{
    std::ifstream f(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(f), {});
}

std::filesystem::path scratch(const std::string& name)
{
    const auto dir = std::filesystem::temp_directory_path() / "bnsv_tests";
    std::filesystem::create_directories(dir);
    return dir / name;
}

std::vector<std::pair<double, double>> parse_density(const std::string& csv)
{
    std::istringstream in(csv);
    std::string line;
    std::getline(in, line);
    CHECK(line == "x,density");
    std::vector<std::pair<double, double>> out;
    while (std::getline(in, line)) {
        const auto comma = line.find(',');
        out.emplace_back(std::stod(line.substr(0, comma)), std::stod(line.substr(comma + 1)));
    }
    return out;
}

double trapezoid(const std::vector<std::pair<double, double>>& pts)
{
    double s = 0.0;
    for (std::size_t i = 1; i < pts.size(); ++i)
        s += 0.5 * (pts[i].second + pts[i - 1].second) * (pts[i].first - pts[i - 1].first);
    return s;
}

const std::vector<std::string> model_flags = {"--theta", "1.1", "--lambda", "0.7", "--scale", "0.9",
                                              "--beta", "-0.5", "--mu", "0.03"};

std::vector<std::string> cat(std::vector<std::string> a, const std::vector<std::string>& b)
{
    a.insert(a.end(), b.begin(), b.end());
    return a;
}

} // namespace

TEST_CASE("returns CSV parsing")
{
    std::istringstream good("# comment line\nx\n0.5\n  -1.25e-3 # trailing\n\n+2\r\n");
    const auto s = cli::parse_returns_csv(good, "good.csv");
    REQUIRE(s.x.size() == 3);
    CHECK(s.x[0] == 0.5);
    CHECK(s.x[1] == -1.25e-3);
    CHECK(s.x[2] == 2.0);
    CHECK_FALSE(s.deltas.has_value());

    std::istringstream spaced("x,delta\n0.1,0.5\n0.2,1.5\n");
    const auto d = cli::parse_returns_csv(spaced, "spaced.csv");
    REQUIRE(d.deltas.has_value());
    CHECK((*d.deltas)[1] == 1.5);

    auto message = [](const std::string& text) {
        std::istringstream in(text);
        try {
            cli::parse_returns_csv(in, "bad.csv");
        } catch (const DomainError& e) {
            return std::string(e.what());
        }
        return std::string();
    };
    CHECK(message("x\n0.1\n0,2\n").find("line 3") != std::string::npos);
    CHECK(message("x\n0.1\n1,5\n").find("bad.csv") != std::string::npos);
    CHECK(message("x\nfoo\n").find("line 2") != std::string::npos);
    CHECK(message("x\n1e999\n").find("line 2") != std::string::npos);
    CHECK(message("x,delta\n0.1,-1\n").find("line 2") != std::string::npos);
    CHECK(message("y\n0.1\n").find("header") != std::string::npos);
    CHECK(message("").find("header") != std::string::npos);
    CHECK(message("x\n0,1\n").find("line 2") != std::string::npos);
}

TEST_CASE("config parsing")
{
    std::istringstream in("# model\ntheta = 1.5\n  B=200  # replications\nprior = mu=-1:1\n");
    const auto c = cli::parse_config(in, "run.cfg");
    REQUIRE(c.size() == 3);
    CHECK(c[0] == std::pair<std::string, std::string>{"theta", "1.5"});
    CHECK(c[1] == std::pair<std::string, std::string>{"B", "200"});
    CHECK(c[2] == std::pair<std::string, std::string>{"prior", "mu=-1:1"});
    std::istringstream bad("theta 1.5\n");
    CHECK_THROWS_AS(cli::parse_config(bad, "bad.cfg"), DomainError);
}

TEST_CASE("simulate: round trip, determinism, empty series and latent file")
{
    const auto path = scratch("sim.csv");
    const auto args = cat({"--seed", "21", "--out", path.string(), "simulate", "--n", "40"}, model_flags);
    REQUIRE(run_cli(args).code == 0);
    const std::string first = read_file(path), first_latent = read_file(path.string() + ".latent.csv");
    REQUIRE(run_cli(args).code == 0);
    CHECK(read_file(path) == first);
    CHECK(read_file(path.string() + ".latent.csv") == first_latent);

    // lossless at 17 significant digits
    std::istringstream in(first);
    const auto series = cli::parse_returns_csv(in, "sim.csv");
    REQUIRE(series.x.size() == 40);
    std::ostringstream again;
    cli::write_returns_csv(again, series);
    CHECK(again.str() == first);

    std::istringstream lat(first_latent);
    std::string header;
    std::getline(lat, header);
    CHECK(header == "tau,T,M,v_start");

    REQUIRE(run_cli(cat({"--seed", "21", "--out", path.string(), "simulate", "--n", "0"}, model_flags)).code == 0);
    CHECK(read_file(path) == "x\n");
    CHECK(read_file(path.string() + ".latent.csv") == "tau,T,M,v_start\n");

    const auto spaced = run_cli(cat({"--seed", "3", "simulate", "--n", "5", "--spacing-mean", "0.5"}, model_flags));
    REQUIRE(spaced.code == 0);
    std::istringstream sin(spaced.out);
    const auto s2 = cli::parse_returns_csv(sin, "spaced");
    REQUIRE(s2.deltas.has_value());
    CHECK(s2.deltas->size() == 5);
}

TEST_CASE("simulate: sample mean matches the drift plus beta times the mean variance")
{
    // E tau = theta * scale * dt under the stationary law
    const double mu = 0.03, beta = -0.5, theta = 1.1, scale = 0.9;
    const auto r = run_cli(cat({"--seed", "5", "simulate", "--n", "40000"}, model_flags));
    REQUIRE(r.code == 0);
    std::istringstream in(r.out);
    const auto s = cli::parse_returns_csv(in, "sim");
    // batch means absorb the serial correlation of tau
    const std::size_t batches = 100, len = s.x.size() / batches;
    std::vector<double> means(batches, 0.0);
    for (std::size_t b = 0; b < batches; ++b) {
        for (std::size_t i = 0; i < len; ++i) means[b] += s.x[b * len + i];
        means[b] /= static_cast<double>(len);
    }
    double m = 0.0, v = 0.0;
    for (double x : means) m += x / batches;
    for (double x : means) v += (x - m) * (x - m) / (batches - 1);
    const double se = std::sqrt(v / batches);
    CHECK(std::abs(m - (mu + beta * theta * scale)) < 4.0 * se);
}

TEST_CASE("fit: report schema, thread stability and exit codes")
{
    const auto sim = run_cli(cat({"--seed", "8", "simulate", "--n", "3"}, model_flags));
    REQUIRE(sim.code == 0);
    const std::set<std::string> keys = {"schema",      "command", "method",         "log_likelihood", "log_std_error",
                                        "likelihood",  "std_error", "replications", "seed",           "threads",
                                        "n_returns",   "exponent_source", "params", "diagnostics",    "notes",
                                        "config"};
    for (const std::string method : {"exact", "fc", "fc-q1", "general"}) {
        const auto one = run_cli(cat({"--seed", "4", "fit", "--input", "-", "--B", "1500", "--method", method}, model_flags), sim.out);
        REQUIRE(one.code == 0);
        const auto j = json::parse(one.out);
        std::set<std::string> got;
        for (const auto& [k, v] : j.items()) got.insert(k);
        CHECK(got == keys);
        CHECK(j["schema"] == "bnsv.estimate.v1");
        CHECK(j["replications"] == 1500);
        CHECK(j["config"]["method"] == method);
        const auto three =
            run_cli(cat({"--seed", "4", "--threads", "3", "fit", "--input", "-", "--B", "1500", "--method", method}, model_flags),
                    sim.out);
        REQUIRE(three.code == 0);
        CHECK(json::parse(three.out)["log_likelihood"] == j["log_likelihood"]);
    }
    const auto fc = json::parse(run_cli(cat({"fit", "--input", "-", "--method", "fc", "--B", "200"}, model_flags), sim.out).out);
    CHECK(fc["exponent_source"] == "closed_form");
    const auto quad = json::parse(
        run_cli(cat({"fit", "--input", "-", "--method", "fc", "--B", "200", "--source", "quadrature"}, model_flags), sim.out).out);
    CHECK(quad["exponent_source"] == "quadrature");

    const auto bad = run_cli({"fit", "--input", "-"}, "x\n0.1\nnot-a-number\n");
    CHECK(bad.code == 1);
    CHECK(bad.err.find("line 3") != std::string::npos);
    CHECK(run_cli({"fit", "--input", scratch("missing.csv").string()}).code == 1);
    CHECK(run_cli({"frobnicate"}).code == 1);
    CHECK(run_cli({"fit", "--input", "-", "--method", "nope"}, "x\n0.1\n").code == 1);
    CHECK(run_cli({"fit", "--input", "-", "--method", "exact", "--model", "stable"}, "x\n0.1\n").code == 1);
    CHECK(run_cli({"--help"}).code == 0);

    // all returns at the drift with kappa <= n/2: the integrand diverges
    std::string zeros = "x\n";
    for (int i = 0; i < 200; ++i) zeros += "0\n";
    const auto numeric = run_cli({"fit", "--input", "-", "--theta", "0.1", "--B", "10"}, zeros);
    CHECK(numeric.code == 2);
}

TEST_CASE("fit: exact and Fourier methods agree on two returns")
{
    const std::string data = "x\n-0.27157891887790465\n-0.81576963126846447\n";
    const auto exact = json::parse(run_cli(cat({"--seed", "1", "fit", "--input", "-", "--B", "100000"}, model_flags), data).out);
    const auto fc = json::parse(
        run_cli(cat({"--seed", "2", "fit", "--input", "-", "--B", "100000", "--method", "fc"}, model_flags), data).out);
    const double rel = std::abs(std::expm1(fc["log_likelihood"].get<double>() - exact["log_likelihood"].get<double>()));
    INFO("relative difference " << rel);
    CHECK(rel < 0.05);
}

TEST_CASE("config file: keys become flags and command-line flags win")
{
    const auto cfg = scratch("run.cfg");
    {
        std::ofstream f(cfg);
        f << "# fit settings\nB = 300\ntheta = 1.1\nmethod = fc\nseed = 9\n";
    }
    const std::string data = "x\n0.2\n-0.4\n";
    const auto from_file = json::parse(run_cli({"--config", cfg.string(), "fit", "--input", "-"}, data).out);
    CHECK(from_file["replications"] == 300);
    CHECK(from_file["seed"] == 9);
    CHECK(from_file["config"]["method"] == "fc");
    const auto overridden =
        json::parse(run_cli({"--config", cfg.string(), "--seed", "10", "fit", "--input", "-", "--B", "200"}, data).out);
    CHECK(overridden["replications"] == 200);
    CHECK(overridden["seed"] == 10);
    CHECK(overridden["config"]["method"] == "fc");
    {
        std::ofstream f(cfg);
        f << "no_such_option = 1\n";
    }
    CHECK(run_cli({"--config", cfg.string(), "fit", "--input", "-"}, data).code == 1);
    CHECK(run_cli({"--config", scratch("absent.cfg").string(), "fit", "--input", "-"}, data).code == 1);
}

TEST_CASE("bayes: posterior report")
{
    const auto sim = run_cli(cat({"--seed", "8", "simulate", "--n", "4"}, model_flags));
    const auto r = run_cli(cat({"--seed", "3", "bayes", "--input", "-", "--B", "2000", "--prior", "mu=-0.5:0.5", "--prior",
                                "theta=0.5:2"},
                               model_flags),
                           sim.out);
    REQUIRE(r.code == 0);
    const auto j = json::parse(r.out);
    CHECK(j["schema"] == "bnsv.posterior.v1");
    REQUIRE(j["parameters"].size() == 2);
    const double mu = j["parameters"][0]["mean"];
    CHECK(mu > -0.5);
    CHECK(mu < 0.5);
    const double theta = j["parameters"][1]["mean"];
    CHECK(theta > 0.5);
    CHECK(theta < 2.0);
    const auto fc = run_cli(cat({"--seed", "3", "bayes", "--input", "-", "--B", "1000", "--method", "fc", "--prior",
                                 "mu=-0.5:0.5"},
                                model_flags),
                            sim.out);
    CHECK(fc.code == 0);
    CHECK(run_cli(cat({"bayes", "--input", "-", "--prior", "mu=1:0"}, model_flags), sim.out).code == 1);
    CHECK(run_cli(cat({"bayes", "--input", "-", "--prior", "nope=0:1"}, model_flags), sim.out).code == 1);
}

TEST_CASE("density: every emitted density integrates to one")
{
    const std::vector<std::vector<std::string>> cases = {
        {"--name", "dilog-m1", "--a", "1"},
        {"--name", "dilog-m1", "--a", "2.5"},
        {"--name", "dilog-v", "--a", "0.7"},
        {"--name", "dilog-general", "--mass", "2.5", "--a", "1"},
        {"--name", "fggc-arcsine", "--theta", "0.5"},
        {"--name", "fggc-arcsine", "--theta", "0.2"},
        {"--name", "fggc-arcsine", "--theta", "3"},
        {"--name", "cr-uniform", "--mass", "1.5"},
        {"--name", "increment", "--theta", "1.3", "--lambda", "0.5"},
        {"--name", "increment", "--theta", "1", "--lambda", "1"},
        {"--name", "increment", "--theta", "0.7", "--lambda", "0.5", "--scale", "2"},
        {"--name", "price", "--theta", "1.1", "--lambda", "0.7", "--beta", "-0.5", "--v-start", "0.8", "--points", "801"},
    };
    for (const auto& c : cases) {
        auto args = cat({"density"}, c);
        const auto r = run_cli(args);
        REQUIRE(r.code == 0);
        const auto pts = parse_density(r.out);
        INFO(c[1]);
        CHECK(std::abs(trapezoid(pts) - 1.0) < 1e-4);
    }
    const auto m1 = parse_density(run_cli({"density", "--name", "dilog-m1", "--a", "1", "--points", "11"}).out);
    for (const auto& [x, d] : m1) CHECK(d == doctest::Approx(dilog_density_m1(x, 1.0)).epsilon(1e-15));
    const auto flat = parse_density(run_cli({"density", "--name", "fggc-arcsine", "--theta", "0.5", "--points", "101"}).out);
    for (const auto& [x, d] : flat) CHECK(d == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(run_cli({"density", "--name", "unknown"}).code == 1);
}

TEST_CASE("sample-mean: support and reproducibility")
{
    const std::vector<std::string> args = {"--seed", "6", "sample-mean", "--base", "f_a", "--a", "2", "--mass", "1.5", "--count", "300"};
    const auto a = run_cli(args), b = run_cli(args);
    REQUIRE(a.code == 0);
    CHECK(a.out == b.out);
    std::istringstream in(a.out);
    std::string line;
    std::getline(in, line);
    CHECK(line == "m");
    int rows = 0;
    while (std::getline(in, line)) {
        const double m = std::stod(line);
        CHECK(m > std::exp(-2.0));
        CHECK(m < 1.0);
        ++rows;
    }
    CHECK(rows == 300);
    const auto t3 = run_cli({"--seed", "6", "--threads", "3", "sample-mean", "--base", "f_a", "--a", "2", "--mass", "1.5",
                             "--count", "300"});
    CHECK(t3.out == a.out);
    CHECK(run_cli({"sample-mean", "--base", "nope"}).code == 1);
}

TEST_CASE("command probes repeat byte for byte")
{
    for (const auto& p : cli::command_probes(2)) {
        INFO(p.name);
        const auto first = p.run();
        CHECK(first.rfind("exit 0", 0) == 0);
        CHECK(p.run() == first);
    }
}
