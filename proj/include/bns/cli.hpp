#pragma once

#include "bns/validation.hpp"

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace bns::cli {

enum ExitCode : int { exit_ok = 0, exit_usage = 1, exit_numeric = 2, exit_validation = 3 };

// Returns read from CSV: header `x` or `x,delta`
struct ReturnsSeries {
    std::vector<double> x;
    std::optional<std::vector<double>> deltas;
};

// throws DomainError naming the source and line on malformed input
ReturnsSeries parse_returns_csv(std::istream& in, const std::string& source);
void write_returns_csv(std::ostream& out, const ReturnsSeries& series);

// flat `key = value` lines, `#` comments; repeated keys accumulate in order
std::vector<std::pair<std::string, std::string>> parse_config(std::istream& in, const std::string& source);

// %.17g
std::string format_double(double v);

// Runs one command line (without the program name). `in` serves `--input -`.
int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err);

// probes of the reproducibility criterion that exercise the commands in-process
std::vector<validation::ReproducibilityProbe> command_probes(int threads);

} // namespace bns::cli
