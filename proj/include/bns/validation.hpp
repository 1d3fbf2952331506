#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

namespace bns::validation {

enum class Level { fast, full };

std::string to_string(Level level);
Level level_from_string(const std::string& name);

struct CriterionResult {
    int id = 0;
    std::string name;
    bool pass = false;
    double statistic = 0.0;
    double threshold = 0.0;
    std::string comparison;  // how statistic is held against threshold, e.g. "min p-value > threshold"
    std::string details;
    double seconds = 0.0;
    std::map<std::string, double> measurements;
};

// a command whose output must be byte-identical when repeated
struct ReproducibilityProbe {
    std::string name;
    std::function<std::string()> run;
};

struct Config {
    std::uint64_t seed = 20240611;
    int threads = 1;
    // extra probes for the reproducibility criterion, run after the built-in ones
    std::vector<ReproducibilityProbe> probes;
};

struct Report {
    Level level = Level::fast;
    std::uint64_t seed = 0;
    int threads = 1;
    std::vector<CriterionResult> results;

    bool all_pass() const;
};

struct CriterionInfo {
    int id;
    std::string name;
    bool in_fast;  // deterministic identity, part of the fast level
};

const std::vector<CriterionInfo>& criteria();

// reduced sample sizes at the fast level; full sizes otherwise
CriterionResult run_criterion(int id, Level level, const Config& cfg);
Report run(Level level, const Config& cfg);

} // namespace bns::validation
