#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace bns {

// Result of a Monte Carlo likelihood or posterior computation
struct EstimateReport {
    std::string method;
    double value = 0.0;
    double std_error = 0.0;
    double log_value = 0.0;
    double log_std_error = 0.0;
    std::size_t replications = 0;
    std::uint64_t seed = 0;
    int threads = 1;
    std::map<std::string, double> params;
    std::map<std::string, double> diagnostics;
    std::vector<std::string> notes;
};

} // namespace bns
