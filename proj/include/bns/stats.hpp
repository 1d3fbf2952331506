#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace bns::stats {

struct KsResult {
    double statistic = 0.0;
    double p_value = 0.0;
};

// asymptotic Kolmogorov tail probability with the Stephens small-sample correction
double kolmogorov_p_value(double statistic, double effective_n);

KsResult ks_test(std::vector<double> sample, const std::function<double(double)>& cdf);
KsResult ks_test_two_sample(std::vector<double> a, std::vector<double> b);

struct MeanEstimate {
    double mean = 0.0;
    double std_error = 0.0;
};

MeanEstimate mean_estimate(std::span<const double> values);

// first three cumulants with asymptotic standard errors
struct CumulantEstimate {
    std::array<double, 3> value{};
    std::array<double, 3> std_error{};
};

CumulantEstimate cumulant_estimate(std::span<const double> values);

// Mean of exp(log_values) reported on the log scale. The reduction runs in
// index order so the result does not depend on how the values were produced.
struct LogMeanEstimate {
    double log_mean = 0.0;
    double relative_std_error = 0.0;
    double effective_sample_size = 0.0;
};

LogMeanEstimate log_mean_exp(std::span<const double> log_values);

// Same for signed terms sign[i] * exp(log_abs[i]).
// Throws NumericError when the mean is not positive.
LogMeanEstimate signed_log_mean_exp(std::span<const double> log_abs, std::span<const signed char> sign);

} // namespace bns::stats
