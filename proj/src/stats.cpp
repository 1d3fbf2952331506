#include "bns/stats.hpp"

#include "bns/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace bns::stats {

double kolmogorov_p_value(double statistic, double effective_n)
{
    const double sn = std::sqrt(effective_n);
    const double lambda = (sn + 0.12 + 0.11 / sn) * statistic;
    if (lambda < 0.2) return 1.0;
    double sum = 0.0;
    for (int k = 1; k <= 200; ++k) {
        const double term = std::exp(-2.0 * k * k * lambda * lambda);
        sum += (k % 2 == 1 ? term : -term);
        if (term < 1e-300 || term < 1e-17 * std::abs(sum)) break;
    }
    return std::clamp(2.0 * sum, 0.0, 1.0);
}

KsResult ks_test(std::vector<double> sample, const std::function<double(double)>& cdf)
{
    require(!sample.empty(), "ks_test needs a non-empty sample");
    std::sort(sample.begin(), sample.end());
    const double n = static_cast<double>(sample.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sample.size(); ++i) {
        const double f = cdf(sample[i]);
        d = std::max({d, (i + 1) / n - f, f - i / n});
    }
    return {d, kolmogorov_p_value(d, n)};
}

KsResult ks_test_two_sample(std::vector<double> a, std::vector<double> b)
{
    require(!a.empty() && !b.empty(), "ks_test needs non-empty samples");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        const double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= x) ++i;
        while (j < b.size() && b[j] <= x) ++j;
        d = std::max(d, std::abs(i / na - j / nb));
    }
    return {d, kolmogorov_p_value(d, na * nb / (na + nb))};
}

MeanEstimate mean_estimate(std::span<const double> values)
{
    require(values.size() >= 2, "mean_estimate needs at least two values");
    const double n = static_cast<double>(values.size());
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= n;
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    return {mean, std::sqrt(ss / (n - 1.0) / n)};
}

CumulantEstimate cumulant_estimate(std::span<const double> values)
{
    require(values.size() >= 10, "cumulant_estimate needs at least ten values");
    const double n = static_cast<double>(values.size());
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= n;
    std::array<double, 7> m{};
    for (double v : values) {
        const double d = v - mean;
        double p = d * d;
        for (int k = 2; k <= 6; ++k) {
            m[k] += p;
            p *= d;
        }
    }
    for (int k = 2; k <= 6; ++k) m[k] /= n;
    CumulantEstimate out;
    out.value = {mean, m[2] * n / (n - 1.0), m[3] * n * n / ((n - 1.0) * (n - 2.0))};
    out.std_error[0] = std::sqrt(m[2] / n);
    out.std_error[1] = std::sqrt(std::max(0.0, m[4] - m[2] * m[2]) / n);
    out.std_error[2] =
        std::sqrt(std::max(0.0, m[6] - m[3] * m[3] - 6.0 * m[4] * m[2] + 9.0 * m[2] * m[2] * m[2]) / n);
    return out;
}

LogMeanEstimate log_mean_exp(std::span<const double> log_values)
{
    std::vector<signed char> sign(log_values.size(), 1);
    return signed_log_mean_exp(log_values, sign);
}

LogMeanEstimate signed_log_mean_exp(std::span<const double> log_abs, std::span<const signed char> sign)
{
    require(log_abs.size() == sign.size() && !log_abs.empty(), "signed_log_mean_exp: size mismatch");
    double top = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < log_abs.size(); ++i)
        if (sign[i] != 0) top = std::max(top, log_abs[i]);
    if (!std::isfinite(top)) throw NumericError("Monte Carlo estimate is zero or not finite");
    const double n = static_cast<double>(log_abs.size());
    double sum = 0.0, sum_abs = 0.0, sum_sq = 0.0;
    for (std::size_t i = 0; i < log_abs.size(); ++i) {
        if (sign[i] == 0) continue;
        const double w = std::exp(log_abs[i] - top);
        sum += sign[i] > 0 ? w : -w;
        sum_abs += w;
        sum_sq += w * w;
    }
    const double mean = sum / n;
    if (!(mean > 0.0)) throw NumericError("Monte Carlo estimate is not positive");
    double var = 0.0;
    for (std::size_t i = 0; i < log_abs.size(); ++i) {
        const double w = sign[i] == 0 ? 0.0 : (sign[i] > 0 ? 1.0 : -1.0) * std::exp(log_abs[i] - top);
        var += (w - mean) * (w - mean);
    }
    var /= std::max(1.0, n - 1.0);
    LogMeanEstimate out;
    out.log_mean = top + std::log(mean);
    out.relative_std_error = std::sqrt(var / n) / mean;
    out.effective_sample_size = sum_sq > 0.0 ? sum_abs * sum_abs / sum_sq : 0.0;
    return out;
}

} // namespace bns::stats
