#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <queue>
#include <vector>

namespace bns::quad {

struct Options {
    double abs_tol = 1e-14;
    double rel_tol = 1e-12;
    int max_subdivisions = 4000;
};

struct Result {
    double value = 0.0;
    double abs_error = 0.0;
    int evaluations = 0;
    bool converged = true;
};

// Gauss-Legendre nodes and weights on [-1, 1]
struct GaussLegendreRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

const GaussLegendreRule& gauss_legendre(int n);

template <class F>
double gauss_legendre_integrate(F&& f, double a, double b, int n = 64)
{
    const auto& rule = gauss_legendre(n);
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (b + a);
    double sum = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i)
        sum += rule.weights[i] * f(mid + half * rule.nodes[i]);
    return sum * half;
}

namespace detail {

inline constexpr std::array<double, 11> xgk = {
    0.995657163025808080735527280689003, 0.973906528517171720077964012084452,
    0.930157491355708226001207180059508, 0.865063366688984510732096688423493,
    0.780817726586416897063717578345042, 0.679409568299024406234327365114874,
    0.562757134668604683339000099272694, 0.433395394129247190799265943165784,
    0.294392862701460198131126603103866, 0.148874338981631210884826001129720,
    0.0};
inline constexpr std::array<double, 11> wgk = {
    0.011694638867371874278064396062192, 0.032558162307964727478818972459390,
    0.054755896574351996031381300244580, 0.075039674810919952767043140916190,
    0.093125454583697605535065465083366, 0.109387158802297641899210590325805,
    0.123491976262065851077208980306139, 0.134709217311473325928054001771707,
    0.142775938577060080797094273138717, 0.147739104901338491374841515972068,
    0.149445554002916905664936468389821};
inline constexpr std::array<double, 5> wg = {
    0.066671344308688137593568809893332, 0.149451349150580593145776339657697,
    0.219086362515982043995534934228163, 0.269266719309996355091226921569469,
    0.295524224714752870173892994651338};

struct Segment {
    double a, b, value, error;
    bool operator<(const Segment& o) const { return error < o.error; }
};

template <class F>
Segment kronrod21(F& f, double a, double b)
{
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    const double fc = f(mid);
    double resk = wgk[10] * fc;
    double resg = 0.0;
    for (int j = 0; j < 10; ++j) {
        const double dx = half * xgk[j];
        const double f1 = f(mid - dx);
        const double f2 = f(mid + dx);
        resk += wgk[j] * (f1 + f2);
        if (j % 2 == 1) resg += wg[j / 2] * (f1 + f2);
    }
    return {a, b, resk * half, std::abs((resk - resg) * half)};
}

} // namespace detail

// Globally adaptive Gauss-Kronrod (10/21) integration on a finite interval.
template <class F>
Result integrate(F&& f, double a, double b, const Options& opt = {})
{
    Result out;
    if (a == b) return out;
    double sign = 1.0;
    if (b < a) {
        std::swap(a, b);
        sign = -1.0;
    }
    std::priority_queue<detail::Segment> heap;
    auto first = detail::kronrod21(f, a, b);
    out.evaluations = 21;
    heap.push(first);
    double total = first.value;
    double error = first.error;
    int splits = 0;
    std::vector<detail::Segment> frozen;
    while (!heap.empty()) {
        if (error <= std::max(opt.abs_tol, opt.rel_tol * std::abs(total))) break;
        if (splits >= opt.max_subdivisions) {
            out.converged = false;
            break;
        }
        auto seg = heap.top();
        heap.pop();
        const double mid = 0.5 * (seg.a + seg.b);
        if (!(mid > seg.a && mid < seg.b)) {
            frozen.push_back(seg);
            if (heap.empty()) {
                out.converged = false;
                break;
            }
            continue;
        }
        auto left = detail::kronrod21(f, seg.a, mid);
        auto right = detail::kronrod21(f, mid, seg.b);
        out.evaluations += 42;
        ++splits;
        total += left.value + right.value - seg.value;
        error += left.error + right.error - seg.error;
        heap.push(left);
        heap.push(right);
    }
    // re-sum to remove drift from incremental updates
    double sum = 0.0, err = 0.0;
    while (!heap.empty()) {
        sum += heap.top().value;
        err += heap.top().error;
        heap.pop();
    }
    for (const auto& s : frozen) {
        sum += s.value;
        err += s.error;
    }
    out.value = sign * sum;
    out.abs_error = err;
    if (!std::isfinite(out.value)) out.converged = false;
    return out;
}

// Integrate over a list of breakpoints, summing the pieces.
template <class F>
Result integrate_pieces(F&& f, const std::vector<double>& points, const Options& opt = {})
{
    Result out;
    for (std::size_t i = 0; i + 1 < points.size(); ++i) {
        auto r = integrate(f, points[i], points[i + 1], opt);
        out.value += r.value;
        out.abs_error += r.abs_error;
        out.evaluations += r.evaluations;
        out.converged = out.converged && r.converged;
    }
    return out;
}

} // namespace bns::quad
