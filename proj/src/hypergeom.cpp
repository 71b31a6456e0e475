#include "hgl/hypergeom.hpp"

#include <cmath>
#include <string>

#include "hgl/errors.hpp"

namespace hgl {

void validate(const HypergeomParams& params) {
    const long long n = params.population, k = params.correct, b = params.batch;
    if (k < 0 || k > n)
        throw usage_error("hypergeometric: need 0 <= K <= N, got K=" + std::to_string(k) +
                          " N=" + std::to_string(n));
    if (b < 1 || b > n)
        throw usage_error("hypergeometric: need 1 <= B <= N, got B=" + std::to_string(b) +
                          " N=" + std::to_string(n));
}

double log_choose(long long n, long long k) {
    return std::lgamma(static_cast<double>(n + 1)) - std::lgamma(static_cast<double>(k + 1)) -
           std::lgamma(static_cast<double>(n - k + 1));
}

long long correct_count(long long population, double p) {
    return std::llround(static_cast<double>(population) * p);
}

double pmf(const HypergeomParams& params, long long k) {
    validate(params);
    const long long n = params.population, kk = params.correct, b = params.batch;
    const long long lo = std::max(0LL, b - (n - kk));
    const long long hi = std::min(b, kk);
    if (k < lo || k > hi) return 0.0;
    // Direct factorials overflow for realistic N (thousands), so each term is
    // assembled in log space and exponentiated on its own.
    const double lp = log_choose(kk, k) + log_choose(n - kk, b - k) - log_choose(n, b);
    return std::exp(lp);
}

BatchWeights tail_weights(const HypergeomParams& params) {
    validate(params);
    const long long n = params.population, kk = params.correct, b = params.batch;
    const long long lo = std::max(0LL, b - (n - kk));
    const long long hi = std::min(b, kk);
    BatchWeights w;
    w.q.resize(static_cast<std::size_t>(b) + 1, 0.0);
    // Per-term lgamma leaves ~1e-11 relative error at large N, which a
    // B-term tail sum amplifies past the 1e-9 identity budget. Build the pmf
    // by the ratio recurrence q_{k+1}/q_k from the mode outward (unimodal, so
    // products only shrink) and normalize; agrees with pmf() to ~1e-11.
    const long long mode = std::clamp(
        static_cast<long long>((static_cast<double>(b + 1) * static_cast<double>(kk + 1)) /
                               static_cast<double>(n + 2)),
        lo, hi);
    auto ratio = [&](long long k) { // q_{k+1} / q_k
        return (static_cast<double>(kk - k) * static_cast<double>(b - k)) /
               (static_cast<double>(k + 1) * static_cast<double>(n - kk - b + k + 1));
    };
    w.q[static_cast<std::size_t>(mode)] = 1.0;
    for (long long k = mode + 1; k <= hi; ++k)
        w.q[static_cast<std::size_t>(k)] = w.q[static_cast<std::size_t>(k - 1)] * ratio(k - 1);
    for (long long k = mode - 1; k >= lo; --k)
        w.q[static_cast<std::size_t>(k)] = w.q[static_cast<std::size_t>(k + 1)] / ratio(k);
    double total = 0.0;
    for (long long k = lo; k <= hi; ++k) total += w.q[static_cast<std::size_t>(k)];
    for (long long k = lo; k <= hi; ++k) w.q[static_cast<std::size_t>(k)] /= total;
    // omega_i = sum_{k=i}^{B} q_k, accumulated from the tail so each weight is
    // a sum of same-signed terms. The sums can land a few ulps above 1; omega
    // is a probability, so pin it back into [0, 1].
    w.omega.resize(static_cast<std::size_t>(b), 0.0);
    double tail = 0.0;
    for (long long i = b; i >= 1; --i) {
        tail += w.q[static_cast<std::size_t>(i)];
        w.omega[static_cast<std::size_t>(i - 1)] = std::min(1.0, std::max(0.0, tail));
    }
    return w;
}

} // namespace hgl
