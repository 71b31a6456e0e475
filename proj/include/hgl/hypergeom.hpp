#pragma once

#include <vector>

namespace hgl {

// Drawing B instances without replacement from a pool of N weakly-labeled
// instances of which K are correctly labeled; S = number of correct
// instances in the draw is hypergeometric.
struct HypergeomParams {
    long long population = 0; // N
    long long correct = 0;    // K
    long long batch = 0;      // B
};

// q[k]     = P(S = k) for k = 0..B (zero outside the support).
// omega[i] = P(S >= i+1) for ranks i+1 = 1..B: the supervision weight given
//            to the instance ranked (i+1)-th by confidence.
struct BatchWeights {
    std::vector<double> q;
    std::vector<double> omega;
};

// Throws usage_error unless 0 <= K <= N and 1 <= B <= N.
void validate(const HypergeomParams& params);

// ln C(n, k); 0 for k < 0 or k > n handled by the callers (support checks).
double log_choose(long long n, long long k);

// K = round(N * p), half up.
long long correct_count(long long population, double p);

// P(S = k) evaluated in log space via lgamma and exponentiated per term.
// k outside [max(0, B-(N-K)), min(B, K)] returns 0 so callers can sum 0..B.
double pmf(const HypergeomParams& params, long long k);

// Full pmf vector plus the tail weights omega_i = sum_{k>=i} q_k.
BatchWeights tail_weights(const HypergeomParams& params);

} // namespace hgl
