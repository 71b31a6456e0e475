#pragma once

#include <cstdint>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "hgl/hypergeom.hpp"
#include "hgl/model.hpp"
#include "hgl/noise.hpp"

namespace hgl {

enum class LossKind { hgl, instance_em, xr, naive };

// Accepts "hgl", "em"/"instance_em", "xr", "naive"; usage_error otherwise.
LossKind parse_loss_kind(const std::string& name);
std::string loss_kind_name(LossKind kind);

struct TrainConfig {
    int batch_size = 150;
    double learning_rate = 1e-3;
    int epochs = 20;
    std::uint64_t seed = 0;
    LossKind loss = LossKind::hgl;
    int dim = 32;
    int min_count = 2;
    bool use_context = false;
    // Rank batches by confidences snapshotted at epoch start instead of the
    // default per-batch self-ranking.
    bool epoch_frozen_ranking = false;
    // Instance-EM targets from the epoch-start snapshot. The default
    // (detached current confidences) makes every instance sit exactly at its
    // own target, so the EM gradient vanishes and training is a no-op; the
    // frozen variant gives the baseline real self-training dynamics.
    bool em_epoch_frozen = false;
};

struct AdamState {
    TensorSet m;
    TensorSet v;
    long long step = 0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

AdamState make_adam_state(const DenoiserModel& model);

// Standard bias-corrected dense update; bumps model.version. A non-finite
// gradient aborts the step with numeric_error before touching any parameter.
void adam_step(DenoiserModel& model, const GradientSet& grads, AdamState& state,
               double lr);

// Positions into `confidence` sorted by confidence descending; ties broken
// by ascending pool_index (the instance's index within its training pool).
std::vector<std::size_t> rank_order(const std::vector<double>& confidence,
                                    const std::vector<std::size_t>& pool_index);

struct LossResult {
    double loss = 0.0;
    std::vector<double> dloss_df; // aligned with the f vector passed in
    long long clamp_events = 0;
};

// f_ranked must be ordered descending to line up with omega (omega[0] is the
// weight of the most confident instance). Confidences outside
// [1e-7, 1-1e-7] are clamped before the logs; each occurrence is counted.
LossResult hgl_loss(const std::vector<double>& omega,
                    const std::vector<double>& f_ranked);

// Cross-entropy toward detached targets; zero gradient wherever f == target.
LossResult instance_em_loss(const std::vector<double>& f_live,
                            const std::vector<double>& f_target);

// KL(Bernoulli(p) || Bernoulli(mean f)) with the batch mean clamped.
LossResult xr_loss(const std::vector<double>& f, double p);

// One instance of one denoising pool: a span in a sentence owned elsewhere
// (the corpus outlives training).
struct PoolItem {
    const Sentence* sentence = nullptr;
    Span span;
};

struct TrainPool {
    std::vector<PoolItem> items;
    double p = 1.0;      // accuracy: fraction of the pool that is correct
    double lambda = 1.0; // weight of this pool's loss (pool 0 is implicitly 1)
};

struct EpochLog {
    int epoch = 0;
    double mean_loss = 0.0;
    // Mean per-batch expected positive mass: sum(omega) for hgl/naive, the
    // target sum for instance-EM, batch * p for XR.
    double mean_omega_sum = 0.0;
    long long clamp_events = 0;
    double seconds = 0.0;
};

struct TrainResult {
    DenoiserModel model;
    std::vector<EpochLog> log;
};

// Shared engine behind train() and joint blocking training. Pool 0 drives
// the epoch structure (seeded shuffle, contiguous batches, partial final
// batch with recomputed weights); every further pool contributes one batch
// per step from its own independently seeded shuffle cycle, and its loss
// enters the step total scaled by its lambda (lambda 0 skips the pool
// entirely, so the trajectory equals single-pool training bit for bit).
// One log line per epoch goes to log_stream when given.
TrainResult train_pools(const Vocab& vocab, const std::string& entity_type,
                        const std::vector<TrainPool>& pools, const TrainConfig& cfg,
                        std::ostream* log_stream = nullptr);

// One denoiser per entity type appearing in `instances`; pool accuracy from
// the profile (usage_error if a type is missing). Vocab is built from the
// corpus once and shared.
std::map<std::string, TrainResult> train(const Corpus& corpus,
                                         const std::vector<Instance>& instances,
                                         const NoiseProfile& profile,
                                         const TrainConfig& cfg,
                                         std::ostream* log_stream = nullptr);

} // namespace hgl
