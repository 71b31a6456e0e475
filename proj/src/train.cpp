#include "hgl/train.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "hgl/errors.hpp"
#include "hgl/rng.hpp"

namespace hgl {

namespace {

// Confidences are clamped into [kFloor, 1-kFloor] before the logs; each
// occurrence is counted into the run log.
constexpr double kFloor = 1e-7;

double clamp_conf(double f, long long& events) {
    if (f < kFloor) {
        ++events;
        return kFloor;
    }
    if (f > 1.0 - kFloor) {
        ++events;
        return 1.0 - kFloor;
    }
    return f;
}

bool finite_all(const std::vector<double>& xs) {
    return std::all_of(xs.begin(), xs.end(),
                       [](double x) { return std::isfinite(x); });
}

bool grads_finite(const GradientSet& g) {
    return finite_all(g.emb) && finite_all(g.attn_w) && std::isfinite(g.attn_b) &&
           finite_all(g.w1) && finite_all(g.b1) && finite_all(g.w2) &&
           std::isfinite(g.b2);
}

// Applies fn to every (param, grad, m, v) scalar quadruple.
template <typename F>
void zip_tensors(TensorSet& p, const TensorSet& g, TensorSet& m, TensorSet& v, F fn) {
    auto vec = [&fn](std::vector<double>& pv, const std::vector<double>& gv,
                     std::vector<double>& mv, std::vector<double>& vv) {
        if (gv.size() != pv.size() || mv.size() != pv.size() || vv.size() != pv.size())
            throw usage_error("adam_step: tensor shapes do not match the model");
        for (std::size_t i = 0; i < pv.size(); ++i) fn(pv[i], gv[i], mv[i], vv[i]);
    };
    vec(p.emb, g.emb, m.emb, v.emb);
    vec(p.attn_w, g.attn_w, m.attn_w, v.attn_w);
    fn(p.attn_b, g.attn_b, m.attn_b, v.attn_b);
    vec(p.w1, g.w1, m.w1, v.w1);
    vec(p.b1, g.b1, m.b1, v.b1);
    vec(p.w2, g.w2, m.w2, v.w2);
    fn(p.b2, g.b2, m.b2, v.b2);
}

} // namespace

LossKind parse_loss_kind(const std::string& name) {
    if (name == "hgl") return LossKind::hgl;
    if (name == "em" || name == "instance_em") return LossKind::instance_em;
    if (name == "xr") return LossKind::xr;
    if (name == "naive") return LossKind::naive;
    throw usage_error("unknown loss kind: " + name +
                      " (expected hgl, instance_em, xr, or naive)");
}

std::string loss_kind_name(LossKind kind) {
    switch (kind) {
    case LossKind::hgl: return "hgl";
    case LossKind::instance_em: return "instance_em";
    case LossKind::xr: return "xr";
    case LossKind::naive: return "naive";
    }
    throw usage_error("loss_kind_name: invalid kind");
}

AdamState make_adam_state(const DenoiserModel& model) {
    AdamState state;
    state.m = model.zeros_like();
    state.v = model.zeros_like();
    return state;
}

void adam_step(DenoiserModel& model, const GradientSet& grads, AdamState& state,
               double lr) {
    if (!(lr > 0.0)) throw usage_error("adam_step: learning rate must be > 0");
    if (!grads_finite(grads))
        throw numeric_error("adam_step: non-finite gradient, step aborted");
    state.step += 1;
    const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
    zip_tensors(model.p, grads, state.m, state.v,
                [&](double& p, const double& g, double& m, double& v) {
                    m = state.beta1 * m + (1.0 - state.beta1) * g;
                    v = state.beta2 * v + (1.0 - state.beta2) * g * g;
                    p -= lr * (m / bc1) / (std::sqrt(v / bc2) + state.eps);
                });
    model.version += 1;
}

std::vector<std::size_t> rank_order(const std::vector<double>& confidence,
                                    const std::vector<std::size_t>& pool_index) {
    if (confidence.size() != pool_index.size())
        throw usage_error("rank_order: confidence and index counts differ");
    std::vector<std::size_t> order(confidence.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (confidence[a] != confidence[b]) return confidence[a] > confidence[b];
        return pool_index[a] < pool_index[b];
    });
    return order;
}

LossResult hgl_loss(const std::vector<double>& omega,
                    const std::vector<double>& f_ranked) {
    if (omega.empty() || omega.size() != f_ranked.size())
        throw usage_error("hgl_loss: omega and confidences must be non-empty and equal-sized");
    const double b = static_cast<double>(omega.size());
    LossResult res;
    res.dloss_df.resize(omega.size());
    double total = 0.0;
    for (std::size_t i = 0; i < omega.size(); ++i) {
        const double w = omega[i];
        const double f = clamp_conf(f_ranked[i], res.clamp_events);
        total += w * std::log(f) + (1.0 - w) * std::log(1.0 - f);
        res.dloss_df[i] = -(w / f - (1.0 - w) / (1.0 - f)) / b;
    }
    res.loss = -total / b;
    return res;
}

LossResult instance_em_loss(const std::vector<double>& f_live,
                            const std::vector<double>& f_target) {
    if (f_live.empty() || f_live.size() != f_target.size())
        throw usage_error("instance_em_loss: live and target confidences must be "
                          "non-empty and equal-sized");
    const double b = static_cast<double>(f_live.size());
    LossResult res;
    res.dloss_df.resize(f_live.size());
    double total = 0.0;
    for (std::size_t i = 0; i < f_live.size(); ++i) {
        const double t = f_target[i];
        const double f = clamp_conf(f_live[i], res.clamp_events);
        total += t * std::log(f) + (1.0 - t) * std::log(1.0 - f);
        res.dloss_df[i] = -(t / f - (1.0 - t) / (1.0 - f)) / b;
    }
    res.loss = -total / b;
    return res;
}

LossResult xr_loss(const std::vector<double>& f, double p) {
    if (f.empty()) throw usage_error("xr_loss: batch must be non-empty");
    if (!(p >= 0.0 && p <= 1.0)) throw usage_error("xr_loss: p must be in [0, 1]");
    const double b = static_cast<double>(f.size());
    LossResult res;
    res.dloss_df.resize(f.size());
    double mean = 0.0;
    for (double x : f) mean += x;
    mean /= b;
    const double phat = clamp_conf(mean, res.clamp_events);
    double loss = 0.0; // 0 * ln 0 contributes nothing at p = 0 or p = 1
    if (p > 0.0) loss += p * std::log(p / phat);
    if (p < 1.0) loss += (1.0 - p) * std::log((1.0 - p) / (1.0 - phat));
    res.loss = loss;
    const double g = -(p / phat - (1.0 - p) / (1.0 - phat)) / b;
    std::fill(res.dloss_df.begin(), res.dloss_df.end(), g);
    return res;
}

namespace {

// Per-pool training state: marked instances, the shuffle cycle driven by the
// pool's own rng stream (so adding or removing side pools never perturbs
// another pool's batches), and cached hypergeometric weights per batch size.
struct PoolRuntime {
    const TrainPool* spec = nullptr;
    std::vector<MarkedInstance> marked;
    long long correct = 0; // K = round(N * p)
    std::map<int, std::vector<double>> omega_by_size;
    std::map<int, std::vector<double>> ones_by_size;
    Rng rng{0};
    std::vector<std::size_t> cycle;
    std::size_t cursor = 0;
    std::vector<double> frozen; // epoch-start confidences when snapshotting

    const std::vector<double>& weights(int batch, bool naive) {
        if (naive) {
            auto [it, inserted] = ones_by_size.try_emplace(batch);
            if (inserted) it->second.assign(static_cast<std::size_t>(batch), 1.0);
            return it->second;
        }
        auto [it, inserted] = omega_by_size.try_emplace(batch);
        if (inserted) {
            const HypergeomParams params{static_cast<long long>(marked.size()),
                                         correct, batch};
            it->second = tail_weights(params).omega;
        }
        return it->second;
    }

    // Next slice of the shuffle cycle, reshuffling when exhausted. Partial
    // slices happen at cycle boundaries and get recomputed weights.
    std::vector<std::size_t> next_batch(int batch) {
        if (cursor >= cycle.size()) {
            rng.shuffle(cycle);
            cursor = 0;
        }
        const std::size_t take =
            std::min(static_cast<std::size_t>(batch), cycle.size() - cursor);
        std::vector<std::size_t> positions(cycle.begin() + static_cast<std::ptrdiff_t>(cursor),
                                           cycle.begin() + static_cast<std::ptrdiff_t>(cursor + take));
        cursor += take;
        return positions;
    }
};

} // namespace

TrainResult train_pools(const Vocab& vocab, const std::string& entity_type,
                        const std::vector<TrainPool>& pools, const TrainConfig& cfg,
                        std::ostream* log_stream) {
    if (pools.empty()) throw usage_error("train_pools: at least one pool is required");
    if (cfg.batch_size < 1) throw usage_error("train_pools: batch_size must be >= 1");
    if (!(cfg.learning_rate > 0.0))
        throw usage_error("train_pools: learning rate must be > 0");
    if (cfg.epochs < 0) throw usage_error("train_pools: epochs must be >= 0");

    TrainResult result;
    result.model = init_model(vocab, cfg.dim, entity_type, cfg.seed, cfg.use_context);
    DenoiserModel& model = result.model;
    AdamState adam = make_adam_state(model);

    std::vector<PoolRuntime> rts(pools.size());
    for (std::size_t pi = 0; pi < pools.size(); ++pi) {
        const TrainPool& pool = pools[pi];
        PoolRuntime& rt = rts[pi];
        rt.spec = &pool;
        if (pool.items.empty())
            throw usage_error("train_pools: pool " + std::to_string(pi) + " is empty");
        if (!(pool.p >= 0.0 && pool.p <= 1.0))
            throw usage_error("train_pools: pool accuracy must be in [0, 1]");
        rt.marked.reserve(pool.items.size());
        for (const PoolItem& item : pool.items) {
            if (item.sentence == nullptr)
                throw usage_error("train_pools: pool item without a sentence");
            rt.marked.push_back(mark_instance(model, *item.sentence, item.span));
        }
        rt.correct = correct_count(static_cast<long long>(pool.items.size()), pool.p);
        rt.rng = Rng(cfg.seed ^ (0x9e3779b97f4a7c15ULL * (pi + 1)));
        rt.cycle.resize(pool.items.size());
        std::iota(rt.cycle.begin(), rt.cycle.end(), std::size_t{0});
        rt.cursor = rt.cycle.size();
        rt.frozen.assign(pool.items.size(), 0.0);
    }

    const bool need_frozen =
        cfg.epoch_frozen_ranking ||
        (cfg.loss == LossKind::instance_em && cfg.em_epoch_frozen);
    const bool ranked_loss = cfg.loss == LossKind::hgl || cfg.loss == LossKind::naive;
    const long long steps_per_epoch =
        (static_cast<long long>(rts[0].marked.size()) + cfg.batch_size - 1) /
        cfg.batch_size;

    GradientSet grads = model.zeros_like();
    std::vector<ForwardCache> caches;

    const bool em_frozen =
        cfg.loss == LossKind::instance_em && cfg.em_epoch_frozen;

    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        const auto tick = std::chrono::steady_clock::now();
        if (em_frozen && epoch == 1) {
            // No previous model exists yet, so the first epoch's target is
            // the weak positive label itself; self-targets take over from
            // epoch 2. Without this bootstrap every instance sits exactly at
            // its own target from the start and nothing ever moves.
            for (PoolRuntime& rt : rts) rt.frozen.assign(rt.marked.size(), 1.0);
        } else if (need_frozen) {
            ForwardCache scratch;
            for (PoolRuntime& rt : rts)
                for (std::size_t i = 0; i < rt.marked.size(); ++i)
                    rt.frozen[i] = encode_and_score(model, rt.marked[i], scratch);
        }
        // Pool 0 defines the epoch: a fresh shuffle partitioned into
        // steps_per_epoch contiguous batches; side pools cycle independently.
        rts[0].rng.shuffle(rts[0].cycle);
        rts[0].cursor = 0;

        double loss_sum = 0.0;
        double mass_sum = 0.0;
        long long clamp_events = 0;

        for (long long step = 0; step < steps_per_epoch; ++step) {
            grads.zero();
            double step_loss = 0.0;
            for (std::size_t pi = 0; pi < rts.size(); ++pi) {
                PoolRuntime& rt = rts[pi];
                const double lambda = pi == 0 ? 1.0 : rt.spec->lambda;
                if (lambda == 0.0) continue;

                const std::vector<std::size_t> positions = rt.next_batch(cfg.batch_size);
                const std::size_t bn = positions.size();
                caches.resize(bn);
                std::vector<double> f(bn);
                for (std::size_t j = 0; j < bn; ++j)
                    f[j] = encode_and_score(model, rt.marked[positions[j]], caches[j]);

                LossResult piece;
                std::vector<double> upstream(bn, 0.0);
                double mass = 0.0;
                if (ranked_loss) {
                    const std::vector<double>& omega =
                        rt.weights(static_cast<int>(bn), cfg.loss == LossKind::naive);
                    std::vector<double> rank_conf(bn);
                    for (std::size_t j = 0; j < bn; ++j)
                        rank_conf[j] =
                            cfg.epoch_frozen_ranking ? rt.frozen[positions[j]] : f[j];
                    const std::vector<std::size_t> order = rank_order(rank_conf, positions);
                    std::vector<double> f_ranked(bn);
                    for (std::size_t j = 0; j < bn; ++j) f_ranked[j] = f[order[j]];
                    piece = hgl_loss(omega, f_ranked);
                    for (std::size_t j = 0; j < bn; ++j)
                        upstream[order[j]] = piece.dloss_df[j];
                    for (double w : omega) mass += w;
                } else if (cfg.loss == LossKind::instance_em) {
                    std::vector<double> targets(bn);
                    for (std::size_t j = 0; j < bn; ++j)
                        targets[j] = cfg.em_epoch_frozen ? rt.frozen[positions[j]] : f[j];
                    piece = instance_em_loss(f, targets);
                    upstream = piece.dloss_df;
                    for (double t : targets) mass += t;
                } else { // LossKind::xr
                    piece = xr_loss(f, rt.spec->p);
                    upstream = piece.dloss_df;
                    mass = rt.spec->p * static_cast<double>(bn);
                }

                for (std::size_t j = 0; j < bn; ++j)
                    backward(model, caches[j], lambda * upstream[j], grads);
                step_loss += lambda * piece.loss;
                clamp_events += piece.clamp_events;
                if (pi == 0) mass_sum += mass;
            }
            adam_step(model, grads, adam, cfg.learning_rate);
            loss_sum += step_loss;
        }

        const double seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - tick)
                .count();
        EpochLog entry;
        entry.epoch = epoch;
        entry.mean_loss = loss_sum / static_cast<double>(steps_per_epoch);
        entry.mean_omega_sum = mass_sum / static_cast<double>(steps_per_epoch);
        entry.clamp_events = clamp_events;
        entry.seconds = seconds;
        result.log.push_back(entry);
        if (log_stream) {
            char nums[160];
            std::snprintf(nums, sizeof nums,
                          "epoch=%d loss=%.6f omega_sum=%.6f clamp_events=%lld seconds=%.3f",
                          entry.epoch, entry.mean_loss, entry.mean_omega_sum,
                          entry.clamp_events, entry.seconds);
            *log_stream << "type=" << entity_type << ' ' << nums << '\n';
        }
    }
    return result;
}

std::map<std::string, TrainResult> train(const Corpus& corpus,
                                         const std::vector<Instance>& instances,
                                         const NoiseProfile& profile,
                                         const TrainConfig& cfg,
                                         std::ostream* log_stream) {
    if (instances.empty()) throw data_error("train: no instances to train on");
    const Vocab vocab = build_vocab(corpus, cfg.min_count);
    std::map<std::string, TrainPool> by_type;
    for (const Instance& inst : instances) {
        if (inst.sent_index < 0 ||
            inst.sent_index >= static_cast<int>(corpus.sentences.size()))
            throw data_error("train: instance sentence index out of range");
        by_type[inst.entity_type].items.push_back(
            {&corpus.sentences[static_cast<std::size_t>(inst.sent_index)], inst.span});
    }
    std::map<std::string, TrainResult> out;
    for (auto& [type, pool] : by_type) {
        const auto it = profile.by_type.find(type);
        if (it == profile.by_type.end())
            throw usage_error("train: no noise rate for type " + type);
        pool.p = it->second.p;
        out.emplace(type, train_pools(vocab, type, {pool}, cfg, log_stream));
    }
    return out;
}

} // namespace hgl
