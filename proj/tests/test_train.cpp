#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "hgl/errors.hpp"
#include "hgl/train.hpp"

using namespace hgl;

namespace {

// A corpus of n single-mention sentences over a small closed vocabulary.
// Span (1, 2) of sentence i is the instance mention; the mention token cycles
// through `kinds` distinct surface forms so instances are separable but not
// unique.
Corpus cycle_corpus(int n, int kinds) {
    Corpus c;
    for (int i = 0; i < n; ++i) {
        Sentence s;
        s.tokens = {"left" + std::to_string(i % 3),
                    "mention" + std::to_string(i % kinds),
                    "right" + std::to_string(i % 2)};
        s.sent_id = i;
        c.sentences.push_back(s);
    }
    return c;
}

std::vector<PoolItem> whole_pool(const Corpus& c) {
    std::vector<PoolItem> items;
    for (const Sentence& s : c.sentences) items.push_back({&s, {1, 2}});
    return items;
}

// Log lines with the wall-time field removed (the only nondeterministic part).
std::vector<std::string> stable_log_lines(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        const auto cut = line.find(" seconds=");
        out.push_back(cut == std::string::npos ? line : line.substr(0, cut));
    }
    return out;
}

double mean_confidence(const DenoiserModel& model, const std::vector<MarkedInstance>& ms) {
    ForwardCache cache;
    double total = 0.0;
    for (const MarkedInstance& m : ms) total += encode_and_score(model, m, cache);
    return total / static_cast<double>(ms.size());
}

} // namespace

TEST_CASE("loss kind names parse and print") {
    CHECK(parse_loss_kind("hgl") == LossKind::hgl);
    CHECK(parse_loss_kind("em") == LossKind::instance_em);
    CHECK(parse_loss_kind("instance_em") == LossKind::instance_em);
    CHECK(parse_loss_kind("xr") == LossKind::xr);
    CHECK(parse_loss_kind("naive") == LossKind::naive);
    CHECK_THROWS_AS(parse_loss_kind("bce"), usage_error);
    CHECK(loss_kind_name(LossKind::hgl) == "hgl");
    CHECK(loss_kind_name(LossKind::instance_em) == "instance_em");
}

TEST_CASE("rank_order sorts by confidence descending with index tie-break") {
    SUBCASE("worked example") {
        const std::vector<double> conf = {0.2, 0.9, 0.5};
        const std::vector<std::size_t> idx = {0, 1, 2};
        CHECK(rank_order(conf, idx) == std::vector<std::size_t>{1, 2, 0});
    }
    SUBCASE("all-equal confidences preserve pool order") {
        const std::vector<double> conf = {0.5, 0.5, 0.5, 0.5};
        const std::vector<std::size_t> idx = {7, 2, 9, 4};
        CHECK(rank_order(conf, idx) == std::vector<std::size_t>{1, 3, 0, 2});
    }
    SUBCASE("singleton") {
        CHECK(rank_order({0.3}, {5}) == std::vector<std::size_t>{0});
    }
    SUBCASE("size mismatch rejected") {
        CHECK_THROWS_AS(rank_order({0.1, 0.2}, {0}), usage_error);
    }
}

TEST_CASE("hgl_loss worked example and degenerate weight vectors") {
    SUBCASE("hand-evaluated three-instance batch") {
        const std::vector<double> omega = {0.83333, 0.33333, 0.03333};
        const std::vector<double> f = {0.9, 0.5, 0.1};
        const LossResult res = hgl_loss(omega, f);
        // Independent scalar evaluation of the same definition.
        double expect = 0.0;
        for (std::size_t i = 0; i < 3; ++i)
            expect -= (omega[i] * std::log(f[i]) + (1.0 - omega[i]) * std::log(1.0 - f[i])) / 3.0;
        CHECK(res.loss == doctest::Approx(expect).epsilon(1e-15));
        CHECK(res.loss == doctest::Approx(0.44777).epsilon(5e-5));
        CHECK(res.clamp_events == 0);
    }
    SUBCASE("all-ones weights equal BCE toward 1") {
        const std::vector<double> f = {0.7, 0.4, 0.95, 0.2};
        const LossResult res = hgl_loss({1.0, 1.0, 1.0, 1.0}, f);
        double bce = 0.0;
        for (double x : f) bce -= std::log(x) / 4.0;
        CHECK(res.loss == doctest::Approx(bce).epsilon(1e-15));
    }
    SUBCASE("all-zero weights equal BCE toward 0") {
        const std::vector<double> f = {0.7, 0.4, 0.95, 0.2};
        const LossResult res = hgl_loss({0.0, 0.0, 0.0, 0.0}, f);
        double bce = 0.0;
        for (double x : f) bce -= std::log(1.0 - x) / 4.0;
        CHECK(res.loss == doctest::Approx(bce).epsilon(1e-15));
    }
    SUBCASE("per-instance gradients match finite differences") {
        const std::vector<double> omega = {0.9, 0.6, 0.2};
        std::vector<double> f = {0.8, 0.45, 0.3};
        const LossResult res = hgl_loss(omega, f);
        const double eps = 1e-6;
        for (std::size_t i = 0; i < f.size(); ++i) {
            const double saved = f[i];
            f[i] = saved + eps;
            const double up = hgl_loss(omega, f).loss;
            f[i] = saved - eps;
            const double down = hgl_loss(omega, f).loss;
            f[i] = saved;
            CHECK(res.dloss_df[i] == doctest::Approx((up - down) / (2 * eps)).epsilon(1e-6));
        }
    }
    SUBCASE("confidences outside the floor are clamped and counted") {
        const LossResult res = hgl_loss({1.0, 0.0}, {1e-12, 1.0 - 1e-12});
        CHECK(res.clamp_events == 2);
        CHECK(std::isfinite(res.loss));
        CHECK(res.loss == doctest::Approx(-std::log(1e-7)).epsilon(1e-9));
    }
    SUBCASE("shape errors") {
        CHECK_THROWS_AS(hgl_loss({}, {}), usage_error);
        CHECK_THROWS_AS(hgl_loss({1.0}, {0.5, 0.5}), usage_error);
    }
}

TEST_CASE("instance_em_loss targets and gradients") {
    SUBCASE("uniform half targets give ln 2") {
        const LossResult res = instance_em_loss({0.5, 0.5, 0.5}, {0.5, 0.5, 0.5});
        CHECK(res.loss == doctest::Approx(std::log(2.0)).epsilon(1e-12));
    }
    SUBCASE("target 1 reduces to BCE toward 1") {
        const std::vector<double> f = {0.6, 0.3};
        const LossResult res = instance_em_loss(f, {1.0, 1.0});
        CHECK(res.loss ==
              doctest::Approx(-(std::log(0.6) + std::log(0.3)) / 2.0).epsilon(1e-15));
    }
    SUBCASE("gradient vanishes exactly where live equals target") {
        const std::vector<double> f = {0.5, 0.81, 0.13};
        const LossResult res = instance_em_loss(f, f);
        for (double g : res.dloss_df) CHECK(g == 0.0);
    }
    SUBCASE("gradient pushes live toward target") {
        const LossResult res = instance_em_loss({0.4}, {0.9});
        CHECK(res.dloss_df[0] < 0.0); // decreasing loss raises f
    }
}

TEST_CASE("xr_loss matches the KL identity and examples") {
    SUBCASE("mean equal to target gives exactly zero") {
        // All values exactly representable; mean is exactly 0.5.
        CHECK(xr_loss({0.25, 0.5, 0.75}, 0.5).loss == 0.0);
    }
    SUBCASE("p=1 against mean 0.5 gives ln 2") {
        const LossResult res = xr_loss({0.5, 0.5}, 1.0);
        CHECK(res.loss == doctest::Approx(std::log(2.0)).epsilon(1e-12));
    }
    SUBCASE("p=0 against mean 0.5 gives ln 2") {
        CHECK(xr_loss({0.5}, 0.0).loss == doctest::Approx(std::log(2.0)).epsilon(1e-12));
    }
    SUBCASE("underconfident batch gets a uniform negative gradient") {
        const LossResult res = xr_loss({0.2, 0.4}, 0.8);
        for (double g : res.dloss_df) CHECK(g < 0.0);
        CHECK(res.dloss_df[0] == res.dloss_df[1]);
    }
    SUBCASE("gradient matches finite differences") {
        std::vector<double> f = {0.35, 0.6, 0.2, 0.5};
        const double p = 0.7;
        const LossResult res = xr_loss(f, p);
        const double eps = 1e-7;
        for (std::size_t i = 0; i < f.size(); ++i) {
            const double saved = f[i];
            f[i] = saved + eps;
            const double up = xr_loss(f, p).loss;
            f[i] = saved - eps;
            const double down = xr_loss(f, p).loss;
            f[i] = saved;
            CHECK(res.dloss_df[i] == doctest::Approx((up - down) / (2 * eps)).epsilon(1e-5));
        }
    }
    SUBCASE("invalid arguments") {
        CHECK_THROWS_AS(xr_loss({}, 0.5), usage_error);
        CHECK_THROWS_AS(xr_loss({0.5}, 1.5), usage_error);
    }
}

TEST_CASE("adam_step contract") {
    const Corpus c = cycle_corpus(6, 3);
    const Vocab v = build_vocab(c, 1);
    DenoiserModel model = init_model(v, 4, "T", 11);
    const TensorSet before = model.p;
    AdamState state = make_adam_state(model);

    SUBCASE("zero gradient leaves parameters unchanged and advances the step") {
        GradientSet g = model.zeros_like();
        adam_step(model, g, state, 1e-3);
        CHECK(state.step == 1);
        CHECK(model.p.emb == before.emb);
        CHECK(model.p.w1 == before.w1);
        CHECK(model.p.b2 == before.b2);
        CHECK(model.version == 1);
    }
    SUBCASE("first step moves each slot by about lr toward minus the gradient sign") {
        GradientSet g = model.zeros_like();
        for (double& x : g.w2) x = 0.3;
        g.b2 = -0.2;
        adam_step(model, g, state, 1e-3);
        const double expected_w2 = 1e-3 * 0.3 / (0.3 + 1e-8);
        for (std::size_t i = 0; i < model.p.w2.size(); ++i)
            CHECK(model.p.w2[i] == doctest::Approx(before.w2[i] - expected_w2).epsilon(1e-9));
        CHECK(model.p.b2 == doctest::Approx(before.b2 + 1e-3 * 0.2 / (0.2 + 1e-8)).epsilon(1e-9));
        // Untouched tensors stay put.
        CHECK(model.p.emb == before.emb);
    }
    SUBCASE("non-finite gradient aborts before mutating anything") {
        GradientSet g = model.zeros_like();
        g.b1[0] = std::nan("");
        CHECK_THROWS_AS(adam_step(model, g, state, 1e-3), numeric_error);
        CHECK(model.p.b1 == before.b1);
        CHECK(state.step == 0);
        CHECK(model.version == 0);
    }
    SUBCASE("learning rate must be positive") {
        GradientSet g = model.zeros_like();
        CHECK_THROWS_AS(adam_step(model, g, state, 0.0), usage_error);
    }
}

TEST_CASE("hgl pipeline loss is exactly permutation invariant") {
    const Corpus c = cycle_corpus(10, 5);
    const Vocab v = build_vocab(c, 1);
    DenoiserModel model = init_model(v, 8, "T", 3);
    std::vector<MarkedInstance> ms;
    for (const Sentence& s : c.sentences) ms.push_back(mark_instance(model, s, {1, 2}));

    std::vector<double> f(ms.size());
    ForwardCache cache;
    for (std::size_t i = 0; i < ms.size(); ++i) f[i] = encode_and_score(model, ms[i], cache);
    std::vector<std::size_t> idx(ms.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});

    const std::vector<double> omega =
        tail_weights({20, 12, static_cast<long long>(ms.size())}).omega;

    auto pipeline = [&](const std::vector<double>& fv, const std::vector<std::size_t>& iv) {
        const auto order = rank_order(fv, iv);
        std::vector<double> ranked(fv.size());
        for (std::size_t j = 0; j < fv.size(); ++j) ranked[j] = fv[order[j]];
        return hgl_loss(omega, ranked).loss;
    };

    const double base = pipeline(f, idx);
    // A handful of fixed permutations, including reversal and a rotation.
    std::vector<std::size_t> perm(idx);
    std::reverse(perm.begin(), perm.end());
    for (int rot = 0; rot < 5; ++rot) {
        std::vector<double> pf(f.size());
        for (std::size_t j = 0; j < perm.size(); ++j) pf[j] = f[perm[j]];
        CHECK(pipeline(pf, perm) == base); // bitwise equality
        std::rotate(perm.begin(), perm.begin() + 1, perm.end());
    }
}

TEST_CASE("train_pools batch mass follows the hypergeometric identity") {
    // Pool of 53 with B=20 gives batches 20/20/13; the partial batch gets
    // recomputed weights, so each batch's expected positive mass is B'*K/N.
    const Corpus c = cycle_corpus(53, 7);
    const Vocab v = build_vocab(c, 1);
    TrainPool pool;
    pool.items = whole_pool(c);
    pool.p = 0.6;
    TrainConfig cfg;
    cfg.batch_size = 20;
    cfg.epochs = 2;
    cfg.seed = 5;
    cfg.dim = 8;
    cfg.loss = LossKind::hgl;
    const TrainResult res = train_pools(v, "T", {pool}, cfg);
    REQUIRE(res.log.size() == 2);
    const double k = static_cast<double>(correct_count(53, 0.6)); // 32
    const double expected = (2.0 * (20.0 * k / 53.0) + 13.0 * k / 53.0) / 3.0;
    for (const EpochLog& e : res.log)
        CHECK(e.mean_omega_sum == doctest::Approx(expected).epsilon(1e-9));
}

TEST_CASE("p=1 hypergeometric training is bitwise identical to naive") {
    const Corpus c = cycle_corpus(20, 4);
    const Vocab v = build_vocab(c, 1);
    TrainPool pool;
    pool.items = whole_pool(c);
    pool.p = 1.0;
    TrainConfig cfg;
    cfg.batch_size = 7; // 7/7/6 exercises the partial batch
    cfg.epochs = 3;
    cfg.seed = 21;
    cfg.dim = 8;

    cfg.loss = LossKind::hgl;
    const TrainResult a = train_pools(v, "T", {pool}, cfg);
    cfg.loss = LossKind::naive;
    const TrainResult b = train_pools(v, "T", {pool}, cfg);

    CHECK(a.model.p.emb == b.model.p.emb);
    CHECK(a.model.p.attn_w == b.model.p.attn_w);
    CHECK(a.model.p.w1 == b.model.p.w1);
    CHECK(a.model.p.w2 == b.model.p.w2);
    CHECK(a.model.p.b2 == b.model.p.b2);
    REQUIRE(a.log.size() == b.log.size());
    for (std::size_t i = 0; i < a.log.size(); ++i) {
        CHECK(a.log[i].mean_loss == b.log[i].mean_loss);
        CHECK(a.log[i].mean_omega_sum == b.log[i].mean_omega_sum);
    }
}

TEST_CASE("default instance-EM training is a parameter no-op") {
    // With detached-current targets every instance already sits at its own
    // target, so the gradient is identically zero and parameters never move.
    const Corpus c = cycle_corpus(12, 4);
    const Vocab v = build_vocab(c, 1);
    TrainPool pool;
    pool.items = whole_pool(c);
    pool.p = 0.5;
    TrainConfig cfg;
    cfg.batch_size = 12;
    cfg.epochs = 3;
    cfg.seed = 9;
    cfg.dim = 8;
    cfg.loss = LossKind::instance_em;

    const TrainResult res = train_pools(v, "T", {pool}, cfg);
    const DenoiserModel fresh = init_model(v, cfg.dim, "T", cfg.seed, cfg.use_context);
    CHECK(res.model.p.emb == fresh.p.emb);
    CHECK(res.model.p.attn_w == fresh.p.attn_w);
    CHECK(res.model.p.w1 == fresh.p.w1);
    CHECK(res.model.p.w2 == fresh.p.w2);
    CHECK(res.model.version == 3); // steps still ran

    SUBCASE("epoch-frozen targets restore real dynamics") {
        // The frozen variant bootstraps epoch 1 from the weak label (no
        // previous model exists yet), then self-targets from epoch 2 on.
        TrainConfig frozen = cfg;
        frozen.em_epoch_frozen = true;
        frozen.epochs = 5;
        const TrainResult moved = train_pools(v, "T", {pool}, frozen);
        CHECK(moved.model.p.w2 != fresh.p.w2);
    }
}

TEST_CASE("naive loss decreases monotonically on clean separable data") {
    const Corpus c = cycle_corpus(24, 6);
    const Vocab v = build_vocab(c, 1);
    TrainPool pool;
    pool.items = whole_pool(c);
    pool.p = 1.0;
    TrainConfig cfg;
    cfg.batch_size = 150; // single batch per epoch
    cfg.epochs = 5;
    cfg.seed = 4;
    cfg.dim = 16;
    cfg.loss = LossKind::naive;
    const TrainResult res = train_pools(v, "T", {pool}, cfg);
    REQUIRE(res.log.size() == 5);
    for (std::size_t i = 1; i < res.log.size(); ++i)
        CHECK(res.log[i].mean_loss < res.log[i - 1].mean_loss);
}

TEST_CASE("xr training moves the mean confidence toward the target proportion") {
    const Corpus c = cycle_corpus(16, 4);
    const Vocab v = build_vocab(c, 1);
    TrainPool pool;
    pool.items = whole_pool(c);
    pool.p = 0.9;
    TrainConfig cfg;
    cfg.batch_size = 16;
    cfg.epochs = 30;
    cfg.seed = 2;
    cfg.dim = 8;
    cfg.learning_rate = 1e-2;
    cfg.loss = LossKind::xr;
    const TrainResult res = train_pools(v, "T", {pool}, cfg);

    DenoiserModel fresh = init_model(v, cfg.dim, "T", cfg.seed, cfg.use_context);
    std::vector<MarkedInstance> ms;
    for (const PoolItem& item : pool.items)
        ms.push_back(mark_instance(fresh, *item.sentence, item.span));
    const double before = mean_confidence(fresh, ms);
    const double after = mean_confidence(res.model, ms);
    CHECK(std::fabs(after - 0.9) < std::fabs(before - 0.9));
    CHECK(after > before);
}

TEST_CASE("identical configuration reproduces parameters and logs exactly") {
    const Corpus c = cycle_corpus(30, 5);
    const Vocab v = build_vocab(c, 1);
    TrainPool pool;
    pool.items = whole_pool(c);
    pool.p = 0.7;
    TrainConfig cfg;
    cfg.batch_size = 11;
    cfg.epochs = 4;
    cfg.seed = 77;
    cfg.dim = 8;

    std::ostringstream log_a, log_b;
    const TrainResult a = train_pools(v, "T", {pool}, cfg, &log_a);
    const TrainResult b = train_pools(v, "T", {pool}, cfg, &log_b);
    CHECK(a.model.p.emb == b.model.p.emb);
    CHECK(a.model.p.w1 == b.model.p.w1);
    CHECK(a.model.p.b2 == b.model.p.b2);
    CHECK(stable_log_lines(log_a.str()) == stable_log_lines(log_b.str()));
    CHECK(stable_log_lines(log_a.str()).size() == 4);

    TrainConfig other = cfg;
    other.seed = 78;
    const TrainResult d = train_pools(v, "T", {pool}, other);
    CHECK(a.model.p.emb != d.model.p.emb);
}

TEST_CASE("a zero-weight side pool leaves the trajectory untouched") {
    const Corpus c = cycle_corpus(18, 4);
    const Vocab v = build_vocab(c, 1);
    TrainPool main_pool;
    main_pool.items = whole_pool(c);
    main_pool.p = 0.6;

    const Corpus side_corpus = cycle_corpus(9, 2);
    TrainPool side;
    side.items = whole_pool(side_corpus);
    side.p = 0.3;
    side.lambda = 0.0;

    TrainConfig cfg;
    cfg.batch_size = 6;
    cfg.epochs = 3;
    cfg.seed = 31;
    cfg.dim = 8;

    const TrainResult solo = train_pools(v, "T", {main_pool}, cfg);
    const TrainResult with_side = train_pools(v, "T", {main_pool, side}, cfg);
    CHECK(solo.model.p.emb == with_side.model.p.emb);
    CHECK(solo.model.p.attn_w == with_side.model.p.attn_w);
    CHECK(solo.model.p.w1 == with_side.model.p.w1);
    CHECK(solo.model.p.w2 == with_side.model.p.w2);
    for (std::size_t i = 0; i < solo.log.size(); ++i)
        CHECK(solo.log[i].mean_loss == with_side.log[i].mean_loss);
}

TEST_CASE("full-pipeline analytic gradients match finite differences") {
    // Batches of 8 at dim 16, sampled from a notional pool of 40 at p=0.55;
    // ordering and weights are held fixed while differentiating, matching the
    // detached ranking.
    const std::vector<double> omega = tail_weights({40, 22, 8}).omega;
    int checked_slots = 0;
    for (int trial = 0; trial < 10; ++trial) {
        const Corpus c = cycle_corpus(8, 5);
        const Vocab v = build_vocab(c, 1);
        DenoiserModel model =
            init_model(v, 16, "T", 900 + static_cast<std::uint64_t>(trial), trial % 2 == 1);
        std::vector<MarkedInstance> ms;
        for (const Sentence& s : c.sentences) ms.push_back(mark_instance(model, s, {1, 2}));

        std::vector<ForwardCache> caches(ms.size());
        std::vector<double> f(ms.size());
        std::vector<std::size_t> idx(ms.size());
        std::iota(idx.begin(), idx.end(), std::size_t{0});
        for (std::size_t i = 0; i < ms.size(); ++i)
            f[i] = encode_and_score(model, ms[i], caches[i]);
        const std::vector<std::size_t> order = rank_order(f, idx);
        std::vector<double> ranked(f.size());
        for (std::size_t j = 0; j < f.size(); ++j) ranked[j] = f[order[j]];
        const LossResult center = hgl_loss(omega, ranked);
        GradientSet g = model.zeros_like();
        for (std::size_t j = 0; j < order.size(); ++j)
            backward(model, caches[order[j]], center.dloss_df[j], g);

        auto loss_at = [&]() {
            ForwardCache scratch;
            std::vector<double> fr(ms.size());
            for (std::size_t i = 0; i < ms.size(); ++i)
                fr[i] = encode_and_score(model, ms[i], scratch);
            std::vector<double> rk(fr.size());
            for (std::size_t j = 0; j < fr.size(); ++j) rk[j] = fr[order[j]];
            return hgl_loss(omega, rk).loss;
        };
        auto fd = [&](double* slot) {
            const double eps = 1e-5;
            const double saved = *slot;
            *slot = saved + eps;
            const double up = loss_at();
            *slot = saved - eps;
            const double down = loss_at();
            *slot = saved;
            return (up - down) / (2.0 * eps);
        };
        auto close = [](double analytic, double numeric) {
            return std::fabs(analytic - numeric) <=
                   1e-8 + 1e-4 * std::max(std::fabs(analytic), std::fabs(numeric));
        };

        const std::size_t d = 16;
        for (std::size_t j = 0; j < d; ++j) {
            CHECK(close(g.attn_w[j], fd(&model.p.attn_w[j])));
            CHECK(close(g.w2[j], fd(&model.p.w2[j])));
            CHECK(close(g.b1[j], fd(&model.p.b1[j])));
            checked_slots += 3;
        }
        for (std::size_t i = 0; i < d * d; i += 9) {
            CHECK(close(g.w1[i], fd(&model.p.w1[i])));
            ++checked_slots;
        }
        for (std::size_t row = 0; row < static_cast<std::size_t>(v.size()); ++row)
            for (std::size_t jj = 0; jj < d; jj += 6) {
                CHECK(close(g.emb[row * d + jj], fd(&model.p.emb[row * d + jj])));
                ++checked_slots;
            }
        CHECK(close(g.attn_b, fd(&model.p.attn_b)));
        CHECK(close(g.b2, fd(&model.p.b2)));
        checked_slots += 2;
    }
    CHECK(checked_slots >= 100);
}

TEST_CASE("train builds one model per type from the noise profile") {
    Corpus c = cycle_corpus(14, 4);
    std::vector<Instance> instances;
    for (int i = 0; i < 14; ++i) {
        Instance inst;
        inst.sent_index = i;
        inst.span = {1, 2};
        inst.entity_type = i < 8 ? "PER" : "LOC";
        instances.push_back(inst);
    }
    NoiseProfile profile;
    profile.by_type["PER"] = {0.8, 8};
    profile.by_type["LOC"] = {0.5, 6};
    TrainConfig cfg;
    cfg.batch_size = 8;
    cfg.epochs = 2;
    cfg.seed = 13;
    cfg.dim = 8;
    cfg.min_count = 1;

    std::ostringstream log;
    const auto models = train(c, instances, profile, cfg, &log);
    REQUIRE(models.size() == 2);
    CHECK(models.count("PER") == 1);
    CHECK(models.count("LOC") == 1);
    CHECK(models.at("PER").model.entity_type == "PER");
    CHECK(models.at("PER").log.size() == 2);
    // Both per-type sections appear in the stream.
    CHECK(log.str().find("type=PER") != std::string::npos);
    CHECK(log.str().find("type=LOC") != std::string::npos);

    SUBCASE("missing profile entry is rejected") {
        NoiseProfile partial;
        partial.by_type["PER"] = {0.8, 8};
        CHECK_THROWS_AS(train(c, instances, partial, cfg), usage_error);
    }
    SUBCASE("empty instance list is rejected") {
        CHECK_THROWS_AS(train(c, {}, profile, cfg), data_error);
    }
    SUBCASE("out-of-range sentence index is rejected") {
        std::vector<Instance> bad = instances;
        bad[0].sent_index = 99;
        CHECK_THROWS_AS(train(c, bad, profile, cfg), data_error);
    }
}
