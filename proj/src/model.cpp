#include "hgl/model.hpp"

#include <cmath>
#include <map>

#include "hgl/errors.hpp"
#include "hgl/rng.hpp"

namespace hgl {

Vocab build_vocab(const Corpus& corpus, int min_count) {
    if (min_count < 1) throw usage_error("build_vocab: min_count must be >= 1");
    std::map<std::string, long long> counts;
    for (const Sentence& sent : corpus.sentences)
        for (const std::string& tok : sent.tokens) ++counts[tok];
    Vocab vocab;
    for (const Sentence& sent : corpus.sentences)
        for (const std::string& tok : sent.tokens) {
            if (counts[tok] < min_count) continue;
            if (vocab.token_to_id.count(tok)) continue;
            vocab.token_to_id.emplace(tok, vocab.size());
            vocab.id_to_token.push_back(tok);
        }
    return vocab;
}

void TensorSet::zero() {
    std::fill(emb.begin(), emb.end(), 0.0);
    std::fill(attn_w.begin(), attn_w.end(), 0.0);
    attn_b = 0.0;
    std::fill(w1.begin(), w1.end(), 0.0);
    std::fill(b1.begin(), b1.end(), 0.0);
    std::fill(w2.begin(), w2.end(), 0.0);
    b2 = 0.0;
}

GradientSet DenoiserModel::zeros_like() const {
    GradientSet g;
    g.emb.assign(p.emb.size(), 0.0);
    g.attn_w.assign(p.attn_w.size(), 0.0);
    g.w1.assign(p.w1.size(), 0.0);
    g.b1.assign(p.b1.size(), 0.0);
    g.w2.assign(p.w2.size(), 0.0);
    return g;
}

DenoiserModel init_model(Vocab vocab, int dim, const std::string& entity_type,
                         std::uint64_t seed, bool use_context) {
    if (dim < 1) throw usage_error("init_model: dim must be >= 1");
    DenoiserModel model;
    model.vocab = std::move(vocab);
    model.dim = dim;
    model.entity_type = entity_type;
    model.use_context = use_context;
    Rng rng(seed);
    const std::size_t v = static_cast<std::size_t>(model.vocab.size());
    const std::size_t d = static_cast<std::size_t>(dim);
    const double affine_bound = 1.0 / std::sqrt(static_cast<double>(dim));
    model.p.emb.resize(v * d);
    for (double& x : model.p.emb) x = rng.uniform(-0.1, 0.1);
    model.p.attn_w.resize(d);
    for (double& x : model.p.attn_w) x = rng.uniform(-affine_bound, affine_bound);
    model.p.w1.resize(d * d);
    for (double& x : model.p.w1) x = rng.uniform(-affine_bound, affine_bound);
    model.p.b1.assign(d, 0.0);
    model.p.w2.resize(d);
    for (double& x : model.p.w2) x = rng.uniform(-affine_bound, affine_bound);
    return model;
}

MarkedInstance mark_instance(const DenoiserModel& model, const Sentence& sentence,
                             const Span& span) {
    const int n = static_cast<int>(sentence.tokens.size());
    if (span.start < 0 || span.start >= span.end || span.end > n)
        throw usage_error("mark_instance: invalid span");
    MarkedInstance minst;
    minst.ids.reserve(sentence.tokens.size() + 2);
    for (int i = 0; i < n; ++i) {
        if (i == span.start) minst.ids.push_back(Vocab::beg);
        minst.ids.push_back(model.vocab.lookup(sentence.tokens[static_cast<std::size_t>(i)]));
        if (i == span.end - 1) minst.ids.push_back(Vocab::end_marker);
    }
    minst.beg_pos = span.start;
    minst.end_pos = span.end + 1;
    return minst;
}

namespace {

double stable_sigmoid(double x) {
    if (x >= 0.0) {
        return 1.0 / (1.0 + std::exp(-x));
    }
    const double e = std::exp(x);
    return e / (1.0 + e);
}

double softplus(double x) { return x > 30.0 ? x : std::log1p(std::exp(x)); }

} // namespace

double encode_and_score(const DenoiserModel& model, const MarkedInstance& minst,
                        ForwardCache& cache) {
    const std::size_t d = static_cast<std::size_t>(model.dim);
    const int len = static_cast<int>(minst.ids.size());
    if (minst.beg_pos < 0 || minst.end_pos <= minst.beg_pos || minst.end_pos >= len)
        throw usage_error("encode_and_score: malformed marked instance");
    const int window = minst.end_pos - minst.beg_pos + 1;

    cache.contrib.assign(static_cast<std::size_t>(window), {});
    cache.h.assign(static_cast<std::size_t>(window) * d, 0.0);
    // h_k: the token's embedding row, optionally averaged with its +-1
    // neighbors (sentence edges just shrink the average).
    for (int k = 0; k < window; ++k) {
        const int pos = minst.beg_pos + k;
        std::vector<int>& rows = cache.contrib[static_cast<std::size_t>(k)];
        if (model.use_context) {
            for (int off = -1; off <= 1; ++off)
                if (pos + off >= 0 && pos + off < len)
                    rows.push_back(minst.ids[static_cast<std::size_t>(pos + off)]);
        } else {
            rows.push_back(minst.ids[static_cast<std::size_t>(pos)]);
        }
        double* hk = &cache.h[static_cast<std::size_t>(k) * d];
        for (int row : rows)
            for (std::size_t j = 0; j < d; ++j)
                hk[j] += model.p.emb[static_cast<std::size_t>(row) * d + j];
        const double inv = 1.0 / static_cast<double>(rows.size());
        for (std::size_t j = 0; j < d; ++j) hk[j] *= inv;
    }

    // Attention over the window, max-shifted before exponentiation.
    std::vector<double> logits(static_cast<std::size_t>(window), 0.0);
    double max_logit = -HUGE_VAL;
    for (int k = 0; k < window; ++k) {
        const double* hk = &cache.h[static_cast<std::size_t>(k) * d];
        double z = model.p.attn_b;
        for (std::size_t j = 0; j < d; ++j) z += model.p.attn_w[j] * hk[j];
        logits[static_cast<std::size_t>(k)] = z;
        max_logit = std::max(max_logit, z);
    }
    cache.alpha.assign(static_cast<std::size_t>(window), 0.0);
    double denom = 0.0;
    for (int k = 0; k < window; ++k) {
        const double e = std::exp(logits[static_cast<std::size_t>(k)] - max_logit);
        cache.alpha[static_cast<std::size_t>(k)] = e;
        denom += e;
    }
    for (double& a : cache.alpha) a /= denom;

    cache.r.assign(d, 0.0);
    for (int k = 0; k < window; ++k) {
        const double a = cache.alpha[static_cast<std::size_t>(k)];
        const double* hk = &cache.h[static_cast<std::size_t>(k) * d];
        for (std::size_t j = 0; j < d; ++j) cache.r[j] += a * hk[j];
    }

    cache.z1.assign(d, 0.0);
    cache.a1.assign(d, 0.0);
    for (std::size_t i = 0; i < d; ++i) {
        double z = model.p.b1[i];
        for (std::size_t j = 0; j < d; ++j) z += model.p.w1[i * d + j] * cache.r[j];
        cache.z1[i] = z;
        cache.a1[i] = softplus(z);
    }
    double z2 = model.p.b2;
    for (std::size_t i = 0; i < d; ++i) z2 += model.p.w2[i] * cache.a1[i];
    cache.z2 = z2;
    if (!std::isfinite(z2)) throw numeric_error("encode_and_score: non-finite score");
    // Pin the sigmoid away from exact 0/1 so downstream logs stay finite.
    cache.f = std::min(1.0 - 1e-15, std::max(1e-15, stable_sigmoid(z2)));
    cache.version = model.version;
    return cache.f;
}

void backward(const DenoiserModel& model, const ForwardCache& cache, double upstream,
              GradientSet& grads) {
    if (cache.version != model.version)
        throw usage_error("backward: cache is stale (parameters changed since the forward pass)");
    if (!std::isfinite(upstream)) throw numeric_error("backward: non-finite upstream gradient");
    const std::size_t d = static_cast<std::size_t>(model.dim);
    const std::size_t window = cache.alpha.size();

    // Output sigmoid and affine.
    const double g2 = upstream * cache.f * (1.0 - cache.f); // d loss / d z2
    grads.b2 += g2;
    std::vector<double> da1(d);
    for (std::size_t i = 0; i < d; ++i) {
        grads.w2[i] += g2 * cache.a1[i];
        da1[i] = g2 * model.p.w2[i];
    }

    // Hidden layer: softplus'(z) = sigmoid(z).
    std::vector<double> dr(d, 0.0);
    for (std::size_t i = 0; i < d; ++i) {
        const double dz1 = da1[i] * stable_sigmoid(cache.z1[i]);
        grads.b1[i] += dz1;
        for (std::size_t j = 0; j < d; ++j) {
            grads.w1[i * d + j] += dz1 * cache.r[j];
            dr[j] += dz1 * model.p.w1[i * d + j];
        }
    }

    // r = sum_k alpha_k h_k.
    std::vector<double> dalpha(window, 0.0);
    std::vector<double> dh(window * d, 0.0);
    for (std::size_t k = 0; k < window; ++k) {
        const double* hk = &cache.h[k * d];
        for (std::size_t j = 0; j < d; ++j) {
            dalpha[k] += dr[j] * hk[j];
            dh[k * d + j] += dr[j] * cache.alpha[k];
        }
    }

    // Softmax: d logit_k = alpha_k (d alpha_k - sum_j alpha_j d alpha_j).
    double mix = 0.0;
    for (std::size_t k = 0; k < window; ++k) mix += cache.alpha[k] * dalpha[k];
    for (std::size_t k = 0; k < window; ++k) {
        const double dlogit = cache.alpha[k] * (dalpha[k] - mix);
        grads.attn_b += dlogit;
        const double* hk = &cache.h[k * d];
        for (std::size_t j = 0; j < d; ++j) {
            grads.attn_w[j] += dlogit * hk[j];
            dh[k * d + j] += dlogit * model.p.attn_w[j];
        }
    }

    // Embedding rows (averaged over contributors in context mode).
    for (std::size_t k = 0; k < window; ++k) {
        const std::vector<int>& rows = cache.contrib[k];
        const double inv = 1.0 / static_cast<double>(rows.size());
        for (int row : rows)
            for (std::size_t j = 0; j < d; ++j)
                grads.emb[static_cast<std::size_t>(row) * d + j] += inv * dh[k * d + j];
    }
}

} // namespace hgl
