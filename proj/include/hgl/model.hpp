#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "hgl/corpus.hpp"

namespace hgl {

// Token-string -> id map. Ids 0..2 are reserved: 0 is the out-of-vocabulary
// bucket, 1/2 are the [BEG]/[END] span markers.
struct Vocab {
    static constexpr int oov = 0;
    static constexpr int beg = 1;
    static constexpr int end_marker = 2;

    std::vector<std::string> id_to_token{"[OOV]", "[BEG]", "[END]"};
    std::unordered_map<std::string, int> token_to_id;

    int lookup(const std::string& token) const {
        const auto it = token_to_id.find(token);
        return it == token_to_id.end() ? oov : it->second;
    }
    int size() const { return static_cast<int>(id_to_token.size()); }
};

// Tokens seen fewer than min_count times fall into the OOV bucket; insertion
// order follows the corpus scan so vocab construction is deterministic.
Vocab build_vocab(const Corpus& corpus, int min_count = 2);

// Every trainable tensor of one denoiser. emb is vocab-size x dim row-major;
// the scorer is attention pooling (attn_w, attn_b) followed by a one-hidden-
// layer MLP (w1/b1, softplus) with a scalar output (w2, b2).
struct TensorSet {
    std::vector<double> emb;
    std::vector<double> attn_w;
    double attn_b = 0.0;
    std::vector<double> w1; // dim x dim row-major
    std::vector<double> b1;
    std::vector<double> w2;
    double b2 = 0.0;

    void zero();
};

using GradientSet = TensorSet;

struct DenoiserModel {
    Vocab vocab;
    int dim = 32;
    std::string entity_type;
    bool use_context = false; // average each h_k with its +-1 neighbors
    TensorSet p;
    std::uint64_t version = 0; // bumped by every parameter update

    GradientSet zeros_like() const;
};

// Embeddings uniform in [-0.1, 0.1]; affine layers uniform within
// +-1/sqrt(fan-in); biases zero. Deterministic given the seed.
DenoiserModel init_model(Vocab vocab, int dim, const std::string& entity_type,
                         std::uint64_t seed, bool use_context = false);

// The instance's sentence as token ids with [BEG] inserted before the span
// and [END] right after it.
struct MarkedInstance {
    std::vector<int> ids;
    int beg_pos = 0;
    int end_pos = 0; // beg_pos < end_pos
};

MarkedInstance mark_instance(const DenoiserModel& model, const Sentence& sentence,
                             const Span& span);

// Intermediate activations kept for the backward pass. Window positions run
// from [BEG] to [END] inclusive; contrib lists the embedding rows feeding
// each h_k (one id, or up to three in context mode).
struct ForwardCache {
    std::vector<std::vector<int>> contrib;
    std::vector<double> h;     // window x dim
    std::vector<double> alpha; // window
    std::vector<double> r;     // dim
    std::vector<double> z1;    // dim, hidden pre-activation
    std::vector<double> a1;    // dim, softplus(z1)
    double z2 = 0.0;
    double f = 0.0;
    std::uint64_t version = 0;
};

// Attention-pooled confidence f in (0, 1). Logits are max-shifted before
// exponentiation; a non-finite intermediate raises numeric_error.
double encode_and_score(const DenoiserModel& model, const MarkedInstance& minst,
                        ForwardCache& cache);

// Accumulates d(upstream * f)/d(theta) into grads, which must be shaped like
// model.p. The cache must come from encode_and_score under the current
// parameter version (usage_error otherwise).
void backward(const DenoiserModel& model, const ForwardCache& cache, double upstream,
              GradientSet& grads);

} // namespace hgl
