#include "hgl/block.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>
#include <set>

#include "hgl/errors.hpp"
#include "hgl/rng.hpp"
#include "hgl/weak_label.hpp"

namespace hgl {

namespace {

bool capital_initial(const std::string& tok) {
    return !tok.empty() && tok[0] >= 'A' && tok[0] <= 'Z';
}

// Shape feature block: capitalization-pattern fractions (4), phrase length
// one-hot up to 6 (6), mean token length (1), hashed suffix 2-grams and
// 3-grams (32 + 32).
constexpr int kCapDim = 4;
constexpr int kLenDim = 6;
constexpr int kSuffixBuckets = 32;
constexpr int kShapeDim = kCapDim + kLenDim + 1 + 2 * kSuffixBuckets;
constexpr int kFeatDim = PhraseClassifier::kEmbDim + kShapeDim;

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (const char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= 1099511628211ULL;
    }
    return h;
}

int cap_pattern(const std::string& tok) {
    bool any_upper = false;
    bool any_lower = false;
    for (const char c : tok) {
        if (c >= 'A' && c <= 'Z') any_upper = true;
        if (c >= 'a' && c <= 'z') any_lower = true;
    }
    if (!any_upper) return 0;                    // no capitals
    if (capital_initial(tok) && any_lower) return 1; // Capitalized word
    if (!any_lower) return 2;                    // all caps
    return 3;                                    // mixed
}

// Identity part first, then shape. The identity part needs the vocabulary,
// so it is filled by the caller; this fills the shape block.
void shape_features(const Phrase& phrase, std::vector<double>& x) {
    const double inv = 1.0 / static_cast<double>(phrase.size());
    double mean_len = 0.0;
    for (const std::string& tok : phrase) {
        x[static_cast<std::size_t>(PhraseClassifier::kEmbDim + cap_pattern(tok))] += inv;
        mean_len += static_cast<double>(tok.size()) * inv;
        for (const int n : {2, 3}) {
            if (static_cast<int>(tok.size()) < n) continue;
            const std::string suffix = tok.substr(tok.size() - static_cast<std::size_t>(n));
            const int bucket = static_cast<int>(fnv1a(suffix) % kSuffixBuckets);
            const int base = PhraseClassifier::kEmbDim + kCapDim + kLenDim + 1 +
                             (n == 3 ? kSuffixBuckets : 0);
            x[static_cast<std::size_t>(base + bucket)] += inv;
        }
    }
    const int len_slot = std::min<int>(static_cast<int>(phrase.size()), kLenDim) - 1;
    x[static_cast<std::size_t>(PhraseClassifier::kEmbDim + kCapDim + len_slot)] = 1.0;
    x[PhraseClassifier::kEmbDim + kCapDim + kLenDim] = mean_len / 10.0;
}

std::vector<double> featurize(const PhraseClassifier& clf, const Phrase& phrase) {
    std::vector<double> x(kFeatDim, 0.0);
    const double inv = 1.0 / static_cast<double>(phrase.size());
    for (const std::string& tok : phrase) {
        const auto it = clf.token_ids.find(tok);
        const int id = it == clf.token_ids.end() ? 0 : it->second;
        for (int d = 0; d < PhraseClassifier::kEmbDim; ++d)
            x[static_cast<std::size_t>(d)] +=
                inv * clf.emb[static_cast<std::size_t>(id)][static_cast<std::size_t>(d)];
    }
    shape_features(phrase, x);
    return x;
}

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

} // namespace

std::vector<PhraseCandidate> extract_candidates(const Corpus& corpus, const Dictionary& dict,
                                                const std::string& type) {
    // Spans the dictionary already matched for this type are not candidates.
    std::set<std::pair<int, Span>> matched;
    for (const Instance& inst : weak_label(corpus, dict))
        if (inst.entity_type == type) matched.insert({inst.sent_index, inst.span});

    std::vector<PhraseCandidate> candidates;
    std::map<Phrase, std::size_t> index;
    auto offer = [&](int sent_index, const Span& span, const Sentence& s) {
        if (matched.count({sent_index, span})) return;
        Phrase phrase(s.tokens.begin() + span.start, s.tokens.begin() + span.end);
        if (dict.contains(type, phrase)) return;
        const auto it = index.find(phrase);
        if (it == index.end()) {
            index.emplace(phrase, candidates.size());
            candidates.push_back({std::move(phrase), {{sent_index, span}}, 0.0});
        } else {
            candidates[it->second].occurrences.push_back({sent_index, span});
        }
    };

    for (std::size_t si = 0; si < corpus.sentences.size(); ++si) {
        const Sentence& s = corpus.sentences[si];
        if (corpus.has_aux) {
            for (const Span& span : s.aux_candidates)
                offer(static_cast<int>(si), span, s);
            continue;
        }
        // Maximal capital-initial runs, lengths 1..6.
        int run_start = -1;
        const int n = static_cast<int>(s.tokens.size());
        for (int i = 0; i <= n; ++i) {
            const bool cap = i < n && capital_initial(s.tokens[static_cast<std::size_t>(i)]);
            if (cap && run_start < 0) run_start = i;
            if (!cap && run_start >= 0) {
                if (i - run_start <= 6) offer(static_cast<int>(si), {run_start, i}, s);
                run_start = -1;
            }
        }
    }
    return candidates;
}

double PhraseClassifier::score(const Phrase& phrase) const {
    if (phrase.empty()) throw usage_error("cannot score an empty phrase");
    const std::vector<double> x = featurize(*this, phrase);
    double z = b;
    for (int d = 0; d < kFeatDim; ++d)
        z += w[static_cast<std::size_t>(d)] * x[static_cast<std::size_t>(d)];
    return sigmoid(z);
}

PhraseClassifier train_phrase_classifier(const Dictionary& dict, const std::string& type,
                                         const std::vector<PhraseCandidate>& candidates,
                                         std::uint64_t seed, std::ostream* warn_stream) {
    const auto pos_it = dict.entries.find(type);
    const std::vector<Phrase> positives =
        pos_it == dict.entries.end() ? std::vector<Phrase>{} : pos_it->second;
    if (positives.empty())
        throw data_error("phrase classifier: no dictionary phrases of type " + type);
    if (positives.size() < 20 && warn_stream)
        *warn_stream << "warning: only " << positives.size() << " dictionary phrases for "
                     << type << "; the phrase classifier may be unreliable\n";

    // Negative pool: candidate phrases plus other types' dictionary phrases,
    // minus anything that is also a positive.
    const std::set<Phrase> positive_set(positives.begin(), positives.end());
    std::set<Phrase> pool_set;
    for (const PhraseCandidate& c : candidates)
        if (!positive_set.count(c.phrase)) pool_set.insert(c.phrase);
    for (const auto& [other_type, phrases] : dict.entries) {
        if (other_type == type) continue;
        for (const Phrase& p : phrases)
            if (!positive_set.count(p)) pool_set.insert(p);
    }
    std::vector<Phrase> pool(pool_set.begin(), pool_set.end());

    Rng rng(seed);
    std::vector<Phrase> negatives;
    if (pool.size() <= positives.size()) {
        negatives = pool;
    } else {
        // Partial Fisher-Yates: the first |positives| slots of a full
        // shuffle, drawn in order.
        for (std::size_t i = 0; i < positives.size(); ++i) {
            const std::size_t j =
                i + static_cast<std::size_t>(rng.below(static_cast<std::uint64_t>(pool.size() - i)));
            std::swap(pool[i], pool[j]);
            negatives.push_back(pool[i]);
        }
    }

    PhraseClassifier clf;
    int next_id = 1;
    auto intern = [&](const Phrase& p) {
        for (const std::string& tok : p)
            if (clf.token_ids.emplace(tok, next_id).second) ++next_id;
    };
    for (const Phrase& p : positives) intern(p);
    for (const Phrase& p : negatives) intern(p);

    clf.emb.assign(static_cast<std::size_t>(next_id),
                   std::vector<double>(PhraseClassifier::kEmbDim, 0.0));
    for (int id = 1; id < next_id; ++id)
        for (int d = 0; d < PhraseClassifier::kEmbDim; ++d)
            clf.emb[static_cast<std::size_t>(id)][static_cast<std::size_t>(d)] =
                rng.uniform(-0.1, 0.1);
    const double bound = 1.0 / std::sqrt(static_cast<double>(kFeatDim));
    clf.w.resize(kFeatDim);
    for (int d = 0; d < kFeatDim; ++d) clf.w[static_cast<std::size_t>(d)] = rng.uniform(-bound, bound);
    clf.b = 0.0;

    struct Example {
        const Phrase* phrase;
        double label;
    };
    std::vector<Example> examples;
    for (const Phrase& p : positives) examples.push_back({&p, 1.0});
    for (const Phrase& p : negatives) examples.push_back({&p, 0.0});

    // Adam over (emb, w, b).
    std::vector<std::vector<double>> emb_m(clf.emb.size(),
                                           std::vector<double>(PhraseClassifier::kEmbDim, 0.0));
    std::vector<std::vector<double>> emb_v = emb_m;
    std::vector<double> w_m(kFeatDim, 0.0);
    std::vector<double> w_v(kFeatDim, 0.0);
    double b_m = 0.0;
    double b_v = 0.0;
    long long step = 0;
    const double lr = 1e-2;
    const double beta1 = 0.9;
    const double beta2 = 0.999;
    const double eps = 1e-8;
    const int epochs = 40;
    const std::size_t batch = 32;

    for (int epoch = 0; epoch < epochs; ++epoch) {
        rng.shuffle(examples);
        for (std::size_t at = 0; at < examples.size(); at += batch) {
            const std::size_t hi = std::min(at + batch, examples.size());
            const double inv_batch = 1.0 / static_cast<double>(hi - at);
            std::map<int, std::vector<double>> emb_g;
            std::vector<double> w_g(kFeatDim, 0.0);
            double b_g = 0.0;
            for (std::size_t e = at; e < hi; ++e) {
                const Phrase& phrase = *examples[e].phrase;
                const std::vector<double> x = featurize(clf, phrase);
                double z = clf.b;
                for (int d = 0; d < kFeatDim; ++d)
                    z += clf.w[static_cast<std::size_t>(d)] * x[static_cast<std::size_t>(d)];
                const double dz = (sigmoid(z) - examples[e].label) * inv_batch;
                for (int d = 0; d < kFeatDim; ++d)
                    w_g[static_cast<std::size_t>(d)] += dz * x[static_cast<std::size_t>(d)];
                b_g += dz;
                const double inv_len = 1.0 / static_cast<double>(phrase.size());
                for (const std::string& tok : phrase) {
                    const int id = clf.token_ids.at(tok);
                    const auto it = emb_g.try_emplace(
                        id, std::vector<double>(PhraseClassifier::kEmbDim, 0.0)).first;
                    for (int d = 0; d < PhraseClassifier::kEmbDim; ++d)
                        it->second[static_cast<std::size_t>(d)] +=
                            dz * clf.w[static_cast<std::size_t>(d)] * inv_len;
                }
            }
            ++step;
            const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(step));
            const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(step));
            auto adam = [&](double& p, double& m, double& v, double g) {
                m = beta1 * m + (1.0 - beta1) * g;
                v = beta2 * v + (1.0 - beta2) * g * g;
                p -= lr * (m / bc1) / (std::sqrt(v / bc2) + eps);
            };
            for (int d = 0; d < kFeatDim; ++d)
                adam(clf.w[static_cast<std::size_t>(d)], w_m[static_cast<std::size_t>(d)],
                     w_v[static_cast<std::size_t>(d)], w_g[static_cast<std::size_t>(d)]);
            adam(clf.b, b_m, b_v, b_g);
            for (const auto& [id, g] : emb_g)
                for (int d = 0; d < PhraseClassifier::kEmbDim; ++d)
                    adam(clf.emb[static_cast<std::size_t>(id)][static_cast<std::size_t>(d)],
                         emb_m[static_cast<std::size_t>(id)][static_cast<std::size_t>(d)],
                         emb_v[static_cast<std::size_t>(id)][static_cast<std::size_t>(d)],
                         g[static_cast<std::size_t>(d)]);
        }
    }
    return clf;
}

std::vector<PhraseCandidate> rank_candidates(std::vector<PhraseCandidate> candidates,
                                             const PhraseClassifier& classifier) {
    for (PhraseCandidate& c : candidates) c.score = classifier.score(c.phrase);
    std::sort(candidates.begin(), candidates.end(),
              [](const PhraseCandidate& a, const PhraseCandidate& b) {
                  if (a.score != b.score) return a.score > b.score;
                  return a.phrase < b.phrase;
              });
    return candidates;
}

Block build_block(const std::vector<PhraseCandidate>& candidates,
                  const PhraseClassifier& classifier, double keep_fraction) {
    if (!(keep_fraction >= 0.0 && keep_fraction <= 1.0))
        throw usage_error("keep_fraction must be in [0, 1]");
    Block block;
    block.keep_fraction = keep_fraction;
    const std::vector<PhraseCandidate> ranked = rank_candidates(candidates, classifier);
    // The 1e-9 slack keeps exact products like 0.1 * 30 from rounding up.
    const auto keep = static_cast<std::size_t>(std::max(
        0.0, std::ceil(keep_fraction * static_cast<double>(ranked.size()) - 1e-9)));
    block.admitted.assign(ranked.begin(),
                          ranked.begin() + static_cast<std::ptrdiff_t>(std::min(keep, ranked.size())));
    return block;
}

double estimate_block_accuracy(const Block& block, const Corpus& dev, const std::string& type) {
    if (block.admitted.empty()) return 0.0;
    bool any_gold = false;
    std::set<Phrase> gold_surfaces;
    for (const Sentence& s : dev.sentences) {
        if (!s.has_gold) continue;
        any_gold = true;
        for (const GoldMention& g : s.gold)
            if (g.type == type)
                gold_surfaces.insert(Phrase(s.tokens.begin() + g.span.start,
                                            s.tokens.begin() + g.span.end));
    }
    if (!any_gold)
        throw data_error("block accuracy estimation needs gold annotation in the dev corpus");
    long long hits = 0;
    for (const PhraseCandidate& c : block.admitted)
        if (gold_surfaces.count(c.phrase)) ++hits;
    return snap_to_grid(static_cast<double>(hits) / static_cast<double>(block.admitted.size()));
}

void write_block_dump(const std::vector<PhraseCandidate>& ranked, std::size_t admitted_count,
                      const std::string& path) {
    std::ofstream out(path);
    if (!out) throw data_error("cannot write block dump: " + path);
    for (std::size_t i = 0; i < ranked.size(); ++i) {
        std::string joined;
        for (std::size_t t = 0; t < ranked[i].phrase.size(); ++t) {
            if (t) joined += ' ';
            joined += ranked[i].phrase[t];
        }
        out << joined << '\t' << ranked[i].score << '\t' << (i < admitted_count ? 1 : 0)
            << '\n';
    }
    if (!out) throw data_error("failed while writing block dump: " + path);
}

TrainResult joint_train(const Corpus& corpus, const std::vector<Instance>& instances,
                        const std::string& entity_type, const Block& block,
                        const NoiseProfile& profile, const TrainConfig& cfg, double lambda,
                        std::ostream* log_stream) {
    const auto entry = profile.by_type.find(entity_type);
    if (entry == profile.by_type.end())
        throw usage_error("noise profile has no entry for type " + entity_type);

    TrainPool positive;
    positive.p = entry->second.p;
    for (const Instance& inst : instances) {
        if (inst.entity_type != entity_type) continue;
        if (inst.sent_index < 0 ||
            inst.sent_index >= static_cast<int>(corpus.sentences.size()))
            throw data_error("instance sentence index out of range");
        positive.items.push_back(
            {&corpus.sentences[static_cast<std::size_t>(inst.sent_index)], inst.span});
    }
    if (positive.items.empty())
        throw data_error("no weak instances of type " + entity_type);

    TrainPool negatives;
    negatives.p = block.p_blk;
    negatives.lambda = lambda;
    for (const PhraseCandidate& c : block.admitted)
        for (const SpanRef& occ : c.occurrences) {
            if (occ.sent_index < 0 ||
                occ.sent_index >= static_cast<int>(corpus.sentences.size()))
                throw data_error("block occurrence sentence index out of range");
            negatives.items.push_back(
                {&corpus.sentences[static_cast<std::size_t>(occ.sent_index)], occ.span});
        }

    std::vector<TrainPool> pools = {positive};
    if (!negatives.items.empty() && lambda != 0.0) pools.push_back(negatives);
    const Vocab vocab = build_vocab(corpus, cfg.min_count);
    return train_pools(vocab, entity_type, pools, cfg, log_stream);
}

} // namespace hgl
