#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "hgl/corpus.hpp"
#include "hgl/dictionary.hpp"
#include "hgl/noise.hpp"
#include "hgl/train.hpp"

namespace hgl {

struct SpanRef {
    int sent_index = 0;
    Span span;
    bool operator==(const SpanRef&) const = default;
};

// A distinct phrase observed at one or more corpus spans that the dictionary
// did not match for the target type.
struct PhraseCandidate {
    Phrase phrase;
    std::vector<SpanRef> occurrences;
    double score = 0.0;
};

// Top slice of the candidate ranking: the suspected false negatives fed to
// joint training as a second pool. p_blk is the block's estimated
// true-mention rate.
struct Block {
    std::vector<PhraseCandidate> admitted;
    double keep_fraction = 0.10;
    double p_blk = 0.0;
};

// Candidate spans come from the auxiliary candidate column when the corpus
// has one, otherwise from a capitalized-run chunker (maximal runs of
// capital-initial tokens, lengths 1..6). Spans weak-matched for `type` and
// phrases listed in the type's dictionary are excluded; the result is
// deduplicated by token sequence in first-occurrence order.
std::vector<PhraseCandidate> extract_candidates(const Corpus& corpus, const Dictionary& dict,
                                                const std::string& type);

// Context-free phrase scorer: mean token-identity embedding plus shape
// features (capitalization pattern, phrase length, token length, hashed
// suffix 2-/3-grams) through an affine+sigmoid head.
struct PhraseClassifier {
    static constexpr int kEmbDim = 16;
    std::map<std::string, int> token_ids; // 0 is reserved for unseen tokens
    std::vector<std::vector<double>> emb; // [token id][kEmbDim]
    std::vector<double> w;
    double b = 0.0;

    double score(const Phrase& phrase) const;
};

// Positives are the type's dictionary phrases; negatives are an equal-size
// seeded sample of candidate phrases and other types' dictionary phrases.
// Fewer than 20 positives warns to `warn_stream`; zero positives is an
// error.
PhraseClassifier train_phrase_classifier(const Dictionary& dict, const std::string& type,
                                         const std::vector<PhraseCandidate>& candidates,
                                         std::uint64_t seed,
                                         std::ostream* warn_stream = nullptr);

// Score every candidate and sort by score descending, ties by phrase
// ascending.
std::vector<PhraseCandidate> rank_candidates(std::vector<PhraseCandidate> candidates,
                                             const PhraseClassifier& classifier);

// Keep the top ceil(keep_fraction * count) of the ranking. p_blk is left at
// its default; estimate it from dev gold or set it from config.
Block build_block(const std::vector<PhraseCandidate>& candidates,
                  const PhraseClassifier& classifier, double keep_fraction);

// Fraction of admitted phrases whose sequence appears as a gold mention of
// the type in the dev corpus, snapped to the 5% grid.
double estimate_block_accuracy(const Block& block, const Corpus& dev, const std::string& type);

// Audit dump over the full ranking: `phrase<TAB>score<TAB>admitted{0,1}`.
void write_block_dump(const std::vector<PhraseCandidate>& ranked, std::size_t admitted_count,
                      const std::string& path);

// One model over two pools: the type's weak instances under its dataset
// accuracy p, and the block's occurrences under p_blk, the block loss scaled
// by lambda. An empty block (or lambda 0) reduces exactly to train() on the
// positive pool.
TrainResult joint_train(const Corpus& corpus, const std::vector<Instance>& instances,
                        const std::string& entity_type, const Block& block,
                        const NoiseProfile& profile, const TrainConfig& cfg,
                        double lambda = 1.0, std::ostream* log_stream = nullptr);

} // namespace hgl
