#pragma once

#include <map>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "hgl/corpus.hpp"
#include "hgl/model.hpp"
#include "hgl/noise.hpp"
#include "hgl/weak_label.hpp"

namespace hgl {

struct ScoredInstance {
    Instance inst;
    double score = 0.0;
};

struct RankedItem {
    double score = 0.0;
    bool gold = false;
    int span_tokens = 1; // weight for the token-level metrics
};

// Confidence ranking, scores non-increasing, ties in dataset order.
struct RankedResult {
    std::vector<RankedItem> items;
};

struct PRPoint {
    long long rank = 0; // 1-based prefix length ending at a gold positive
    double recall = 0.0;
    double precision = 0.0;
};

struct PRCurve {
    std::vector<PRPoint> points;
    double auc = 0.0; // average precision over gold-positive ranks
};

struct PrecisionAtRecall {
    double level = 0.0;
    bool reachable = false;
    long long prefix = 0;
    double precision = 0.0;
};

struct F1Result {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

// One labeled mention location for exact span matching.
struct SpanKey {
    std::string doc_id;
    int sent_id = 0;
    Span span;
    std::string type;
    bool operator==(const SpanKey&) const = default;
    bool operator<(const SpanKey& o) const {
        return std::tie(doc_id, sent_id, span.start, span.end, type) <
               std::tie(o.doc_id, o.sent_id, o.span.start, o.span.end, o.type);
    }
};

// Score every instance of the model's type with a gradient-free forward
// pass; instances of other types are skipped.
std::vector<ScoredInstance> score_instances(const DenoiserModel& model, const Corpus& corpus,
                                            const std::vector<Instance>& instances);

// Sort descending by score, ties keeping input order. Every instance must
// carry a gold flag; span_tokens is the span length.
RankedResult make_ranking(const std::vector<ScoredInstance>& scored);

// Average precision: the mean of precision at each gold-positive rank, one
// PR point per such rank. Zero positives is an undefined metric.
PRCurve pr_auc(const RankedResult& ranked);

// Token-weighted precision at the shortest prefix whose recall reaches each
// level; levels the recall ceiling never reaches come back unreachable.
std::vector<PrecisionAtRecall> precision_at_recall(const RankedResult& ranked,
                                                   const std::vector<double>& levels);

// Exact-match micro precision/recall/F1 over (doc, sent, span, type); empty
// denominators give 0.
F1Result span_f1(const std::set<SpanKey>& predicted, const std::set<SpanKey>& gold);

// All gold mentions of a corpus as span keys.
std::set<SpanKey> span_set(const Corpus& corpus);

// Keep each type's top round(N*p) instances by confidence (N and p from the
// profile), resolve overlapping claims by higher confidence then
// lexicographic type, and return the corpus relabeled with the survivors.
Corpus export_denoised(const Corpus& corpus, const std::vector<ScoredInstance>& scored,
                       const NoiseProfile& profile);

struct TypeEvalReport {
    PRCurve curve;
    std::vector<PrecisionAtRecall> p_at_r;
    F1Result span;
};

// JSON report keyed by type; PR curves go to CSV as `rank,recall,precision`.
void write_eval_report(const std::map<std::string, TypeEvalReport>& by_type,
                       const std::string& path);
void write_pr_csv(const PRCurve& curve, const std::string& path);

} // namespace hgl
