#include "hgl/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "json.hpp"

#include "hgl/errors.hpp"

namespace hgl {

std::vector<ScoredInstance> score_instances(const DenoiserModel& model, const Corpus& corpus,
                                            const std::vector<Instance>& instances) {
    std::vector<ScoredInstance> scored;
    for (const Instance& inst : instances) {
        if (inst.entity_type != model.entity_type) continue;
        if (inst.sent_index < 0 ||
            inst.sent_index >= static_cast<int>(corpus.sentences.size()))
            throw data_error("instance sentence index out of range");
        const Sentence& s = corpus.sentences[static_cast<std::size_t>(inst.sent_index)];
        const MarkedInstance minst = mark_instance(model, s, inst.span);
        ForwardCache cache;
        scored.push_back({inst, encode_and_score(model, minst, cache)});
    }
    return scored;
}

RankedResult make_ranking(const std::vector<ScoredInstance>& scored) {
    RankedResult ranked;
    ranked.items.reserve(scored.size());
    std::vector<std::size_t> order(scored.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return scored[a].score > scored[b].score;
    });
    for (const std::size_t i : order) {
        const ScoredInstance& si = scored[i];
        if (!si.inst.gold.has_value())
            throw data_error("evaluation needs gold flags on every instance");
        ranked.items.push_back(
            {si.score, *si.inst.gold, si.inst.span.end - si.inst.span.start});
    }
    return ranked;
}

PRCurve pr_auc(const RankedResult& ranked) {
    long long total_gold = 0;
    for (const RankedItem& item : ranked.items)
        if (item.gold) ++total_gold;
    if (total_gold == 0)
        throw data_error("precision-recall is undefined without a single gold positive");

    PRCurve curve;
    long long seen_gold = 0;
    double precision_sum = 0.0;
    for (std::size_t i = 0; i < ranked.items.size(); ++i) {
        if (!ranked.items[i].gold) continue;
        ++seen_gold;
        const double precision =
            static_cast<double>(seen_gold) / static_cast<double>(i + 1);
        precision_sum += precision;
        curve.points.push_back({static_cast<long long>(i + 1),
                                static_cast<double>(seen_gold) / static_cast<double>(total_gold),
                                precision});
    }
    curve.auc = precision_sum / static_cast<double>(total_gold);
    return curve;
}

std::vector<PrecisionAtRecall> precision_at_recall(const RankedResult& ranked,
                                                   const std::vector<double>& levels) {
    long long total_gold_tokens = 0;
    for (const RankedItem& item : ranked.items)
        if (item.gold) total_gold_tokens += item.span_tokens;
    if (total_gold_tokens == 0)
        throw data_error("precision-recall is undefined without a single gold positive");

    std::vector<PrecisionAtRecall> out;
    for (const double level : levels) {
        PrecisionAtRecall entry;
        entry.level = level;
        long long tokens = 0;
        long long gold_tokens = 0;
        for (std::size_t i = 0; i < ranked.items.size(); ++i) {
            tokens += ranked.items[i].span_tokens;
            if (ranked.items[i].gold) gold_tokens += ranked.items[i].span_tokens;
            const double recall =
                static_cast<double>(gold_tokens) / static_cast<double>(total_gold_tokens);
            if (recall >= level) {
                entry.reachable = true;
                entry.prefix = static_cast<long long>(i + 1);
                entry.precision =
                    static_cast<double>(gold_tokens) / static_cast<double>(tokens);
                break;
            }
        }
        out.push_back(entry);
    }
    return out;
}

F1Result span_f1(const std::set<SpanKey>& predicted, const std::set<SpanKey>& gold) {
    long long hits = 0;
    for (const SpanKey& k : predicted)
        if (gold.count(k)) ++hits;
    F1Result r;
    r.precision = predicted.empty()
                      ? 0.0
                      : static_cast<double>(hits) / static_cast<double>(predicted.size());
    r.recall =
        gold.empty() ? 0.0 : static_cast<double>(hits) / static_cast<double>(gold.size());
    r.f1 = r.precision + r.recall == 0.0
               ? 0.0
               : 2.0 * r.precision * r.recall / (r.precision + r.recall);
    return r;
}

std::set<SpanKey> span_set(const Corpus& corpus) {
    std::set<SpanKey> out;
    for (const Sentence& s : corpus.sentences)
        for (const GoldMention& g : s.gold)
            out.insert({s.doc_id, s.sent_id, g.span, g.type});
    return out;
}

Corpus export_denoised(const Corpus& corpus, const std::vector<ScoredInstance>& scored,
                       const NoiseProfile& profile) {
    // Per type, keep the top round(N*p) by confidence.
    std::map<std::string, std::vector<std::size_t>> by_type;
    for (std::size_t i = 0; i < scored.size(); ++i)
        by_type[scored[i].inst.entity_type].push_back(i);

    struct Claim {
        double score;
        std::string type;
        std::size_t index;
    };
    std::vector<Claim> claims;
    for (auto& [type, ids] : by_type) {
        const auto entry = profile.by_type.find(type);
        if (entry == profile.by_type.end())
            throw usage_error("noise profile has no entry for type " + type);
        std::stable_sort(ids.begin(), ids.end(), [&](std::size_t a, std::size_t b) {
            return scored[a].score > scored[b].score;
        });
        const long long keep =
            std::min<long long>(static_cast<long long>(ids.size()),
                                std::llround(static_cast<double>(entry->second.n) *
                                             entry->second.p));
        for (long long k = 0; k < keep; ++k)
            claims.push_back({scored[ids[static_cast<std::size_t>(k)]].score, type,
                              ids[static_cast<std::size_t>(k)]});
    }

    // Conflicting spans: higher confidence wins, ties break toward the
    // lexicographically smaller type.
    std::sort(claims.begin(), claims.end(), [](const Claim& a, const Claim& b) {
        if (a.score != b.score) return a.score > b.score;
        if (a.type != b.type) return a.type < b.type;
        return a.index < b.index;
    });
    std::map<int, std::vector<Span>> taken;
    std::map<int, std::vector<GoldMention>> accepted;
    for (const Claim& c : claims) {
        const Instance& inst = scored[c.index].inst;
        if (inst.sent_index < 0 ||
            inst.sent_index >= static_cast<int>(corpus.sentences.size()))
            throw data_error("instance sentence index out of range");
        bool overlaps = false;
        for (const Span& held : taken[inst.sent_index])
            if (inst.span.start < held.end && held.start < inst.span.end) overlaps = true;
        if (overlaps) continue;
        taken[inst.sent_index].push_back(inst.span);
        accepted[inst.sent_index].push_back({inst.span, c.type});
    }

    Corpus denoised;
    denoised.sentences.reserve(corpus.sentences.size());
    for (std::size_t si = 0; si < corpus.sentences.size(); ++si) {
        Sentence s;
        s.tokens = corpus.sentences[si].tokens;
        s.doc_id = corpus.sentences[si].doc_id;
        s.sent_id = corpus.sentences[si].sent_id;
        s.has_gold = true; // every surviving label is asserted; the rest is O
        const auto it = accepted.find(static_cast<int>(si));
        if (it != accepted.end()) {
            s.gold = it->second;
            std::sort(s.gold.begin(), s.gold.end(),
                      [](const GoldMention& a, const GoldMention& b) { return a.span < b.span; });
        }
        denoised.sentences.push_back(std::move(s));
    }
    return denoised;
}

void write_eval_report(const std::map<std::string, TypeEvalReport>& by_type,
                       const std::string& path) {
    nlohmann::json root;
    for (const auto& [type, report] : by_type) {
        nlohmann::json entry;
        entry["auc"] = report.curve.auc;
        entry["pr_points"] = report.curve.points.size();
        nlohmann::json levels;
        for (const PrecisionAtRecall& p : report.p_at_r) {
            nlohmann::json cell;
            cell["reachable"] = p.reachable;
            if (p.reachable) {
                cell["precision"] = p.precision;
                cell["prefix"] = p.prefix;
            }
            char key[32];
            std::snprintf(key, sizeof key, "%.2f", p.level);
            levels[key] = cell;
        }
        entry["precision_at_recall"] = levels;
        entry["span_precision"] = report.span.precision;
        entry["span_recall"] = report.span.recall;
        entry["span_f1"] = report.span.f1;
        root[type] = entry;
    }
    std::ofstream out(path);
    if (!out) throw data_error("cannot write eval report: " + path);
    out << root.dump(2) << '\n';
    if (!out) throw data_error("failed while writing eval report: " + path);
}

void write_pr_csv(const PRCurve& curve, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw data_error("cannot write PR curve: " + path);
    out << "rank,recall,precision\n";
    for (const PRPoint& p : curve.points) {
        char line[96];
        std::snprintf(line, sizeof line, "%lld,%.9f,%.9f\n", p.rank, p.recall, p.precision);
        out << line;
    }
    if (!out) throw data_error("failed while writing PR curve: " + path);
}

} // namespace hgl
