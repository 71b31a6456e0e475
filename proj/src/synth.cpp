#include "hgl/synth.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <utility>

#include "hgl/errors.hpp"
#include "hgl/rng.hpp"
#include "hgl/weak_label.hpp"

namespace hgl {

namespace {

// Cumulative-weight sampler over ranks 1..n with weight rank^-alpha.
struct ZipfSampler {
    std::vector<double> cum;

    ZipfSampler(long long n, double alpha) {
        cum.resize(static_cast<std::size_t>(n));
        double total = 0.0;
        for (long long k = 0; k < n; ++k) {
            total += std::pow(static_cast<double>(k + 1), -alpha);
            cum[static_cast<std::size_t>(k)] = total;
        }
    }

    long long draw(Rng& rng) const {
        const double u = rng.uniform() * cum.back();
        return std::lower_bound(cum.begin(), cum.end(), u) - cum.begin();
    }
};

// Token surface forms. Entity-name tokens are capitalized with a consistent
// suffix so entity identity is carried by shape as well as identity;
// distractor tokens are capitalized with a different suffix (so plain
// capitalization is not the truth signal); junk and filler are lowercase and
// therefore invisible to a capitalization chunker.
std::string name_token(std::size_t type_index, long long k) {
    return "N" + std::to_string(type_index) + "k" + std::to_string(k) + "ia";
}
std::string distractor_token(long long k) { return "D" + std::to_string(k) + "ton"; }
std::string filler_token(long long k) { return "f" + std::to_string(k); }
std::string junk_token(std::size_t type_index, long long k) {
    return "j" + std::to_string(type_index) + "w" + std::to_string(k);
}
std::string oneoff_token(std::size_t type_index, long long counter) {
    return "u" + std::to_string(type_index) + "n" + std::to_string(counter);
}

bool contains_infix(const Phrase& hay, const Phrase& needle) {
    if (needle.size() > hay.size()) return false;
    for (std::size_t off = 0; off + needle.size() <= hay.size(); ++off)
        if (std::equal(needle.begin(), needle.end(), hay.begin() + off)) return true;
    return false;
}

// No phrase may be a contiguous sub-run of another. A shorter phrase buried
// inside a longer one would match mid-run under longest-first matching and
// turn a planting into a spurious partial hit.
bool infix_conflict(const std::vector<Phrase>& inventory, const Phrase& candidate) {
    for (const Phrase& p : inventory)
        if (contains_infix(p, candidate) || contains_infix(candidate, p)) return true;
    return false;
}

enum class PlantKind { matched, withheld, noise, distractor };

struct Planting {
    int type_index = -1; // -1 for distractors
    PlantKind kind = PlantKind::distractor;
    Phrase phrase;
};

long long parse_ll(const std::string& key, const std::string& value) {
    std::size_t used = 0;
    long long out = 0;
    try {
        out = std::stoll(value, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != value.size() || value.empty())
        throw data_error("synth config: key '" + key + "' needs an integer, got '" + value + "'");
    return out;
}

double parse_d(const std::string& key, const std::string& value) {
    std::size_t used = 0;
    double out = 0;
    try {
        out = std::stod(value, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != value.size() || value.empty())
        throw data_error("synth config: key '" + key + "' needs a number, got '" + value + "'");
    return out;
}

void validate(const SynthConfig& cfg) {
    if (cfg.types.empty()) throw data_error("synth config: at least one entity type required");
    std::set<std::string> seen;
    for (const SynthTypeParams& tp : cfg.types) {
        if (tp.type.empty() || tp.type.find_first_of(" \t\n=.") != std::string::npos)
            throw data_error("synth config: bad type name '" + tp.type + "'");
        if (!seen.insert(tp.type).second)
            throw data_error("synth config: duplicate type '" + tp.type + "'");
        if (tp.instances < 1 || tp.instances > 10'000'000)
            throw data_error("synth config: instances out of range for " + tp.type);
        if (!(tp.noise_rate >= 0.0 && tp.noise_rate <= 1.0))
            throw data_error("synth config: noise_rate must be in [0, 1] for " + tp.type);
        if (!(tp.ambiguity >= 0.0 && tp.ambiguity < 1.0))
            throw data_error("synth config: ambiguity must be in [0, 1) for " + tp.type);
        if (!(tp.fn >= 0.0 && tp.fn <= 0.9))
            throw data_error("synth config: fn must be in [0, 0.9] for " + tp.type);
        if (tp.noise_rate > 0.0 && tp.ambiguity == 0.0)
            throw data_error("synth config: noise requested for " + tp.type +
                             " but ambiguity is 0 (no junk phrases can enter the dictionary)");
    }
    if (cfg.name_tokens < 10) throw data_error("synth config: name_tokens must be >= 10");
    if (cfg.filler_tokens < 5) throw data_error("synth config: filler_tokens must be >= 5");
    if (!(cfg.dev_fraction >= 0.0 && cfg.dev_fraction <= 0.5))
        throw data_error("synth config: dev_fraction must be in [0, 0.5]");
    if (cfg.distractor_phrases < -1)
        throw data_error("synth config: distractor_phrases must be >= 0 (or -1 for auto)");
}

} // namespace

SynthConfig synth_config_from_kv(const std::map<std::string, std::string>& kv) {
    static const std::set<std::string> base_keys = {
        "types",        "instances",     "noise_rate",        "ambiguity", "fn",
        "name_tokens",  "filler_tokens", "dev_fraction",      "distractor_phrases"};
    static const std::set<std::string> per_type = {"instances", "noise_rate", "ambiguity", "fn"};

    SynthConfig cfg;
    std::vector<std::string> names = {"ENT"};
    if (const auto it = kv.find("types"); it != kv.end()) {
        names.clear();
        std::string rest = it->second;
        while (!rest.empty()) {
            const std::size_t comma = rest.find(',');
            names.push_back(rest.substr(0, comma));
            rest = comma == std::string::npos ? "" : rest.substr(comma + 1);
        }
        if (names.empty()) throw data_error("synth config: 'types' is empty");
    }

    for (const auto& [key, value] : kv) {
        const std::size_t dot = key.find('.');
        const std::string base = key.substr(0, dot);
        if (base_keys.count(base) == 0)
            throw data_error("synth config: unknown key '" + key + "'");
        if (dot != std::string::npos) {
            if (per_type.count(base) == 0)
                throw data_error("synth config: key '" + base + "' takes no type suffix");
            const std::string type = key.substr(dot + 1);
            if (std::find(names.begin(), names.end(), type) == names.end())
                throw data_error("synth config: suffix of '" + key + "' names no declared type");
        }
        (void)value;
    }

    for (const std::string& name : names) {
        SynthTypeParams tp;
        tp.type = name;
        auto pick = [&](const std::string& base) -> const std::string* {
            if (const auto it = kv.find(base + "." + name); it != kv.end()) return &it->second;
            if (const auto it = kv.find(base); it != kv.end()) return &it->second;
            return nullptr;
        };
        if (const std::string* v = pick("instances")) tp.instances = parse_ll("instances", *v);
        if (const std::string* v = pick("noise_rate")) tp.noise_rate = parse_d("noise_rate", *v);
        if (const std::string* v = pick("ambiguity")) tp.ambiguity = parse_d("ambiguity", *v);
        if (const std::string* v = pick("fn")) tp.fn = parse_d("fn", *v);
        cfg.types.push_back(tp);
    }
    if (const auto it = kv.find("name_tokens"); it != kv.end())
        cfg.name_tokens = parse_ll("name_tokens", it->second);
    if (const auto it = kv.find("filler_tokens"); it != kv.end())
        cfg.filler_tokens = parse_ll("filler_tokens", it->second);
    if (const auto it = kv.find("dev_fraction"); it != kv.end())
        cfg.dev_fraction = parse_d("dev_fraction", it->second);
    if (const auto it = kv.find("distractor_phrases"); it != kv.end())
        cfg.distractor_phrases = parse_ll("distractor_phrases", it->second);
    validate(cfg);
    return cfg;
}

SynthOutput synth_generate(const SynthConfig& cfg, std::uint64_t seed) {
    validate(cfg);
    Rng rng(seed);
    const ZipfSampler filler_zipf(cfg.filler_tokens, 1.0);
    const ZipfSampler name_zipf(cfg.name_tokens, 1.0);

    SynthOutput out;
    std::vector<Planting> plantings;
    long long withheld_phrase_total = 0;

    for (std::size_t t = 0; t < cfg.types.size(); ++t) {
        const SynthTypeParams& tp = cfg.types[t];
        const long long n_noise = std::llround(tp.noise_rate * static_cast<double>(tp.instances));
        const long long n_matched = tp.instances - n_noise;
        const long long mass =
            std::llround(static_cast<double>(n_matched) / (1.0 - tp.fn));

        // Popularity-ranked, infix-free phrase inventory, so every planted
        // occurrence round-trips through the labeler exactly — no phrase can
        // fire inside another's planting.
        const long long t_phr = std::max<long long>(40, n_matched / 8);
        std::vector<Phrase> truths;
        truths.reserve(static_cast<std::size_t>(t_phr));
        static const int kLengths[4] = {1, 2, 2, 3};
        for (long long k = 0; k < t_phr; ++k) {
            Phrase candidate;
            bool ok = false;
            for (int attempt = 0; attempt < 200 && !ok; ++attempt) {
                candidate.clear();
                const int len = kLengths[rng.uniform_int(0, 3)];
                for (int i = 0; i < len; ++i)
                    candidate.push_back(name_token(t, name_zipf.draw(rng)));
                ok = !infix_conflict(truths, candidate);
            }
            if (!ok)
                throw data_error("synth: could not build a prefix-free phrase inventory for " +
                                 tp.type + " (raise name_tokens)");
            truths.push_back(std::move(candidate));
        }

        // Mention mass over the inventory.
        const ZipfSampler phrase_zipf(t_phr, 0.8);
        std::vector<long long> counts(static_cast<std::size_t>(t_phr), 0);
        for (long long i = 0; i < mass; ++i)
            ++counts[static_cast<std::size_t>(phrase_zipf.draw(rng))];

        // Withhold whole phrases until the withheld occurrence mass hits the
        // target: greedy first-fit over descending counts packs within the
        // smallest realized count.
        const long long target_withheld = mass - n_matched;
        std::vector<std::size_t> by_count(counts.size());
        for (std::size_t i = 0; i < counts.size(); ++i) by_count[i] = i;
        std::sort(by_count.begin(), by_count.end(), [&](std::size_t a, std::size_t b) {
            if (counts[a] != counts[b]) return counts[a] > counts[b];
            return a < b;
        });
        std::vector<char> withheld(counts.size(), 0);
        long long withheld_mass = 0;
        for (const std::size_t idx : by_count) {
            if (counts[idx] == 0) break;
            if (withheld_mass + counts[idx] <= target_withheld) {
                withheld[idx] = 1;
                withheld_mass += counts[idx];
                ++withheld_phrase_total;
                if (withheld_mass == target_withheld) break;
            }
        }
        if (std::llabs(withheld_mass - target_withheld) >
            std::llround(0.02 * static_cast<double>(mass)))
            throw data_error("synth: cannot withhold the requested mention fraction for " +
                             tp.type);

        // Junk dictionary entries. The ambiguity knob fixes how much of the
        // type's dictionary is junk; each noise instance consumes one junk
        // phrase (planted exactly once), so the requested noise rate is
        // infeasible when the junk budget is smaller than the noise count.
        const long long kept_cnt =
            static_cast<long long>(counts.size()) -
            std::count(withheld.begin(), withheld.end(), char(1));
        const long long junk_total = std::llround(
            tp.ambiguity / (1.0 - tp.ambiguity) * static_cast<double>(kept_cnt));
        if (n_noise > junk_total)
            throw data_error(
                "synth: ambiguity " + std::to_string(tp.ambiguity) + " yields only " +
                std::to_string(junk_total) + " junk phrases for " + tp.type + " but " +
                std::to_string(n_noise) + " noise instances were requested");
        std::vector<Phrase> junk;
        junk.reserve(static_cast<std::size_t>(junk_total));
        if (tp.noise_rate <= 0.4) {
            // Scattered repeated junk: distinct two-token combos over a
            // shared junk vocabulary (roughly three uses per token), so the
            // tokens clear the vocabulary frequency cutoff.
            long long n_jtok =
                std::max<long long>(20, std::llround(static_cast<double>(n_noise) * 2.0 / 3.0));
            while (n_jtok * n_jtok < 2 * junk_total) ++n_jtok;
            std::set<std::pair<long long, long long>> used;
            for (long long j = 0; j < junk_total; ++j) {
                std::pair<long long, long long> combo;
                for (int attempt = 0; attempt < 1000; ++attempt) {
                    combo = {static_cast<long long>(rng.below(static_cast<std::uint64_t>(n_jtok))),
                             static_cast<long long>(rng.below(static_cast<std::uint64_t>(n_jtok)))};
                    if (used.insert(combo).second) break;
                    if (attempt == 999)
                        throw data_error("synth: junk vocabulary exhausted for " + tp.type);
                }
                junk.push_back({junk_token(t, combo.first), junk_token(t, combo.second)});
            }
        } else {
            // One-off junk floods: every phrase is two fresh tokens that
            // appear exactly once in the corpus, fall below the frequency
            // cutoff, and collapse to the shared out-of-vocabulary id.
            long long counter = 0;
            for (long long j = 0; j < junk_total; ++j)
                junk.push_back({oneoff_token(t, counter++), oneoff_token(t, counter++)});
        }

        // Register plantings: every drawn occurrence of every phrase, plus
        // one planting for each of the first n_noise junk phrases.
        for (std::size_t k = 0; k < counts.size(); ++k)
            for (long long c = 0; c < counts[k]; ++c)
                plantings.push_back({static_cast<int>(t),
                                     withheld[k] ? PlantKind::withheld : PlantKind::matched,
                                     truths[k]});
        for (long long j = 0; j < n_noise; ++j)
            plantings.push_back({static_cast<int>(t), PlantKind::noise,
                                 junk[static_cast<std::size_t>(j)]});

        // Dictionary: kept true phrases plus all junk entries.
        std::vector<Phrase>& entries = out.dict.entries[tp.type];
        for (std::size_t k = 0; k < truths.size(); ++k)
            if (!withheld[k]) entries.push_back(truths[k]);
        for (const Phrase& p : junk) entries.push_back(p);
        std::sort(entries.begin(), entries.end());
        entries.erase(std::unique(entries.begin(), entries.end()), entries.end());
    }

    // Capitalized non-entity phrases. They give the candidate chunker
    // genuine negatives and are sized against the withheld-phrase count so a
    // fixed screening fraction has a meaningful budget; each is planted
    // twice so its tokens clear the vocabulary cutoff.
    const long long d_phr = cfg.distractor_phrases >= 0 ? cfg.distractor_phrases
                                                        : 9 * withheld_phrase_total;
    if (d_phr > 0) {
        long long n_dtok = 20;
        while (n_dtok * n_dtok < 2 * d_phr) ++n_dtok;
        std::set<Phrase> used;
        for (long long k = 0; k < d_phr; ++k) {
            Phrase candidate;
            for (int attempt = 0; attempt < 1000; ++attempt) {
                candidate.clear();
                const int len = static_cast<int>(rng.uniform_int(1, 2));
                for (int i = 0; i < len; ++i)
                    candidate.push_back(
                        distractor_token(static_cast<long long>(rng.below(static_cast<std::uint64_t>(n_dtok)))));
                if (used.insert(candidate).second) break;
                if (attempt == 999)
                    throw data_error("synth: distractor vocabulary exhausted");
            }
            plantings.push_back({-1, PlantKind::distractor, candidate});
            plantings.push_back({-1, PlantKind::distractor, candidate});
        }
    }

    // One sentence per planting: filler padding on both sides keeps every
    // planting a maximal capitalized run and keeps matches exact.
    std::vector<Sentence> sentences;
    sentences.reserve(plantings.size());
    std::vector<Span> plant_spans(plantings.size());
    for (std::size_t i = 0; i < plantings.size(); ++i) {
        const Planting& pl = plantings[i];
        Sentence s;
        const int left = static_cast<int>(rng.uniform_int(1, 3));
        const int right = static_cast<int>(rng.uniform_int(1, 3));
        for (int j = 0; j < left; ++j) s.tokens.push_back(filler_token(filler_zipf.draw(rng)));
        const int start = static_cast<int>(s.tokens.size());
        for (const std::string& tok : pl.phrase) s.tokens.push_back(tok);
        const int end = static_cast<int>(s.tokens.size());
        for (int j = 0; j < right; ++j) s.tokens.push_back(filler_token(filler_zipf.draw(rng)));
        s.has_gold = true;
        if (pl.kind == PlantKind::matched || pl.kind == PlantKind::withheld)
            s.gold.push_back({{start, end}, cfg.types[static_cast<std::size_t>(pl.type_index)].type});
        plant_spans[i] = {start, end};
        sentences.push_back(std::move(s));
    }

    // Interleave everything, then stamp document blocks of 50 sentences.
    std::vector<std::size_t> order(plantings.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    rng.shuffle(order);
    std::vector<std::size_t> position(plantings.size());
    for (std::size_t pos = 0; pos < order.size(); ++pos) {
        sentences[order[pos]].doc_id = "d" + std::to_string(pos / 50);
        position[order[pos]] = pos;
    }

    // Stratified dev split: within each (type, kind) stratum the members
    // with the smallest corpus positions go to dev — a uniform subset, since
    // positions were just shuffled. Distractors always stay in train.
    std::vector<char> to_dev(plantings.size(), 0);
    for (std::size_t t = 0; t < cfg.types.size(); ++t)
        for (const PlantKind kind :
             {PlantKind::matched, PlantKind::withheld, PlantKind::noise}) {
            std::vector<std::size_t> members;
            for (std::size_t i = 0; i < plantings.size(); ++i)
                if (plantings[i].type_index == static_cast<int>(t) && plantings[i].kind == kind)
                    members.push_back(i);
            std::sort(members.begin(), members.end(),
                      [&](std::size_t a, std::size_t b) { return position[a] < position[b]; });
            const std::size_t take = static_cast<std::size_t>(std::llround(
                cfg.dev_fraction * static_cast<double>(members.size())));
            for (std::size_t i = 0; i < take; ++i) to_dev[members[i]] = 1;
        }

    // Sentence ids are positional within each corpus file, matching what a
    // load of the written file assigns.
    for (std::size_t pos = 0; pos < order.size(); ++pos) {
        const std::size_t i = order[pos];
        Corpus& side = to_dev[i] ? out.dev : out.train;
        sentences[i].sent_id = static_cast<int>(side.sentences.size());
        side.sentences.push_back(std::move(sentences[i]));
    }

    // Round-trip self-checks: the labeled train corpus must realize the
    // requested noise rate within +-1% and the withheld fraction within +-2%.
    const std::vector<Instance> labeled = weak_label(out.train, out.dict);
    for (const SynthTypeParams& tp : cfg.types) {
        long long total = 0;
        long long wrong = 0;
        for (const Instance& inst : labeled) {
            if (inst.entity_type != tp.type) continue;
            ++total;
            if (!inst.gold.value_or(false)) ++wrong;
        }
        if (total == 0) {
            if (tp.instances > 0 && cfg.dev_fraction < 0.5)
                throw data_error("synth: no weak instances realized for " + tp.type);
            continue;
        }
        const double realized = static_cast<double>(wrong) / static_cast<double>(total);
        if (std::fabs(realized - tp.noise_rate) > 0.01 + 1e-12)
            throw data_error("synth: realized noise rate " + std::to_string(realized) +
                             " misses target " + std::to_string(tp.noise_rate) + " for " +
                             tp.type);
        long long gold_mass = 0;
        for (const Sentence& s : out.train.sentences)
            for (const GoldMention& g : s.gold)
                if (g.type == tp.type) ++gold_mass;
        if (gold_mass > 0) {
            const double matched_frac =
                static_cast<double>(total - wrong) / static_cast<double>(gold_mass);
            if (std::fabs((1.0 - matched_frac) - tp.fn) > 0.02 + 1e-12)
                throw data_error("synth: realized withheld fraction misses target for " +
                                 tp.type);
        }
    }
    return out;
}

} // namespace hgl
