#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "hgl/corpus.hpp"
#include "hgl/dictionary.hpp"

namespace hgl {

// Generation knobs for one entity type. `instances` is the target number of
// weakly-labeled instances the dictionary will produce on the train corpus;
// noise_rate is the fraction of those that are false positives; ambiguity is
// the fraction of the type's dictionary entries that are junk (phrases that
// occur only in non-entity contexts); fn is the fraction of gold mention
// occurrences whose phrase is withheld from the dictionary.
struct SynthTypeParams {
    std::string type = "ENT";
    long long instances = 5000;
    double noise_rate = 0.0;
    double ambiguity = 0.0;
    double fn = 0.0;
};

struct SynthConfig {
    std::vector<SynthTypeParams> types;
    long long name_tokens = 500;   // per-type entity-name vocabulary
    long long filler_tokens = 200; // shared lowercase context vocabulary
    double dev_fraction = 0.1;
    // Distinct capitalized non-entity phrases planted as chunker bait;
    // -1 sizes them automatically at 9x the withheld phrase count.
    long long distractor_phrases = -1;
};

// Flat key=value form: types, instances, noise_rate, ambiguity, fn,
// name_tokens, filler_tokens, dev_fraction, distractor_phrases. The four
// per-type keys accept a `.TYPE` suffix override (noise_rate.PER=0.35).
SynthConfig synth_config_from_kv(const std::map<std::string, std::string>& kv);

struct SynthOutput {
    Corpus train;
    Corpus dev;
    Dictionary dict;
};

// Deterministic synthetic distant-supervision benchmark. Entity mentions
// follow a Zipf phrase inventory over a Zipf name-token vocabulary; false
// positives come from junk dictionary entries planted in non-entity
// contexts (a shared junk vocabulary at noise rates <= 0.4, one-off
// below-cutoff tokens above); false negatives withhold whole phrases chosen
// by a greedy first-fit over realized mention mass. The realized noise rate
// of weak labeling the train corpus is verified to +-1% of the request and
// the realized withheld fraction to +-2%.
SynthOutput synth_generate(const SynthConfig& config, std::uint64_t seed);

} // namespace hgl
