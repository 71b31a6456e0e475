#pragma once

#include <optional>
#include <string>
#include <vector>

#include "hgl/corpus.hpp"
#include "hgl/dictionary.hpp"

namespace hgl {

enum class InstanceSource { dictionary_match, blocked_candidate };

// One weakly-labeled candidate mention: a span in a corpus sentence plus the
// entity type it was labeled with. The gold flag is present only when the
// sentence carries gold annotation (evaluation / synthetic data).
struct Instance {
    int sent_index = 0; // index into Corpus::sentences
    Span span;
    std::string entity_type;
    InstanceSource source = InstanceSource::dictionary_match;
    std::optional<bool> gold;
    bool operator==(const Instance&) const = default;
};

// Forward maximum matching: scan each sentence left to right; at each
// position take the longest dictionary phrase (over all types) matching
// there; a phrase listed under several types emits one instance per type
// over the same span; the scan resumes after the matched span. Matching is
// exact on token strings (case-sensitive).
std::vector<Instance> weak_label(const Corpus& corpus, const Dictionary& dict);

// Instance TSV: `sent<TAB>start<TAB>end<TAB>type<TAB>source<TAB>gold` with
// source in {dict, block} and gold in {0, 1, -}.
void write_instances(const std::vector<Instance>& instances, const std::string& path);
std::vector<Instance> load_instances(const std::string& path);

} // namespace hgl
