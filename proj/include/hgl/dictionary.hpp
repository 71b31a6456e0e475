#pragma once

#include <map>
#include <string>
#include <vector>

namespace hgl {

using Phrase = std::vector<std::string>;

// Entity-type label -> sorted, deduplicated phrase list. Matching helpers
// index phrases by first token (see weak_label).
struct Dictionary {
    std::map<std::string, std::vector<Phrase>> entries;

    bool contains(const std::string& type, const Phrase& phrase) const;
    std::size_t phrase_count() const;
};

// TSV, one entry per line: `TYPE<TAB>token1 token2 ...`. Duplicate lines are
// deduplicated; an empty phrase or a missing tab is a parse error.
Dictionary load_dictionary(const std::string& path);
void write_dictionary(const Dictionary& dict, const std::string& path);

} // namespace hgl
