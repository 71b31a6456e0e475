#pragma once

#include <string>
#include <vector>

namespace hgl {

// Token index range [start, end) within one sentence.
struct Span {
    int start = 0;
    int end = 0;
    bool operator==(const Span&) const = default;
    bool operator<(const Span& o) const { return start != o.start ? start < o.start : end < o.end; }
};

struct GoldMention {
    Span span;
    std::string type;
    bool operator==(const GoldMention&) const = default;
};

struct Sentence {
    std::vector<std::string> tokens;
    std::string doc_id;
    int sent_id = 0;
    bool has_gold = false;          // false when the tag column was "-"
    std::vector<GoldMention> gold;  // non-overlapping, sorted by span
    std::vector<Span> aux_candidates; // optional third-column candidate spans
    bool operator==(const Sentence&) const = default;
};

struct Corpus {
    std::vector<Sentence> sentences;
    bool has_aux = false;
    bool operator==(const Corpus&) const = default;
};

// File format: UTF-8, one token per line as `token<TAB>tag[<TAB>candidate]`,
// tag in BIO (B-TYPE / I-TYPE / O) or `-` when gold is unavailable; the
// optional third column marks candidate spans with untyped B/I/O; a blank
// line separates sentences; a line `-DOCSTART- <id>` opens a document.
// Column count is fixed across the file; gold availability is consistent
// within a sentence.
Corpus load_corpus(const std::string& path);
void write_corpus(const Corpus& corpus, const std::string& path);

} // namespace hgl
