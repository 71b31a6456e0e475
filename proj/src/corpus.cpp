#include "hgl/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "hgl/errors.hpp"

namespace hgl {

namespace {

[[noreturn]] void fail(const std::string& path, long line_no, const std::string& what) {
    throw data_error(path + ":" + std::to_string(line_no) + ": " + what);
}

struct PendingSentence {
    std::vector<std::string> tokens;
    std::vector<std::string> tags;
    std::vector<std::string> aux;
    std::vector<long> lines;
};

// Convert a BIO tag column into mention spans; `typed` distinguishes the
// gold column (B-TYPE) from the aux candidate column (bare B).
std::vector<GoldMention> decode_bio(const std::vector<std::string>& tags, bool typed,
                                    const std::string& path, const std::vector<long>& lines) {
    std::vector<GoldMention> out;
    std::string open_type;
    int open_start = -1;
    auto close = [&](int end) {
        if (open_start >= 0) out.push_back({{open_start, end}, open_type});
        open_start = -1;
        open_type.clear();
    };
    for (std::size_t i = 0; i < tags.size(); ++i) {
        const std::string& tag = tags[i];
        if (tag == "O") {
            close(static_cast<int>(i));
            continue;
        }
        if (tag.size() < (typed ? 3u : 1u) || (tag[0] != 'B' && tag[0] != 'I') ||
            (typed && tag[1] != '-') || (!typed && tag.size() != 1))
            fail(path, lines[i], "bad tag '" + tag + "'");
        const std::string type = typed ? tag.substr(2) : "";
        if (typed && type.empty()) fail(path, lines[i], "bad tag '" + tag + "'");
        if (tag[0] == 'B') {
            close(static_cast<int>(i));
            open_start = static_cast<int>(i);
            open_type = type;
        } else { // I
            if (open_start < 0 || open_type != type)
                fail(path, lines[i], "tag '" + tag + "' does not continue a mention");
        }
    }
    close(static_cast<int>(tags.size()));
    return out;
}

void flush(PendingSentence& pending, Corpus& corpus, const std::string& doc_id,
           const std::string& path) {
    if (pending.tokens.empty()) return;
    Sentence sent;
    sent.tokens = std::move(pending.tokens);
    sent.doc_id = doc_id;
    sent.sent_id = static_cast<int>(corpus.sentences.size());
    const bool dashed = pending.tags.front() == "-";
    for (std::size_t i = 0; i < pending.tags.size(); ++i)
        if ((pending.tags[i] == "-") != dashed)
            fail(path, pending.lines[i], "sentence mixes '-' with BIO tags");
    sent.has_gold = !dashed;
    if (sent.has_gold) sent.gold = decode_bio(pending.tags, true, path, pending.lines);
    if (!pending.aux.empty()) {
        const std::vector<GoldMention> spans =
            decode_bio(pending.aux, false, path, pending.lines);
        for (const GoldMention& m : spans) sent.aux_candidates.push_back(m.span);
    }
    corpus.sentences.push_back(std::move(sent));
    pending = PendingSentence{};
}

} // namespace

Corpus load_corpus(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw data_error("cannot open corpus file: " + path);
    Corpus corpus;
    PendingSentence pending;
    std::string doc_id;
    std::string line;
    long line_no = 0;
    int columns = 0; // fixed by the first token line
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) {
            flush(pending, corpus, doc_id, path);
            continue;
        }
        if (line.rfind("-DOCSTART-", 0) == 0) {
            flush(pending, corpus, doc_id, path);
            const std::size_t space = line.find(' ');
            doc_id = space == std::string::npos ? "" : line.substr(space + 1);
            continue;
        }
        std::vector<std::string> cols;
        std::size_t start = 0;
        while (true) {
            const std::size_t tab = line.find('\t', start);
            cols.push_back(line.substr(start, tab - start));
            if (tab == std::string::npos) break;
            start = tab + 1;
        }
        if (cols.size() != 2 && cols.size() != 3)
            fail(path, line_no, "expected 2 or 3 tab-separated columns, got " +
                                    std::to_string(cols.size()));
        if (columns == 0) columns = static_cast<int>(cols.size());
        if (static_cast<int>(cols.size()) != columns)
            fail(path, line_no, "inconsistent column count");
        if (cols[0].empty()) fail(path, line_no, "empty token");
        pending.lines.push_back(line_no);
        pending.tokens.push_back(cols[0]);
        pending.tags.push_back(cols[1]);
        if (cols.size() == 3) pending.aux.push_back(cols[2]);
    }
    flush(pending, corpus, doc_id, path);
    corpus.has_aux = columns == 3;
    return corpus;
}

namespace {

// Inverse of decode_bio; spans must be sorted and non-overlapping.
std::vector<std::string> encode_bio(const std::vector<GoldMention>& mentions, int n_tokens,
                                    bool typed) {
    std::vector<GoldMention> sorted = mentions;
    std::sort(sorted.begin(), sorted.end(),
              [](const GoldMention& a, const GoldMention& b) { return a.span < b.span; });
    std::vector<std::string> tags(static_cast<std::size_t>(n_tokens), "O");
    int prev_end = 0;
    for (const GoldMention& m : sorted) {
        if (m.span.start < prev_end || m.span.end > n_tokens || m.span.start >= m.span.end)
            throw data_error("cannot serialize overlapping or invalid mention spans");
        for (int i = m.span.start; i < m.span.end; ++i) {
            const char* head = i == m.span.start ? "B" : "I";
            tags[static_cast<std::size_t>(i)] = typed ? head + ("-" + m.type) : head;
        }
        prev_end = m.span.end;
    }
    return tags;
}

} // namespace

void write_corpus(const Corpus& corpus, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw data_error("cannot write corpus file: " + path);
    std::string doc_id;
    bool first = true;
    for (const Sentence& sent : corpus.sentences) {
        if (!first) out << "\n";
        if (sent.doc_id != doc_id || (first && !sent.doc_id.empty())) {
            out << "-DOCSTART- " << sent.doc_id << "\n\n";
            doc_id = sent.doc_id;
        }
        first = false;
        const int n = static_cast<int>(sent.tokens.size());
        std::vector<std::string> tags(static_cast<std::size_t>(n), "-");
        if (sent.has_gold) tags = encode_bio(sent.gold, n, true);
        std::vector<std::string> aux;
        if (corpus.has_aux) {
            std::vector<GoldMention> spans;
            for (const Span& s : sent.aux_candidates) spans.push_back({s, ""});
            aux = encode_bio(spans, n, false);
        }
        for (int i = 0; i < n; ++i) {
            out << sent.tokens[static_cast<std::size_t>(i)] << '\t'
                << tags[static_cast<std::size_t>(i)];
            if (corpus.has_aux) out << '\t' << aux[static_cast<std::size_t>(i)];
            out << "\n";
        }
    }
    if (!out) throw data_error("write failed: " + path);
}

} // namespace hgl
