#include "hgl/weak_label.hpp"

#include <algorithm>
#include <fstream>
#include <map>

#include "hgl/errors.hpp"

namespace hgl {

std::vector<Instance> weak_label(const Corpus& corpus, const Dictionary& dict) {
    // Group phrases by first token with their type lists; within a first
    // token, longest phrase first so the first full match at a position is
    // the maximal one. Equal-length entries are distinct token sequences, so
    // at most one of them can match at any position.
    std::map<Phrase, std::vector<std::string>> merged;
    for (const auto& [type, phrases] : dict.entries)
        for (const Phrase& phrase : phrases) merged[phrase].push_back(type);
    struct Candidate {
        Phrase phrase;
        std::vector<std::string> types;
    };
    std::map<std::string, std::vector<Candidate>> index;
    for (auto& [phrase, types] : merged) index[phrase.front()].push_back({phrase, types});
    for (auto& [first, candidates] : index)
        std::stable_sort(candidates.begin(), candidates.end(),
                         [](const Candidate& a, const Candidate& b) {
                             return a.phrase.size() > b.phrase.size();
                         });

    std::vector<Instance> out;
    for (std::size_t s = 0; s < corpus.sentences.size(); ++s) {
        const Sentence& sent = corpus.sentences[s];
        const std::size_t n = sent.tokens.size();
        std::size_t pos = 0;
        while (pos < n) {
            const auto it = index.find(sent.tokens[pos]);
            const Candidate* hit = nullptr;
            if (it != index.end()) {
                for (const Candidate& cand : it->second) {
                    if (cand.phrase.size() > n - pos) continue;
                    if (std::equal(cand.phrase.begin(), cand.phrase.end(),
                                   sent.tokens.begin() + static_cast<long>(pos))) {
                        hit = &cand; // longest first, so take it and stop
                        break;
                    }
                }
            }
            if (!hit) {
                ++pos;
                continue;
            }
            const Span span{static_cast<int>(pos), static_cast<int>(pos + hit->phrase.size())};
            for (const std::string& type : hit->types) {
                Instance inst;
                inst.sent_index = static_cast<int>(s);
                inst.span = span;
                inst.entity_type = type;
                inst.source = InstanceSource::dictionary_match;
                if (sent.has_gold) {
                    bool gold = false;
                    for (const GoldMention& m : sent.gold)
                        if (m.span == span && m.type == type) gold = true;
                    inst.gold = gold;
                }
                out.push_back(std::move(inst));
            }
            pos += hit->phrase.size();
        }
    }
    return out;
}

void write_instances(const std::vector<Instance>& instances, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw data_error("cannot write instance file: " + path);
    for (const Instance& inst : instances) {
        out << inst.sent_index << '\t' << inst.span.start << '\t' << inst.span.end << '\t'
            << inst.entity_type << '\t'
            << (inst.source == InstanceSource::dictionary_match ? "dict" : "block") << '\t';
        if (inst.gold.has_value())
            out << (*inst.gold ? '1' : '0');
        else
            out << '-';
        out << "\n";
    }
    if (!out) throw data_error("write failed: " + path);
}

std::vector<Instance> load_instances(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw data_error("cannot open instance file: " + path);
    std::vector<Instance> out;
    std::string line;
    long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> cols;
        std::size_t start = 0;
        while (true) {
            const std::size_t tab = line.find('\t', start);
            cols.push_back(line.substr(start, tab - start));
            if (tab == std::string::npos) break;
            start = tab + 1;
        }
        if (cols.size() != 6)
            throw data_error(path + ":" + std::to_string(line_no) + ": expected 6 columns");
        Instance inst;
        try {
            inst.sent_index = std::stoi(cols[0]);
            inst.span.start = std::stoi(cols[1]);
            inst.span.end = std::stoi(cols[2]);
        } catch (const std::exception&) {
            throw data_error(path + ":" + std::to_string(line_no) + ": bad integer field");
        }
        inst.entity_type = cols[3];
        if (cols[4] == "dict")
            inst.source = InstanceSource::dictionary_match;
        else if (cols[4] == "block")
            inst.source = InstanceSource::blocked_candidate;
        else
            throw data_error(path + ":" + std::to_string(line_no) + ": bad source '" + cols[4] +
                             "'");
        if (cols[5] == "1")
            inst.gold = true;
        else if (cols[5] == "0")
            inst.gold = false;
        else if (cols[5] != "-")
            throw data_error(path + ":" + std::to_string(line_no) + ": bad gold flag");
        out.push_back(std::move(inst));
    }
    return out;
}

} // namespace hgl
