#include "hgl/dictionary.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "hgl/errors.hpp"

namespace hgl {

bool Dictionary::contains(const std::string& type, const Phrase& phrase) const {
    const auto it = entries.find(type);
    if (it == entries.end()) return false;
    return std::binary_search(it->second.begin(), it->second.end(), phrase);
}

std::size_t Dictionary::phrase_count() const {
    std::size_t n = 0;
    for (const auto& [type, phrases] : entries) n += phrases.size();
    return n;
}

Dictionary load_dictionary(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw data_error("cannot open dictionary file: " + path);
    std::map<std::string, std::set<Phrase>> collected;
    std::string line;
    long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const std::size_t tab = line.find('\t');
        if (tab == std::string::npos)
            throw data_error(path + ":" + std::to_string(line_no) + ": missing tab separator");
        const std::string type = line.substr(0, tab);
        if (type.empty())
            throw data_error(path + ":" + std::to_string(line_no) + ": empty type label");
        Phrase phrase;
        std::istringstream words(line.substr(tab + 1));
        std::string word;
        while (words >> word) phrase.push_back(word);
        if (phrase.empty())
            throw data_error(path + ":" + std::to_string(line_no) + ": empty phrase");
        collected[type].insert(std::move(phrase));
    }
    Dictionary dict;
    for (auto& [type, phrases] : collected)
        dict.entries[type] = std::vector<Phrase>(phrases.begin(), phrases.end());
    return dict;
}

void write_dictionary(const Dictionary& dict, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw data_error("cannot write dictionary file: " + path);
    for (const auto& [type, phrases] : dict.entries)
        for (const Phrase& phrase : phrases) {
            out << type << '\t';
            for (std::size_t i = 0; i < phrase.size(); ++i) {
                if (i) out << ' ';
                out << phrase[i];
            }
            out << "\n";
        }
    if (!out) throw data_error("write failed: " + path);
}

} // namespace hgl
