#include "hgl/checkpoint.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "hgl/errors.hpp"

namespace hgl {

namespace {

constexpr const char* kMagic = "hgl-checkpoint 1";

void write_row(std::ofstream& out, const double* row, std::size_t n) {
    char buf[40];
    for (std::size_t j = 0; j < n; ++j) {
        std::snprintf(buf, sizeof buf, "%a", row[j]);
        if (j) out << ' ';
        out << buf;
    }
    out << "\n";
}

std::vector<double> parse_row(const std::string& line, std::size_t expect,
                              const std::string& path) {
    std::vector<double> row;
    const char* s = line.c_str();
    char* next = nullptr;
    while (*s) {
        const double v = std::strtod(s, &next);
        if (next == s) break;
        row.push_back(v);
        s = next;
        while (*s == ' ') ++s;
    }
    if (row.size() != expect)
        throw data_error(path + ": expected " + std::to_string(expect) + " values, got " +
                         std::to_string(row.size()));
    return row;
}

std::string need_line(std::ifstream& in, const std::string& path) {
    std::string line;
    if (!std::getline(in, line)) throw data_error(path + ": truncated checkpoint");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return line;
}

std::string need_field(std::ifstream& in, const std::string& key, const std::string& path) {
    const std::string line = need_line(in, path);
    if (line.rfind(key + " ", 0) != 0)
        throw data_error(path + ": expected '" + key + " ...', got '" + line + "'");
    return line.substr(key.size() + 1);
}

} // namespace

void save_checkpoint(const DenoiserModel& model, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw data_error("cannot write checkpoint: " + path);
    const std::size_t d = static_cast<std::size_t>(model.dim);
    const std::size_t v = static_cast<std::size_t>(model.vocab.size());
    out << kMagic << "\n";
    out << "type " << model.entity_type << "\n";
    out << "dim " << model.dim << "\n";
    out << "context " << (model.use_context ? 1 : 0) << "\n";
    out << "vocab " << v << "\n";
    for (const std::string& tok : model.vocab.id_to_token) out << tok << "\n";
    out << "emb\n";
    for (std::size_t i = 0; i < v; ++i) write_row(out, &model.p.emb[i * d], d);
    out << "attn_w\n";
    write_row(out, model.p.attn_w.data(), d);
    out << "attn_b\n";
    write_row(out, &model.p.attn_b, 1);
    out << "w1\n";
    for (std::size_t i = 0; i < d; ++i) write_row(out, &model.p.w1[i * d], d);
    out << "b1\n";
    write_row(out, model.p.b1.data(), d);
    out << "w2\n";
    write_row(out, model.p.w2.data(), d);
    out << "b2\n";
    write_row(out, &model.p.b2, 1);
    if (!out) throw data_error("write failed: " + path);
}

DenoiserModel load_checkpoint(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw data_error("cannot open checkpoint: " + path);
    if (need_line(in, path) != kMagic) throw data_error(path + ": not a recognized checkpoint");
    DenoiserModel model;
    model.entity_type = need_field(in, "type", path);
    try {
        model.dim = std::stoi(need_field(in, "dim", path));
        model.use_context = std::stoi(need_field(in, "context", path)) != 0;
    } catch (const std::exception&) {
        throw data_error(path + ": bad numeric header field");
    }
    if (model.dim < 1) throw data_error(path + ": bad dim");
    long long v = 0;
    try {
        v = std::stoll(need_field(in, "vocab", path));
    } catch (const std::exception&) {
        throw data_error(path + ": bad vocab size");
    }
    if (v < 3) throw data_error(path + ": vocab must include the reserved ids");
    model.vocab.id_to_token.clear();
    for (long long i = 0; i < v; ++i) model.vocab.id_to_token.push_back(need_line(in, path));
    for (int i = 3; i < static_cast<int>(v); ++i)
        model.vocab.token_to_id.emplace(model.vocab.id_to_token[static_cast<std::size_t>(i)], i);
    const std::size_t d = static_cast<std::size_t>(model.dim);

    auto read_matrix = [&](const char* name, std::vector<double>& dst, std::size_t rows) {
        if (need_line(in, path) != name)
            throw data_error(path + ": expected section '" + std::string(name) + "'");
        dst.clear();
        dst.reserve(rows * d);
        for (std::size_t i = 0; i < rows; ++i) {
            const std::vector<double> row = parse_row(need_line(in, path), d, path);
            dst.insert(dst.end(), row.begin(), row.end());
        }
    };
    auto read_scalar = [&](const char* name) {
        if (need_line(in, path) != name)
            throw data_error(path + ": expected section '" + std::string(name) + "'");
        return parse_row(need_line(in, path), 1, path)[0];
    };

    read_matrix("emb", model.p.emb, static_cast<std::size_t>(v));
    read_matrix("attn_w", model.p.attn_w, 1);
    model.p.attn_b = read_scalar("attn_b");
    read_matrix("w1", model.p.w1, d);
    read_matrix("b1", model.p.b1, 1);
    read_matrix("w2", model.p.w2, 1);
    model.p.b2 = read_scalar("b2");
    return model;
}

} // namespace hgl
