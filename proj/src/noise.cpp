#include "hgl/noise.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "hgl/errors.hpp"

namespace hgl {

double snap_to_grid(double raw) {
    const double snapped = std::round(raw * 20.0) / 20.0;
    return std::min(1.0, std::max(0.0, snapped));
}

NoiseEntry estimate_noise_rate(const std::vector<Instance>& dev_instances,
                               const std::string& type, long long train_pool_size) {
    long long total = 0, correct = 0;
    for (const Instance& inst : dev_instances) {
        if (inst.entity_type != type) continue;
        if (!inst.gold.has_value())
            throw data_error("noise estimation needs gold flags on every dev instance of type " +
                             type);
        ++total;
        if (*inst.gold) ++correct;
    }
    if (total == 0) throw data_error("no dev instances of type " + type + " to estimate from");
    const double raw = static_cast<double>(correct) / static_cast<double>(total);
    return NoiseEntry{snap_to_grid(raw), train_pool_size};
}

NoiseProfile load_profile(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw data_error("cannot open noise profile: " + path);
    NoiseProfile profile;
    std::string line;
    long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const std::size_t t1 = line.find('\t');
        const std::size_t t2 = t1 == std::string::npos ? std::string::npos : line.find('\t', t1 + 1);
        if (t1 == std::string::npos || t2 == std::string::npos)
            throw data_error(path + ":" + std::to_string(line_no) + ": expected TYPE\\tp\\tN");
        const std::string type = line.substr(0, t1);
        NoiseEntry entry;
        try {
            entry.p = std::stod(line.substr(t1 + 1, t2 - t1 - 1));
            entry.n = std::stoll(line.substr(t2 + 1));
        } catch (const std::exception&) {
            throw data_error(path + ":" + std::to_string(line_no) + ": bad numeric field");
        }
        if (type.empty() || entry.p < 0.0 || entry.p > 1.0 || entry.n < 0)
            throw data_error(path + ":" + std::to_string(line_no) + ": invalid profile entry");
        profile.by_type[type] = entry;
    }
    return profile;
}

void write_profile(const NoiseProfile& profile, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw data_error("cannot write noise profile: " + path);
    char buf[32];
    for (const auto& [type, entry] : profile.by_type) {
        std::snprintf(buf, sizeof buf, "%.2f", entry.p);
        out << type << '\t' << buf << '\t' << entry.n << "\n";
    }
    if (!out) throw data_error("write failed: " + path);
}

} // namespace hgl
