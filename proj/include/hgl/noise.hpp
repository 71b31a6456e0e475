#pragma once

#include <map>
#include <string>
#include <vector>

#include "hgl/weak_label.hpp"

namespace hgl {

// Per-type dataset accuracy p (snapped to the 5% grid) and training-pool
// size N.
struct NoiseEntry {
    double p = 0.0;
    long long n = 0;
};

struct NoiseProfile {
    std::map<std::string, NoiseEntry> by_type;
};

// Nearest multiple of 0.05, rounding half away from zero; result clamped to
// [0, 1].
double snap_to_grid(double raw);

// Raw accuracy of the type's dev instances (each must carry a gold flag),
// snapped to the grid; n is the size of the *training* pool, not the dev
// pool.
NoiseEntry estimate_noise_rate(const std::vector<Instance>& dev_instances,
                               const std::string& type, long long train_pool_size);

// Profile TSV: `TYPE<TAB>p<TAB>N`.
NoiseProfile load_profile(const std::string& path);
void write_profile(const NoiseProfile& profile, const std::string& path);

} // namespace hgl
