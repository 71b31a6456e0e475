#pragma once

#include <string>

#include "hgl/model.hpp"

namespace hgl {

// Versioned text serialization of vocab + parameters. Values are stored as
// hexfloats, so save/load round-trips bit-exactly.
void save_checkpoint(const DenoiserModel& model, const std::string& path);
DenoiserModel load_checkpoint(const std::string& path);

} // namespace hgl
