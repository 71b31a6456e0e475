#pragma once

#include <map>
#include <string>

namespace hgl {

// Flat key=value configuration file: one pair per line, '#' starts a
// comment, blank lines ignored. Duplicate keys are an error — silently
// letting the last one win hides typos in experiment configs.
std::map<std::string, std::string> load_kv_config(const std::string& path);

} // namespace hgl
