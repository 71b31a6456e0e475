#pragma once

#include <stdexcept>
#include <string>

namespace hgl {

// Error taxonomy mirrors the CLI exit codes:
//   usage_error   -> 1  (bad invocation, API misuse, invalid parameters)
//   data_error    -> 2  (malformed input files, infeasible configs, empty pools)
//   numeric_error -> 3  (non-finite values in a computation)
struct error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct usage_error : error {
    using error::error;
};

struct data_error : error {
    using error::error;
};

struct numeric_error : error {
    using error::error;
};

} // namespace hgl
