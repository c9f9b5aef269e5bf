#pragma once

#include <stdexcept>
#include <string>

namespace omnidet {

/// Bad configuration: missing keys, invalid parameter combinations, unusable paths.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Malformed input file. Messages carry "<source>:<line>: <what>" where applicable.
struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace omnidet
