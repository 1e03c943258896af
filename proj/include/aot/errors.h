#pragma once

#include <stdexcept>
#include <string>

namespace aot {

// malformed input: bad dimensions, unparsable files, out-of-range flags
struct InputError : std::runtime_error {
    explicit InputError(const std::string& what) : std::runtime_error(what) {}
};

// well-formed input with bad values: not PSD, not symmetric, invalid correlation,
// internal consistency failures
struct NumericError : std::runtime_error {
    explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace aot
