#pragma once

#include <stdexcept>
#include <string>

namespace lceval {

// Bad user input: malformed files, mismatched manifests, missing resources.
// Maps to process exit code 2.
struct input_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Broken internal invariant (a bug, not a user mistake). Exit code 1.
struct internal_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace lceval
