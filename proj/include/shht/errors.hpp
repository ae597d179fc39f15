#pragma once

#include <stdexcept>
#include <string>

namespace shht {

// Error taxonomy shared across modules. The CLI maps these onto exit codes:
// usage errors -> 1, data errors -> 2, diverged training -> 3.
struct InvalidArgument : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct EmptyInput : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Architecture description is internally inconsistent (names the offending block).
struct SpecError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct CheckpointError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct TrainingDiverged : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct GenerationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace shht
