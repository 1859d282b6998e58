#pragma once

#include <stdexcept>
#include <string>

namespace emrc {

// Error taxonomy shared by the library and the CLI. The CLI maps these to
// process exit codes: IoError -> 3, ParseError -> 4, DegenerateInputError -> 5,
// everything else raised from bad arguments -> 2.

struct RangeError : std::out_of_range {
    using std::out_of_range::out_of_range;
};

struct SizeError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct ValidationError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct NotFoundError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct StateError : std::logic_error {
    using std::logic_error::logic_error;
};

// Constant input where normalization needs a nonzero mean.
struct DegenerateInputError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed container/image bytes.
struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace emrc
