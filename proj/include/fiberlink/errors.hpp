#pragma once

#include <stdexcept>
#include <string>

namespace fiberlink {

// Configuration and schema violations. The CLI maps these to exit code 2.
struct config_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed or inconsistent data records. Exit code 3.
struct data_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Filesystem failures, always with path context in the message.
struct io_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace fiberlink
