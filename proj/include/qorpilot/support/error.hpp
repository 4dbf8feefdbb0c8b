#pragma once

#include <stdexcept>
#include <string>

namespace qorpilot {

// Base for every typed error thrown by the toolkit.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

#define QORPILOT_DEFINE_ERROR(Name)                                  \
    struct Name : ::qorpilot::Error {                                \
        explicit Name(const std::string& msg) : Error(msg) {}        \
    }

}  // namespace qorpilot
