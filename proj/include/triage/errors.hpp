#pragma once

#include <stdexcept>
#include <string>

namespace triage {

// User-facing input problem (bad file, bad flag value, violated data contract).
// The CLI maps this to exit code 1; anything else is an internal error (2).
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace triage
