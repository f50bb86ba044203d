#pragma once

#include <stdexcept>
#include <string>

namespace cfmac {

enum class ErrorCode {
    UnsupportedRate,
    NoContenders,
    InvalidConfig,
    UndefinedMetric,
    EmptyWindow,
    NoConvergence,
    Io,
};

const char* to_string(ErrorCode code);

// Every failure raised by the library carries a code so callers (and tests)
// can tell error kinds apart without string matching.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace cfmac
