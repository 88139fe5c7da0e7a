#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace djsr {

// Error categories double as the CLI's machine-parseable failure classes.
enum class ErrorKind {
    invalid_argument,
    shape_mismatch,
    io,
    format,
    numeric,
};

std::string_view to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
    throw Error(kind, what);
}

}  // namespace djsr
