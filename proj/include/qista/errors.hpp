#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace qista {

/// Argument outside an operation's domain (bad dimension, negative threshold, ...).
class InvalidInput : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A mathematical hypothesis the operation relies on does not hold.
class PreconditionViolation : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Malformed serialized input. Carries the 1-based line (0 if unknown)
/// and the field name that failed, when known.
class FormatError : public std::runtime_error {
public:
    FormatError(const std::string& what, std::size_t line = 0, std::string field = {})
        : std::runtime_error(what), line_(line), field_(std::move(field)) {}

    std::size_t line() const noexcept { return line_; }
    const std::string& field() const noexcept { return field_; }

private:
    std::size_t line_;
    std::string field_;
};

namespace detail {

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw InvalidInput(msg);
}

}  // namespace detail
}  // namespace qista
