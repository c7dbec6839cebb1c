#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace cpa {

/// Bad input to a library call (length mismatch, label out of range, ...).
class ArgumentError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// The requested configuration is valid in principle but not supported.
class UnsupportedConfiguration : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// An EP column whose largest modulus is zero cannot be normalized.
class DegenerateSample : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class SynthesisFailed : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input file. `line()` is 1-based, 0 when not applicable.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, std::size_t line = 0)
        : std::runtime_error(what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// Partition enumeration refused because S(N, Q) exceeds the cap.
class EnumerationCapExceeded : public std::runtime_error {
public:
    EnumerationCapExceeded(std::uint64_t count, std::uint64_t cap)
        : std::runtime_error("partition count " + std::to_string(count) +
                             " exceeds enumeration cap " + std::to_string(cap)),
          count_(count), cap_(cap) {}
    std::uint64_t count() const noexcept { return count_; }
    std::uint64_t cap() const noexcept { return cap_; }

private:
    std::uint64_t count_;
    std::uint64_t cap_;
};

}  // namespace cpa
