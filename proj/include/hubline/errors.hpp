#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace hubline {

// Invalid data or parameters (bad instance, bad flag combination, broken
// contract on a public operation). CLI maps this to exit code 2.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

// Malformed input file. Carries "file:line: message" when the location is known.
class ParseError : public ValidationError {
 public:
  ParseError(const std::string& file, std::uint64_t line, const std::string& message)
      : ValidationError(file + ":" + std::to_string(line) + ": " + message) {}
  explicit ParseError(const std::string& what) : ValidationError(what) {}
};

// An enumeration guard tripped (k-shortest stream cap, line-enumeration cap,
// branch-and-bound node cap). Carries the count reached. CLI exit code 3.
class CapExceededError : public std::runtime_error {
 public:
  CapExceededError(const std::string& what, std::uint64_t count)
      : std::runtime_error(what), count_(count) {}
  std::uint64_t count() const noexcept { return count_; }

 private:
  std::uint64_t count_;
};

// Filesystem failure (unreadable input, unwritable output). CLI exit code 4.
class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace hubline
