#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace mdpm {

/// Base of every exception raised by the library. The CLI maps these to
/// exit code 2 (data/validation error).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public Error {
 public:
  IoError(const std::string& what, std::uint64_t offset)
      : Error(what + " (at byte " + std::to_string(offset) + ")"),
        offset_(offset) {}
  std::uint64_t offset() const noexcept { return offset_; }

 private:
  std::uint64_t offset_;
};

class FormatError : public Error {
 public:
  using Error::Error;
};

class TruncationError : public Error {
 public:
  TruncationError(const std::string& what, std::uint64_t record)
      : Error(what + " (record " + std::to_string(record) + ")"),
        record_(record) {}
  std::uint64_t record() const noexcept { return record_; }

 private:
  std::uint64_t record_;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

class EmptyInputError : public Error {
 public:
  using Error::Error;
};

class SingularMatrixError : public Error {
 public:
  using Error::Error;
};

class UndefinedError : public Error {
 public:
  using Error::Error;
};

}  // namespace mdpm
