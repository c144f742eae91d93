#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace pipeseg {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Two rasters that must share a canvas do not.
class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class ImageIoError : public Error {
 public:
  enum class Kind { unreadable, unsupported_format, corrupt_stream, unwritable };

  ImageIoError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

// Malformed text input. line() is 1-based, 0 when not tied to a line.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// Input data is missing or inconsistent (missing prediction file, bad manifest, ...).
class DataError : public Error {
 public:
  using Error::Error;
};

}  // namespace pipeseg
