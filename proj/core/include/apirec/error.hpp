// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace apirec {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input record. Carries the file and 1-based line number.
class ParseError : public Error {
 public:
  ParseError(std::string file, std::size_t line, const std::string& what)
      : Error(file + ":" + std::to_string(line) + ": " + what),
        file_(std::move(file)),
        line_(line) {}

  const std::string& file() const noexcept { return file_; }
  std::size_t line() const noexcept { return line_; }

 private:
  std::string file_;
  std::size_t line_;
};

/// A record references something that does not exist, or ids collide.
class IntegrityError : public Error {
 public:
  using Error::Error;
};

/// Invalid user-supplied configuration or argument.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Checkpoint and corpus / vocab disagree on label or vocabulary sizes.
class CompatibilityError : public Error {
 public:
  using Error::Error;
};

/// Tensor or vector dimensions do not line up.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Training diverged or could not proceed.
class TrainingError : public Error {
 public:
  using Error::Error;
};

}  // namespace apirec
