#pragma once

#include <stdexcept>
#include <string>

namespace bb {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad parameters: non-prime modulus, mismatched moduli, degenerate dims.
class ConfigError : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class DivisionByZero : public Error {
 public:
  using Error::Error;
};

// A victim protocol rule was violated (unknown or replayed query id, ...).
class ProtocolError : public Error {
 public:
  using Error::Error;
};

// An attack stage could not reach a verdict within its budget.
class InconclusiveError : public Error {
 public:
  using Error::Error;
};

// Stage 1 observed fewer independent noise samples than expected.
class RankShortfall : public Error {
 public:
  RankShortfall(const std::string& what, std::size_t observed,
                std::size_t expected)
      : Error(what), observed_(observed), expected_(expected) {}
  std::size_t observed() const { return observed_; }
  std::size_t expected() const { return expected_; }

 private:
  std::size_t observed_;
  std::size_t expected_;
};

// Wraps an error raised inside a named attack stage.
class StageError : public Error {
 public:
  StageError(std::string stage, const std::string& what)
      : Error(stage + ": " + what), stage_(std::move(stage)) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

}  // namespace bb
