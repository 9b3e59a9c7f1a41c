#pragma once

#include <stdexcept>
#include <string>

namespace stm {

// Data-level failures. The CLI maps these to exit code 2; bad flag values
// (std::invalid_argument) map to exit code 1.
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct EmptyCorpusError : DataError {
  explicit EmptyCorpusError(const std::string& what) : DataError(what) {}
};

struct VersionMismatchError : DataError {
  explicit VersionMismatchError(const std::string& what) : DataError(what) {}
};

struct CorruptFileError : DataError {
  explicit CorruptFileError(const std::string& what) : DataError(what) {}
};

struct AllTokensOovError : DataError {
  explicit AllTokensOovError(const std::string& what) : DataError(what) {}
};

struct LengthMismatchError : DataError {
  explicit LengthMismatchError(const std::string& what) : DataError(what) {}
};

struct ParseError : DataError {
  ParseError(const std::string& file, size_t line, const std::string& what)
      : DataError(file + ":" + std::to_string(line) + ": " + what) {}
};

}  // namespace stm
