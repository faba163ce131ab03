#pragma once

#include <stdexcept>
#include <string>

namespace mmalign {

// Problems caused by user input: malformed files, out-of-range indices,
// unavailable modalities, invalid flags.  The CLI maps these to exit
// code 1; anything else that escapes is an internal error (exit 2).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// DataError carrying "<file>:<line>: <message>".
class ParseError : public DataError {
 public:
  ParseError(const std::string& file, std::size_t line,
             const std::string& message)
      : DataError(file + ":" + std::to_string(line) + ": " + message) {}
};

}  // namespace mmalign
