#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace tte {

// Invalid configuration, grammar, or rule file content.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Unreadable input or unrecoverable data problems.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A single rejected input record. `position` is the 1-based line number for
// file loaders and the 0-based collection index otherwise.
struct RecordError {
  std::size_t position = 0;
  std::string id;
  std::string message;
};

}  // namespace tte
