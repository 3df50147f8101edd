#pragma once

#include <stdexcept>
#include <string>

namespace coopsearch {

// Raised while loading or validating a scenario. `where` is a JSON pointer
// (or "line:col" for parse errors) identifying the offending field.
class ScenarioError : public std::runtime_error {
 public:
  ScenarioError(std::string where, const std::string& what)
      : std::runtime_error(where.empty() ? what : where + ": " + what), where_(std::move(where)) {}

  const std::string& where() const noexcept { return where_; }

 private:
  std::string where_;
};

class WireFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Output files or directories that cannot be created or written.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace coopsearch
