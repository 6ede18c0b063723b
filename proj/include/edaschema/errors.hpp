#pragma once

#include <stdexcept>
#include <string>

namespace eda {

// Malformed input text. `line` is 1-based, 0 when unknown.
class ParseError : public std::runtime_error {
  public:
    ParseError(std::string message, int line = 0)
        : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + message
                                      : message),
          line_(line) {}

    int line() const { return line_; }

  private:
    int line_;
};

// A schema constraint was broken (availability window, dangling
// reference, identity violation).
class ValidationError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

}  // namespace eda
