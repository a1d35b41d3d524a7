#pragma once

#include <stdexcept>
#include <string>

namespace reco {

/// Failure categories. The numeric values double as CLI exit codes.
enum class ErrorKind : int {
  config = 2,
  data = 3,
  numeric = 4,
};

const char* to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail_config(const std::string& message) {
  throw Error(ErrorKind::config, message);
}

[[noreturn]] inline void fail_data(const std::string& message) {
  throw Error(ErrorKind::data, message);
}

[[noreturn]] inline void fail_numeric(const std::string& message) {
  throw Error(ErrorKind::numeric, message);
}

}  // namespace reco
