#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>

namespace spgs {

enum class ErrorCode {
  invalid_argument,
  non_coercive,
  zero_field,
  no_descent,
  max_iters,
  config,
  io,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_argument: return "invalid_argument";
    case ErrorCode::non_coercive: return "non_coercive";
    case ErrorCode::zero_field: return "zero_field";
    case ErrorCode::no_descent: return "no_descent";
    case ErrorCode::max_iters: return "max_iters";
    case ErrorCode::config: return "config";
    case ErrorCode::io: return "io";
  }
  return "unknown";
}

/// Library error. `key()` is the dotted config path for config errors and
/// empty otherwise.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what, std::string key = {})
      : std::runtime_error(what), code_(code), key_(std::move(key)) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& key() const noexcept { return key_; }

 private:
  ErrorCode code_;
  std::string key_;
};

namespace detail {

inline void require(bool condition, const char* message) {
  if (!condition) throw Error(ErrorCode::invalid_argument, message);
}

}  // namespace detail
}  // namespace spgs
