#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace iuq {

enum class ErrorCode {
  invalid_parameter = 1,
  invalid_input = 2,
  subsample_too_small = 3,
  budget_too_small = 4,
  io_error = 5,
  unknown_model = 6,
};

// Single exception type for the whole library; the code survives the C
// boundary, the message is for humans.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, std::string message)
      : std::runtime_error(std::move(message)), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

  static Error invalid_parameter(std::string msg) {
    return {ErrorCode::invalid_parameter, std::move(msg)};
  }
  static Error invalid_input(std::string msg) {
    return {ErrorCode::invalid_input, std::move(msg)};
  }
  static Error subsample_too_small(std::string msg) {
    return {ErrorCode::subsample_too_small, std::move(msg)};
  }
  static Error budget_too_small(std::string msg) {
    return {ErrorCode::budget_too_small, std::move(msg)};
  }
  static Error io_error(std::string msg) {
    return {ErrorCode::io_error, std::move(msg)};
  }
  static Error unknown_model(std::string msg) {
    return {ErrorCode::unknown_model, std::move(msg)};
  }

 private:
  ErrorCode code_;
};

}  // namespace iuq
