#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace cids {

enum class ErrorCode {
  wrong_proposer,
  no_authorities,
  empty_payload,
  not_found,
  shape_mismatch,
  malformed_bytes,
  invalid_parameter,
  degenerate_dataset,
  bad_hyperparameter,
  empty_holdout,
  empty_reference,
  empty_history,
  config_invalid,
};

std::string_view to_string(ErrorCode code);

// Single exception type for every recoverable failure in the library; callers
// branch on code().
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace cids
