#pragma once

#include <stdexcept>
#include <string>

namespace stochlab {

enum class Errc : int {
  ok = 0,
  negative_weight,
  all_zero,
  length_mismatch,
  space_mismatch,
  unknown_element,
  malformed_product_space,
  non_stochastic_table,
  non_convergent_stationary,
  horizon_too_large,
  vocab_mismatch,
  non_finite_input,
  non_finite_gradient,
  no_draft_head,
  diverged_loss,
  boundary_simplex,
  unknown_kind,
  infinite_average,
  config_invalid,
  io_failure,
  internal,
};

const char* errc_name(Errc code) noexcept;

/// Library error: carries a machine-readable code plus a human message.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(std::string(errc_name(code)) + ": " + message), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void raise(Errc code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace stochlab
