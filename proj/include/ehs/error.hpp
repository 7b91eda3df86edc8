#pragma once

#include <stdexcept>
#include <string>

namespace ehs {

enum class Errc {
  ep_too_close,
  non_degenerate,
  degenerate_formula,
  ambiguous_continuation,
  on_ehs,
  frame_mismatch,
  transition_point,
  not_converged,
  singular_overlap,
  ehs_crossing,
  no_convergence,
  cutoff_too_small,
  step_rejected,
  empty_support,
  ill_conditioned,
  ambiguous_log,
  residual_too_large,
  invalid_argument,
};

const char* errc_name(Errc c);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}
  Errc code() const { return code_; }

 private:
  Errc code_;
};

}  // namespace ehs
