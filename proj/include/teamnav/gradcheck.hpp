#pragma once

#include <cstdint>

#include "teamnav/autodiff.hpp"

namespace teamnav {

struct PolicyGradCheckResult {
  int trials = 0;
  double max_rel_error = 0.0;
  int worst_trial = -1;
  GradCheckReport worst;
  bool passed = true;
};

/// Finite-difference check of the policy-gradient surrogate sum(w * log_prob)
/// on `trials` random networks, observation batches and actions.
/// `corrupt_backward` swaps the hidden activation for a tanh whose backward rule
/// is wrong; the check must then fail.
PolicyGradCheckResult policy_gradcheck(int trials, std::uint64_t seed = 0, bool corrupt_backward = false,
                                       double tol = 1e-6);

}  // namespace teamnav
