#pragma once

// Invariant suite run by the verify experiment.

#include <string>
#include <vector>

#include "markov_ruin/config.hpp"

namespace markov_ruin {

struct VerifyCheck {
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

struct VerifyReport {
  std::vector<VerifyCheck> checks;
  bool all_passed() const;
};

/// Convexity and Lambda(0) = 0 for every cgf estimate of the configured
/// model and a fixed zoo, monotonicity of Psi_hat, scale equivariance of
/// the tail fit, and byte-identical reruns across thread counts.
VerifyReport run_verify_suite(const RunConfig& config);

}  // namespace markov_ruin
