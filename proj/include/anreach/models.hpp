#pragma once

#include <string>

#include "anreach/agent_network.hpp"

namespace anreach::models {

/// Single-class SIRS with S+I -> I+I at V_S V_I, I -> R at beta V_I and
/// R -> S at V_R; only beta is a parameter.
AgentNetwork basic_sirs(double beta_nominal, double beta_bound, double horizon = 3.0);

/// Multi-class SIRS over D classes: alpha_{nu,mu} = 1, beta_nu = 2, gamma_nu = 3,
/// V_S(0) = 4 + 0.1 (nu - 1), V_I(0) = V_R(0) = 1, horizon 3; every parameter
/// carries `bound`.
AgentNetwork multiclass_sirs(int classes, double bound);

/// GPS queueing over D classes: alpha_nu = 3 (uncertain by `bound`),
/// beta_nu = 4 (certain), phi_nu = 2 nu / (D (D + 1)), V_Q(0) = 0.8,
/// V_D(0) = 0.2, horizon 3.
AgentNetwork gps_queue(int classes, double bound);

/// "sirs:D[:bound]" or "gps:D[:bound]" (default bound 0.05).
AgentNetwork from_spec(const std::string& spec);

}  // namespace anreach::models
