#pragma once

// CSV and JSON emission for trajectories, extremal traces and reach tubes.

#include <iosfwd>

#include <json.hpp>

#include "anreach/envelope.hpp"
#include "anreach/pontryagin.hpp"
#include "anreach/reachability.hpp"

namespace anreach {

/// `t,p_<state>...,pi_<state>...,<uncertainty name>...`; the control of the step
/// starting at t (the final row repeats the last step).
void write_extremal_csv(std::ostream& os, const Envelope& env, const ExtremalSolution& sol);
nlohmann::json extremal_summary(const Envelope& env, const TargetSpec& target, double eps,
                                const ExtremalSolution& sol);

/// `t,lower_<state>...,upper_<state>...`; empty body unless certified.
void write_tube_csv(std::ostream& os, const ReachTube& tube);
nlohmann::json tube_summary(const ReachTube& tube);

}  // namespace anreach
