#pragma once

#include "smfusion/ellipsoid.hpp"
#include "smfusion/remainder.hpp"
#include "smfusion/system_model.hpp"
#include "smfusion/tau_solver.hpp"

namespace smf {

struct PredictResult {
    Ellipsoid ellipsoid;
    TauAssignment tau;  // extras = {tau_w, tau_f}
};

/// Time update: propagates the current bounding ellipsoid through the
/// state map.
///
/// Center: f(center) + remainder center. Shape:
///   J P J^T / tau_u + Q / tau_w + P_f / tau_f
/// with the multipliers proportional to the square roots of the weighted
/// traces of the three terms, which is the analytic optimum of the
/// time-update program for trace-type objectives. Terms whose weighted
/// trace falls below 1e-12 of the largest are dropped and the remaining
/// multipliers renormalized (with a vanishing remainder term this is the
/// classical two-term Schweppe form). Throws DegenerateInput if all three
/// terms vanish.
PredictResult predict(const Ellipsoid& current, const SystemModel& model,
                      const RemainderBound& rem_f, const SizeObjective& obj);

/// The tau-only program equivalent to the time update, for cross-checking
/// `predict` against the grid oracle: objective a_u/tau_u + a_w/tau_w
/// (+ a_f/tau_f when the remainder term survives), feasibility
/// 1 - sum(tau) >= 0. Returns the problem and whether the remainder term
/// was kept.
struct PredictionTauProblem {
    TauProblem problem;
    bool remainder_kept = false;
};
PredictionTauProblem prediction_tau_problem(const Ellipsoid& current,
                                            const SystemModel& model,
                                            const RemainderBound& rem_f,
                                            const SizeObjective& obj);

/// Assembles the block certificate matrix of the time-update program at a
/// candidate ellipsoid and multiplier assignment:
///   [ P_cand   Phi ]        Phi = [f(c)+e_f - c_cand, J E, I, B_f]
///   [ Phi^T    Xi  ]        Xi  = diag(1-sum(tau), tau_u I, tau_w Q^{-1}, tau_f I)
/// Positive semidefiniteness certifies that the candidate contains every
/// state reachable from the current ellipsoid under the bounded noise and
/// remainder. Verification only.
Mat prediction_containment_matrix(const Ellipsoid& current, const SystemModel& model,
                                  const RemainderBound& rem_f, const Ellipsoid& candidate,
                                  const TauAssignment& t);

} // namespace smf
