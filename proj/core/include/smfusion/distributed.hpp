#pragma once

#include <memory>
#include <vector>

#include "smfusion/centralized.hpp"
#include "smfusion/ellipsoid.hpp"
#include "smfusion/tau_solver.hpp"

namespace smf {

/// Upsilon blocks of the distributed fusion-center update at a multiplier
/// assignment t = [tau_u, tau_1^y .. tau_L^y]:
///   u11 = 1 - sum(tau) + sum_i tau_i^y d_i^T P_i^{-1} d_i,  d_i = c_pred - c_i
///   u12 = sum_i tau_i^y d_i^T P_i^{-1} E
///   u22 = tau_u I + sum_i tau_i^y E^T P_i^{-1} E
struct UpsilonBlocks {
    double u11 = 0.0;
    Vec u12;
    Mat u22;
};

UpsilonBlocks build_upsilon(const Ellipsoid& pred, const std::vector<Ellipsoid>& locals,
                            const TauAssignment& t);

/// The tau-only program of the distributed update: objective
/// obj(E u22^{-1} E^T), feasibility [u11, u12; u12^T, u22] >= 0.
/// `order` optionally remaps local indices (used to canonicalize the
/// sensor order so that permuting the locals cannot change the result).
TauProblem distributed_tau_problem(const Ellipsoid& pred,
                                   const std::vector<Ellipsoid>& locals,
                                   const SizeObjective& obj);

/// Fusion-center update: fuses the prediction ellipsoid with the local
/// estimate ellipsoids through
///   P_d^{-1} = tau_u P_pred^{-1} + sum_i tau_i^y P_i^{-1}
///   c_d      = c_pred + sum_i tau_i^y P_d P_i^{-1} (c_i - c_pred)
/// (shape first, then center). Locals are processed in a canonical order
/// internally, so permuting them yields an identical result. If no
/// feasible multiplier assignment exists the prediction is returned
/// unchanged with the feasible flag cleared.
FusionResult fuse_distributed(const Ellipsoid& pred, const std::vector<Ellipsoid>& locals,
                              const SizeObjective& obj, int budget = 0);

/// Certificate matrix of the distributed update at a candidate ellipsoid:
///   [ P_cand   c_pred - c_cand   E ]
///   [    .     u11               u12 ]
///   [    .     .                 u22 ]
/// Positive semidefiniteness certifies containment of the intersection.
Mat distributed_containment_matrix(const Ellipsoid& pred, const std::vector<Ellipsoid>& locals,
                                   const Ellipsoid& candidate, const TauAssignment& t);

} // namespace smf
