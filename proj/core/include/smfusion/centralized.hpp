#pragma once

#include <memory>
#include <vector>

#include "smfusion/ellipsoid.hpp"
#include "smfusion/remainder.hpp"
#include "smfusion/system_model.hpp"
#include "smfusion/tau_solver.hpp"

namespace smf {

/// Decoupled block data of one centralized fusion update.
///
/// psi22 stacks E_pred^{-1}, the negated measurement Jacobians and the
/// negated remainder-factor inverses; psi21 stacks the (angle-wrapped)
/// innovations h_i(c_pred) - y_i and the B_i^{-1} e_i terms. Sensors whose
/// remainder bound is degenerate (exactly linear measurements) contribute
/// no remainder rows: their tau_h multiplier is fixed at zero and their
/// remainder center is folded into the innovation entry.
///
/// The multiplier layout of the reduced program is
///   [tau_u, tau_1^v .. tau_L^v, tau_i^h for non-degenerate i]
/// while the public TauAssignment layout is always
///   [tau_u, tau_1^v .. tau_L^v, tau_1^h .. tau_L^h].
struct CentralizedBlocks {
    int n = 0;  // state dimension
    int m = 0;  // measurement dimension
    int L = 0;  // sensor count

    Mat psi22;  // (n + mL + m*D) x (n + mL), D = number of non-degenerate sensors
    Vec psi21;  // n + mL + m*D

    Vec pred_center;
    Mat pred_shape;
    Mat pred_shape_inv;

    std::vector<bool> degenerate;     // per sensor
    std::vector<int> h_extra_index;   // index into reduced extras, -1 if degenerate

    std::vector<Mat> jac;             // J_i, m x n
    std::vector<Mat> r;               // R_i
    std::vector<Mat> r_inv;           // R_i^{-1}
    std::vector<Vec> innovation;      // wrapped h_i(c_pred) - y_i (+ e_i when degenerate)
    std::vector<Vec> rem_center;      // e_i
    std::vector<Mat> rem_shape;       // P_{h,i}
    std::vector<Mat> rem_shape_inv;   // P_{h,i}^{-1}, identity-sized zero when degenerate

    // Constant pieces of the affine maps tau -> Xi-weighted products, so
    // the feasibility matrix and objective can be evaluated without
    // rebuilding the blocks: M(tau) = tau_u*M_u + sum tau_i^v*M_v[i]
    // + sum tau_i^h*M_h[i], and likewise for the psi21 cross terms.
    Mat m_u;
    std::vector<Mat> m_v;
    std::vector<Mat> m_h;     // indexed like h_extra_index targets (size D)
    std::vector<Vec> c_v;     // Psi22_v^T R^{-1} innovation
    std::vector<Vec> c_h;     // Psi22_h^T B^{-1} e
    std::vector<double> q_v;  // innovation^T R^{-1} innovation
    std::vector<double> q_h;  // ||B^{-1} e||^2

    int reduced_dim() const { return 1 + L + num_nondegenerate(); }
    int full_dim() const { return 1 + 2 * L; }
    int num_nondegenerate() const;

    /// Diagonal-block matrix Xi22 at a full-layout assignment
    /// (dimension n + mL + m*D, matching psi22's rows).
    Mat xi22(const TauAssignment& full) const;

    TauAssignment reduce(const TauAssignment& full) const;
    TauAssignment expand(const TauAssignment& reduced) const;
};

/// Assembles the decoupled blocks for one fusion update. Throws
/// SingularFactor if the prediction factor cannot be inverted.
CentralizedBlocks build_blocks(const Ellipsoid& pred, const SystemModel& model,
                               const std::vector<Vec>& measurements,
                               const std::vector<RemainderBound>& rems);

/// The tau-only program of the fusion update over the reduced multiplier
/// layout: objective obj(B (Psi22^T Xi22 Psi22)^{-1} B^T), feasibility the
/// 2x2 block matrix pairing the scalar slack with that Gram matrix.
TauProblem centralized_tau_problem(std::shared_ptr<const CentralizedBlocks> blocks,
                                   const SizeObjective& obj);

struct FusionResult {
    Ellipsoid ellipsoid;
    TauAssignment tau;  // full layout
    bool feasible = true;
    double objective = 0.0;
};

/// Measurement/fusion update: optimizes the multipliers and evaluates the
/// information-form shape update
///   P^{-1} = tau_u P_pred^{-1} + sum_i J_i^T (R_i/tau_i^v + P_h_i/tau_i^h)^{-1} J_i
/// and the gain-form center update with the nonlinear correction term.
/// If no feasible multiplier assignment is found the prediction is
/// returned unchanged with the feasible flag cleared.
FusionResult fuse_update(const Ellipsoid& pred, const SystemModel& model,
                         const std::vector<Vec>& measurements,
                         const std::vector<RemainderBound>& rems,
                         const SizeObjective& obj, int budget = 0);

/// Fused shape via the information form (the production route).
Mat centralized_shape_from_tau(const CentralizedBlocks& blocks, const TauAssignment& full);

/// Fused shape via the decoupled block route B (Psi22^T Xi22 Psi22)^{-1} B^T;
/// equals the information form for feasible positive multipliers.
Mat centralized_decoupled_shape(const CentralizedBlocks& blocks, const TauAssignment& full);

/// Fused center via the gain form (information gains K_i plus nonlinear
/// correction), given the fused shape.
Vec centralized_center_from_tau(const CentralizedBlocks& blocks, const Mat& fused_shape,
                                const TauAssignment& full);

/// Fused center via the decoupled block route
/// c_pred + B M^{-1} Psi22^T Xi22 Psi21.
Vec centralized_decoupled_center(const CentralizedBlocks& blocks, const TauAssignment& full);

/// Certificate matrix of the fusion update at a candidate ellipsoid and
/// multiplier assignment (full layout); positive semidefiniteness
/// certifies containment of the update set. Verification only.
Mat update_containment_matrix(const CentralizedBlocks& blocks, const Ellipsoid& candidate,
                              const TauAssignment& full);

} // namespace smf
