#pragma once

#include <functional>
#include <optional>

#include "smfusion/ellipsoid.hpp"

namespace smf {

/// Nonnegative multipliers attached to one fusion step. The extras vector
/// is interpreted per step: {tau_w, tau_f} for prediction,
/// {tau_i_v..., tau_i_h...} for the centralized update, {tau_i_y...} for
/// the distributed update.
struct TauAssignment {
    double tau_u = 0.0;
    Vec extras;

    Eigen::Index dim() const { return 1 + extras.size(); }
    Vec to_vector() const;
    static TauAssignment from_vector(const Vec& v);
    bool nonnegative() const;
};

/// A feasibility-constrained scalar minimization over the multipliers.
/// The feasibility functor writes a symmetric matrix whose positive
/// semidefiniteness encodes the constraint; it takes an output reference
/// so sweeps can reuse one workspace.
///
/// ray_reducible declares the structure shared by all fusion-step
/// programs: the objective is homogeneous of degree -1 in the multipliers
/// and the feasibility matrix is affine in them (so along any ray the
/// feasible set is an interval starting at zero and the optimum sits on
/// its far end). The solver then works on the scale-free ray objective
/// f(d) / lambda_max(d), which has no feasibility barrier.
struct TauProblem {
    std::function<double(const TauAssignment&)> objective;
    std::function<void(const TauAssignment&, Mat&)> feasibility;
    int dim = 0;
    bool ray_reducible = false;
};

/// Convenience wrapper returning the feasibility matrix by value.
Mat feasibility_matrix(const TauProblem& p, const TauAssignment& t);

/// True iff all multipliers are nonnegative and the feasibility matrix has
/// min eigenvalue >= -tol * (1 + spectral radius).
bool is_feasible(const TauProblem& p, const TauAssignment& t, double tol);

struct SolveResult {
    TauAssignment tau;
    double value = 0.0;
    bool budget_exhausted = false;
};

/// Minimizes the problem objective from a strictly feasible start.
///
/// Runs Nelder-Mead in log(tau) coordinates with an infinite-objective
/// barrier at infeasible points, restarted from three deterministic seeds
/// (the given start, a uniform assignment, and tau = 1/(dim+1) each; the
/// latter two are pulled into the interior by repeated 0.9x scaling).
/// Each restart ends with a radial push: all multipliers are scaled up to
/// the feasibility boundary by bisection, which is where the optimum lies
/// for the homogeneous objectives produced by the fusion steps. The best
/// restart wins; ties within 1e-12 go to the lexicographically smallest
/// multiplier vector. Deterministic given inputs.
///
/// Throws InfeasibleStart if `start` is not strictly feasible and
/// InvalidParameter if budget < 100 * dim. If the budget runs out the best
/// point found so far is returned with budget_exhausted set.
SolveResult solve(const TauProblem& p, const TauAssignment& start, int budget);

struct OracleResult {
    TauAssignment tau;
    double value = 0.0;
};

/// Exhaustive search over the grid {j / resolution} per variable,
/// j = 1..resolution * upper_bound, feasibility-filtered (tolerance `tol`
/// against the scaled min eigenvalue). Intended as an independent test
/// oracle for problems of dimension <= 5. Throws NoFeasiblePoint when the
/// grid contains no feasible point.
///
/// `monotone_tail` may be set by callers whose feasible set is downward
/// closed along the last variable (e.g. simplex-type constraints); the
/// scan of a line then stops at the first infeasible point, visiting the
/// same feasible set as the full sweep.
OracleResult grid_oracle(const TauProblem& p, int resolution,
                         const Vec& upper_bounds = Vec(), double tol = 1e-9,
                         bool monotone_tail = false);

/// Scales `base` by 0.9^k (k <= 60) until it becomes feasible; the warm
/// start construction used by the fusion steps.
std::optional<TauAssignment> make_interior(const TauProblem& p, const TauAssignment& base);

namespace detail {
/// Lexicographic comparison of multiplier vectors, used for tie-breaks.
bool lex_less(const TauAssignment& a, const TauAssignment& b);
/// Fast positive-definiteness probe of m + shift * I.
bool psd_probe(const Mat& m, double shift);
/// Same probe, decomposing in place (m is destroyed).
bool psd_probe_destructive(Mat& m, double shift);
} // namespace detail

} // namespace smf
