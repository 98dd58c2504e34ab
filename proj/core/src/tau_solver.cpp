#include "smfusion/tau_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

namespace smf {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kLogLo = -60.0;  // tau >= ~8.8e-27
constexpr double kLogHi = 30.0;   // tau <= ~1.1e13
} // namespace

Vec TauAssignment::to_vector() const {
    Vec v(dim());
    v(0) = tau_u;
    v.tail(extras.size()) = extras;
    return v;
}

TauAssignment TauAssignment::from_vector(const Vec& v) {
    TauAssignment t;
    t.tau_u = v(0);
    t.extras = v.tail(v.size() - 1);
    return t;
}

bool TauAssignment::nonnegative() const {
    return tau_u >= 0.0 && (extras.size() == 0 || (extras.array() >= 0.0).all());
}

Mat feasibility_matrix(const TauProblem& p, const TauAssignment& t) {
    Mat out;
    p.feasibility(t, out);
    return out;
}

bool is_feasible(const TauProblem& p, const TauAssignment& t, double tol) {
    if (t.dim() != p.dim) {
        throw DimensionMismatch("is_feasible: assignment dimension mismatch");
    }
    if (!t.nonnegative()) return false;
    Mat f;
    p.feasibility(t, f);
    if (f.rows() == 1) {
        const double v = f(0, 0);
        return v >= -tol * (1.0 + std::abs(v));
    }
    Eigen::SelfAdjointEigenSolver<Mat> es(detail::symmetrize(f), Eigen::EigenvaluesOnly);
    const double lo = es.eigenvalues().minCoeff();
    const double hi = es.eigenvalues().maxCoeff();
    const double radius = std::max(std::abs(lo), std::abs(hi));
    return lo >= -tol * (1.0 + radius);
}

namespace detail {

bool lex_less(const TauAssignment& a, const TauAssignment& b) {
    if (a.tau_u != b.tau_u) return a.tau_u < b.tau_u;
    for (Eigen::Index i = 0; i < std::min(a.extras.size(), b.extras.size()); ++i) {
        if (a.extras(i) != b.extras(i)) return a.extras(i) < b.extras(i);
    }
    return false;
}

bool psd_probe(const Mat& m, double shift) {
    if (m.rows() == 1) return m(0, 0) + shift > 0.0;
    Mat probe = m;
    return psd_probe_destructive(probe, shift);
}

bool psd_probe_destructive(Mat& m, double shift) {
    if (m.rows() == 1) return m(0, 0) + shift > 0.0;
    if (shift != 0.0) m.diagonal().array() += shift;
    Eigen::LLT<Eigen::Ref<Mat>> llt(m);  // decomposes in place, no allocation
    return llt.info() == Eigen::Success;
}

} // namespace detail

namespace {

// Strict interior test used as the Nelder-Mead barrier and by the radial
// push: positive definiteness of the feasibility matrix.
bool strictly_feasible(const TauProblem& p, const TauAssignment& t, Mat& work) {
    if (!t.nonnegative()) return false;
    p.feasibility(t, work);
    return detail::psd_probe_destructive(work, 0.0);
}

TauAssignment assignment_from_log(const Vec& x) {
    Vec v(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        v(i) = std::exp(std::clamp(x(i), kLogLo, kLogHi));
    }
    return TauAssignment::from_vector(v);
}

// Barrier evaluation for generic problems: +inf outside the feasible set.
struct BarrierEvaluator {
    const TauProblem& p;
    Mat work;
    int evals = 0;

    double operator()(const Vec& x) {
        ++evals;
        const TauAssignment t = assignment_from_log(x);
        if (!strictly_feasible(p, t, work)) return kInf;
        const double v = p.objective(t);
        return std::isfinite(v) ? v : kInf;
    }
};

// Ray-reduced evaluation for the fusion-step programs (objective
// homogeneous of degree -1, feasibility matrix affine in tau): the value
// along the ray through d, pushed to the feasibility boundary, is
// f(d) / lambda_max(d). Scale-free and barrier-free, so Nelder-Mead never
// collapses against the constraint surface.
struct RayEvaluator {
    const TauProblem& p;
    Mat origin;   // F(0)
    Mat fd;       // F(d)
    Mat diff;     // F(d) - F(0)
    Mat scratch;
    double lambda_hint = 1.0;
    int evals = 0;

    explicit RayEvaluator(const TauProblem& problem) : p(problem) {
        TauAssignment zero;
        zero.tau_u = 0.0;
        zero.extras = Vec::Zero(p.dim - 1);
        p.feasibility(zero, origin);
    }

    bool probe(double lambda) {
        scratch = origin + lambda * diff;
        return detail::psd_probe_destructive(scratch, 0.0);
    }

    // Largest lambda with F(0) + lambda (F(d) - F(0)) positive definite.
    double lambda_max() {
        double lo = 0.0;
        double hi = 0.0;
        double probe_at = std::max(lambda_hint, 1e-12);
        if (probe(probe_at)) {
            lo = probe_at;
            while (lo < 1e8) {
                const double next = lo * 2.0;
                if (!probe(next)) {
                    hi = next;
                    break;
                }
                lo = next;
            }
            if (hi == 0.0) return lo;  // effectively unbounded ray
        } else {
            hi = probe_at;
        }
        for (int it = 0; it < 60 && (hi - lo) > 1e-12 * hi; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (probe(mid)) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        return lo;
    }

    double operator()(const Vec& x) {
        ++evals;
        const TauAssignment d = assignment_from_log(x);
        const double f = p.objective(d);
        if (!std::isfinite(f)) return kInf;
        p.feasibility(d, fd);
        diff = fd - origin;
        const double lambda = lambda_max();
        if (lambda <= 0.0) return kInf;
        lambda_hint = lambda;
        return f / lambda;
    }
};

struct NmOutcome {
    Vec best;
    double value = kInf;
    bool converged = false;
};

// Standard Nelder-Mead on the log-multiplier space. Deterministic: ties in
// the vertex ordering fall back to lexicographic comparison.
template <typename Evaluator>
NmOutcome nelder_mead(Evaluator& eval, const Vec& x0, int budget) {
    const Eigen::Index d = x0.size();
    const int nverts = static_cast<int>(d) + 1;
    std::vector<Vec> xs(nverts, x0);
    std::vector<double> fs(nverts);
    for (int i = 1; i < nverts; ++i) xs[i](i - 1) += 0.25;
    for (int i = 0; i < nverts; ++i) fs[i] = eval(xs[i]);

    std::vector<int> order(nverts);
    auto sort_order = [&] {
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](int a, int b) {
            if (fs[a] != fs[b]) return fs[a] < fs[b];
            for (Eigen::Index k = 0; k < d; ++k) {
                if (xs[a](k) != xs[b](k)) return xs[a](k) < xs[b](k);
            }
            return a < b;
        });
    };

    NmOutcome out;
    while (true) {
        sort_order();
        const int ib = order[0];
        const int iw = order[nverts - 1];
        const int is = order[nverts - 2];

        if (std::isfinite(fs[ib])) {
            double diam = 0.0;
            for (int i = 1; i < nverts; ++i) {
                diam = std::max(diam, (xs[order[i]] - xs[ib]).cwiseAbs().maxCoeff());
            }
            const double spread = std::isfinite(fs[iw]) ? fs[iw] - fs[ib] : kInf;
            if (diam < 1e-11 && spread < 1e-13 * (1.0 + std::abs(fs[ib]))) {
                out.converged = true;
                break;
            }
        }
        if (eval.evals >= budget) break;

        Vec centroid = Vec::Zero(d);
        for (int i = 0; i + 1 < nverts; ++i) centroid += xs[order[i]];
        centroid /= static_cast<double>(nverts - 1);

        const Vec xr = centroid + (centroid - xs[iw]);
        const double fr = eval(xr);
        if (fr < fs[ib]) {
            const Vec xe = centroid + 2.0 * (centroid - xs[iw]);
            const double fe = eval(xe);
            if (fe < fr) {
                xs[iw] = xe;
                fs[iw] = fe;
            } else {
                xs[iw] = xr;
                fs[iw] = fr;
            }
        } else if (fr < fs[is]) {
            xs[iw] = xr;
            fs[iw] = fr;
        } else {
            const bool outside = fr < fs[iw];
            const double sign = outside ? 0.5 : -0.5;
            const Vec xc = centroid + sign * (centroid - xs[iw]);
            const double fc = eval(xc);
            if (fc < std::min(fr, fs[iw])) {
                xs[iw] = xc;
                fs[iw] = fc;
            } else {
                for (int i = 1; i < nverts; ++i) {
                    const int k = order[i];
                    xs[k] = xs[ib] + 0.5 * (xs[k] - xs[ib]);
                    fs[k] = eval(xs[k]);
                }
            }
        }
    }
    sort_order();
    out.best = xs[order[0]];
    out.value = fs[order[0]];
    return out;
}

// Scales all multipliers up to the feasibility boundary. The fusion-step
// objectives are homogeneous of degree -1 in tau, so the optimum sits on
// the boundary; the push finishes what Nelder-Mead approaches slowly.
TauAssignment radial_push(const TauProblem& p, const TauAssignment& t, Mat& work) {
    auto scaled = [&](double lambda) {
        TauAssignment s = t;
        s.tau_u *= lambda;
        s.extras *= lambda;
        return s;
    };
    if (!strictly_feasible(p, t, work)) return t;
    double lo = 1.0;
    double hi = 1.0;
    while (hi < 1e6) {
        const double next = hi * 2.0;
        if (!strictly_feasible(p, scaled(next), work)) break;
        hi = next;
        lo = next;
    }
    double upper = std::min(hi * 2.0, 2e6);
    for (int it = 0; it < 200 && (upper - lo) > 1e-15 * lo; ++it) {
        const double mid = 0.5 * (lo + upper);
        if (strictly_feasible(p, scaled(mid), work)) {
            lo = mid;
        } else {
            upper = mid;
        }
    }
    return scaled(lo);
}

} // namespace

std::optional<TauAssignment> make_interior(const TauProblem& p, const TauAssignment& base) {
    TauAssignment t = base;
    for (int k = 0; k <= 60; ++k) {
        if (is_feasible(p, t, 0.0)) return t;
        t.tau_u *= 0.9;
        t.extras *= 0.9;
    }
    return std::nullopt;
}

SolveResult solve(const TauProblem& p, const TauAssignment& start, int budget) {
    if (start.dim() != p.dim) {
        throw DimensionMismatch("solve: start dimension mismatch");
    }
    if (budget < 100 * p.dim) {
        throw InvalidParameter("solve: budget must be at least 100 * dim");
    }
    if (start.tau_u <= 0.0 || (start.extras.array() <= 0.0).any() ||
        !is_feasible(p, start, 0.0)) {
        throw InfeasibleStart("solve: start is not strictly feasible");
    }

    std::vector<TauAssignment> seeds;
    seeds.push_back(start);
    if (p.ray_reducible) {
        // Seeds are directions; any positive scale works.
        seeds.push_back(TauAssignment::from_vector(Vec::Constant(p.dim, 0.5)));
        seeds.push_back(TauAssignment::from_vector(Vec::Constant(p.dim, 1.0 / (p.dim + 1))));
    } else {
        if (auto s = make_interior(p, TauAssignment::from_vector(Vec::Constant(p.dim, 0.5)))) {
            seeds.push_back(*s);
        }
        if (auto s = make_interior(
                p, TauAssignment::from_vector(Vec::Constant(p.dim, 1.0 / (p.dim + 1))))) {
            seeds.push_back(*s);
        }
    }

    BarrierEvaluator barrier{p, Mat(), 0};
    std::optional<RayEvaluator> ray;
    if (p.ray_reducible) ray.emplace(p);
    const int per_seed = budget / static_cast<int>(seeds.size());

    SolveResult best;
    best.value = kInf;
    bool have_best = false;
    for (const auto& seed : seeds) {
        if (!seed.nonnegative() || seed.tau_u <= 0.0 ||
            (seed.extras.size() > 0 && (seed.extras.array() <= 0.0).any())) {
            continue;
        }
        Vec x0(p.dim);
        const Vec sv = seed.to_vector();
        for (Eigen::Index i = 0; i < sv.size(); ++i) x0(i) = std::log(sv(i));

        NmOutcome nm;
        if (p.ray_reducible) {
            ray->evals = 0;
            nm = nelder_mead(*ray, x0, per_seed);
        } else {
            barrier.evals = 0;
            nm = nelder_mead(barrier, x0, per_seed);
        }
        if (!std::isfinite(nm.value)) continue;

        // Scale the winning point (for ray problems: direction) onto the
        // feasibility boundary with a high-precision bisection.
        TauAssignment cand = assignment_from_log(nm.best);
        double cand_value = p.ray_reducible ? kInf : nm.value;
        const TauAssignment pushed = radial_push(p, cand, barrier.work);
        const double pushed_value = p.objective(pushed);
        if (std::isfinite(pushed_value) && pushed_value <= cand_value) {
            cand = pushed;
            cand_value = pushed_value;
        } else if (p.ray_reducible) {
            continue;  // direction never became feasible
        }

        const double tie = 1e-12 * std::max({1.0, std::abs(cand_value), std::abs(best.value)});
        const bool better =
            !have_best || cand_value < best.value - tie ||
            (std::abs(cand_value - best.value) <= tie && detail::lex_less(cand, best.tau));
        if (better) {
            best.tau = cand;
            best.value = cand_value;
            best.budget_exhausted = !nm.converged;
            have_best = true;
        }
    }
    if (!have_best) {
        // Seeds all collapsed to infeasibility; fall back to the start.
        best.tau = start;
        best.value = p.objective(start);
        best.budget_exhausted = true;
    }
    return best;
}

OracleResult grid_oracle(const TauProblem& p, int resolution,
                         const Vec& upper_bounds, double tol, bool monotone_tail) {
    if (p.dim > 5) {
        throw InvalidParameter("grid_oracle: dimension must be <= 5");
    }
    if (resolution < 50) {
        throw InvalidParameter("grid_oracle: resolution must be >= 50");
    }
    const int d = p.dim;
    std::vector<int> steps(d);
    for (int i = 0; i < d; ++i) {
        const double ub = (upper_bounds.size() == d) ? upper_bounds(i) : 1.0;
        steps[i] = std::max(1, static_cast<int>(std::floor(ub * resolution + 1e-9)));
    }

    const double h = 1.0 / static_cast<double>(resolution);
    std::vector<int> idx(d, 1);
    TauAssignment t;
    t.extras = Vec(d - 1);
    Mat work;

    bool found = false;
    OracleResult best;
    best.value = kInf;

    bool skip_tail = false;
    while (true) {
        t.tau_u = idx[0] * h;
        for (int i = 1; i < d; ++i) t.extras(i - 1) = idx[i] * h;

        p.feasibility(t, work);
        const double scale = tol * (1.0 + work.cwiseAbs().rowwise().sum().maxCoeff());
        if (detail::psd_probe_destructive(work, scale)) {
            const double v = p.objective(t);
            if (std::isfinite(v)) {
                const double tie = 1e-12 * std::max({1.0, std::abs(v), std::abs(best.value)});
                if (!found || v < best.value - tie ||
                    (std::abs(v - best.value) <= tie && detail::lex_less(t, best.tau))) {
                    best.value = v;
                    best.tau = t;
                    found = true;
                }
            }
        } else if (monotone_tail) {
            skip_tail = true;  // rest of this line stays infeasible
        }

        int pos = d - 1;
        if (skip_tail) {
            skip_tail = false;
            idx[pos] = steps[pos];  // jump to the line end before advancing
        }
        while (pos >= 0 && ++idx[pos] > steps[pos]) {
            idx[pos] = 1;
            --pos;
        }
        if (pos < 0) break;
    }
    if (!found) {
        throw NoFeasiblePoint("grid_oracle: no feasible grid point");
    }
    return best;
}

} // namespace smf
