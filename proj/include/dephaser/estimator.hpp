// estimator.hpp — Simplex-constrained least squares for the bath weights at
// fixed coupling, the outer coupling-parameter grid sweep with convexity
// verification, and golden-section refinement of the sweep minimum.

#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include "dephaser/algebra.hpp"
#include "dephaser/measurement.hpp"
#include "dephaser/parallel.hpp"
#include "dephaser/rovib.hpp"

namespace dephaser {

// Euclidean projection onto {p >= 0, sum p = 1}: sort-based threshold rule.
// The output sum is nudged onto 1.0 exactly (in the descending summation
// order the threshold scan uses), which makes the projection an exact
// fixed point of itself.
inline RealVector simplex_project(const RealVector& v) {
    if (v.size() < 1) throw ValidationError("non-empty", "cannot project an empty vector");
    if (!v.allFinite()) throw ValidationError("finite", "projection input must be finite");

    std::vector<double> sorted(v.data(), v.data() + v.size());
    std::sort(sorted.begin(), sorted.end(), std::greater<double>());
    double running = 0.0;
    double threshold = 0.0;
    for (std::size_t k = 0; k < sorted.size(); ++k) {
        running += sorted[k];
        const double candidate = (running - 1.0) / static_cast<double>(k + 1);
        if (sorted[k] - candidate > 0.0) threshold = candidate;
    }
    RealVector p = (v.array() - threshold).cwiseMax(0.0);

    for (int round = 0; round < 4; ++round) {
        std::vector<double> entries(p.data(), p.data() + p.size());
        std::sort(entries.begin(), entries.end(), std::greater<double>());
        double sum = 0.0;
        for (double e : entries) sum += e;
        if (sum == 1.0) break;
        Eigen::Index largest = 0;
        p.maxCoeff(&largest);
        p[largest] -= sum - 1.0;
    }
    return p;
}

struct EstimationResult {
    RealVector p_hat;
    double objective = 0.0;   // sum_r (y_r - (C p)_r)^2
    int iterations = 0;
    bool converged = false;
    double residual_norm = 0.0;
    double kkt_violation = 0.0;
    bool non_unique = false;  // smallest singular value of C below 1e-10 * largest
};

struct SolveOptions {
    int max_iterations = 200000;
    double rel_tol = 1e-12;
    int stall_window = 10;
    bool polish = true; // active-set finish on the converged support
};

namespace detail {

inline double objective_value(const RealMatrix& c, const RealVector& y, const RealVector& p) {
    return (c * p - y).squaredNorm();
}

// Largest eigenvalue of 2 C^T C by power iteration, deterministic start.
inline double lipschitz_estimate(const RealMatrix& c) {
    const Eigen::Index n = c.cols();
    RealVector v(n);
    for (Eigen::Index i = 0; i < n; ++i)
        v[i] = 1.0 + 1e-3 * static_cast<double>(i); // avoid symmetric-start stagnation
    v /= v.norm();
    double estimate = 0.0;
    int stable = 0;
    for (int iter = 0; iter < 500; ++iter) {
        RealVector w = 2.0 * (c.transpose() * (c * v));
        const double norm = w.norm();
        if (norm <= 0.0) return 0.0;
        const double next = v.dot(w);
        if (std::abs(next - estimate) <= 1e-14 * std::max(1.0, std::abs(next))) {
            if (++stable >= 5) { estimate = next; break; }
        } else {
            stable = 0;
        }
        estimate = next;
        v = w / norm;
    }
    return estimate;
}

// Max violation of simplex-LS stationarity: the gradient must be constant on
// the support and no smaller off it.
inline double kkt_violation(const RealMatrix& c, const RealVector& y, const RealVector& p) {
    const RealVector g = 2.0 * (c.transpose() * (c * p - y));
    double mu = 0.0;
    int support = 0;
    for (Eigen::Index i = 0; i < p.size(); ++i)
        if (p[i] > 1e-12) { mu += g[i]; ++support; }
    if (support == 0) return 0.0;
    mu /= static_cast<double>(support);
    double violation = 0.0;
    for (Eigen::Index i = 0; i < p.size(); ++i) {
        if (p[i] > 1e-12)
            violation = std::max(violation, std::abs(g[i] - mu));
        else
            violation = std::max(violation, std::max(0.0, mu - g[i]));
    }
    return violation;
}

// Equality-constrained least squares on the active support:
//   [2 C_S^T C_S  1] [p_S ]   [2 C_S^T y]
//   [1^T          0] [nu  ] = [1        ]
// Returns false when the solution leaves the simplex.
inline bool polish_on_support(const RealMatrix& c, const RealVector& y,
                              RealVector& p) {
    std::vector<Eigen::Index> support;
    for (Eigen::Index i = 0; i < p.size(); ++i)
        if (p[i] > 1e-12) support.push_back(i);
    if (support.empty()) return false;
    const auto s = static_cast<Eigen::Index>(support.size());
    RealMatrix cs(c.rows(), s);
    for (Eigen::Index k = 0; k < s; ++k) cs.col(k) = c.col(support[static_cast<std::size_t>(k)]);

    RealMatrix kkt = RealMatrix::Zero(s + 1, s + 1);
    kkt.topLeftCorner(s, s) = 2.0 * (cs.transpose() * cs);
    kkt.topRightCorner(s, 1).setOnes();
    kkt.bottomLeftCorner(1, s).setOnes();
    RealVector rhs(s + 1);
    rhs.head(s) = 2.0 * (cs.transpose() * y);
    rhs[s] = 1.0;

    Eigen::FullPivLU<RealMatrix> lu(kkt);
    if (!lu.isInvertible()) return false;
    const RealVector solution = lu.solve(rhs);
    if (solution.head(s).minCoeff() < 0.0) return false;

    RealVector candidate = RealVector::Zero(p.size());
    for (Eigen::Index k = 0; k < s; ++k)
        candidate[support[static_cast<std::size_t>(k)]] = solution[k];
    // exact renormalization guards round-off in the linear solve
    const double total = candidate.sum();
    if (!(total > 0.0)) return false;
    candidate /= total;
    p = candidate;
    return true;
}

} // namespace detail

// minimize ||C p - y||^2 over the probability simplex: projected gradient with
// fixed step 1/L (power-method Lipschitz estimate x 1.01), Nesterov
// acceleration with function-value restarts, deterministic uniform start.
// The momentum restart keeps the accepted objective sequence non-increasing;
// the best iterate seen is what is returned.
inline EstimationResult solve_simplex_ls(const RealMatrix& c, const RealVector& y,
                                         const SolveOptions& opts = SolveOptions()) {
    if (c.rows() < 1 || c.cols() < 1)
        throw ValidationError("dimension", "design matrix must be non-empty");
    if (y.size() != c.rows())
        throw ValidationError("dimension", "one observation per design row required");
    if (!c.allFinite() || !y.allFinite())
        throw ValidationError("finite", "solver inputs must be finite");

    const Eigen::Index n = c.cols();
    EstimationResult result;
    result.p_hat = RealVector::Constant(n, 1.0 / static_cast<double>(n));

    const double lipschitz = 1.01 * detail::lipschitz_estimate(c);
    if (lipschitz <= 0.0) {
        // C == 0: every simplex point is optimal
        result.objective = y.squaredNorm();
        result.residual_norm = std::sqrt(result.objective);
        result.converged = true;
        return result;
    }
    const double step = 1.0 / lipschitz;

    RealVector p = result.p_hat;
    RealVector p_prev = p;
    RealVector z = p;
    double momentum = 1.0;
    double f_prev = detail::objective_value(c, y, p);
    double f_best = f_prev;
    RealVector p_best = p;

    int stall = 0;
    int iter = 0;
    for (; iter < opts.max_iterations; ++iter) {
        const RealVector gradient = 2.0 * (c.transpose() * (c * z - y));
        p = simplex_project(z - step * gradient);
        const double f = detail::objective_value(c, y, p);

        if (f > f_prev) {
            // function-value restart: drop momentum, retry from the last accepted point
            z = p_prev;
            momentum = 1.0;
            p = p_prev;
            continue;
        }

        if (f < f_best) { f_best = f; p_best = p; }

        if (f_prev - f <= opts.rel_tol * f_prev) {
            if (++stall >= opts.stall_window) { ++iter; break; }
        } else {
            stall = 0;
        }

        const double momentum_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * momentum * momentum));
        z = p + ((momentum - 1.0) / momentum_next) * (p - p_prev);
        momentum = momentum_next;
        p_prev = p;
        f_prev = f;
    }

    result.converged = iter < opts.max_iterations || stall >= opts.stall_window;
    result.iterations = iter;
    result.p_hat = p_best;

    if (opts.polish) {
        RealVector polished = p_best;
        if (detail::polish_on_support(c, y, polished)) {
            const double f_polished = detail::objective_value(c, y, polished);
            if (f_polished <= f_best ||
                (f_polished - f_best <= 1e-14 * std::max(1.0, f_best) &&
                 detail::kkt_violation(c, y, polished) < detail::kkt_violation(c, y, p_best))) {
                result.p_hat = polished;
            }
        }
    }

    result.objective = detail::objective_value(c, y, result.p_hat);
    result.residual_norm = std::sqrt(result.objective);
    result.kkt_violation = detail::kkt_violation(c, y, result.p_hat);
    const DesignDiagnostics diag = design_rank(c);
    result.non_unique = diag.smin < 1e-10 * diag.smax;
    return result;
}

// Book-keeping the paper's unknown-count comparison, computed from (n, j_max).
struct UnknownCounts {
    long blind_qpt = 0;        // n^4 - n^2
    long state_tomography = 0; // n^2
    long this_method = 0;      // j_max + 2 (weights + coupling constant)
};

inline UnknownCounts unknown_counts(int dim, int j_max) {
    const long n2 = static_cast<long>(dim) * dim;
    return UnknownCounts{n2 * n2 - n2, n2, static_cast<long>(j_max) + 2};
}

struct SweepResult {
    RealVector lambda_grid;
    RealVector objectives;
    double best_lambda = 0.0;
    int best_index = 0;
    EstimationResult best_result;
    bool convex_flag = false;
    bool boundary_flag = false;
};

// The inner problem rebound to data: one row per dataset record (operator
// looked up by setting id, time taken from the record), y = empirical
// probabilities. design(lambda) rebuilds C for a coupling value.
class EstimationProblem {
public:
    EstimationProblem(const Dataset& data, const std::vector<MeasurementSetting>& settings,
                      DensityMatrix rho0, const RovibParams& base)
        : rho0_(std::move(rho0)), base_(base) {
        validate_params(base_);
        if (data.records.empty())
            throw ValidationError("non-empty", "estimation needs a non-empty dataset");
        validate_dataset(data);

        std::map<std::string, std::size_t> by_id;
        for (std::size_t s = 0; s < settings.size(); ++s) by_id[settings[s].id] = s;
        rows_.reserve(data.records.size());
        y_.resize(static_cast<Eigen::Index>(data.records.size()));
        for (std::size_t r = 0; r < data.records.size(); ++r) {
            const auto& rec = data.records[r];
            const auto found = by_id.find(rec.setting_id);
            if (found == by_id.end())
                throw ValidationError("unknown-setting",
                                      "dataset references setting '" + rec.setting_id + "'");
            const auto& setting = settings[found->second];
            if (setting.op.dim() != rho0_.dim() || rho0_.dim() != base_.dim)
                throw ValidationError("dimension", "setting/state/model dimension mismatch");
            rows_.push_back(Row{setting.op, rec.t});
            y_[static_cast<Eigen::Index>(r)] = rec.p_emp;
        }
    }

    RealMatrix design(double lambda) const {
        RovibParams params = base_;
        params.lambda = lambda;
        RealMatrix c(static_cast<Eigen::Index>(rows_.size()), base_.j_max + 1);
        for (std::size_t r = 0; r < rows_.size(); ++r)
            c.row(static_cast<Eigen::Index>(r)) =
                detail::design_row(rows_[r].op, rows_[r].time, rho0_, params).transpose();
        return c;
    }

    EstimationResult solve_at(double lambda, const SolveOptions& opts = SolveOptions()) const {
        return solve_simplex_ls(design(lambda), y_, opts);
    }

    // Inner solve per grid point (grid points run in parallel, reduced in
    // grid order), argmin selection with smallest-lambda tie-break, convexity
    // check on the L(lambda) samples, boundary detection.
    SweepResult sweep(const RealVector& lambda_grid,
                      const SolveOptions& opts = SolveOptions()) const {
        if (lambda_grid.size() < 1)
            throw ValidationError("non-empty", "lambda grid must be non-empty");
        for (Eigen::Index i = 1; i < lambda_grid.size(); ++i)
            if (!(lambda_grid[i] > lambda_grid[i - 1]))
                throw ValidationError("ascending", "lambda grid must be strictly ascending");

        SweepResult sweep_result;
        sweep_result.lambda_grid = lambda_grid;
        sweep_result.objectives.resize(lambda_grid.size());
        std::vector<EstimationResult> results(static_cast<std::size_t>(lambda_grid.size()));
        parallel_for(static_cast<std::size_t>(lambda_grid.size()), [&](std::size_t i) {
            results[i] = solve_at(lambda_grid[static_cast<Eigen::Index>(i)], opts);
            sweep_result.objectives[static_cast<Eigen::Index>(i)] = results[i].objective;
        });

        int best = 0;
        for (Eigen::Index i = 1; i < lambda_grid.size(); ++i)
            if (sweep_result.objectives[i] < sweep_result.objectives[best]) best = static_cast<int>(i);
        sweep_result.best_index = best;
        sweep_result.best_lambda = lambda_grid[best];
        sweep_result.best_result = results[static_cast<std::size_t>(best)];
        sweep_result.boundary_flag =
            best == 0 || best == static_cast<int>(lambda_grid.size()) - 1;

        sweep_result.convex_flag = true;
        const double scale = sweep_result.objectives.cwiseAbs().maxCoeff();
        for (Eigen::Index i = 1; i + 1 < lambda_grid.size(); ++i) {
            const double second_difference = sweep_result.objectives[i + 1] -
                                             2.0 * sweep_result.objectives[i] +
                                             sweep_result.objectives[i - 1];
            if (second_difference < -1e-9 * scale) sweep_result.convex_flag = false;
        }
        return sweep_result;
    }

    struct Refined {
        double lambda = 0.0;
        EstimationResult result;
    };

    // Golden-section search on L(lambda) inside the bracket formed by the
    // sweep minimum's grid neighbors; valid only for an interior minimum of a
    // convexity-verified sweep.
    Refined refine(const SweepResult& sweep_result, double lambda_tol,
                   const SolveOptions& opts = SolveOptions()) const {
        if (!sweep_result.convex_flag)
            throw ValidationError("refine-precondition",
                                  "L(lambda) failed the convexity check; extend or densify the grid");
        if (sweep_result.boundary_flag)
            throw ValidationError("refine-precondition",
                                  "sweep minimum sits on the grid edge; extend the grid");
        if (!(lambda_tol > 0.0))
            throw ValidationError("tolerance", "refinement tolerance must be > 0");

        const int i = sweep_result.best_index;
        double lo = sweep_result.lambda_grid[i - 1];
        double hi = sweep_result.lambda_grid[i + 1];
        if (hi - lo <= lambda_tol)
            return Refined{sweep_result.best_lambda, sweep_result.best_result};

        constexpr double inv_golden = 0.6180339887498949;
        double a = hi - inv_golden * (hi - lo);
        double b = lo + inv_golden * (hi - lo);
        double fa = solve_at(a, opts).objective;
        double fb = solve_at(b, opts).objective;
        while (hi - lo > lambda_tol) {
            if (fa <= fb) {
                hi = b;
                b = a;
                fb = fa;
                a = hi - inv_golden * (hi - lo);
                fa = solve_at(a, opts).objective;
            } else {
                lo = a;
                a = b;
                fa = fb;
                b = lo + inv_golden * (hi - lo);
                fb = solve_at(b, opts).objective;
            }
        }
        Refined refined;
        refined.lambda = 0.5 * (lo + hi);
        refined.result = solve_at(refined.lambda, opts);
        return refined;
    }

private:
    struct Row {
        HermitianObservable op;
        double time = 0.0;
    };

    std::vector<Row> rows_;
    RealVector y_;
    DensityMatrix rho0_;
    RovibParams base_;
};

// Convenience wrapper matching the sweep contract directly.
inline SweepResult sweep_lambda(const Dataset& data,
                                const std::vector<MeasurementSetting>& settings,
                                const DensityMatrix& rho0, const RovibParams& base,
                                const RealVector& lambda_grid,
                                const SolveOptions& opts = SolveOptions()) {
    return EstimationProblem(data, settings, rho0, base).sweep(lambda_grid, opts);
}

} // namespace dephaser
