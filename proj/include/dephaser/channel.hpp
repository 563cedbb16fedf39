// channel.hpp — Quantum channels: weighted Kraus sets, operator-sum
// application, the two commuting-Hamiltonian Kraus constructions, the direct
// phase-factor evolution map, superoperator assembly and application, and the
// branch-state overlap diagnostic.

#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "dephaser/algebra.hpp"

namespace dephaser {

namespace tol {
inline constexpr double weight_sum = 1e-12;
inline constexpr double trace_preservation = 1e-10;
inline constexpr double output_trace = 1e-9;
} // namespace tol

// Weighted operator collection defining a channel at a fixed time:
//   rho -> sum_m weights[m] * op[m] rho op[m]^dag.
// For bath-mixture channels (one operator per bath level) the weights are the
// bath distribution itself and sum to 1. Case-(i) sets list one operator per
// (j, k) pair with the level weight p_j repeated across k, so only
// nonnegativity and trace preservation are common invariants.
struct KrausSet {
    int dim = 0;
    std::vector<Matrix> operators;
    RealVector weights;
};

// max entry of |sum_m w_m E_m^dag E_m - I|.
inline double trace_preservation_defect(const KrausSet& k) {
    Matrix acc = Matrix::Zero(k.dim, k.dim);
    for (std::size_t m = 0; m < k.operators.size(); ++m)
        acc += k.weights[static_cast<Eigen::Index>(m)] *
               (k.operators[m].adjoint() * k.operators[m]);
    return (acc - Matrix::Identity(k.dim, k.dim)).cwiseAbs().maxCoeff();
}

inline void validate_kraus_set(const KrausSet& k) {
    if (k.dim < 1) throw ValidationError("dimension", "Kraus set dimension must be >= 1");
    if (k.operators.empty())
        throw ValidationError("non-empty", "Kraus set needs at least one operator");
    if (k.weights.size() != static_cast<Eigen::Index>(k.operators.size()))
        throw ValidationError("weight-count", "one weight per operator required");
    for (const auto& op : k.operators)
        if (op.rows() != k.dim || op.cols() != k.dim)
            throw ValidationError("dimension", "Kraus operator dimension mismatch");
    if (k.weights.minCoeff() < -1e-14)
        throw ValidationError("weight-nonneg", "negative Kraus weight");
    const double tp = trace_preservation_defect(k);
    if (tp > tol::trace_preservation)
        throw ValidationError("trace-preservation",
                              "defect " + std::to_string(tp) + " exceeds tolerance");
}

inline void validate_distribution(const RealVector& p) {
    if (p.size() < 1) throw ValidationError("non-empty", "empty probability vector");
    if (p.minCoeff() < -1e-14)
        throw ValidationError("weight-nonneg", "negative probability entry");
    const double sum_err = std::abs(p.sum() - 1.0);
    if (sum_err > tol::weight_sum)
        throw ValidationError("weight-sum", "|sum p - 1| = " + std::to_string(sum_err));
}

// rho(t) = sum_m w_m E_m rho(0) E_m^dag.
inline DensityMatrix apply_channel(const KrausSet& k, const DensityMatrix& rho0) {
    validate_kraus_set(k);
    if (rho0.dim() != k.dim)
        throw ValidationError("dimension", "state/channel dimension mismatch");
    Matrix out = Matrix::Zero(k.dim, k.dim);
    for (std::size_t m = 0; m < k.operators.size(); ++m) {
        const double w = k.weights[static_cast<Eigen::Index>(m)];
        if (w == 0.0) continue;
        out.noalias() += w * (k.operators[m] * rho0.matrix() * k.operators[m].adjoint());
    }
    const double trace_err = std::abs(out.trace() - Complex(1.0, 0.0));
    if (trace_err > tol::output_trace)
        throw ValidationError("output-trace",
                              "channel output trace defect " + std::to_string(trace_err));
    // round away residual asymmetry so the output passes state validation
    out = 0.5 * (out + out.adjoint().eval());
    return DensityMatrix(std::move(out));
}

// System eigenfrequencies omega_n and per-bath-level shifts kappa_{jn},
// both in rad/s. bath_shifts is J x n.
struct SpectralModel {
    RealVector system_freqs;
    RealMatrix bath_shifts;
};

inline void validate_spectral_model(const SpectralModel& spec) {
    if (spec.system_freqs.size() < 1)
        throw ValidationError("dimension", "spectral model needs >= 1 system level");
    if (spec.bath_shifts.cols() != spec.system_freqs.size())
        throw ValidationError("dimension", "bath_shifts column count must match system levels");
    if (spec.bath_shifts.rows() < 1)
        throw ValidationError("dimension", "spectral model needs >= 1 bath level");
    if (!spec.system_freqs.allFinite() || !spec.bath_shifts.allFinite())
        throw ValidationError("finite", "spectral model entries must be finite");
}

// Pure-dephasing construction when the coupling commutes with the system
// Hamiltonian: one diagonal operator per (j, k) bath pair, entries
// e^{-i omega_n t} mu[n](j, k). The mu table is an input interface; the
// element for system level n is the J x J coefficient matrix mu[n].
// bath_weights is the level distribution p_j (uniform when omitted); the
// returned flat weight vector carries p_j for every k.
inline KrausSet case_i_kraus(const std::vector<Matrix>& mu, const RealVector& freqs,
                             double t, const RealVector& bath_weights = RealVector()) {
    const auto n = freqs.size();
    if (n < 1 || static_cast<Eigen::Index>(mu.size()) != n)
        throw ValidationError("dimension", "one mu matrix per system level required");
    const auto bath_dim = mu.front().rows();
    for (const auto& m : mu)
        if (m.rows() != bath_dim || m.cols() != bath_dim)
            throw ValidationError("dimension", "mu matrices must be square and equally sized");
    RealVector p = bath_weights;
    if (p.size() == 0)
        p = RealVector::Constant(bath_dim, 1.0 / static_cast<double>(bath_dim));
    if (p.size() != bath_dim)
        throw ValidationError("dimension", "bath weight count mismatch");
    validate_distribution(p);

    KrausSet set;
    set.dim = static_cast<int>(n);
    set.operators.reserve(static_cast<std::size_t>(bath_dim * bath_dim));
    set.weights.resize(bath_dim * bath_dim);
    Eigen::Index flat = 0;
    for (Eigen::Index j = 0; j < bath_dim; ++j) {
        for (Eigen::Index k = 0; k < bath_dim; ++k, ++flat) {
            Matrix op = Matrix::Zero(n, n);
            for (Eigen::Index level = 0; level < n; ++level)
                op(level, level) =
                    std::exp(Complex(0.0, -freqs[level] * t)) * mu[static_cast<std::size_t>(level)](j, k);
            set.operators.push_back(std::move(op));
            set.weights[flat] = p[j];
        }
    }
    return set;
}

// Diagonal-environment construction: one exactly unitary operator per bath
// level, D_j = diag(e^{-i(kappa_{jn} + omega_n) t}), mixed with weights p_j.
inline KrausSet case_ii_kraus(const SpectralModel& spec, const RealVector& weights, double t) {
    validate_spectral_model(spec);
    validate_distribution(weights);
    if (weights.size() != spec.bath_shifts.rows())
        throw ValidationError("dimension", "one weight per bath level required");

    const auto n = spec.system_freqs.size();
    const auto bath_dim = spec.bath_shifts.rows();
    KrausSet set;
    set.dim = static_cast<int>(n);
    set.operators.reserve(static_cast<std::size_t>(bath_dim));
    set.weights = weights;
    for (Eigen::Index j = 0; j < bath_dim; ++j) {
        Matrix op = Matrix::Zero(n, n);
        for (Eigen::Index level = 0; level < n; ++level)
            op(level, level) =
                std::exp(Complex(0.0, -(spec.bath_shifts(j, level) + spec.system_freqs[level]) * t));
        set.operators.push_back(std::move(op));
    }
    return set;
}

// Direct phase-factor evaluation of the same evolution:
//   <n|rho(t)|m> = <n|rho(0)|m> sum_j p_j e^{-i(kappa_jn - kappa_jm + omega_n - omega_m) t}.
// Agrees with apply_channel(case_ii_kraus(...)) entry-wise.
inline DensityMatrix evolve_map(const SpectralModel& spec, const RealVector& weights,
                                const DensityMatrix& rho0, double t) {
    validate_spectral_model(spec);
    validate_distribution(weights);
    if (weights.size() != spec.bath_shifts.rows())
        throw ValidationError("dimension", "one weight per bath level required");
    if (rho0.dim() != spec.system_freqs.size())
        throw ValidationError("dimension", "state/spectral-model dimension mismatch");

    const auto n = spec.system_freqs.size();
    const auto bath_dim = spec.bath_shifts.rows();
    Matrix out(n, n);
    for (Eigen::Index a = 0; a < n; ++a) {
        for (Eigen::Index b = 0; b < n; ++b) {
            Complex phase_sum(0.0, 0.0);
            for (Eigen::Index j = 0; j < bath_dim; ++j) {
                const double angle = (spec.bath_shifts(j, a) - spec.bath_shifts(j, b) +
                                      spec.system_freqs[a] - spec.system_freqs[b]) *
                                     t;
                phase_sum += weights[j] * std::exp(Complex(0.0, -angle));
            }
            out(a, b) = rho0.matrix()(a, b) * phase_sum;
        }
    }
    out = 0.5 * (out + out.adjoint().eval());
    return DensityMatrix(std::move(out));
}

// n^2 x n^2 process matrix over the matrix-unit basis B_{c*n+r} = |r><c|
// (column-stacking order). Positive semidefinite, Hermitian, trace-preserving.
struct Superoperator {
    int dim = 0;
    Matrix X;

    static constexpr const char* basis = "matrix-units-column-stacked";
};

// I = sum_{mu nu} X_{mu nu} B_nu^dag B_mu reduces to a partial trace over the
// row index of the basis labels.
inline Matrix superoperator_trace_condition(const Superoperator& s) {
    const Eigen::Index n = s.dim;
    Matrix acc = Matrix::Zero(n, n);
    for (Eigen::Index a = 0; a < n; ++a)
        for (Eigen::Index b = 0; b < n; ++b)
            for (Eigen::Index r = 0; r < n; ++r)
                acc(a, b) += s.X(b * n + r, a * n + r);
    return acc;
}

inline void validate_superoperator(const Superoperator& s) {
    if (s.dim < 1 || s.X.rows() != s.X.cols() ||
        s.X.rows() != static_cast<Eigen::Index>(s.dim) * s.dim)
        throw ValidationError("dimension", "superoperator must be n^2 x n^2");
    const double herm = hermiticity_defect(s.X);
    if (herm > tol::hermiticity)
        throw ValidationError("hermiticity", "X defect " + std::to_string(herm));
    const double defect = psd_defect(s.X);
    if (defect > tol::psd)
        throw ValidationError("psd", "X defect " + std::to_string(defect));
    const Eigen::Index n = s.dim;
    const double tp = (superoperator_trace_condition(s) - Matrix::Identity(n, n))
                          .cwiseAbs()
                          .maxCoeff();
    if (tp > tol::trace_preservation)
        throw ValidationError("trace-preservation", "X defect " + std::to_string(tp));
}

// Expand each weighted operator sqrt(w_m) E_m over the matrix-unit basis; in
// that basis the expansion coefficients are the vectorized entries, so
//   X = sum_m w_m vec(E_m) vec(E_m)^dag,
// PSD by construction.
inline Superoperator build_superoperator(const KrausSet& k) {
    validate_kraus_set(k);
    const Eigen::Index n2 = static_cast<Eigen::Index>(k.dim) * k.dim;
    Superoperator s;
    s.dim = k.dim;
    s.X = Matrix::Zero(n2, n2);
    for (std::size_t m = 0; m < k.operators.size(); ++m) {
        const double w = k.weights[static_cast<Eigen::Index>(m)];
        if (w == 0.0) continue;
        const Vector v = vectorize(k.operators[m]);
        s.X.noalias() += w * (v * v.adjoint());
    }
    s.X = 0.5 * (s.X + s.X.adjoint().eval());
    validate_superoperator(s);
    return s;
}

// rho'(a, b) = sum_{u v} X(u*n + a, v*n + b) rho(u, v), the matrix-unit
// contraction of rho' = sum_{mu nu} X_{mu nu} B_mu rho B_nu^dag.
inline DensityMatrix apply_superoperator(const Superoperator& s, const DensityMatrix& rho) {
    if (rho.dim() != s.dim)
        throw ValidationError("dimension", "state/superoperator dimension mismatch");
    const Eigen::Index n = s.dim;
    Matrix out = Matrix::Zero(n, n);
    for (Eigen::Index u = 0; u < n; ++u)
        for (Eigen::Index v = 0; v < n; ++v) {
            const Complex r = rho.matrix()(u, v);
            if (r == Complex(0.0, 0.0)) continue;
            out += r * s.X.block(u * n, v * n, n, n);
        }
    out = 0.5 * (out + out.adjoint().eval());
    return DensityMatrix(std::move(out));
}

// G_{jj'} = Re Tr(rho_j rho_j'); symmetric, diagonal = purities. Nonzero
// off-diagonals witness non-orthogonal branch states (nonclassical
// correlations in the joint state despite separability).
inline RealMatrix overlap_matrix(const std::vector<DensityMatrix>& states) {
    if (states.empty()) throw ValidationError("non-empty", "overlap_matrix needs states");
    const int dim = states.front().dim();
    for (const auto& s : states)
        if (s.dim() != dim)
            throw ValidationError("dimension", "overlap_matrix states must share a dimension");
    const auto count = static_cast<Eigen::Index>(states.size());
    RealMatrix g(count, count);
    for (Eigen::Index i = 0; i < count; ++i)
        for (Eigen::Index j = i; j < count; ++j) {
            g(i, j) = trace_product(states[static_cast<std::size_t>(i)],
                                    states[static_cast<std::size_t>(j)]);
            g(j, i) = g(i, j);
        }
    return g;
}

} // namespace dephaser
