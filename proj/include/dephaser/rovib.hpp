// rovib.hpp — Rotational-bath dephasing of a vibrational mode: the
// j(j+1) coupling law, thermal occupation weights, diagonal Kraus operators,
// forward evolution, and the coherence-decay table.
//
// Sign convention: the Heisenberg-picture ladder phase e^{+i(omega+lambda_j)t}
// is used for state matrices. The generic channel API (channel.hpp) uses
// e^{-i(...)t}; the two reconcile through spectral_model() below via
// kappa_{jn} = -n lambda_j, omega_n = -n omega. Probabilities of Hermitian
// observables are invariant under the global conjugation.

#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "dephaser/algebra.hpp"
#include "dephaser/channel.hpp"
#include "dephaser/constants.hpp"

namespace dephaser {

// omega: vibrational angular frequency (rad/s), harmonic ladder omega_n = n*omega.
// lambda: single coupling constant (s^-1) scaling level shifts lambda_j = lambda*j(j+1).
struct RovibParams {
    double omega = 0.0;
    double lambda = 0.0;
    int dim = 0;
    int j_max = 0;
};

inline void validate_params(const RovibParams& p) {
    if (!(p.omega > 0.0)) throw ValidationError("omega-positive", "omega must be > 0");
    if (!std::isfinite(p.lambda)) throw ValidationError("finite", "lambda must be finite");
    if (p.dim < 1) throw ValidationError("dimension", "dim must be >= 1");
    if (p.j_max < 0) throw ValidationError("dimension", "j_max must be >= 0");
}

// Coupling shift of bath level j.
inline double lambda_j(double lambda, int j) {
    if (j < 0) throw ValidationError("level-index", "bath level must be >= 0");
    return lambda * static_cast<double>(j) * static_cast<double>(j + 1);
}

// Coupling parameter plus occupation probabilities p_j for j = 0..j_max.
struct BathModel {
    double lambda = 0.0;
    RealVector weights;
};

inline void validate_bath(const BathModel& bath) {
    if (!std::isfinite(bath.lambda)) throw ValidationError("finite", "lambda must be finite");
    validate_distribution(bath.weights);
}

struct ThermalDistribution {
    RealVector weights;
    // true when levels above j_max held more than 1e-6 of the unnormalized mass
    bool truncated = false;
};

// p_j proportional to (2j+1) exp(-hbar B j(j+1) / kT), normalized over
// j = 0..j_max. The (2j+1) rotational degeneracy is folded into the weights so
// the Kraus operators stay exactly unitary. b_rot is angular (rad/s).
inline ThermalDistribution thermal_distribution(double b_rot, double temperature, int j_max) {
    if (!(b_rot > 0.0)) throw ValidationError("b-positive", "rotational constant must be > 0");
    if (!(temperature > 0.0)) throw ValidationError("t-positive", "temperature must be > 0");
    if (j_max < 0) throw ValidationError("dimension", "j_max must be >= 0");

    const double x = constants::hbar * b_rot / (constants::k_boltzmann * temperature);
    ThermalDistribution result;
    result.weights.resize(j_max + 1);
    for (int j = 0; j <= j_max; ++j)
        result.weights[j] =
            (2.0 * j + 1.0) * std::exp(-x * static_cast<double>(j) * (j + 1.0));
    const double captured = result.weights.sum();

    // tail mass beyond j_max, summed until terms stop mattering
    double tail = 0.0;
    for (int j = j_max + 1;; ++j) {
        const double term = (2.0 * j + 1.0) * std::exp(-x * static_cast<double>(j) * (j + 1.0));
        tail += term;
        if (term < 1e-18 * (captured + tail) || j > j_max + 2000000) break;
    }
    result.truncated = tail > 1e-6 * (captured + tail);
    result.weights /= captured;
    return result;
}

// One diagonal unitary per bath level, D_j = diag_n e^{i n (omega + lambda_j) t},
// mixed with weights p_j. Degeneracy and normalization live in the weights, so
// trace preservation is exact.
inline KrausSet dephasing_kraus(const RovibParams& params, const RealVector& weights, double t) {
    validate_params(params);
    validate_distribution(weights);
    if (weights.size() != params.j_max + 1)
        throw ValidationError("dimension", "need one weight per bath level 0..j_max");

    KrausSet set;
    set.dim = params.dim;
    set.operators.reserve(static_cast<std::size_t>(params.j_max) + 1);
    set.weights = weights;
    for (int j = 0; j <= params.j_max; ++j) {
        const double shift = params.omega + lambda_j(params.lambda, j);
        Matrix op = Matrix::Zero(params.dim, params.dim);
        for (int n = 0; n < params.dim; ++n)
            op(n, n) = std::exp(Complex(0.0, n * shift * t));
        set.operators.push_back(std::move(op));
    }
    return set;
}

// <n|rho(t)|m> = <n|rho0|m> e^{i(n-m) omega t} sum_j p_j e^{i(n-m) lambda_j t}.
// Same channel as apply_channel(dephasing_kraus(...), rho0), evaluated directly.
inline DensityMatrix evolve(const DensityMatrix& rho0, const RovibParams& params,
                            const BathModel& bath, double t) {
    validate_params(params);
    validate_bath(bath);
    if (rho0.dim() != params.dim)
        throw ValidationError("dimension", "state/model dimension mismatch");
    if (bath.weights.size() != params.j_max + 1)
        throw ValidationError("dimension", "need one weight per bath level 0..j_max");

    const int n = params.dim;
    // one decoherence factor per level separation d = n - m > 0
    std::vector<Complex> factor(static_cast<std::size_t>(n), Complex(1.0, 0.0));
    for (int d = 1; d < n; ++d) {
        Complex sum(0.0, 0.0);
        for (int j = 0; j <= params.j_max; ++j)
            sum += bath.weights[j] *
                   std::exp(Complex(0.0, d * lambda_j(bath.lambda, j) * t));
        factor[static_cast<std::size_t>(d)] =
            sum * std::exp(Complex(0.0, d * params.omega * t));
    }

    Matrix out(n, n);
    for (int a = 0; a < n; ++a) {
        out(a, a) = rho0.matrix()(a, a);
        for (int b = 0; b < a; ++b) {
            out(a, b) = rho0.matrix()(a, b) * factor[static_cast<std::size_t>(a - b)];
            out(b, a) = std::conj(out(a, b));
        }
    }
    return DensityMatrix(std::move(out));
}

// Map this model onto the generic channel API: kappa_{jn} = -n lambda_j and
// omega_n = -n omega turn the e^{-i...} case-(ii) phases into the e^{+i...}
// convention above.
inline SpectralModel spectral_model(const RovibParams& params) {
    validate_params(params);
    SpectralModel spec;
    spec.system_freqs.resize(params.dim);
    spec.bath_shifts.resize(params.j_max + 1, params.dim);
    for (int n = 0; n < params.dim; ++n) {
        spec.system_freqs[n] = -static_cast<double>(n) * params.omega;
        for (int j = 0; j <= params.j_max; ++j)
            spec.bath_shifts(j, n) = -static_cast<double>(n) * lambda_j(params.lambda, j);
    }
    return spec;
}

struct DecayRecord {
    double t = 0.0;
    double purity = 0.0;
    double max_offdiag = 0.0;
    double overlap0 = 0.0; // Tr(rho0 rho(t))
};

inline std::vector<DecayRecord> coherence_decay(const DensityMatrix& rho0,
                                                const RovibParams& params,
                                                const BathModel& bath,
                                                const std::vector<double>& t_grid) {
    for (std::size_t i = 1; i < t_grid.size(); ++i)
        if (!(t_grid[i] > t_grid[i - 1]))
            throw ValidationError("ascending", "time grid must be strictly ascending");

    std::vector<DecayRecord> table;
    table.reserve(t_grid.size());
    for (double t : t_grid) {
        const DensityMatrix rho_t = evolve(rho0, params, bath, t);
        DecayRecord rec;
        rec.t = t;
        rec.purity = purity(rho_t);
        rec.overlap0 = trace_product(rho0, rho_t);
        double max_off = 0.0;
        for (int a = 0; a < rho_t.dim(); ++a)
            for (int b = 0; b < rho_t.dim(); ++b)
                if (a != b) max_off = std::max(max_off, std::abs(rho_t.matrix()(a, b)));
        rec.max_offdiag = max_off;
        table.push_back(rec);
    }
    return table;
}

} // namespace dephaser
