// measurement.hpp — POVM settings, predicted probabilities, the estimator's
// design matrix, and seeded synthetic datasets.

#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include "dephaser/algebra.hpp"
#include "dephaser/rovib.hpp"

namespace dephaser {

namespace tol {
inline constexpr double povm_bound = 1e-10;
} // namespace tol

// A measurement configuration: POVM element (0 <= O <= I) observed at a
// fixed delay after preparation.
struct MeasurementSetting {
    std::string id;
    HermitianObservable op;
    double time = 0.0;
};

inline void validate_povm_element(const HermitianObservable& o) {
    Eigen::SelfAdjointEigenSolver<Matrix> solver(o.matrix(), Eigen::EigenvaluesOnly);
    const double lo = solver.eigenvalues().minCoeff();
    const double hi = solver.eigenvalues().maxCoeff();
    if (lo < -tol::povm_bound || hi > 1.0 + tol::povm_bound)
        throw ValidationError("povm-bounds",
                              "eigenvalues in [" + std::to_string(lo) + ", " +
                                  std::to_string(hi) + "] outside [0, 1]");
}

// p = Re Tr(O rho), a probability for a valid POVM element.
inline double predict_probability(const MeasurementSetting& setting, const DensityMatrix& rho) {
    if (setting.op.dim() != rho.dim())
        throw ValidationError("dimension", "setting/state dimension mismatch");
    const double p = trace_product(setting.op, rho);
    if (p < -tol::povm_bound || p > 1.0 + tol::povm_bound)
        throw ValidationError("probability-range",
                              "Tr(O rho) = " + std::to_string(p) + " (broken POVM element)");
    return p;
}

// Projector onto |theta> = n^{-1/2} sum_k e^{i k theta} |k>. Fock projectors
// see only populations; these phase probes supply the off-diagonal
// sensitivity dephasing estimation needs.
inline MeasurementSetting phase_probe(int dim, double theta, double time,
                                      std::string id = std::string()) {
    if (dim < 2) throw ValidationError("dimension", "phase probe needs dim >= 2");
    Vector psi(dim);
    const double scale = 1.0 / std::sqrt(static_cast<double>(dim));
    for (int k = 0; k < dim; ++k) psi[k] = scale * std::exp(Complex(0.0, k * theta));
    Matrix projector = psi * psi.adjoint();
    projector = 0.5 * (projector + projector.adjoint().eval());
    if (id.empty()) id = "phase:" + std::to_string(theta) + "@" + std::to_string(time);
    return MeasurementSetting{std::move(id), HermitianObservable(std::move(projector)), time};
}

inline MeasurementSetting fock_probe(int dim, int level, double time,
                                     std::string id = std::string()) {
    if (level < 0 || level >= dim)
        throw ValidationError("dimension", "Fock level outside 0..dim-1");
    Matrix projector = Matrix::Zero(dim, dim);
    projector(level, level) = 1.0;
    if (id.empty()) id = "fock:" + std::to_string(level) + "@" + std::to_string(time);
    return MeasurementSetting{std::move(id), HermitianObservable(std::move(projector)), time};
}

struct DatasetRecord {
    std::string setting_id;
    double t = 0.0;
    double p_emp = 0.0;
};

// Measurement records plus generation metadata. Noisy probabilities may fall
// slightly outside [0, 1]; they are kept (flagged, never clipped) so the
// least-squares estimate stays unbiased.
struct Dataset {
    std::vector<DatasetRecord> records;
    std::uint64_t seed = 0;
    double noise_sigma = 0.0;
    std::string source;
};

inline void validate_dataset(const Dataset& data) {
    for (const auto& rec : data.records)
        if (!(rec.p_emp >= -0.05 && rec.p_emp <= 1.05))
            throw ValidationError("probability-range",
                                  "record " + rec.setting_id + " has p_emp = " +
                                      std::to_string(rec.p_emp) + " outside [-0.05, 1.05]");
}

inline std::vector<std::size_t> out_of_range_records(const Dataset& data) {
    std::vector<std::size_t> flagged;
    for (std::size_t r = 0; r < data.records.size(); ++r) {
        const double p = data.records[r].p_emp;
        if (p < 0.0 || p > 1.0) flagged.push_back(r);
    }
    return flagged;
}

// rows = records, cols = bath levels j = 0..j_max; y = empirical probabilities.
struct DesignMatrix {
    RealMatrix C;
    RealVector y;
};

namespace detail {

// One design row: C[j] = Tr(O D_j(t) rho0 D_j(t)^dag) for every bath level,
// with the branch state D_j rho0 D_j^dag evaluated entry-wise.
inline RealVector design_row(const HermitianObservable& op, double t,
                             const DensityMatrix& rho0, const RovibParams& params) {
    const int n = params.dim;
    Vector phases(n);
    RealVector row(params.j_max + 1);
    for (int j = 0; j <= params.j_max; ++j) {
        const double shift = params.omega + lambda_j(params.lambda, j);
        for (int level = 0; level < n; ++level)
            phases[level] = std::exp(Complex(0.0, level * shift * t));
        Complex trace(0.0, 0.0);
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b)
                trace += op.matrix()(a, b) * phases[b] * rho0.matrix()(b, a) *
                         std::conj(phases[a]);
        row[j] = trace.real();
    }
    return row;
}

} // namespace detail

// The model probability Tr(O rho(t)) is linear in the bath weights:
// prediction = C * p. Each entry is itself a probability.
inline DesignMatrix design_matrix(const std::vector<MeasurementSetting>& settings,
                                  const DensityMatrix& rho0, const RovibParams& params) {
    validate_params(params);
    if (settings.empty()) throw ValidationError("non-empty", "no measurement settings");
    for (const auto& s : settings)
        if (s.op.dim() != rho0.dim() || rho0.dim() != params.dim)
            throw ValidationError("dimension", "setting/state/model dimension mismatch");

    DesignMatrix dm;
    dm.C.resize(static_cast<Eigen::Index>(settings.size()), params.j_max + 1);
    for (std::size_t r = 0; r < settings.size(); ++r)
        dm.C.row(static_cast<Eigen::Index>(r)) =
            detail::design_row(settings[r].op, settings[r].time, rho0, params).transpose();
    if (dm.C.minCoeff() < -tol::povm_bound || dm.C.maxCoeff() > 1.0 + tol::povm_bound)
        throw ValidationError("probability-range", "design-matrix entry outside [0, 1]");
    return dm;
}

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Standard-normal draw from a per-record stream: the stream for record r
// depends only on (seed, r), so parallel and serial generation agree
// bit-exactly. Box-Muller keeps the mapping platform-independent
// (std::normal_distribution is implementation-defined).
inline double seeded_gaussian(std::uint64_t seed, std::uint64_t record) {
    std::uint64_t s = splitmix64(seed ^ splitmix64(record + 0x51ed270b0a1c2ULL));
    const auto next_unit = [&s]() {
        s = splitmix64(s);
        return (static_cast<double>(s >> 11) + 1.0) * 0x1p-53; // (0, 1]
    };
    const double u1 = next_unit();
    const double u2 = next_unit();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
}

} // namespace detail

// p_emp_r = (C p_true)_r + eps_r with eps_r iid N(0, sigma^2); deterministic
// for a fixed seed.
inline Dataset synth_dataset(const RovibParams& params, const BathModel& bath_true,
                             const DensityMatrix& rho0,
                             const std::vector<MeasurementSetting>& settings,
                             double noise_sigma, std::uint64_t seed) {
    if (!(noise_sigma >= 0.0))
        throw ValidationError("sigma-nonneg", "noise_sigma must be >= 0");
    validate_bath(bath_true);
    RovibParams effective = params;
    effective.lambda = bath_true.lambda;
    const DesignMatrix dm = design_matrix(settings, rho0, effective);
    const RealVector model = dm.C * bath_true.weights;

    Dataset data;
    data.seed = seed;
    data.noise_sigma = noise_sigma;
    data.source = "synthetic";
    data.records.reserve(settings.size());
    for (std::size_t r = 0; r < settings.size(); ++r) {
        const double noise =
            noise_sigma == 0.0 ? 0.0 : noise_sigma * detail::seeded_gaussian(seed, r);
        data.records.push_back(DatasetRecord{settings[r].id, settings[r].time,
                                             model[static_cast<Eigen::Index>(r)] + noise});
    }
    return data;
}

struct DesignDiagnostics {
    int rank = 0;
    double smin = 0.0;
    double smax = 0.0;
    bool deficient = false; // rank < column count at threshold 1e-10 * smax
};

inline DesignDiagnostics design_rank(const RealMatrix& c) {
    Eigen::JacobiSVD<RealMatrix> svd(c);
    const RealVector& sv = svd.singularValues();
    DesignDiagnostics diag;
    diag.smax = sv.size() > 0 ? sv[0] : 0.0;
    diag.smin = sv.size() > 0 ? sv[sv.size() - 1] : 0.0;
    const double threshold = 1e-10 * diag.smax;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (sv[i] > threshold) ++diag.rank;
    diag.deficient = diag.rank < c.cols();
    return diag;
}

} // namespace dephaser
