// wigner.hpp — Phase-space quasi-probability grids for Fock-basis states.
//
// Convention: W(q, p) = (1/pi) Tr[rho D(beta) Pi], beta = sqrt(2)(q + i p),
// Pi the photon-number parity. Dimensionless quadratures, so the vacuum peaks
// at W(0, 0) = 1/pi and integrates to 1 over the plane.

#pragma once

#include <cmath>
#include <complex>
#include <vector>

#include "dephaser/algebra.hpp"
#include "dephaser/parallel.hpp"

namespace dephaser {

struct WignerGrid {
    RealVector q_axis;
    RealVector p_axis;
    RealMatrix values; // values(iq, ip) = W(q_axis[iq], p_axis[ip])
};

namespace detail {

// Displacement matrix elements <m|D(beta)|n> for m, n < dim via
// associated-Laguerre recurrences. The e^{-x/2} damping is folded into the
// recurrence seed so intermediates stay bounded for dim <= 60.
inline Matrix displacement_elements(Complex beta, int dim) {
    const double x = std::norm(beta);
    const double damp = std::exp(-0.5 * x);
    Matrix d(dim, dim);

    // scaled Laguerre rows: row a holds e^{-x/2} L_k^{(a)}(x) for k = 0..dim-1
    std::vector<std::vector<double>> laguerre(static_cast<std::size_t>(dim));
    for (int a = 0; a < dim; ++a) {
        auto& row = laguerre[static_cast<std::size_t>(a)];
        row.resize(static_cast<std::size_t>(dim));
        row[0] = damp;
        if (dim > 1) row[1] = (1.0 + a - x) * damp;
        for (int k = 1; k + 1 < dim; ++k)
            row[static_cast<std::size_t>(k + 1)] =
                ((2.0 * k + 1.0 + a - x) * row[static_cast<std::size_t>(k)] -
                 (k + a) * row[static_cast<std::size_t>(k - 1)]) /
                (k + 1.0);
    }

    const double mag = std::abs(beta);
    const Complex dir = mag > 0.0 ? beta / mag : Complex(1.0, 0.0);
    for (int n = 0; n < dim; ++n) {
        d(n, n) = laguerre[0][static_cast<std::size_t>(n)];
        Complex up(1.0, 0.0);   // sqrt(n!/m!) beta^{m-n} for m > n
        Complex down(1.0, 0.0); // sqrt(m!/n!) (-conj(beta))^{n-m} for m < n
        for (int m = n + 1; m < dim; ++m) {
            const double ratio = mag / std::sqrt(static_cast<double>(m));
            up *= ratio * dir;
            down *= -ratio * std::conj(dir);
            const double lag = laguerre[static_cast<std::size_t>(m - n)][static_cast<std::size_t>(n)];
            d(m, n) = up * lag;
            d(n, m) = down * lag;
        }
    }
    return d;
}

} // namespace detail

inline double wigner_point(const Matrix& rho, double q, double p) {
    const int dim = static_cast<int>(rho.rows());
    const Complex beta = std::sqrt(2.0) * Complex(q, p);
    const Matrix d = detail::displacement_elements(beta, dim);
    Complex acc(0.0, 0.0);
    for (int n = 0; n < dim; ++n) {
        const double parity = (n % 2 == 0) ? 1.0 : -1.0;
        for (int m = 0; m < dim; ++m) acc += rho(n, m) * parity * d(m, n);
    }
    return acc.real() / std::numbers::pi;
}

inline WignerGrid wigner_grid(const DensityMatrix& rho, const RealVector& q_axis,
                              const RealVector& p_axis) {
    if (rho.dim() > 60)
        throw ValidationError("dimension",
                              "Wigner evaluation is limited to dim <= 60 (Laguerre overflow)");
    if (q_axis.size() < 1 || p_axis.size() < 1)
        throw ValidationError("non-empty", "Wigner axes must be non-empty");
    if (!q_axis.allFinite() || !p_axis.allFinite())
        throw ValidationError("finite", "Wigner axes must be finite");
    for (Eigen::Index i = 1; i < q_axis.size(); ++i)
        if (!(q_axis[i] > q_axis[i - 1]))
            throw ValidationError("ascending", "q axis must be strictly ascending");
    for (Eigen::Index i = 1; i < p_axis.size(); ++i)
        if (!(p_axis[i] > p_axis[i - 1]))
            throw ValidationError("ascending", "p axis must be strictly ascending");

    WignerGrid grid;
    grid.q_axis = q_axis;
    grid.p_axis = p_axis;
    grid.values.resize(q_axis.size(), p_axis.size());
    parallel_for(static_cast<std::size_t>(q_axis.size()), [&](std::size_t iq) {
        for (Eigen::Index ip = 0; ip < p_axis.size(); ++ip)
            grid.values(static_cast<Eigen::Index>(iq), ip) =
                wigner_point(rho.matrix(), q_axis[static_cast<Eigen::Index>(iq)], p_axis[ip]);
    });
    return grid;
}

// Midpoint-weight Riemann sum;近 1 for axes wide enough to hold the state.
inline double riemann_sum(const WignerGrid& grid) {
    if (grid.q_axis.size() < 2 || grid.p_axis.size() < 2) return 0.0;
    const double dq = (grid.q_axis[grid.q_axis.size() - 1] - grid.q_axis[0]) /
                      static_cast<double>(grid.q_axis.size() - 1);
    const double dp = (grid.p_axis[grid.p_axis.size() - 1] - grid.p_axis[0]) /
                      static_cast<double>(grid.p_axis.size() - 1);
    return grid.values.sum() * dq * dp;
}

} // namespace dephaser
