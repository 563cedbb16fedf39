// constants.hpp — Physical constants (2019 SI exact values) and unit helpers

#pragma once

#include <numbers>

namespace dephaser::constants {

inline constexpr double hbar = 1.054571817e-34;        // J s
inline constexpr double k_boltzmann = 1.380649e-23;    // J/K
inline constexpr double speed_of_light = 2.99792458e8; // m/s

// Spectroscopic rotational constant B~ in cm^-1 to angular frequency in rad/s.
inline constexpr double b_cm_inv_to_angular(double b_cm_inv) {
    return 2.0 * std::numbers::pi * (speed_of_light * 100.0) * b_cm_inv;
}

} // namespace dephaser::constants
