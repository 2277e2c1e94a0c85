#pragma once

#include <numbers>

// Atomic units throughout: hbar = m_e = e = 1.
namespace hase::units {

inline constexpr double pi = std::numbers::pi;

/// Attoseconds per atomic unit of time.
inline constexpr double attoseconds_per_au = 24.188843265857;

/// Electronvolts per Hartree.
inline constexpr double ev_per_hartree = 27.211386245988;

inline constexpr double deg = pi / 180.0;

constexpr double au_to_attoseconds(double t) { return t * attoseconds_per_au; }
constexpr double attoseconds_to_au(double t) { return t / attoseconds_per_au; }
constexpr double ev_to_hartree(double e) { return e / ev_per_hartree; }

/// Ionization potential of argon.
inline constexpr double argon_ip = 15.76 / ev_per_hartree;

}  // namespace hase::units
