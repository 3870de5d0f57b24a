#pragma once

//! Natural relativistic units are used throughout: hbar = c = m_e = 1.
//! Energies are in m_e c^2, lengths in reduced Compton wavelengths hbar/(m_e c)
//! and photon wavenumbers equal photon energies.
namespace twogamma::constants {

//! Fine-structure constant (CODATA 2018)
inline constexpr double alpha = 1.0 / 137.035999084;

//! m_e c^2 in keV
inline constexpr double mc2_keV = 510.99895000;

//! m_e c^2 / hbar in s^-1 (converts a rate in natural units to s^-1)
inline constexpr double rate_to_per_s = 7.76344071e20;

//! Reduced Compton wavelength in fm
inline constexpr double compton_fm = 386.15926796;

inline constexpr double pi = 3.14159265358979323846;

} // namespace twogamma::constants
