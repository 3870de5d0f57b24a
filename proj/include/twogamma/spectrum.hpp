#pragma once
#include "twogamma/specfun.hpp"
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace twogamma {

//! l for a given Dirac kappa
constexpr int l_of_kappa(int kappa) { return kappa > 0 ? kappa : -kappa - 1; }
//! 2j for a given Dirac kappa
constexpr int twice_j_of_kappa(int kappa) {
  return 2 * (kappa > 0 ? kappa : -kappa) - 1;
}
//! kappa for (l, 2j)
int kappa_of(int l, int twice_j);
//! spectroscopic label, e.g. "2p_1/2" (n = 0 gives "p_1/2")
std::string orbital_label(int n, int kappa);

//! Thrown when the requested physics is out of range (Z alpha >= 1, bad n).
class PhysicsDomainError : public std::domain_error {
  using std::domain_error::domain_error;
};
//! Thrown when the finite-basis construction fails (eigensolver, overlap).
class SpectrumError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

//==============================================================================
//! One-electron Dirac orbital psi = (1/r) (g Omega_{kappa m}, i f Omega_{-kappa m})
//! sampled on the nodes of a RadialGrid. Energy includes the rest mass.
struct RadialOrbital {
  int kappa{-1};
  double energy{0.0};
  std::vector<double> g;
  std::vector<double> f;
  //! principal quantum number for true bound states, 0 for pseudo-states
  int n{0};

  int l() const { return l_of_kappa(kappa); }
  int twice_j() const { return twice_j_of_kappa(kappa); }
  std::string label() const { return orbital_label(n, kappa); }
};

//! <a|b> = int (g_a g_b + f_a f_b) dr
double overlap(const RadialOrbital &a, const RadialOrbital &b,
               const RadialGrid &grid);

//! Point-nucleus Dirac-Coulomb energy (Sommerfeld formula), units m c^2.
double sommerfeld_energy(double Z, int n, int kappa);

//! Analytic point-nucleus bound state evaluated on the grid.
//! Throws PhysicsDomainError for Z alpha >= 1 or invalid (n, kappa).
RadialOrbital analytic_bound_state(double Z, int n, int kappa,
                                   const RadialGrid &grid);

//==============================================================================
enum class NucleusModel { point, uniform_sphere };

//! Finite-basis parameters. Lengths are given in units of a0 / Z
//! (Bohr radius over nuclear charge) so one set of defaults serves all ions.
struct BasisParams {
  int n_splines{60};
  int order{9};
  double r_max{60.0};   //!< box radius, units a0/Z
  double r_first{1.0e-5}; //!< first nonzero knot, units a0/Z
  double h_scale{4.0};  //!< crossover from log to linear knots, units a0/Z
  int points_per_interval{0}; //!< 0 selects order + 6
  NucleusModel nucleus{NucleusModel::point};
  double nuclear_radius_fm{0.0}; //!< uniform sphere radius; 0 = 1.2 A^(1/3)

  //! Stable short description of all parameters.
  std::string fingerprint() const;
};

//! Grid and spline basis shared by every kappa of one ion.
class DiracBasis {
public:
  DiracBasis(double Z, const BasisParams &params);

  double Z() const { return m_Z; }
  const BasisParams &params() const { return m_params; }
  const SplineBasis &splines() const { return m_splines; }
  const RadialGrid &grid() const { return m_grid; }
  //! nuclear potential on the grid nodes, units m c^2
  const std::vector<double> &potential() const { return m_V; }
  double nuclear_radius() const { return m_Rnuc; } //!< compton units

private:
  double m_Z;
  BasisParams m_params;
  SplineBasis m_splines;
  RadialGrid m_grid;
  std::vector<double> m_V;
  double m_Rnuc{0.0};
};

//==============================================================================
//! Complete discrete pseudo-spectrum for one kappa, energies ascending.
struct KappaSpectrum {
  int kappa{-1};
  std::vector<RadialOrbital> orbitals;
  int n_negative{0}; //!< states with E < -1 (negative continuum)
  int n_bound{0};    //!< states in the gap -1 < E < 1 (incl. spurious)
  int n_positive{0}; //!< states with E > 1

  //! index of the first gap (bound) state
  int first_bound() const { return n_negative; }
  //! bound state with principal quantum number n; throws if absent
  const RadialOrbital &bound(int n) const;
};

//! Solve the radial Dirac equation in the dual-kinetic-balance spline basis.
//! Throws PhysicsDomainError if Z alpha >= 1, SpectrumError on numerical
//! failure.
KappaSpectrum build_spectrum(const DiracBasis &basis, int kappa);

//! Gap eigenstates dominated by the small component (positron-like states
//! pushed into the gap by the finite basis near the origin). These carry
//! n = 0 and are never identified with a physical bound state.
int spurious_gap_states(const KappaSpectrum &spec);

//==============================================================================
struct SpectrumReport {
  int kappa{0};
  int n_states{0};
  int n_negative{0};
  int n_bound{0};
  int n_positive{0};
  double orthonormality_residual{0.0}; //!< max |<a|b> - delta_ab|
  //! max relative deviation of the lowest bound energies from Sommerfeld
  double bound_energy_error{0.0};
  //! max over low bound states of 1 - sum_nu |<analytic|nu>|^2
  double completeness_defect{0.0};
  //! number of low bound states compared with the analytic solutions
  //! (those with 4 n^2 a0/Z <= r_max)
  int n_compared{0};
  //! gap eigenvalues lying below their Sommerfeld level (spurious states)
  int spurious_states{0};
  bool sommerfeld_checked{false};

  struct Thresholds {
    double orthonormality{1.0e-9};
    double bound_energy{1.0e-8};
    double completeness{1.0e-8};
  };
  bool passed(const Thresholds &t) const;
  bool passed() const { return passed(Thresholds{}); }
  std::string summary() const;
};

//! Diagnostics of a built spectrum. n_check: number of low bound states
//! compared against the analytic solutions (skipped for finite nuclei).
SpectrumReport spectrum_report(const KappaSpectrum &spec,
                               const DiracBasis &basis, int n_check = 3);

//==============================================================================
//! JSON container (versioned) with grid, kappa, energies and g/f samples.
std::string spectrum_to_json(const KappaSpectrum &spec,
                             const DiracBasis &basis);
//! Inverse of spectrum_to_json; throws std::runtime_error on schema errors
//! or on a grid that does not match `basis`.
KappaSpectrum spectrum_from_json(const std::string &json,
                                 const DiracBasis &basis);

} // namespace twogamma
