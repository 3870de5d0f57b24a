#pragma once
#include "twogamma/multipole.hpp"
#include "twogamma/spectrum.hpp"
#include <complex>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace twogamma {

using cplx = std::complex<double>;

//! A vanishing energy denominator E_nu - E_i + omega in a spectral sum
//! (cascade resonance). Carries the offending intermediate state.
class PoleError : public std::runtime_error {
public:
  PoleError(const std::string &msg, int kappa, double energy, double omega,
            double denominator)
      : std::runtime_error(msg), kappa(kappa), energy(energy), omega(omega),
        denominator(denominator) {}
  int kappa;
  double energy;
  double omega;
  double denominator;
};

enum class IonKind { hydrogen_like, helium_like };

//==============================================================================
//! Initial and final ionic states. For helium-like ions the spectator 1s_1/2
//! electron stays passive and the active electron goes n_i kappa_i -> 1s_1/2.
struct TransitionSpec {
  int Z{92};
  std::string label; //!< canonical label, "1s2s 1S0", "2s1/2", ...
  IonKind kind{IonKind::helium_like};
  int twice_Ji{0}, twice_Jf{0};
  int n_i{2}, kappa_i{-1}; //!< active electron, initial
  int n_0{1}, kappa_0{-1}; //!< final active orbital = spectator
  //! if > 0 replaces the one-electron energy difference (units m c^2)
  double energy_override{0.0};

  bool helium_like() const { return kind == IonKind::helium_like; }
};

//! Accepts "1s2s 1S0", "1s2s 3S1", "1s2p 3P0" (or just "1S0", "3S1", "3P0")
//! for helium-like ions and "ns1/2", "np1/2", "np3/2", "nd3/2", ... for
//! hydrogen-like ions (final state 1s1/2). Throws std::invalid_argument.
TransitionSpec parse_transition(const std::string &label, int Z);

//! Labels understood by parse_transition (examples, for help text).
std::vector<std::string> known_transitions();

//==============================================================================
struct Truncation {
  int L_max{5};
  //! 2E1 for same-parity transitions, E1M1 + M1E1 otherwise
  bool dipole_only{false};
  bool include_negative_energy{true};
  //! optional whitelist of multipoles ("E1", "M1", "E2", ...); empty = all
  std::vector<std::string> channels;

  bool allows(int L, int p) const;
  //! both photons allowed, plus the dipole_only rule
  bool allows_pair(const MultipoleChannel &a, const MultipoleChannel &b,
                   bool same_parity) const;
  std::string describe() const;
};

//! Second-order reduced amplitude S^{J_nu}_{c1,c2}(omega): c1 acts at the
//! final-state vertex, c2 at the initial-state vertex, omega = c2.k.
struct SecondOrderAmp {
  cplx value{0.0};
  MultipoleChannel ch1, ch2;
  int twice_Jnu{0};
  double omega{0.0};
};

struct CorrelationResult {
  TransitionSpec transition;
  double y{0.5};
  std::vector<double> theta; //!< radians
  std::vector<double> W;     //!< s^-1, includes 8 pi^2 (E_i-E_f)
  Truncation truncation;
  std::string basis_fingerprint;
  double transition_energy{0.0}; //!< E_i - E_f, m c^2
};

//! Inputs of the ^1S_0 interference shape: calS_{Lp} = S^L_{Lp,Lp}(w1) +
//! S^L_{Lp,Lp}(w2)
struct ShapeS0Inputs {
  cplx S_E1, S_M1, S_E2;
};
//! Inputs of the ^3P_0 interference shape (symmetric / antisymmetric sums)
struct ShapeP0Inputs {
  cplx S_E1M1, S_E2M2, D_E1M1, D_E2M2;
};

//! (1 + cos^2) + 4 (S_M1/S_E1) cos - 20/3 (S_E2/S_E1) cos^3
double shape_s0(double theta, cplx S_E1, cplx S_M1, cplx S_E2);
//! sin^4(t/2)|S_E1M1|^2 (1 + 2(1+2cos) S_E2M2/S_E1M1)
//!   + cos^4(t/2)|D_E1M1|^2 (1 - 2(1-2cos) D_E2M2/D_E1M1)
double shape_p0(double theta, cplx S_E1M1, cplx S_E2M2, cplx D_E1M1,
                cplx D_E2M2);

//==============================================================================
struct RateResult {
  double total{0.0};          //!< s^-1
  std::vector<double> y;      //!< quadrature nodes
  std::vector<double> weight; //!< quadrature weights on [0,1]
  std::vector<double> dWdy;   //!< s^-1 per unit y
};

//! Options of the engine beyond the physics truncation.
struct EngineOptions {
  Gauge gauge{Gauge::velocity};
  //! relative pole guard: |E_nu - E_i + omega| < pole_epsilon (E_i - E_f)
  double pole_epsilon{1.0e-6};
  //! rebuilds with r_first / 10 when small-component intruders appear in
  //! the gap, at most this many times
  int max_basis_retries{2};
};

//! Second-order engine for one transition: builds the per-kappa spectra,
//! evaluates the reduced amplitudes, the amplitude and W(theta, y).
class TwoPhotonEngine {
public:
  TwoPhotonEngine(const TransitionSpec &transition, const BasisParams &basis,
                  const Truncation &trunc, const EngineOptions &opt = {});
  ~TwoPhotonEngine();
  TwoPhotonEngine(const TwoPhotonEngine &) = delete;
  TwoPhotonEngine &operator=(const TwoPhotonEngine &) = delete;

  const TransitionSpec &transition() const { return m_tr; }
  const Truncation &truncation() const { return m_trunc; }
  const DiracBasis &basis() const { return *m_basis; }
  //! basis actually used (r_first may have been reduced)
  const BasisParams &basis_params() const { return m_basis->params(); }
  int basis_retries() const { return m_retries; }

  const KappaSpectrum &spectrum(int kappa) const;
  std::vector<int> kappas() const;
  const RadialOrbital &initial() const { return *m_initial; }
  const RadialOrbital &final_orbital() const { return *m_final; }
  //! E_i - E_f, units m c^2
  double transition_energy() const { return m_dE; }
  //! photon energies (k1, k2) for sharing y, k1 + k2 = E_i - E_f
  std::pair<double, double> photon_energies(double y) const;

  //! Multipoles (L, p) allowed for a single photon under the truncation
  std::vector<MultipoleChannel> photon_channels() const;

  //! One-electron S^{j_nu}_{c1,c2}(omega = c2.k) summed over both kappa of
  //! j_nu and all pseudo-states. Throws PoleError.
  cplx s_one_electron(const MultipoleChannel &c1, const MultipoleChannel &c2,
                      int twice_jnu) const;
  //! Helium-like IPM reduction to one-electron amplitudes (J_nu = L1).
  cplx s_helium_reduced(const MultipoleChannel &c1, const MultipoleChannel &c2,
                        int twice_Jnu) const;
  //! Reduced amplitude of the ion (dispatches on the ion kind).
  SecondOrderAmp s_reduced(const MultipoleChannel &c1,
                           const MultipoleChannel &c2, int twice_Jnu) const;

  //! Amplitude with the first photon along z and the second at angle theta
  //! in the xz plane. lambda = +-1; projections doubled.
  cplx amplitude(int twice_Mi, int twice_Mf, int lambda1, int lambda2,
                 double theta, double y) const;

  //! W(theta, y), s^-1
  CorrelationResult correlation_function(double y,
                                         const std::vector<double> &theta) const;
  //! dW/dy = int W sin(theta) dtheta, s^-1
  double spectral_density(double y) const;
  //! (1/2) int_0^1 dy dW/dy on an n-point Gauss-Legendre y grid, s^-1
  RateResult total_rate(int n_y = 24) const;
  //! rate with a user y grid (nodes and weights on [0,1])
  RateResult total_rate(const std::vector<double> &y,
                        const std::vector<double> &weights) const;

  ShapeS0Inputs shape_s0_inputs(double y) const;
  ShapeP0Inputs shape_p0_inputs(double y) const;

  //! Worst spectrum diagnostics over all kappa
  struct Diagnostics {
    double orthonormality{0.0};
    double bound_energy{0.0};
    double completeness{0.0};
    int spurious_states{0};
  };
  Diagnostics diagnostics() const;

  //! number of memoised reduced matrix elements
  std::size_t me_cache_size() const;

private:
  struct Table;
  std::shared_ptr<const Table> table(double y) const;
  double W_from_table(const Table &t, double theta) const;

  TransitionSpec m_tr;
  Truncation m_trunc;
  EngineOptions m_opt;
  std::unique_ptr<DiracBasis> m_basis;
  std::map<int, KappaSpectrum> m_spectra;
  const RadialOrbital *m_initial{nullptr};
  const RadialOrbital *m_final{nullptr};
  double m_dE{0.0};
  int m_retries{0};
  std::unique_ptr<MultipoleEvaluator> m_me;
};

} // namespace twogamma
