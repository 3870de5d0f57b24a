#pragma once
#include "twogamma/spectrum.hpp"
#include <map>
#include <tuple>
#include <mutex>
#include <shared_mutex>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace twogamma {

//! Photon multipole E L (p = 1) or M L (p = 0) with wavenumber k = omega.
struct MultipoleChannel {
  int L{1};
  int p{1};
  double k{0.0};

  bool electric() const { return p == 1; }
  //! "E1", "M2", ...
  std::string label() const { return (p == 1 ? "E" : "M") + std::to_string(L); }
};

enum class Gauge { velocity, length };

//! Radial integrals under-resolve j_L(kr) on the grid.
class ResolutionError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

//! Triangle rule on j and multipole parity: l_f + l_i + L even for electric,
//! odd for magnetic.
bool selection_rule(int kappa_f, int kappa_i, int L, int p);

//! Reduced <kappa_a || sigma . Y^{(L,l)} || kappa_b> between spin-angular
//! functions Omega_kappa (Edmonds normalisation,
//! <a m_a|T_LM|b m_b> = <j_b m_b L M|j_a m_a> <a||T||b> / sqrt(2 j_a + 1)).
double angular_sigmaY(int kappa_a, int kappa_b, int L, int l);
//! Reduced <kappa_a || Y_L || kappa_b> in the same normalisation.
double angular_Y(int kappa_a, int kappa_b, int L);

//! One reduced single-electron matrix element of alpha . a^p_L(k).
//! The full reduced element is  <a||alpha a^p_L(k)||b> = i * value.
struct ReducedME {
  double value{0.0};
  int kappa_bra{0}, kappa_ket{0};
  double energy_bra{0.0}, energy_ket{0.0};
  MultipoleChannel channel;
  Gauge gauge{Gauge::velocity};
};

//! Reduced matrix element <bra||alpha a^p_L(k)||ket> / i.
//! Returns value = 0 (exactly) when selection_rule fails.
//! Throws std::invalid_argument for k <= 0, L < 1, or orbitals not sampled on
//! `grid`; ResolutionError if the grid has fewer than 8 nodes per period of
//! j_L(kr) inside the orbital support.
ReducedME reduced_me(const RadialOrbital &bra, const RadialOrbital &ket,
                     const MultipoleChannel &ch, const RadialGrid &grid,
                     Gauge gauge = Gauge::velocity);

//==============================================================================
//! Reusable evaluator: caches j_l(k r) on the grid per (l, k) and memoises
//! reduced elements keyed by (bra, ket, L, p, k-bucket). Orbitals are
//! identified by address, so they must outlive the evaluator. Thread safe.
class MultipoleEvaluator {
public:
  explicit MultipoleEvaluator(const RadialGrid &grid,
                              Gauge gauge = Gauge::velocity);

  const RadialGrid &grid() const { return m_grid; }
  Gauge gauge() const { return m_gauge; }

  //! <bra||alpha a^p_L(k)||ket> / i
  double operator()(const RadialOrbital &bra, const RadialOrbital &ket,
                    const MultipoleChannel &ch);

  //! j_l(k r_i) on the grid nodes
  const std::vector<double> &bessel(int l, double k);

  std::size_t cache_size() const;
  void clear();

private:
  double compute(const RadialOrbital &bra, const RadialOrbital &ket,
                 const MultipoleChannel &ch);

  struct Key {
    const RadialOrbital *bra, *ket;
    int L, p;
    long long kbucket;
    bool operator==(const Key &o) const = default;
  };
  struct KeyHash {
    std::size_t operator()(const Key &k) const;
  };

  const RadialGrid &m_grid;
  Gauge m_gauge;
  mutable std::shared_mutex m_mutex;
  std::unordered_map<Key, double, KeyHash> m_me;
  std::map<std::pair<int, long long>, std::vector<double>> m_bessel;
  std::map<long long, bool> m_resolved;
};

//! k rounded to a relative 1e-12 bucket (memo key)
long long k_bucket(double k);

} // namespace twogamma
