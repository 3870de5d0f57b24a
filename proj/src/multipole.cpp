#include "twogamma/multipole.hpp"
#include "twogamma/angular.hpp"
#include "twogamma/constants.hpp"
#include <bit>
#include <cmath>
#include <complex>

namespace twogamma {

using angular::cg_2;
using angular::threej_2;
using angular::triangle;
using constants::pi;

bool selection_rule(int kappa_f, int kappa_i, int L, int p) {
  if (L < 1 || (p != 0 && p != 1) || kappa_f == 0 || kappa_i == 0)
    return false;
  if (!triangle(twice_j_of_kappa(kappa_f), twice_j_of_kappa(kappa_i), 2 * L))
    return false;
  const int parity = (l_of_kappa(kappa_f) + l_of_kappa(kappa_i) + L) % 2;
  return p == 1 ? parity == 0 : parity == 1;
}

//==============================================================================
namespace {

// int Y*_{la ma} Y_{l m} Y_{lb mb} dOmega
double gaunt(int la, int ma, int l, int m, int lb, int mb) {
  if (-ma + m + mb != 0)
    return 0.0;
  const double t0 = threej_2(2 * la, 2 * l, 2 * lb, 0, 0, 0);
  if (t0 == 0.0)
    return 0.0;
  const double t1 = threej_2(2 * la, 2 * l, 2 * lb, -2 * ma, 2 * m, 2 * mb);
  const double sgn = (ma % 2 == 0) ? 1.0 : -1.0;
  return sgn *
         std::sqrt((2 * la + 1) * (2 * l + 1) * (2 * lb + 1) / (4.0 * pi)) *
         t0 * t1;
}

// <s_a| sigma_q |s_b>, spherical components, doubled spin projections
double sigma_q(int ts_a, int q, int ts_b) {
  if (q == 0)
    return ts_a == ts_b ? (ts_a > 0 ? 1.0 : -1.0) : 0.0;
  if (q == 1)
    return (ts_a == 1 && ts_b == -1) ? -std::sqrt(2.0) : 0.0;
  return (ts_a == -1 && ts_b == 1) ? std::sqrt(2.0) : 0.0;
}

// <Omega_{ka ma}| O |Omega_{kb mb}> with O = sigma . Y^M_{L l} (vector) or
// Y_{L M} (scalar, l < 0)
double omega_me(int ka, int tma, int kb, int tmb, int L, int l, int M) {
  const int la = l_of_kappa(ka), lb = l_of_kappa(kb);
  const int tja = twice_j_of_kappa(ka), tjb = twice_j_of_kappa(kb);
  double sum = 0.0;
  for (int tsa = -1; tsa <= 1; tsa += 2) {
    const int tmua = tma - tsa;
    if (std::abs(tmua) > 2 * la)
      continue;
    const double ca = cg_2(2 * la, tmua, 1, tsa, tja, tma);
    if (ca == 0.0)
      continue;
    for (int tsb = -1; tsb <= 1; tsb += 2) {
      const int tmub = tmb - tsb;
      if (std::abs(tmub) > 2 * lb)
        continue;
      const double cb = cg_2(2 * lb, tmub, 1, tsb, tjb, tmb);
      if (cb == 0.0)
        continue;
      if (l < 0) {
        if (tsa != tsb)
          continue;
        sum += ca * cb * gaunt(la, tmua / 2, L, M, lb, tmub / 2);
      } else {
        for (int q = -1; q <= 1; ++q) {
          const int ml = M - q;
          if (std::abs(ml) > l)
            continue;
          const double s = sigma_q(tsa, q, tsb);
          if (s == 0.0)
            continue;
          const double cv = cg_2(2 * l, 2 * ml, 2, 2 * q, 2 * L, 2 * M);
          if (cv == 0.0)
            continue;
          sum += ca * cb * cv * s * gaunt(la, tmua / 2, l, ml, lb, tmub / 2);
        }
      }
    }
  }
  return sum;
}

// Reduce by Wigner-Eckart using the m choice with the largest CG
double reduce(int ka, int kb, int L, int l) {
  const int tja = twice_j_of_kappa(ka), tjb = twice_j_of_kappa(kb);
  if (!triangle(tja, tjb, 2 * L))
    return 0.0;
  double best = 0.0;
  int bm = 0, bM = 0;
  for (int tmb = -tjb; tmb <= tjb; tmb += 2)
    for (int M = -L; M <= L; ++M) {
      const int tma = tmb + 2 * M;
      if (std::abs(tma) > tja)
        continue;
      const double c = cg_2(tjb, tmb, 2 * L, 2 * M, tja, tma);
      if (std::abs(c) > std::abs(best) + 1e-12) {
        best = c;
        bm = tmb;
        bM = M;
      }
    }
  if (best == 0.0)
    return 0.0;
  const double me = omega_me(ka, bm + 2 * bM, kb, bm, L, l, bM);
  return me * std::sqrt(tja + 1.0) / best;
}

struct AngCache {
  std::shared_mutex mutex;
  std::map<std::tuple<int, int, int, int>, double> values;

  double get(int ka, int kb, int L, int l) {
    const auto key = std::make_tuple(ka, kb, L, l);
    {
      std::shared_lock lock(mutex);
      auto it = values.find(key);
      if (it != values.end())
        return it->second;
    }
    const double v = reduce(ka, kb, L, l);
    std::unique_lock lock(mutex);
    values.emplace(key, v);
    return v;
  }
};

AngCache &ang_cache() {
  static AngCache c;
  return c;
}

} // namespace

double angular_sigmaY(int kappa_a, int kappa_b, int L, int l) {
  if (l < 0 || std::abs(l - L) > 1)
    throw std::invalid_argument("angular_sigmaY: l must be L-1, L or L+1");
  return ang_cache().get(kappa_a, kappa_b, L, l);
}

double angular_Y(int kappa_a, int kappa_b, int L) {
  return ang_cache().get(kappa_a, kappa_b, L, -1);
}

//==============================================================================
namespace {

void check_inputs(const RadialOrbital &bra, const RadialOrbital &ket,
                  const MultipoleChannel &ch, const RadialGrid &grid) {
  if (!(ch.k > 0.0))
    throw std::invalid_argument("multipole: photon wavenumber must be > 0");
  if (ch.L < 1 || (ch.p != 0 && ch.p != 1))
    throw std::invalid_argument("multipole: invalid channel " + ch.label());
  if (bra.g.size() != grid.size() || ket.g.size() != grid.size() ||
      bra.f.size() != grid.size() || ket.f.size() != grid.size())
    throw std::invalid_argument("multipole: orbitals are not on this grid");
}

// outermost radius where either orbital is non-negligible
double support(const RadialOrbital &a, const RadialOrbital &b,
               const RadialGrid &grid) {
  double peak = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i)
    peak = std::max({peak, a.g[i] * a.g[i] + a.f[i] * a.f[i],
                     b.g[i] * b.g[i] + b.f[i] * b.f[i]});
  const double cut = 1.0e-20 * peak;
  for (std::size_t i = grid.size(); i-- > 0;)
    if (a.g[i] * a.g[i] + a.f[i] * a.f[i] > cut ||
        b.g[i] * b.g[i] + b.f[i] * b.f[i] > cut)
      return grid.r(i);
  return grid.r(0);
}

void check_resolution(const RadialGrid &grid, double k, double r_support) {
  const double period = 2.0 * pi / k;
  const double h = grid.max_spacing(r_support);
  if (h > period / 8.0)
    throw ResolutionError(
        "radial grid under-resolves j_L(kr): spacing " + std::to_string(h) +
        " > period/8 = " + std::to_string(period / 8.0) + " (k=" +
        std::to_string(k) + ")");
}

template <class BesselFn>
double radial_me(const RadialOrbital &a, const RadialOrbital &b,
                 const MultipoleChannel &ch, const RadialGrid &grid,
                 Gauge gauge, BesselFn &&jl) {
  const int ka = a.kappa, kb = b.kappa, L = ch.L;
  const auto &w = grid.w();
  // int j_l(kr) [g_a f_b A(ka,-kb) - f_a g_b A(-ka,kb)] dr
  auto mixed = [&](int l) {
    const double A1 = angular_sigmaY(ka, -kb, L, l);
    const double A2 = angular_sigmaY(-ka, kb, L, l);
    if (A1 == 0.0 && A2 == 0.0)
      return 0.0;
    const auto &j = jl(l);
    double s = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i)
      s += w[i] * j[i] * (A1 * a.g[i] * b.f[i] - A2 * a.f[i] * b.g[i]);
    return s;
  };
  if (ch.p == 0)
    return mixed(L);
  const double Ld = L;
  if (gauge == Gauge::velocity)
    return std::sqrt((Ld + 1.0) / (2.0 * Ld + 1.0)) * mixed(L - 1) -
           std::sqrt(Ld / (2.0 * Ld + 1.0)) * mixed(L + 1);
  // length gauge
  const double B1 = angular_Y(ka, kb, L);
  const double B2 = angular_Y(-ka, -kb, L);
  double diag = 0.0;
  if (B1 != 0.0 || B2 != 0.0) {
    const auto &j = jl(L);
    for (std::size_t i = 0; i < w.size(); ++i)
      diag += w[i] * j[i] * (B1 * a.g[i] * b.g[i] + B2 * a.f[i] * b.f[i]);
  }
  return -std::sqrt((2.0 * Ld + 1.0) / Ld) * mixed(L + 1) +
         std::sqrt((Ld + 1.0) / Ld) * diag;
}

} // namespace

ReducedME reduced_me(const RadialOrbital &bra, const RadialOrbital &ket,
                     const MultipoleChannel &ch, const RadialGrid &grid,
                     Gauge gauge) {
  check_inputs(bra, ket, ch, grid);
  ReducedME out;
  out.kappa_bra = bra.kappa;
  out.kappa_ket = ket.kappa;
  out.energy_bra = bra.energy;
  out.energy_ket = ket.energy;
  out.channel = ch;
  out.gauge = gauge;
  if (!selection_rule(bra.kappa, ket.kappa, ch.L, ch.p))
    return out;
  check_resolution(grid, ch.k, support(bra, ket, grid));
  std::map<int, std::vector<double>> tables;
  auto jl = [&](int l) -> const std::vector<double> & {
    auto &t = tables[l];
    if (t.empty()) {
      t.resize(grid.size());
      for (std::size_t i = 0; i < grid.size(); ++i)
        t[i] = spherical_bessel_j(l, ch.k * grid.r(i));
    }
    return t;
  };
  out.value = radial_me(bra, ket, ch, grid, gauge, jl);
  return out;
}

//==============================================================================
long long k_bucket(double k) { return std::bit_cast<long long>(k); }

std::size_t MultipoleEvaluator::KeyHash::operator()(const Key &k) const {
  std::size_t h = std::hash<const void *>{}(k.bra);
  auto mix = [&h](std::size_t v) {
    h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  };
  mix(std::hash<const void *>{}(k.ket));
  mix(static_cast<std::size_t>(k.L * 2 + k.p));
  mix(std::hash<long long>{}(k.kbucket));
  return h;
}

MultipoleEvaluator::MultipoleEvaluator(const RadialGrid &grid, Gauge gauge)
    : m_grid(grid), m_gauge(gauge) {}

const std::vector<double> &MultipoleEvaluator::bessel(int l, double k) {
  const auto key = std::make_pair(l, k_bucket(k));
  {
    std::shared_lock lock(m_mutex);
    auto it = m_bessel.find(key);
    if (it != m_bessel.end())
      return it->second;
  }
  std::vector<double> t(m_grid.size());
  for (std::size_t i = 0; i < m_grid.size(); ++i)
    t[i] = spherical_bessel_j(l, k * m_grid.r(i));
  std::unique_lock lock(m_mutex);
  // std::map nodes are stable, references stay valid after insertion
  return m_bessel.emplace(key, std::move(t)).first->second;
}

double MultipoleEvaluator::compute(const RadialOrbital &bra,
                                   const RadialOrbital &ket,
                                   const MultipoleChannel &ch) {
  check_inputs(bra, ket, ch, m_grid);
  if (!selection_rule(bra.kappa, ket.kappa, ch.L, ch.p))
    return 0.0;
  const long long kb = k_bucket(ch.k);
  bool checked;
  {
    std::shared_lock lock(m_mutex);
    checked = m_resolved.count(kb) > 0;
  }
  if (!checked) {
    // the pseudo-continuum fills the box, so check once per k on the full grid
    check_resolution(m_grid, ch.k, m_grid.r_max());
    std::unique_lock lock(m_mutex);
    m_resolved[kb] = true;
  }
  auto jl = [&](int l) -> const std::vector<double> & {
    return bessel(l, ch.k);
  };
  return radial_me(bra, ket, ch, m_grid, m_gauge, jl);
}

double MultipoleEvaluator::operator()(const RadialOrbital &bra,
                                      const RadialOrbital &ket,
                                      const MultipoleChannel &ch) {
  const Key key{&bra, &ket, ch.L, ch.p, k_bucket(ch.k)};
  {
    std::shared_lock lock(m_mutex);
    auto it = m_me.find(key);
    if (it != m_me.end())
      return it->second;
  }
  const double v = compute(bra, ket, ch);
  std::unique_lock lock(m_mutex);
  m_me.emplace(key, v);
  return v;
}

std::size_t MultipoleEvaluator::cache_size() const {
  std::shared_lock lock(m_mutex);
  return m_me.size();
}

void MultipoleEvaluator::clear() {
  std::unique_lock lock(m_mutex);
  m_me.clear();
  m_bessel.clear();
  m_resolved.clear();
}

} // namespace twogamma
