#include "twogamma/twophoton.hpp"
#include "twogamma/angular.hpp"
#include "twogamma/constants.hpp"
#include <algorithm>
#include <cctype>
#include <cmath>
#include <exception>
#include <mutex>
#include <regex>
#include <sstream>
#ifdef _OPENMP
#include <omp.h>
#endif

namespace twogamma {

using angular::cg_2;
using angular::neg1pow;
using angular::sixj_2;
using angular::small_d_2;
using angular::triangle;
using constants::pi;

//==============================================================================
namespace {

std::string squeeze(const std::string &s) {
  std::string out;
  for (char c : s)
    if (!std::isspace(static_cast<unsigned char>(c)) && c != '_')
      out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

int l_from_letter(char c) {
  const std::string letters = "spdfghi";
  const auto pos = letters.find(c);
  return pos == std::string::npos ? -1 : static_cast<int>(pos);
}

} // namespace

TransitionSpec parse_transition(const std::string &label, int Z) {
  if (Z < 1 || Z > 137)
    throw std::invalid_argument("nuclear charge Z must be in 1..137");
  const std::string s = squeeze(label);
  TransitionSpec t;
  t.Z = Z;
  t.n_0 = 1;
  t.kappa_0 = -1;
  t.twice_Jf = 0;
  if (s == "1s2s1s0" || s == "1s0" || s == "21s0") {
    t.label = "1s2s 1S0";
    t.kind = IonKind::helium_like;
    t.twice_Ji = 0;
    t.n_i = 2;
    t.kappa_i = -1;
    return t;
  }
  if (s == "1s2s3s1" || s == "3s1" || s == "23s1") {
    t.label = "1s2s 3S1";
    t.kind = IonKind::helium_like;
    t.twice_Ji = 2;
    t.n_i = 2;
    t.kappa_i = -1;
    return t;
  }
  if (s == "1s2p3p0" || s == "3p0" || s == "23p0") {
    t.label = "1s2p 3P0";
    t.kind = IonKind::helium_like;
    t.twice_Ji = 0;
    t.n_i = 2;
    t.kappa_i = 1;
    return t;
  }
  // hydrogen-like, e.g. "2s1/2", "3d3/2"
  static const std::regex re(R"(^(?:h:)?(\d+)([spdfghi])(\d+)/2$)");
  std::smatch m;
  if (std::regex_match(s, m, re)) {
    const int n = std::stoi(m[1]);
    const int l = l_from_letter(m[2].str()[0]);
    const int tj = std::stoi(m[3]);
    if (l < 0 || l >= n || (tj != 2 * l + 1 && tj != 2 * l - 1) || tj < 1)
      throw std::invalid_argument("invalid hydrogen-like level '" + label +
                                  "'");
    t.kind = IonKind::hydrogen_like;
    t.n_i = n;
    t.kappa_i = kappa_of(l, tj);
    t.twice_Ji = tj;
    t.twice_Jf = 1;
    t.label = std::to_string(n) + m[2].str() + std::to_string(tj) + "/2";
    if (n == 1)
      throw std::invalid_argument("initial level must lie above 1s1/2");
    return t;
  }
  throw std::invalid_argument("unknown transition '" + label +
                              "' (known: 1s2s 1S0, 1s2s 3S1, 1s2p 3P0, or a "
                              "hydrogen-like level such as 2s1/2)");
}

std::vector<std::string> known_transitions() {
  return {"1s2s 1S0", "1s2s 3S1", "1s2p 3P0", "2s1/2", "2p1/2", "3d3/2"};
}

//==============================================================================
bool Truncation::allows(int L, int p) const {
  if (L < 1 || L > L_max)
    return false;
  if (channels.empty())
    return true;
  const std::string lab = (p == 1 ? "E" : "M") + std::to_string(L);
  return std::find(channels.begin(), channels.end(), lab) != channels.end();
}

bool Truncation::allows_pair(const MultipoleChannel &a,
                             const MultipoleChannel &b,
                             bool same_parity) const {
  if (!allows(a.L, a.p) || !allows(b.L, b.p))
    return false;
  if (dipole_only) {
    if (a.L != 1 || b.L != 1)
      return false;
    if (same_parity)
      return a.p == 1 && b.p == 1;
    return a.p != b.p;
  }
  return true;
}

std::string Truncation::describe() const {
  std::ostringstream os;
  if (dipole_only)
    os << "dipole";
  else
    os << "Lmax=" << L_max;
  if (!channels.empty()) {
    os << " channels=";
    for (std::size_t i = 0; i < channels.size(); ++i)
      os << (i ? "," : "") << channels[i];
  }
  if (!include_negative_energy)
    os << " no-negative-energy";
  return os.str();
}

//==============================================================================
double shape_s0(double theta, cplx S_E1, cplx S_M1, cplx S_E2) {
  const double c = std::cos(theta);
  const double rM1 = (S_M1 / S_E1).real();
  const double rE2 = (S_E2 / S_E1).real();
  return (1.0 + c * c) + 4.0 * rM1 * c - 20.0 / 3.0 * rE2 * c * c * c;
}

double shape_p0(double theta, cplx S_E1M1, cplx S_E2M2, cplx D_E1M1,
                cplx D_E2M2) {
  const double c = std::cos(theta);
  const double s2 = std::sin(0.5 * theta), c2 = std::cos(0.5 * theta);
  double out = 0.0;
  if (std::abs(S_E1M1) > 0.0)
    out += std::pow(s2, 4) * std::norm(S_E1M1) *
           (1.0 + 2.0 * (1.0 + 2.0 * c) * (S_E2M2 / S_E1M1).real());
  if (std::abs(D_E1M1) > 0.0)
    out += std::pow(c2, 4) * std::norm(D_E1M1) *
           (1.0 - 2.0 * (1.0 - 2.0 * c) * (D_E2M2 / D_E1M1).real());
  return out;
}

//==============================================================================
// Per-y table of theta-independent amplitude coefficients:
// M(theta) = sum_L coef[L] d^L_{M2 lambda2}(theta)
struct TwoPhotonEngine::Table {
  double y{0.0}, k1{0.0}, k2{0.0};
  struct Combo {
    int tMi, tMf, lambda1, lambda2, tM2;
    std::vector<cplx> coef; // index L
  };
  std::vector<Combo> combos;
  int L_max{1};
};

namespace {

struct STask {
  int a, b; // photon-1 / photon-2 channel index
  int tJnu;
  bool swapped; // false: S_{a@k1, b@k2}(w2); true: S_{b@k2, a@k1}(w1)
  cplx value;
};

// Run f(i) for i in [0, n) in parallel, rethrowing the first exception
template <class F> void parallel_for(int n, F &&f) {
  std::exception_ptr err;
  std::mutex m;
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < n; ++i) {
    try {
      f(i);
    } catch (...) {
      std::lock_guard lock(m);
      if (!err)
        err = std::current_exception();
    }
  }
  if (err)
    std::rethrow_exception(err);
}

} // namespace

//==============================================================================
TwoPhotonEngine::TwoPhotonEngine(const TransitionSpec &transition,
                                 const BasisParams &basis,
                                 const Truncation &trunc,
                                 const EngineOptions &opt)
    : m_tr(transition), m_trunc(trunc), m_opt(opt) {
  if (trunc.L_max < 1)
    throw std::invalid_argument("L_max must be >= 1");
  const double Za = transition.Z * constants::alpha;
  if (Za >= 1.0)
    throw PhysicsDomainError("Z alpha >= 1: no point-nucleus bound states");

  // quadrupoles are always available for the interference-shape inputs
  const int L_eff = std::max(2, trunc.dipole_only ? 1 : trunc.L_max);
  const int tj_max =
      std::max(twice_j_of_kappa(m_tr.kappa_i), twice_j_of_kappa(m_tr.kappa_0)) +
      2 * L_eff;
  const int kmax = (tj_max + 1) / 2;
  std::vector<int> ks;
  for (int k = 1; k <= kmax; ++k) {
    ks.push_back(-k);
    ks.push_back(k);
  }

  BasisParams bp = basis;
  for (int attempt = 0;; ++attempt) {
    m_basis = std::make_unique<DiracBasis>(transition.Z, bp);
    std::vector<KappaSpectrum> built(ks.size());
    parallel_for(static_cast<int>(ks.size()), [&](int i) {
      built[static_cast<std::size_t>(i)] =
          build_spectrum(*m_basis, ks[static_cast<std::size_t>(i)]);
    });
    int spurious = 0;
    for (const auto &s : built)
      spurious += spurious_gap_states(s);
    m_spectra.clear();
    for (std::size_t i = 0; i < ks.size(); ++i)
      m_spectra.emplace(ks[i], std::move(built[i]));
    if (spurious == 0 || attempt >= m_opt.max_basis_retries)
      break;
    bp.r_first *= 0.1;
    m_retries = attempt + 1;
  }

  m_initial = &spectrum(m_tr.kappa_i).bound(m_tr.n_i);
  m_final = &spectrum(m_tr.kappa_0).bound(m_tr.n_0);
  m_dE = m_tr.energy_override > 0.0 ? m_tr.energy_override
                                    : m_initial->energy - m_final->energy;
  if (!(m_dE > 0.0))
    throw std::invalid_argument("transition energy E_i - E_f must be > 0");
  m_me = std::make_unique<MultipoleEvaluator>(m_basis->grid(), m_opt.gauge);
}

TwoPhotonEngine::~TwoPhotonEngine() = default;

const KappaSpectrum &TwoPhotonEngine::spectrum(int kappa) const {
  auto it = m_spectra.find(kappa);
  if (it == m_spectra.end())
    throw std::out_of_range("no spectrum for kappa = " + std::to_string(kappa));
  return it->second;
}

std::vector<int> TwoPhotonEngine::kappas() const {
  std::vector<int> out;
  for (const auto &[k, s] : m_spectra)
    out.push_back(k);
  return out;
}

std::pair<double, double> TwoPhotonEngine::photon_energies(double y) const {
  const double k1 = y * m_dE;
  return {k1, m_dE - k1};
}

std::vector<MultipoleChannel> TwoPhotonEngine::photon_channels() const {
  std::vector<MultipoleChannel> out;
  const int L_eff = m_trunc.dipole_only ? 1 : m_trunc.L_max;
  for (int L = 1; L <= L_eff; ++L)
    for (int p = 1; p >= 0; --p)
      if (m_trunc.allows(L, p))
        out.push_back({L, p, 0.0});
  return out;
}

std::size_t TwoPhotonEngine::me_cache_size() const {
  return m_me->cache_size();
}

TwoPhotonEngine::Diagnostics TwoPhotonEngine::diagnostics() const {
  Diagnostics d;
  for (const auto &[k, s] : m_spectra) {
    const auto r = spectrum_report(s, *m_basis);
    d.orthonormality = std::max(d.orthonormality, r.orthonormality_residual);
    d.bound_energy = std::max(d.bound_energy, r.bound_energy_error);
    d.completeness = std::max(d.completeness, r.completeness_defect);
    d.spurious_states += r.spurious_states;
  }
  return d;
}

//==============================================================================
cplx TwoPhotonEngine::s_one_electron(const MultipoleChannel &c1,
                                     const MultipoleChannel &c2,
                                     int twice_jnu) const {
  const RadialOrbital &fin = *m_final;
  const RadialOrbital &ini = *m_initial;
  const double omega = c2.k;
  const double eps = m_opt.pole_epsilon * m_dE;
  double sum = 0.0;
  for (int sign : {-1, 1}) {
    const int kappa = sign * (twice_jnu + 1) / 2;
    if (!selection_rule(fin.kappa, kappa, c1.L, c1.p) ||
        !selection_rule(kappa, ini.kappa, c2.L, c2.p))
      continue;
    const auto &spec = spectrum(kappa);
    for (const auto &nu : spec.orbitals) {
      if (!m_trunc.include_negative_energy && nu.energy < -1.0)
        continue;
      const double denom = nu.energy - ini.energy + omega;
      if (std::abs(denom) < eps) {
        std::ostringstream os;
        os.precision(10);
        os << "energy denominator vanishes: intermediate "
           << (nu.n > 0 ? nu.label() : orbital_label(0, kappa))
           << " E=" << nu.energy << " with omega=" << omega
           << " (|E_nu - E_i + omega| = " << std::abs(denom) << " < " << eps
           << ")";
        throw PoleError(os.str(), kappa, nu.energy, omega, denom);
      }
      // <f||alpha a+||nu> <nu||alpha a+||i> = (-i v(nu,f)) (-i v(i,nu))
      const double a = (*m_me)(nu, fin, c1);
      if (a == 0.0)
        continue;
      const double b = (*m_me)(ini, nu, c2);
      sum -= a * b / denom;
    }
  }
  return {sum, 0.0};
}

cplx TwoPhotonEngine::s_helium_reduced(const MultipoleChannel &c1,
                                       const MultipoleChannel &c2,
                                       int twice_Jnu) const {
  if (twice_Jnu != 2 * c1.L)
    return 0.0;
  const int tJi = m_tr.twice_Ji;
  const int tji = twice_j_of_kappa(m_tr.kappa_i);
  const int tj0 = twice_j_of_kappa(m_tr.kappa_0);
  cplx sum = 0.0;
  for (int tjnu = std::abs(tji - 2 * c2.L); tjnu <= tji + 2 * c2.L;
       tjnu += 2) {
    const double w = sixj_2(tjnu, tj0, twice_Jnu, tJi, 2 * c2.L, tji);
    if (w == 0.0)
      continue;
    const int phase = neg1pow((tJi + twice_Jnu) / 2 + c2.L);
    sum += static_cast<double>(phase) * w * s_one_electron(c1, c2, tjnu);
  }
  return -std::sqrt((tJi + 1.0) * (twice_Jnu + 1.0)) * sum;
}

SecondOrderAmp TwoPhotonEngine::s_reduced(const MultipoleChannel &c1,
                                          const MultipoleChannel &c2,
                                          int twice_Jnu) const {
  SecondOrderAmp out;
  out.ch1 = c1;
  out.ch2 = c2;
  out.twice_Jnu = twice_Jnu;
  out.omega = c2.k;
  out.value = m_tr.helium_like() ? s_helium_reduced(c1, c2, twice_Jnu)
                                 : s_one_electron(c1, c2, twice_Jnu);
  return out;
}

//==============================================================================
std::shared_ptr<const TwoPhotonEngine::Table>
TwoPhotonEngine::table(double y) const {
  if (!(y > 0.0 && y < 1.0))
    throw std::invalid_argument("energy sharing y must lie in (0, 1)");
  auto t = std::make_shared<Table>();
  t->y = y;
  std::tie(t->k1, t->k2) = photon_energies(y);

  const int tJi = m_tr.twice_Ji, tJf = m_tr.twice_Jf;
  const bool same_parity =
      (l_of_kappa(m_tr.kappa_i) + l_of_kappa(m_tr.kappa_0)) % 2 == 0;
  auto base = photon_channels();
  std::vector<MultipoleChannel> ch1 = base, ch2 = base;
  for (auto &c : ch1)
    c.k = t->k1;
  for (auto &c : ch2)
    c.k = t->k2;
  const int nc = static_cast<int>(base.size());
  t->L_max = 1;
  for (const auto &c : base)
    t->L_max = std::max(t->L_max, c.L);

  // reduced amplitudes needed by the pair sum
  std::vector<STask> tasks;
  for (int a = 0; a < nc; ++a)
    for (int b = 0; b < nc; ++b) {
      if (!m_trunc.allows_pair(base[a], base[b], same_parity))
        continue;
      const int La = base[a].L, Lb = base[b].L;
      for (int tJ = std::abs(tJf - 2 * La); tJ <= tJf + 2 * La; tJ += 2)
        if (triangle(tJ, 2 * Lb, tJi))
          tasks.push_back({a, b, tJ, false, 0.0});
      for (int tJ = std::abs(tJf - 2 * Lb); tJ <= tJf + 2 * Lb; tJ += 2)
        if (triangle(tJ, 2 * La, tJi))
          tasks.push_back({a, b, tJ, true, 0.0});
    }
  parallel_for(static_cast<int>(tasks.size()), [&](int i) {
    auto &tk = tasks[static_cast<std::size_t>(i)];
    tk.value = tk.swapped ? s_reduced(ch2[tk.b], ch1[tk.a], tk.tJnu).value
                          : s_reduced(ch1[tk.a], ch2[tk.b], tk.tJnu).value;
  });

  const cplx I(0.0, 1.0);
  auto ipow = [&](int n) { // (-i)^n
    static const cplx v[4] = {1.0, cplx(0.0, -1.0), -1.0, cplx(0.0, 1.0)};
    return v[((n % 4) + 4) % 4];
  };
  for (int tMi = -tJi; tMi <= tJi; tMi += 2)
    for (int tMf = -tJf; tMf <= tJf; tMf += 2)
      for (int l1 : {1, -1})
        for (int l2 : {1, -1}) {
          Table::Combo cb{tMi, tMf, l1, l2, tMi - tMf - 2 * l1,
                          std::vector<cplx>(t->L_max + 1, 0.0)};
          for (const auto &tk : tasks) {
            const auto &A = base[tk.a];
            const auto &B = base[tk.b];
            if (std::abs(cb.tM2) > 2 * B.L)
              continue;
            double ang;
            if (!tk.swapped) {
              const int tMnu = tMf + 2 * l1;
              ang = cg_2(tJf, tMf, 2 * A.L, 2 * l1, tk.tJnu, tMnu) *
                    cg_2(tk.tJnu, tMnu, 2 * B.L, cb.tM2, tJi, tMi);
            } else {
              const int tMnu = tMf + cb.tM2;
              ang = cg_2(tJf, tMf, 2 * B.L, cb.tM2, tk.tJnu, tMnu) *
                    cg_2(tk.tJnu, tMnu, 2 * A.L, 2 * l1, tJi, tMi);
            }
            if (ang == 0.0 || tk.value == 0.0)
              continue;
            cplx ph = ipow(A.L + B.L);
            if (A.p == 1)
              ph *= -I * static_cast<double>(l1);
            if (B.p == 1)
              ph *= -I * static_cast<double>(l2);
            const double norm =
                2.0 * pi * std::sqrt((2.0 * A.L + 1.0) * (2.0 * B.L + 1.0)) /
                std::sqrt((tJi + 1.0) * (tk.tJnu + 1.0));
            cb.coef[B.L] += norm * ph * ang * tk.value;
          }
          t->combos.push_back(std::move(cb));
        }
  return t;
}

double TwoPhotonEngine::W_from_table(const Table &t, double theta) const {
  double sum = 0.0;
  for (const auto &cb : t.combos) {
    cplx M = 0.0;
    for (int L = 1; L <= t.L_max; ++L) {
      if (cb.coef[L] == 0.0)
        continue;
      M += cb.coef[L] * small_d_2(2 * L, cb.tM2, 2 * cb.lambda2, theta);
    }
    sum += std::norm(M);
  }
  const double a2 = constants::alpha * constants::alpha;
  const double pref = 8.0 * pi * pi * m_dE * a2 * t.k1 * t.k2 /
                      std::pow(2.0 * pi, 3) / (m_tr.twice_Ji + 1.0);
  return pref * sum * constants::rate_to_per_s;
}

cplx TwoPhotonEngine::amplitude(int twice_Mi, int twice_Mf, int lambda1,
                                int lambda2, double theta, double y) const {
  if (std::abs(twice_Mi) > m_tr.twice_Ji || std::abs(twice_Mf) > m_tr.twice_Jf ||
      (twice_Mi - m_tr.twice_Ji) % 2 != 0 || (twice_Mf - m_tr.twice_Jf) % 2 != 0)
    throw std::invalid_argument("amplitude: invalid projections");
  if (std::abs(lambda1) != 1 || std::abs(lambda2) != 1)
    throw std::invalid_argument("amplitude: helicities must be +-1");
  const auto t = table(y);
  for (const auto &cb : t->combos) {
    if (cb.tMi != twice_Mi || cb.tMf != twice_Mf || cb.lambda1 != lambda1 ||
        cb.lambda2 != lambda2)
      continue;
    cplx M = 0.0;
    for (int L = 1; L <= t->L_max; ++L)
      if (cb.coef[L] != 0.0)
        M += cb.coef[L] * small_d_2(2 * L, cb.tM2, 2 * lambda2, theta);
    return M;
  }
  return 0.0;
}

CorrelationResult
TwoPhotonEngine::correlation_function(double y,
                                      const std::vector<double> &theta) const {
  CorrelationResult r;
  r.transition = m_tr;
  r.y = y;
  r.theta = theta;
  r.truncation = m_trunc;
  r.basis_fingerprint = basis_params().fingerprint();
  r.transition_energy = m_dE;
  const auto t = table(y);
  r.W.assign(theta.size(), 0.0);
  parallel_for(static_cast<int>(theta.size()), [&](int i) {
    r.W[static_cast<std::size_t>(i)] =
        W_from_table(*t, theta[static_cast<std::size_t>(i)]);
  });
  return r;
}

double TwoPhotonEngine::spectral_density(double y) const {
  const auto t = table(y);
  // W is a polynomial in cos(theta) of degree <= 2 L_max
  const auto q = gauss_legendre(t->L_max + 2, -1.0, 1.0);
  double s = 0.0;
  for (std::size_t i = 0; i < q.nodes.size(); ++i)
    s += q.weights[i] * W_from_table(*t, std::acos(q.nodes[i]));
  return s;
}

RateResult TwoPhotonEngine::total_rate(int n_y) const {
  if (n_y < 2)
    throw std::invalid_argument("total_rate: need at least 2 y nodes");
  const auto q = gauss_legendre(n_y, 0.0, 1.0);
  return total_rate(q.nodes, q.weights);
}

RateResult TwoPhotonEngine::total_rate(const std::vector<double> &y,
                                       const std::vector<double> &weights) const {
  if (y.size() != weights.size() || y.empty())
    throw std::invalid_argument("total_rate: y grid and weights differ");
  RateResult r;
  r.y = y;
  r.weight = weights;
  r.dWdy.resize(y.size());
  for (std::size_t i = 0; i < y.size(); ++i)
    r.dWdy[i] = spectral_density(y[i]);
  double s = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i)
    s += weights[i] * r.dWdy[i];
  r.total = 0.5 * s;
  return r;
}

//==============================================================================
ShapeS0Inputs TwoPhotonEngine::shape_s0_inputs(double y) const {
  const auto [k1, k2] = photon_energies(y);
  auto calS = [&](int L, int p) {
    const MultipoleChannel a1{L, p, k1}, a2{L, p, k2};
    // S(w2): photon 1 at the final vertex; S(w1): photon 2 there
    return s_reduced(a1, a2, 2 * L).value + s_reduced(a2, a1, 2 * L).value;
  };
  return {calS(1, 1), calS(1, 0), calS(2, 1)};
}

ShapeP0Inputs TwoPhotonEngine::shape_p0_inputs(double y) const {
  const auto [k1, k2] = photon_energies(y);
  auto S = [&](int L, int p1, int p2, double w) {
    // S^{J=L}_{L p1, L p2}(w): the initial-state vertex carries energy w
    const double wf = (w == k2) ? k1 : k2;
    return s_reduced({L, p1, wf}, {L, p2, w}, 2 * L).value;
  };
  auto calS = [&](int L) {
    return S(L, 1, 0, k1) + S(L, 1, 0, k2) + S(L, 0, 1, k2) + S(L, 0, 1, k1);
  };
  auto calD = [&](int L) {
    return S(L, 1, 0, k1) - S(L, 1, 0, k2) + S(L, 0, 1, k2) - S(L, 0, 1, k1);
  };
  return {calS(1), calS(2), calD(1), calD(2)};
}

} // namespace twogamma
