#include "twogamma/spectrum.hpp"
#include "twogamma/constants.hpp"
#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <json.hpp>
#include <sstream>

namespace twogamma {

using constants::alpha;

int kappa_of(int l, int twice_j) {
  if (l < 0 || std::abs(twice_j - 2 * l) != 1)
    throw std::invalid_argument("kappa_of: invalid (l, j)");
  return twice_j == 2 * l + 1 ? -(l + 1) : l;
}

std::string orbital_label(int n, int kappa) {
  static constexpr const char *spd = "spdfghiklmnoqrtuv";
  const int l = l_of_kappa(kappa);
  std::string s = n > 0 ? std::to_string(n) : std::string{};
  s += (l < 17 ? spd[l] : '?');
  s += "_" + std::to_string(twice_j_of_kappa(kappa)) + "/2";
  return s;
}

double overlap(const RadialOrbital &a, const RadialOrbital &b,
               const RadialGrid &grid) {
  const auto &w = grid.w();
  if (a.g.size() != w.size() || b.g.size() != w.size())
    throw std::invalid_argument("overlap: orbital not on this grid");
  double s = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i)
    s += w[i] * (a.g[i] * b.g[i] + a.f[i] * b.f[i]);
  return s;
}

//==============================================================================
namespace {

void check_bound_quantum_numbers(double Z, int n, int kappa) {
  if (!(Z > 0.0) || Z * alpha >= 1.0)
    throw PhysicsDomainError("point-nucleus Dirac-Coulomb problem requires "
                             "0 < Z alpha < 1");
  if (n < 1 || kappa == 0 || std::abs(kappa) > n || kappa == n)
    throw PhysicsDomainError("invalid bound state (n=" + std::to_string(n) +
                             ", kappa=" + std::to_string(kappa) + ")");
}

// M(-a, b, x) for non-negative integer a: a terminating series
double hyp1f1_poly(int a, double b, double x) {
  double term = 1.0, sum = 1.0;
  for (int s = 0; s < a; ++s) {
    term *= (s - a) / ((b + s) * (s + 1.0)) * x;
    sum += term;
  }
  return sum;
}

} // namespace

double sommerfeld_energy(double Z, int n, int kappa) {
  check_bound_quantum_numbers(Z, n, kappa);
  const double za = Z * alpha;
  const double gamma = std::sqrt(double(kappa) * kappa - za * za);
  const double nr = n - std::abs(kappa);
  const double x = za / (nr + gamma);
  return 1.0 / std::sqrt(1.0 + x * x);
}

RadialOrbital analytic_bound_state(double Z, int n, int kappa,
                                   const RadialGrid &grid) {
  check_bound_quantum_numbers(Z, n, kappa);
  const double za = Z * alpha;
  const double gamma = std::sqrt(double(kappa) * kappa - za * za);
  const int nr = n - std::abs(kappa);
  const double E = sommerfeld_energy(Z, n, kappa);
  const double lambda = std::sqrt((1.0 - E) * (1.0 + E));
  const double N = std::sqrt(double(nr) * nr + 2.0 * nr * gamma +
                             double(kappa) * kappa);
  const double b = 2.0 * gamma + 1.0;

  // R(r) normalised to int (R_g^2 + R_f^2) r^2 dr = 1
  const double log_norm =
      1.5 * std::log(2.0 * lambda) - std::lgamma(b) +
      0.5 * (std::lgamma(2.0 * gamma + nr + 1.0) -
             std::log(4.0 * N * (N - kappa)) - std::lgamma(nr + 1.0));
  const double cg = std::sqrt(1.0 + E), cf = -std::sqrt(1.0 - E);

  RadialOrbital orb;
  orb.kappa = kappa;
  orb.n = n;
  orb.energy = E;
  orb.g.resize(grid.size());
  orb.f.resize(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double r = grid.r(i);
    const double rho = 2.0 * lambda * r;
    const double F0 = hyp1f1_poly(nr, b, rho);
    const double F1 = nr > 0 ? hyp1f1_poly(nr - 1, b, rho) : 0.0;
    // r * rho^(gamma-1) = rho^gamma / (2 lambda)
    const double common = std::exp(log_norm + gamma * std::log(rho) -
                                   0.5 * rho) /
                          (2.0 * lambda);
    orb.g[i] = cg * common * ((N - kappa) * F0 - nr * F1);
    orb.f[i] = cf * common * ((N - kappa) * F0 + nr * F1);
  }
  return orb;
}

//==============================================================================
std::string BasisParams::fingerprint() const {
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "bspline-dkb:N=%d,k=%d,rmax=%.6g,rfirst=%.6g,h=%.6g,ppi=%d,"
                "nucleus=%s,Rnuc=%.6g",
                n_splines, order, r_max, r_first, h_scale,
                points_per_interval > 0 ? points_per_interval : order + 6,
                nucleus == NucleusModel::point ? "point" : "sphere",
                nuclear_radius_fm);
  return buf;
}

namespace {

std::vector<double> make_breakpoints(double Z, const BasisParams &p) {
  if (p.order < 3)
    throw std::invalid_argument("BasisParams: spline order must be >= 3");
  if (p.n_splines < p.order + 1)
    throw std::invalid_argument("BasisParams: need n_splines >= order + 1");
  const double unit = 1.0 / (Z * alpha); // a0/Z in compton units
  const int n_int = p.n_splines - p.order + 1;
  return log_linear_breakpoints(n_int, p.r_first * unit, p.r_max * unit,
                                p.h_scale * unit);
}

} // namespace

DiracBasis::DiracBasis(double Z, const BasisParams &params)
    : m_Z(Z), m_params(params),
      m_splines(make_breakpoints(Z, params), params.order),
      m_grid(m_splines.breakpoints(), params.points_per_interval > 0
                                          ? params.points_per_interval
                                          : params.order + 6) {
  if (!(Z > 0.0))
    throw PhysicsDomainError("nuclear charge must be positive");
  m_V.resize(m_grid.size());
  if (params.nucleus == NucleusModel::point) {
    if (Z * alpha >= 1.0)
      throw PhysicsDomainError("point nucleus requires Z alpha < 1");
    for (std::size_t i = 0; i < m_grid.size(); ++i)
      m_V[i] = -Z * alpha / m_grid.r(i);
  } else {
    const double R_fm = params.nuclear_radius_fm > 0.0
                            ? params.nuclear_radius_fm
                            : 1.2 * std::cbrt(2.5 * Z);
    m_Rnuc = R_fm / constants::compton_fm;
    for (std::size_t i = 0; i < m_grid.size(); ++i) {
      const double r = m_grid.r(i);
      m_V[i] = r >= m_Rnuc ? -Z * alpha / r
                           : -Z * alpha / (2.0 * m_Rnuc) *
                                 (3.0 - r * r / (m_Rnuc * m_Rnuc));
    }
  }
}

//==============================================================================
const RadialOrbital &KappaSpectrum::bound(int n) const {
  for (int i = n_negative; i < n_negative + n_bound; ++i)
    if (orbitals[static_cast<std::size_t>(i)].n == n)
      return orbitals[static_cast<std::size_t>(i)];
  throw std::out_of_range("no bound state " + orbital_label(n, kappa) +
                          " in spectrum");
}

namespace {

// Dual-kinetic-balance basis functions at one grid node
struct NodeBasis {
  std::vector<int> index; // basis-function index
  std::vector<double> g, dg, f, df;
};

} // namespace

KappaSpectrum build_spectrum(const DiracBasis &basis, int kappa) {
  if (kappa == 0)
    throw std::invalid_argument("build_spectrum: kappa must be nonzero");
  const auto &sp = basis.splines();
  const auto &grid = basis.grid();
  const auto &V = basis.potential();
  const int k = sp.order();
  // B_0 is dropped (nonzero at the origin), and B_{N-2}, B_{N-1} at the box
  // edge. B_1 ~ r is kept only where its kinetic-balance partner stays
  // regular: as type 1 for kappa = -1 and as type 2 for kappa = +1.
  const int last = sp.size() - 3;
  const int first1 = kappa == -1 ? 1 : 2;
  const int first2 = kappa == +1 ? 1 : 2;
  const int M1 = last - first1 + 1;
  const int dim = M1 + last - first2 + 1;

  std::vector<NodeBasis> nodes(grid.size());
  std::vector<std::vector<double>> bv;
  for (std::size_t q = 0; q < grid.size(); ++q) {
    const double r = grid.r(q);
    const int mu = sp.nonzero(r, 2, bv);
    auto &nb = nodes[q];
    for (int s = 0; s < k; ++s) {
      const int i = mu - k + 1 + s;
      if (i > last)
        continue;
      const double B = bv[0][static_cast<std::size_t>(s)];
      const double dB = bv[1][static_cast<std::size_t>(s)];
      const double d2B = bv[2][static_cast<std::size_t>(s)];
      const double kr = kappa / r;
      // type 1: (B, (B' + kappa B / r)/2)
      if (i >= first1) {
        nb.index.push_back(i - first1);
        nb.g.push_back(B);
        nb.dg.push_back(dB);
        nb.f.push_back(0.5 * (dB + kr * B));
        nb.df.push_back(0.5 * (d2B + kr * dB - kr * B / r));
      }
      // type 2: ((B' - kappa B / r)/2, B)
      if (i >= first2) {
        nb.index.push_back(M1 + i - first2);
        nb.g.push_back(0.5 * (dB - kr * B));
        nb.dg.push_back(0.5 * (d2B - kr * dB + kr * B / r));
        nb.f.push_back(B);
        nb.df.push_back(dB);
      }
    }
  }

  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(dim, dim);
  Eigen::MatrixXd S = Eigen::MatrixXd::Zero(dim, dim);
  for (std::size_t q = 0; q < grid.size(); ++q) {
    const auto &nb = nodes[q];
    const double w = grid.w(q), r = grid.r(q), v = V[q];
    const std::size_t m = nb.index.size();
    for (std::size_t a = 0; a < m; ++a) {
      for (std::size_t b = 0; b < m; ++b) {
        const double h =
            nb.g[a] * (v + 1.0) * nb.g[b] + nb.f[a] * (v - 1.0) * nb.f[b] +
            kappa / r * (nb.g[a] * nb.f[b] + nb.f[a] * nb.g[b]) +
            0.5 * (nb.f[a] * nb.dg[b] - nb.df[a] * nb.g[b] +
                   nb.dg[a] * nb.f[b] - nb.g[a] * nb.df[b]);
        H(nb.index[a], nb.index[b]) += w * h;
        S(nb.index[a], nb.index[b]) +=
            w * (nb.g[a] * nb.g[b] + nb.f[a] * nb.f[b]);
      }
    }
  }

  // unit-diagonal scaling; the raw kinetic-balance components span many
  // orders of magnitude near the origin
  Eigen::VectorXd d(dim);
  for (int a = 0; a < dim; ++a) {
    if (!(S(a, a) > 0.0))
      throw SpectrumError("degenerate basis function for kappa=" +
                          std::to_string(kappa));
    d(a) = 1.0 / std::sqrt(S(a, a));
  }
  S = d.asDiagonal() * S * d.asDiagonal();
  H = d.asDiagonal() * H * d.asDiagonal();

  Eigen::LLT<Eigen::MatrixXd> llt(S);
  if (llt.info() != Eigen::Success)
    throw SpectrumError("overlap matrix is not positive definite for kappa=" +
                        std::to_string(kappa) + " (check knot sequence)");
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> solver(
      H, S, Eigen::ComputeEigenvectors | Eigen::Ax_lBx);
  if (solver.info() != Eigen::Success)
    throw SpectrumError("generalized eigensolver failed for kappa=" +
                        std::to_string(kappa));

  const Eigen::VectorXd &E = solver.eigenvalues();
  const Eigen::MatrixXd C = d.asDiagonal() * solver.eigenvectors();

  KappaSpectrum spec;
  spec.kappa = kappa;
  spec.orbitals.resize(static_cast<std::size_t>(dim));
  const int n_min = kappa < 0 ? -kappa : kappa + 1;
  int bound_count = 0;
  for (int s = 0; s < dim; ++s) {
    auto &orb = spec.orbitals[static_cast<std::size_t>(s)];
    orb.kappa = kappa;
    orb.energy = E(s);
    orb.g.assign(grid.size(), 0.0);
    orb.f.assign(grid.size(), 0.0);
    for (std::size_t q = 0; q < grid.size(); ++q) {
      const auto &nb = nodes[q];
      double g = 0.0, f = 0.0;
      for (std::size_t a = 0; a < nb.index.size(); ++a) {
        const double c = C(nb.index[a], s);
        g += c * nb.g[a];
        f += c * nb.f[a];
      }
      orb.g[q] = g;
      orb.f[q] = f;
    }
    // sign convention: large component positive close to the origin
    double gmax = 0.0;
    for (double v : orb.g)
      gmax = std::max(gmax, std::abs(v));
    for (double v : orb.g) {
      if (std::abs(v) > 1.0e-8 * gmax) {
        if (v < 0.0) {
          for (auto &x : orb.g)
            x = -x;
          for (auto &x : orb.f)
            x = -x;
        }
        break;
      }
    }
    if (orb.energy < -1.0) {
      ++spec.n_negative;
    } else if (orb.energy < 1.0) {
      double gg = 0.0, ff = 0.0;
      for (std::size_t q = 0; q < grid.size(); ++q) {
        gg += grid.w(q) * orb.g[q] * orb.g[q];
        ff += grid.w(q) * orb.f[q] * orb.f[q];
      }
      // small-component dominated gap states are basis artefacts; they stay
      // in the spectrum (completeness) but get no principal number
      if (gg > ff)
        orb.n = n_min + bound_count++;
      ++spec.n_bound;
    } else {
      ++spec.n_positive;
    }
  }
  return spec;
}

int spurious_gap_states(const KappaSpectrum &spec) {
  int count = 0;
  for (int i = spec.n_negative; i < spec.n_negative + spec.n_bound; ++i)
    if (spec.orbitals[static_cast<std::size_t>(i)].n == 0)
      ++count;
  return count;
}

//==============================================================================
bool SpectrumReport::passed(const Thresholds &t) const {
  if (orthonormality_residual > t.orthonormality)
    return false;
  if (spurious_states > 0)
    return false;
  if (sommerfeld_checked && (bound_energy_error > t.bound_energy ||
                             completeness_defect > t.completeness))
    return false;
  return true;
}

std::string SpectrumReport::summary() const {
  char buf[512];
  std::snprintf(
      buf, sizeof buf,
      "kappa=%+d states=%d (neg=%d gap=%d pos=%d) orthonorm=%.2e "
      "E_err=%.2e completeness=%.2e (n_ref=%d) spurious=%d%s",
      kappa, n_states, n_negative, n_bound, n_positive,
      orthonormality_residual, bound_energy_error, completeness_defect,
      n_compared, spurious_states, sommerfeld_checked ? "" : " (no analytic reference)");
  return buf;
}

SpectrumReport spectrum_report(const KappaSpectrum &spec,
                               const DiracBasis &basis, int n_check) {
  const auto &grid = basis.grid();
  SpectrumReport rep;
  rep.kappa = spec.kappa;
  rep.n_states = static_cast<int>(spec.orbitals.size());
  rep.n_negative = spec.n_negative;
  rep.n_bound = spec.n_bound;
  rep.n_positive = spec.n_positive;

  const std::size_t n = spec.orbitals.size();
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a; b < n; ++b) {
      const double o = overlap(spec.orbitals[a], spec.orbitals[b], grid);
      rep.orthonormality_residual = std::max(
          rep.orthonormality_residual, std::abs(o - (a == b ? 1.0 : 0.0)));
    }

  const double Z = basis.Z();
  const bool point = basis.params().nucleus == NucleusModel::point;
  rep.sommerfeld_checked = point && Z * alpha < 1.0;
  if (!rep.sommerfeld_checked) {
    rep.spurious_states = spurious_gap_states(spec);
    return rep;
  }

  rep.spurious_states = spurious_gap_states(spec);
  const int n_min = spec.kappa < 0 ? -spec.kappa : spec.kappa + 1;
  // only states well inside the box (4 n^2 a0/Z <= r_max) have a box-
  // independent reference
  int n_inside = 0;
  while (4.0 * (n_min + n_inside) * (n_min + n_inside) <=
         basis.params().r_max)
    ++n_inside;
  const int n_cmp = std::min(n_check, n_inside);
  rep.n_compared = n_cmp;
  if (spec.n_bound - rep.spurious_states < n_cmp) {
    rep.bound_energy_error = 1.0;
    rep.completeness_defect = 1.0;
    return rep;
  }
  for (int b = 0; b < n_cmp; ++b) {
    const int nq = n_min + b;
    const auto &orb = spec.bound(nq);
    const double Es = sommerfeld_energy(Z, nq, spec.kappa);
    rep.bound_energy_error =
        std::max(rep.bound_energy_error, std::abs(orb.energy - Es) / Es);
    const auto exact = analytic_bound_state(Z, nq, spec.kappa, grid);
    double sum = 0.0;
    for (const auto &nu : spec.orbitals) {
      const double o = overlap(exact, nu, grid);
      sum += o * o;
    }
    rep.completeness_defect =
        std::max(rep.completeness_defect, std::abs(1.0 - sum));
  }
  return rep;
}

//==============================================================================
using nlohmann::json;

std::string spectrum_to_json(const KappaSpectrum &spec,
                             const DiracBasis &basis) {
  json j;
  j["format"] = "twogamma-spectrum";
  j["version"] = 1;
  j["Z"] = basis.Z();
  j["kappa"] = spec.kappa;
  j["basis"] = basis.params().fingerprint();
  j["grid"] = {{"r", basis.grid().r()}, {"w", basis.grid().w()}};
  j["counts"] = {{"negative", spec.n_negative},
                 {"bound", spec.n_bound},
                 {"positive", spec.n_positive}};
  json orbs = json::array();
  for (const auto &o : spec.orbitals)
    orbs.push_back(
        {{"n", o.n}, {"energy", o.energy}, {"g", o.g}, {"f", o.f}});
  j["orbitals"] = std::move(orbs);
  return j.dump();
}

KappaSpectrum spectrum_from_json(const std::string &text,
                                 const DiracBasis &basis) {
  const json j = json::parse(text);
  if (j.value("format", "") != "twogamma-spectrum")
    throw std::runtime_error("not a twogamma spectrum file");
  if (j.value("version", 0) != 1)
    throw std::runtime_error("unsupported spectrum file version");
  const auto r = j.at("grid").at("r").get<std::vector<double>>();
  const auto w = j.at("grid").at("w").get<std::vector<double>>();
  if (r != basis.grid().r() || w != basis.grid().w())
    throw std::runtime_error("spectrum file grid does not match basis");
  KappaSpectrum spec;
  spec.kappa = j.at("kappa").get<int>();
  spec.n_negative = j.at("counts").at("negative").get<int>();
  spec.n_bound = j.at("counts").at("bound").get<int>();
  spec.n_positive = j.at("counts").at("positive").get<int>();
  for (const auto &o : j.at("orbitals")) {
    RadialOrbital orb;
    orb.kappa = spec.kappa;
    orb.n = o.at("n").get<int>();
    orb.energy = o.at("energy").get<double>();
    orb.g = o.at("g").get<std::vector<double>>();
    orb.f = o.at("f").get<std::vector<double>>();
    if (orb.g.size() != r.size() || orb.f.size() != r.size())
      throw std::runtime_error("spectrum file: orbital size mismatch");
    spec.orbitals.push_back(std::move(orb));
  }
  return spec;
}

} // namespace twogamma
