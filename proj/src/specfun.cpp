#include "twogamma/specfun.hpp"
#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace twogamma {

namespace {

// x^L/(2L+1)!! * sum_k (-x^2/2)^k / (k! (2L+3)(2L+5)...(2L+2k+1))
double bessel_series(int L, double x) {
  double lead = 1.0;
  for (int i = 1; i <= L; ++i)
    lead *= x / (2.0 * i + 1.0);
  const double z = -0.5 * x * x;
  double term = 1.0, sum = 1.0;
  for (int k = 1; k < 200; ++k) {
    term *= z / (k * (2.0 * L + 2.0 * k + 1.0));
    sum += term;
    if (std::abs(term) < 1.0e-17 * std::abs(sum))
      break;
  }
  return lead * sum;
}

} // namespace

std::vector<double> spherical_bessel_j_all(int Lmax, double x) {
  if (x < 0.0 || std::isnan(x))
    throw std::domain_error("spherical_bessel_j: negative argument");
  if (Lmax < 0)
    throw std::domain_error("spherical_bessel_j: negative order");
  std::vector<double> j(static_cast<std::size_t>(Lmax) + 1);

  if (x < 0.5) {
    for (int l = 0; l <= Lmax; ++l)
      j[static_cast<std::size_t>(l)] = bessel_series(l, x);
    return j;
  }

  const double s = std::sin(x), c = std::cos(x);
  if (x > Lmax) {
    // upward recurrence is stable while l < x
    j[0] = s / x;
    if (Lmax >= 1)
      j[1] = s / (x * x) - c / x;
    for (int l = 1; l < Lmax; ++l)
      j[static_cast<std::size_t>(l) + 1] =
          (2.0 * l + 1.0) / x * j[static_cast<std::size_t>(l)] -
          j[static_cast<std::size_t>(l) - 1];
    return j;
  }

  // Miller: start well above max(L, x) and normalise with
  // sum_l (2l+1) j_l^2 = 1.
  const int start = Lmax + 20 + static_cast<int>(x);
  double jp1 = 0.0, jl = 1.0;
  double norm = 0.0;
  for (int l = start; l >= 0; --l) {
    if (l <= Lmax)
      j[static_cast<std::size_t>(l)] = jl;
    norm += (2.0 * l + 1.0) * jl * jl;
    const double jm1 = (2.0 * l + 1.0) / x * jl - jp1;
    jp1 = jl;
    jl = jm1;
    if (std::abs(jl) > 1.0e100) { // rescale
      for (int i = std::max(l - 1, 0); i <= Lmax; ++i)
        j[static_cast<std::size_t>(i)] *= 1.0e-100;
      jp1 *= 1.0e-100;
      jl *= 1.0e-100;
      norm *= 1.0e-200;
    }
  }
  const double scale = 1.0 / std::sqrt(norm);
  for (auto &v : j)
    v *= scale;
  // fix the overall sign against whichever of j_0, j_1 is larger
  const double j0 = s / x, j1 = s / (x * x) - c / x;
  const bool use_j0 = std::abs(j0) >= std::abs(j1) || Lmax == 0;
  const double ref = use_j0 ? j0 : j1;
  const double got = use_j0 ? j[0] : j[1];
  if ((ref < 0.0) != (got < 0.0))
    for (auto &v : j)
      v = -v;
  return j;
}

double spherical_bessel_j(int L, double x) {
  if (L < 0 || L > 20)
    throw std::domain_error("spherical_bessel_j: order outside [0, 20]");
  return spherical_bessel_j_all(L, x).back();
}

//==============================================================================
QuadratureRule gauss_legendre(int n, double a, double b) {
  if (n < 1)
    throw std::invalid_argument("gauss_legendre: n must be >= 1");
  if (!(a < b))
    throw std::invalid_argument("gauss_legendre: need a < b");
  QuadratureRule q;
  q.nodes.resize(static_cast<std::size_t>(n));
  q.weights.resize(static_cast<std::size_t>(n));
  const double xm = 0.5 * (b + a), xl = 0.5 * (b - a);
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    // Tricomi initial guess, then Newton on P_n
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int k = 1; k <= n; ++k) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p2) / k;
      }
      dp = n * (z * p0 - p1) / (z * z - 1.0);
      const double dz = p0 / dp;
      z -= dz;
      if (std::abs(dz) < 1.0e-16)
        break;
    }
    if (n == 1) {
      z = 0.0;
      dp = 1.0;
    }
    const double w = 2.0 / ((1.0 - z * z) * dp * dp);
    const auto lo = static_cast<std::size_t>(i);
    const auto hi = static_cast<std::size_t>(n - 1 - i);
    q.nodes[lo] = xm - xl * z;
    q.nodes[hi] = xm + xl * z;
    q.weights[lo] = xl * w;
    q.weights[hi] = xl * w;
  }
  if (n % 2 == 1)
    q.nodes[static_cast<std::size_t>(n / 2)] = xm;
  return q;
}

//==============================================================================
SplineBasis::SplineBasis(std::vector<double> breakpoints, int order)
    : m_breaks(std::move(breakpoints)), m_k(order) {
  if (m_k < 2)
    throw std::invalid_argument("SplineBasis: order must be >= 2");
  if (m_breaks.size() < 2)
    throw std::invalid_argument("SplineBasis: need at least two breakpoints");
  for (std::size_t i = 1; i < m_breaks.size(); ++i)
    if (!(m_breaks[i] > m_breaks[i - 1]))
      throw std::invalid_argument(
          "SplineBasis: breakpoints must be strictly increasing");
  m_knots.assign(static_cast<std::size_t>(m_k - 1), m_breaks.front());
  m_knots.insert(m_knots.end(), m_breaks.begin(), m_breaks.end());
  m_knots.insert(m_knots.end(), static_cast<std::size_t>(m_k - 1),
                 m_breaks.back());
  m_n = static_cast<int>(m_knots.size()) - m_k;
}

int SplineBasis::span(double r) const {
  if (r < r_min() || r > r_max())
    throw std::out_of_range("SplineBasis: r outside knot span");
  // last span [t_{n-1}, t_n] is closed on the right
  if (r >= r_max())
    return m_n - 1;
  const auto it = std::upper_bound(m_knots.begin(), m_knots.end(), r);
  return static_cast<int>(it - m_knots.begin()) - 1;
}

int SplineBasis::nonzero(double r, int nderiv,
                         std::vector<std::vector<double>> &out) const {
  // de Boor / Cox recursion with derivatives (de Boor, "A Practical Guide to
  // Splines", BSPLVD).
  const int k = m_k;
  const int mu = span(r);
  const auto &t = m_knots;
  nderiv = std::min(nderiv, k - 1);

  // ndu[j][r]: basis of increasing order (upper triangle), knot differences
  // (lower triangle)
  std::vector<std::vector<double>> ndu(static_cast<std::size_t>(k),
                                       std::vector<double>(k));
  std::vector<double> left(static_cast<std::size_t>(k)),
      right(static_cast<std::size_t>(k));
  ndu[0][0] = 1.0;
  for (int j = 1; j < k; ++j) {
    left[j] = r - t[static_cast<std::size_t>(mu + 1 - j)];
    right[j] = t[static_cast<std::size_t>(mu + j)] - r;
    double saved = 0.0;
    for (int s = 0; s < j; ++s) {
      ndu[j][s] = right[s + 1] + left[j - s];
      const double temp = ndu[s][j - 1] / ndu[j][s];
      ndu[s][j] = saved + right[s + 1] * temp;
      saved = left[j - s] * temp;
    }
    ndu[j][j] = saved;
  }

  out.assign(static_cast<std::size_t>(nderiv) + 1,
             std::vector<double>(static_cast<std::size_t>(k), 0.0));
  for (int j = 0; j < k; ++j)
    out[0][j] = ndu[j][k - 1];

  std::vector<std::vector<double>> a(2, std::vector<double>(k));
  const int p = k - 1;
  for (int s = 0; s <= p; ++s) {
    int s1 = 0, s2 = 1;
    a[0][0] = 1.0;
    for (int d = 1; d <= nderiv; ++d) {
      double dd = 0.0;
      const int rk = s - d, pk = p - d;
      if (s >= d) {
        a[s2][0] = a[s1][0] / ndu[pk + 1][rk];
        dd = a[s2][0] * ndu[rk][pk];
      }
      const int j1 = (rk >= -1) ? 1 : -rk;
      const int j2 = (s - 1 <= pk) ? d - 1 : p - s;
      for (int j = j1; j <= j2; ++j) {
        a[s2][j] = (a[s1][j] - a[s1][j - 1]) / ndu[pk + 1][rk + j];
        dd += a[s2][j] * ndu[rk + j][pk];
      }
      if (s <= pk) {
        a[s2][d] = -a[s1][d - 1] / ndu[pk + 1][s];
        dd += a[s2][d] * ndu[s][pk];
      }
      out[static_cast<std::size_t>(d)][static_cast<std::size_t>(s)] = dd;
      std::swap(s1, s2);
    }
  }
  double fac = p;
  for (int d = 1; d <= nderiv; ++d) {
    for (auto &v : out[static_cast<std::size_t>(d)])
      v *= fac;
    fac *= (p - d);
  }
  return mu;
}

double SplineBasis::eval(int i, double r, int derivative_order) const {
  if (i < 0 || i >= m_n)
    throw std::out_of_range("SplineBasis: index " + std::to_string(i) +
                            " out of range");
  if (derivative_order < 0 || derivative_order > 2)
    throw std::out_of_range("SplineBasis: derivative order must be 0, 1, 2");
  if (derivative_order >= m_k)
    return 0.0;
  std::vector<std::vector<double>> vals;
  const int mu = nonzero(r, derivative_order, vals);
  const int first = mu - m_k + 1;
  if (i < first || i > mu)
    return 0.0;
  return vals[static_cast<std::size_t>(derivative_order)]
             [static_cast<std::size_t>(i - first)];
}

//==============================================================================
RadialGrid::RadialGrid(const std::vector<double> &breakpoints,
                       int points_per_interval)
    : m_breaks(breakpoints), m_rmax(breakpoints.back()),
      m_ppi(points_per_interval) {
  if (breakpoints.size() < 2)
    throw std::invalid_argument("RadialGrid: need at least two breakpoints");
  for (std::size_t i = 0; i + 1 < breakpoints.size(); ++i) {
    const auto q =
        gauss_legendre(points_per_interval, breakpoints[i], breakpoints[i + 1]);
    m_r.insert(m_r.end(), q.nodes.begin(), q.nodes.end());
    m_w.insert(m_w.end(), q.weights.begin(), q.weights.end());
  }
}

double RadialGrid::max_spacing(double r_cut) const {
  double h = 0.0;
  for (std::size_t i = 1; i < m_r.size() && m_r[i - 1] <= r_cut; ++i)
    h = std::max(h, m_r[i] - m_r[i - 1]);
  return h;
}

double RadialGrid::integrate(std::span<const double> f) const {
  if (f.size() != m_w.size())
    throw std::invalid_argument("RadialGrid::integrate: size mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i)
    s += m_w[i] * f[i];
  return s;
}

//==============================================================================
std::vector<double> log_linear_breakpoints(int n_intervals, double r_first,
                                           double r_max, double h_scale) {
  if (n_intervals < 2 || !(r_first > 0.0) || !(r_max > r_first) ||
      !(h_scale > 0.0))
    throw std::invalid_argument("log_linear_breakpoints: bad parameters");
  auto u = [&](double r) { return std::log(r / r_first) + r / h_scale; };
  const double u0 = u(r_first), u1 = u(r_max);
  std::vector<double> t{0.0};
  double r = r_first;
  for (int i = 0; i < n_intervals; ++i) {
    const double target = u0 + (u1 - u0) * i / (n_intervals - 1.0);
    // Newton on the monotone map u(r) = target
    for (int it = 0; it < 100; ++it) {
      const double f = u(r) - target;
      const double df = 1.0 / r + 1.0 / h_scale;
      double rn = r - f / df;
      if (rn <= 0.0)
        rn = 0.5 * r;
      const bool done = std::abs(rn - r) < 1.0e-15 * r;
      r = rn;
      if (done)
        break;
    }
    t.push_back(i == n_intervals - 1 ? r_max : r);
  }
  return t;
}

} // namespace twogamma
