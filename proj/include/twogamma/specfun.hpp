#pragma once
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace twogamma {

//! Spherical Bessel function j_L(x), 0 <= L <= 20, x >= 0.
//! Power series for small x, upward recurrence for x > L, normalised Miller
//! (downward) recurrence otherwise. Throws std::domain_error for x < 0.
double spherical_bessel_j(int L, double x);

//! All j_0(x) ... j_Lmax(x) at once (same algorithm as above).
std::vector<double> spherical_bessel_j_all(int Lmax, double x);

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

//! n-point Gauss-Legendre rule on [a, b]; exact for polynomials of degree
//! <= 2n-1. Throws std::invalid_argument unless n >= 1 and a < b.
QuadratureRule gauss_legendre(int n, double a, double b);

//==============================================================================
//! B-spline basis of order k (polynomial degree k-1) on a clamped knot
//! sequence: the first and last breakpoints are repeated k times.
class SplineBasis {
public:
  //! breakpoints: strictly increasing distinct knot positions, first one is
  //! the left edge (usually 0), last one the box radius.
  SplineBasis(std::vector<double> breakpoints, int order);

  int order() const { return m_k; }
  int size() const { return m_n; }
  double r_min() const { return m_knots.front(); }
  double r_max() const { return m_knots.back(); }
  const std::vector<double> &breakpoints() const { return m_breaks; }
  const std::vector<double> &knots() const { return m_knots; }

  //! Value (derivative_order 0), first or second derivative of B_i at r.
  //! Throws std::out_of_range for bad i or r outside [r_min, r_max].
  double eval(int i, double r, int derivative_order = 0) const;

  //! Index of the knot span [t_mu, t_mu+1) containing r, and the k
  //! non-vanishing splines B_{mu-k+1..mu} there with derivatives up to
  //! order nderiv. out[d][s] = d^d/dr^d B_{mu-k+1+s}(r).
  int nonzero(double r, int nderiv,
              std::vector<std::vector<double>> &out) const;

private:
  int span(double r) const;

  std::vector<double> m_breaks;
  std::vector<double> m_knots;
  int m_k;
  int m_n;
};

//! Convenience wrapper matching the scalar API.
inline double spline_eval(const SplineBasis &basis, int i, double r,
                          int derivative_order = 0) {
  return basis.eval(i, r, derivative_order);
}

//==============================================================================
//! Composite Gauss-Legendre quadrature on the breakpoints of a spline basis.
//! Radii in reduced Compton wavelengths (hbar/mc).
class RadialGrid {
public:
  RadialGrid(const std::vector<double> &breakpoints, int points_per_interval);

  std::size_t size() const { return m_r.size(); }
  const std::vector<double> &r() const { return m_r; }
  const std::vector<double> &w() const { return m_w; }
  double r(std::size_t i) const { return m_r[i]; }
  double w(std::size_t i) const { return m_w[i]; }
  double r_max() const { return m_rmax; }
  int points_per_interval() const { return m_ppi; }
  const std::vector<double> &breakpoints() const { return m_breaks; }

  //! Largest node spacing among nodes with r <= r_cut.
  double max_spacing(double r_cut) const;

  //! sum_i w_i f_i
  double integrate(std::span<const double> f) const;

  bool same_as(const RadialGrid &other) const {
    return m_r == other.m_r && m_w == other.m_w;
  }

private:
  std::vector<double> m_breaks;
  std::vector<double> m_r;
  std::vector<double> m_w;
  double m_rmax;
  int m_ppi;
};

//! Knot layout: breakpoints 0 = t_0 < t_1 < ... < t_n = r_max, uniformly
//! spaced in u(r) = ln(r / r_first) + r / h, i.e. exponential near the origin
//! and linear (spacing ~h * du) at large r.
std::vector<double> log_linear_breakpoints(int n_intervals, double r_first,
                                           double r_max, double h_scale);

} // namespace twogamma
