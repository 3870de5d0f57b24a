#pragma once
// Independent reference calculations used by the tests. None of these call
// into the library's radial solvers, quadrature or Bessel routines.
#include <Eigen/Dense>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/laguerre.hpp>
#include <cmath>
#include <limits>
#include <vector>

namespace oracle {

inline constexpr double alpha = 1.0 / 137.035999084;

// M(-n, b, x) for integer n >= 0 (terminating Kummer series)
inline double kummer_poly(int n, double b, double x) {
  double term = 1.0, sum = 1.0;
  for (int s = 0; s < n; ++s) {
    term *= (s - n) * x / ((b + s) * (s + 1));
    sum += term;
  }
  return sum;
}

//! Point-nucleus Dirac-Coulomb bound state (closed form in confluent
//! hypergeometric polynomials), normalised by adaptive Gauss-Kronrod.
struct DiracCoulomb {
  double Z;
  int n, kappa;
  double E{0}, lam{0}, gam{0}, Np{0}, C{1};
  int nr{0};

  DiracCoulomb(double Z_, int n_, int kappa_) : Z(Z_), n(n_), kappa(kappa_) {
    const double a = Z * alpha;
    gam = std::sqrt(kappa * kappa - a * a);
    nr = n - std::abs(kappa);
    E = 1.0 / std::sqrt(1.0 + std::pow(a / (nr + gam), 2));
    lam = std::sqrt(1.0 - E * E);
    Np = std::sqrt(nr * nr + 2.0 * nr * gam + kappa * kappa);
    using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
    const double norm = GK::integrate(
        [&](double r) {
          const double gg = g(r), ff = f(r);
          return gg * gg + ff * ff;
        },
        0.0, std::numeric_limits<double>::infinity(), 15, 1e-14);
    C = 1.0 / std::sqrt(norm);
  }
  double bracket(double x, int sign) const {
    const double m0 = kummer_poly(nr, 2 * gam + 1, x);
    const double m1 = nr > 0 ? kummer_poly(nr - 1, 2 * gam + 1, x) : 0.0;
    return (Np - kappa) * m0 + sign * nr * m1;
  }
  double g(double r) const {
    const double x = 2 * lam * r;
    return C * std::sqrt(1 + E) * std::pow(x, gam) * std::exp(-x / 2) *
           bracket(x, -1);
  }
  double f(double r) const {
    const double x = 2 * lam * r;
    return -C * std::sqrt(1 - E) * std::pow(x, gam) * std::exp(-x / 2) *
           bracket(x, +1);
  }
};

//==============================================================================
//! Nonrelativistic 2s -> 1s two-photon (2E1) rate of hydrogen-like ions with
//! Z = 1, length gauge, in s^-1. The p-wave intermediate sum runs over a
//! Laguerre (Sturmian) basis, diagonalised with Eigen; 1s and 2s are the
//! analytic Coulomb functions. Atomic units internally.
inline double nr_two_photon_rate_2s(int n_basis = 40, int n_y = 60) {
  const double au_rate = 4.1341373335e16; // s^-1
  const int l = 1;
  const double lam = 1.0;
  // composite Gauss-Legendre grid on [0, 300]
  std::vector<double> r, w;
  {
    boost::math::quadrature::gauss<double, 20> q;
    const auto &x = q.abscissa();
    const auto &wt = q.weights();
    std::vector<double> edges{0.0};
    for (int i = 0; i < 200; ++i)
      edges.push_back(1e-3 * std::pow(300.0 / 1e-3, i / 199.0));
    for (std::size_t e = 0; e + 1 < edges.size(); ++e) {
      const double a = edges[e], b = edges[e + 1];
      const double c = 0.5 * (a + b), h = 0.5 * (b - a);
      for (std::size_t i = 0; i < x.size(); ++i) {
        const double wi = h * wt[i];
        if (x[i] == 0.0) {
          r.push_back(c);
          w.push_back(wi);
        } else {
          r.push_back(c - h * x[i]);
          w.push_back(wi);
          r.push_back(c + h * x[i]);
          w.push_back(wi);
        }
      }
    }
  }
  const std::size_t M = r.size();
  Eigen::MatrixXd B(n_basis, M), dB(n_basis, M);
  for (int i = 0; i < n_basis; ++i)
    for (std::size_t m = 0; m < M; ++m) {
      const double x = lam * r[m];
      const double L = boost::math::laguerre(i, 2 * l + 1, x);
      const double dL =
          i > 0 ? -boost::math::laguerre(i - 1, 2 * l + 2, x) : 0.0;
      const double pre = std::pow(x, l + 1) * std::exp(-x / 2);
      B(i, m) = pre * L;
      // d/dr of x^(l+1) e^(-x/2) L(x)
      dB(i, m) = lam * (pre * ((l + 1) / x - 0.5) * L + pre * dL);
    }
  Eigen::VectorXd W(M), Vc(M);
  for (std::size_t m = 0; m < M; ++m) {
    W(m) = w[m];
    Vc(m) = w[m] * (l * (l + 1) / (2 * r[m] * r[m]) - 1.0 / r[m]);
  }
  const Eigen::MatrixXd S = B * W.asDiagonal() * B.transpose();
  const Eigen::MatrixXd H = 0.5 * dB * W.asDiagonal() * dB.transpose() +
                            B * Vc.asDiagonal() * B.transpose();
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(H, S);
  const Eigen::VectorXd En = es.eigenvalues();
  const Eigen::MatrixXd P = es.eigenvectors().transpose() * B;
  Eigen::VectorXd d1(n_basis), d2(n_basis);
  for (int k = 0; k < n_basis; ++k) {
    double s1 = 0, s2 = 0;
    for (std::size_t m = 0; m < M; ++m) {
      const double p1s = 2 * r[m] * std::exp(-r[m]);
      const double p2s =
          r[m] * (1 - r[m] / 2) * std::exp(-r[m] / 2) / std::sqrt(2.0);
      s1 += w[m] * r[m] * p1s * P(k, m);
      s2 += w[m] * r[m] * p2s * P(k, m);
    }
    d1(k) = s1;
    d2(k) = s2;
  }
  const double E1 = -0.5, E2 = -0.125, dE = E2 - E1;
  boost::math::quadrature::gauss<double, 30> qy;
  double total = 0;
  auto spectral = [&](double y) {
    const double w1 = y * dE, w2 = dE - w1;
    double m = 0;
    for (int k = 0; k < n_basis; ++k)
      m += d1(k) * d2(k) * (1 / (En(k) - E2 + w1) + 1 / (En(k) - E2 + w2));
    const double a6 = std::pow(alpha, 6);
    return dE * (8 * a6 / (27 * M_PI)) * std::pow(w1 * w2, 3) * m * m;
  };
  (void)n_y;
  total = qy.integrate(spectral, 0.0, 1.0);
  return 0.5 * total * au_rate;
}

} // namespace oracle
