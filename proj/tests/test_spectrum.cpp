#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"
#include "twogamma/constants.hpp"
#include "twogamma/spectrum.hpp"
#include <cmath>

using namespace twogamma;

namespace {

// Sommerfeld fine-structure formula, written out independently
double sommerfeld(double Z, int n, int kappa) {
  const double a = Z * constants::alpha;
  const double g = std::sqrt(kappa * kappa - a * a);
  const double nr = n - std::abs(kappa);
  return 1.0 / std::sqrt(1.0 + std::pow(a / (nr + g), 2));
}

} // namespace

TEST_CASE("sommerfeld energies") {
  // 1s binding at U: m c^2 (1 - sqrt(1 - (Z alpha)^2))
  const double a = 92 * constants::alpha;
  const double bind = constants::mc2_keV * (1.0 - std::sqrt(1.0 - a * a));
  CHECK(bind == doctest::Approx(132.28).epsilon(1e-4));
  CHECK(constants::mc2_keV * (1.0 - sommerfeld_energy(92, 1, -1)) ==
        doctest::Approx(bind).epsilon(1e-13));
  for (double Z : {1.0, 54.0, 92.0})
    for (int n = 1; n <= 4; ++n)
      for (int kappa = -n; kappa < n; ++kappa) {
        if (kappa == 0)
          continue;
        CHECK(sommerfeld_energy(Z, n, kappa) ==
              doctest::Approx(sommerfeld(Z, n, kappa)).epsilon(1e-15));
      }
  CHECK_THROWS_AS(sommerfeld_energy(140, 1, -1), PhysicsDomainError);
}

TEST_CASE("bound energies reproduce Sommerfeld for Z = 1, 54, 92") {
  for (int Z : {1, 54, 92}) {
    DiracBasis basis(Z, BasisParams{});
    for (int kappa : {-1, 1, -2}) {
      const auto spec = build_spectrum(basis, kappa);
      const int n0 = kappa < 0 ? -kappa : kappa + 1;
      for (int n = n0; n < n0 + 3 && 4 * n * n <= 60; ++n) {
        const double E = spec.bound(n).energy;
        CHECK(std::abs(E - sommerfeld(Z, n, kappa)) / sommerfeld(Z, n, kappa) <=
              1e-8);
      }
    }
  }
}

TEST_CASE("spectrum structure, normalisation, orthonormality") {
  DiracBasis basis(92, BasisParams{});
  const auto spec = build_spectrum(basis, -1);
  const int N = basis.params().n_splines;
  CHECK(spec.orbitals.size() > static_cast<std::size_t>(2 * N - 10));
  CHECK(spec.orbitals.size() <= static_cast<std::size_t>(2 * N));
  CHECK(spec.n_negative + spec.n_bound + spec.n_positive ==
        static_cast<int>(spec.orbitals.size()));
  CHECK(std::abs(spec.n_negative - static_cast<int>(spec.orbitals.size()) / 2) <= 2);
  for (std::size_t i = 1; i < spec.orbitals.size(); ++i)
    CHECK(spec.orbitals[i].energy > spec.orbitals[i - 1].energy);
  const auto &grid = basis.grid();
  double worst_norm = 0.0, worst_off = 0.0;
  for (std::size_t a = 0; a < spec.orbitals.size(); ++a)
    for (std::size_t b = a; b < spec.orbitals.size(); b += 7) {
      const double o = overlap(spec.orbitals[a], spec.orbitals[b], grid);
      if (a == b)
        worst_norm = std::max(worst_norm, std::abs(o - 1.0));
      else
        worst_off = std::max(worst_off, std::abs(o));
    }
  CHECK(worst_norm <= 1e-10);
  CHECK(worst_off <= 1e-9);
  CHECK(spurious_gap_states(spec) == 0);
  CHECK(spec.bound(1).n == 1);
  CHECK(spec.bound(1).label() == "1s_1/2");
}

TEST_CASE("kappa degeneracy at fixed j") {
  DiracBasis basis(92, BasisParams{});
  const auto s = build_spectrum(basis, -1);
  const auto p = build_spectrum(basis, 1);
  for (int n = 2; n <= 3; ++n)
    CHECK(std::abs(s.bound(n).energy - p.bound(n).energy) / s.bound(n).energy <=
          1e-8);
  const auto p3 = build_spectrum(basis, -2);
  const auto d3 = build_spectrum(basis, 2);
  CHECK(std::abs(p3.bound(3).energy - d3.bound(3).energy) / p3.bound(3).energy <=
        1e-8);
}

TEST_CASE("box independence of the lowest bound energies") {
  BasisParams a, b;
  b.r_max = a.r_max * 1.5;
  b.n_splines = static_cast<int>(a.n_splines * 1.5);
  for (int kappa : {-1, 1}) {
    const auto sa = build_spectrum(DiracBasis(92, a), kappa);
    const auto sb = build_spectrum(DiracBasis(92, b), kappa);
    const int n0 = kappa < 0 ? 1 : 2;
    // states reaching the wall (4 n^2 > r_max) are box-confined by design
    for (int n = n0; n < n0 + 3 && 4 * n * n <= a.r_max; ++n)
      CHECK(std::abs(sa.bound(n).energy - sb.bound(n).energy) /
                sa.bound(n).energy <=
            1e-10);
  }
}

TEST_CASE("completeness of the analytic 1s in the pseudo-spectrum") {
  DiracBasis basis(92, BasisParams{});
  const auto spec = build_spectrum(basis, -1);
  const auto exact = analytic_bound_state(92, 1, -1, basis.grid());
  double s = 0.0;
  for (const auto &nu : spec.orbitals)
    s += std::pow(overlap(exact, nu, basis.grid()), 2);
  CHECK(std::abs(1.0 - s) <= 1e-8);
  CHECK(overlap(exact, exact, basis.grid()) == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("spectrum report: converged, flagged and refinement") {
  DiracBasis basis(92, BasisParams{});
  const auto rep = spectrum_report(build_spectrum(basis, -1), basis);
  CHECK(rep.passed());
  CHECK(rep.n_compared == 3);
  CHECK(rep.summary().find("kappa=-1") != std::string::npos);

  BasisParams coarse;
  coarse.n_splines = 10;
  DiracBasis cb(92, coarse);
  const auto bad = spectrum_report(build_spectrum(cb, -1), cb);
  CHECK_FALSE(bad.passed());
  CHECK(bad.bound_energy_error > 1e-8);

  // completeness defect decreases monotonically under refinement
  double prev = 1e300;
  for (int N : {12, 24, 48}) {
    BasisParams p;
    p.n_splines = N;
    DiracBasis b(92, p);
    const auto r = spectrum_report(build_spectrum(b, -1), b);
    MESSAGE("N_b = " << N << " completeness defect " << r.completeness_defect);
    CHECK(r.completeness_defect < prev);
    prev = r.completeness_defect;
  }
}

TEST_CASE("finite nucleus shifts 1s above the point-nucleus value") {
  BasisParams p;
  p.nucleus = NucleusModel::uniform_sphere;
  DiracBasis basis(92, p);
  CHECK(basis.nuclear_radius() > 0.0);
  const auto spec = build_spectrum(basis, -1);
  const double shift_keV =
      (spec.bound(1).energy - sommerfeld(92, 1, -1)) * constants::mc2_keV;
  // finite-size shift of 1s in U is about 0.2 keV
  CHECK(shift_keV > 0.1);
  CHECK(shift_keV < 0.4);
  CHECK_FALSE(spectrum_report(spec, basis).sommerfeld_checked);
}

TEST_CASE("spectrum JSON round trip") {
  DiracBasis basis(54, BasisParams{});
  const auto spec = build_spectrum(basis, 2);
  const auto text = spectrum_to_json(spec, basis);
  CHECK(text.find("\"version\"") != std::string::npos);
  const auto back = spectrum_from_json(text, basis);
  REQUIRE(back.orbitals.size() == spec.orbitals.size());
  CHECK(back.kappa == 2);
  CHECK(back.n_negative == spec.n_negative);
  for (std::size_t i = 0; i < spec.orbitals.size(); ++i) {
    CHECK(back.orbitals[i].energy == spec.orbitals[i].energy);
    CHECK(back.orbitals[i].n == spec.orbitals[i].n);
    CHECK(back.orbitals[i].g == spec.orbitals[i].g);
    CHECK(back.orbitals[i].f == spec.orbitals[i].f);
  }
  BasisParams other;
  other.n_splines = 40;
  CHECK_THROWS(spectrum_from_json(text, DiracBasis(54, other)));
  CHECK_THROWS(spectrum_from_json("{\"version\": 999}", basis));
}

TEST_CASE("domain errors") {
  CHECK_THROWS_AS(DiracBasis(138, BasisParams{}), PhysicsDomainError);
  CHECK(kappa_of(1, 1) == 1);
  CHECK(kappa_of(1, 3) == -2);
  CHECK(orbital_label(2, 1) == "2p_1/2");
}
