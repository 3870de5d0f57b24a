#pragma once
#include <cmath>
#include <cstdlib>

//! Angular-momentum algebra. All angular momenta are passed as *doubled*
//! integers (twice_j, twice_m) so that half-integers are exact.
namespace twogamma::angular {

//! An angular momentum j with (optional) projection m, stored doubled.
struct AngMom {
  int twice_j{0};
  int twice_m{0};

  static constexpr AngMom from_half(int twice_j, int twice_m = 0) {
    return {twice_j, twice_m};
  }
  static AngMom from_real(double j, double m = 0.0) {
    return {static_cast<int>(std::lround(2.0 * j)),
            static_cast<int>(std::lround(2.0 * m))};
  }

  constexpr bool valid() const {
    return twice_j >= 0 && std::abs(twice_m) <= twice_j &&
           (twice_j - twice_m) % 2 == 0;
  }
  double j() const { return 0.5 * twice_j; }
  double m() const { return 0.5 * twice_m; }
  int multiplicity() const { return twice_j + 1; }
};

//! (-1)^(x/2) for a doubled exponent x; x must be even
constexpr int neg1pow_2(int twice_x) {
  return ((twice_x / 2) % 2 == 0) ? 1 : -1;
}
//! (-1)^x
constexpr int neg1pow(int x) { return (x % 2 == 0) ? 1 : -1; }

//! Triangle rule |a-b| <= c <= a+b with a+b+c integer (doubled inputs)
constexpr bool triangle(int ta, int tb, int tc) {
  if (ta < 0 || tb < 0 || tc < 0)
    return false;
  if ((ta + tb + tc) % 2 != 0)
    return false;
  return tc >= std::abs(ta - tb) && tc <= ta + tb;
}

//! Wigner 3j symbol (j1 j2 j3; m1 m2 m3), doubled arguments.
//! Returns exactly 0 for forbidden couplings.
double threej_2(int tj1, int tj2, int tj3, int tm1, int tm2, int tm3);

//! Clebsch-Gordan coefficient <j1 m1 j2 m2 | J M>, doubled arguments.
double cg_2(int tj1, int tm1, int tj2, int tm2, int tJ, int tM);

//! Wigner 6j symbol {j1 j2 j3; j4 j5 j6}, doubled arguments.
double sixj_2(int tj1, int tj2, int tj3, int tj4, int tj5, int tj6);

//! Reduced rotation matrix d^j_{m' m}(theta) = <j m'|exp(-i theta J_y)|j m>
//! (doubled arguments). d^j_{m'm}(0) = delta_{m'm}.
double small_d_2(int tj, int tm_prime, int tm, double theta);

inline double wigner3j(AngMom a, AngMom b, AngMom c) {
  return threej_2(a.twice_j, b.twice_j, c.twice_j, a.twice_m, b.twice_m,
                  c.twice_m);
}
inline double clebsch_gordan(AngMom a, AngMom b, AngMom c) {
  return cg_2(a.twice_j, a.twice_m, b.twice_j, b.twice_m, c.twice_j,
              c.twice_m);
}

//! Integer-L convenience wrapper for the rotation matrix.
inline double wigner_small_d(int L, int M, int lambda, double theta) {
  return small_d_2(2 * L, 2 * M, 2 * lambda, theta);
}

//! Number of memoised 3j / 6j entries (diagnostics only).
std::size_t cache_size();

} // namespace twogamma::angular
