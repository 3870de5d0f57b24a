#include "twogamma/angular.hpp"
#include <algorithm>
#include <array>
#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/multiprecision/cpp_int.hpp>
#include <cstdint>
#include <mutex>
#include <shared_mutex>
#include <stdexcept>
#include <unordered_map>
#include <vector>

namespace twogamma::angular {

namespace {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;
using BigFloat = boost::multiprecision::cpp_bin_float_50;

// Exact factorial table. Symbols with 2j <= 40 need at most ~62!, the table
// grows on demand for anything larger.
class Factorials {
public:
  const BigInt &operator()(int n) {
    if (n < 0)
      throw std::domain_error("factorial of negative number");
    {
      std::shared_lock lock(m_mutex);
      if (n < static_cast<int>(m_table.size()))
        return m_table[static_cast<std::size_t>(n)];
    }
    std::unique_lock lock(m_mutex);
    while (static_cast<int>(m_table.size()) <= n)
      m_table.push_back(m_table.back() * BigInt(m_table.size()));
    return m_table[static_cast<std::size_t>(n)];
  }

  Factorials() {
    m_table.reserve(256);
    m_table.push_back(1);
    for (int i = 1; i < 128; ++i)
      m_table.push_back(m_table.back() * i);
  }

private:
  std::vector<BigInt> m_table;
  std::shared_mutex m_mutex;
};

Factorials &fact() {
  static Factorials f;
  return f;
}

// sign(S) * sqrt(S^2 * R), evaluated in 50-digit binary float then rounded
double signed_sqrt_product(const Rational &sum, const Rational &radicand) {
  if (sum == 0)
    return 0.0;
  const Rational sq = sum * sum * radicand;
  BigFloat v = boost::multiprecision::sqrt(BigFloat(sq));
  const double d = static_cast<double>(v);
  return sum < 0 ? -d : d;
}

// Delta(abc) = (a+b-c)!(a-b+c)!(-a+b+c)!/(a+b+c+1)!   (plain, not doubled)
Rational triangle_delta(int a2, int b2, int c2) {
  auto &f = fact();
  BigInt num = f((a2 + b2 - c2) / 2) * f((a2 - b2 + c2) / 2) *
               f((-a2 + b2 + c2) / 2);
  return Rational(num, f((a2 + b2 + c2) / 2 + 1));
}

double threej_exact(int tj1, int tj2, int tj3, int tm1, int tm2, int tm3) {
  auto &f = fact();
  // plain-integer combinations
  const int j1pm1 = (tj1 + tm1) / 2, j1mm1 = (tj1 - tm1) / 2;
  const int j2pm2 = (tj2 + tm2) / 2, j2mm2 = (tj2 - tm2) / 2;
  const int j3pm3 = (tj3 + tm3) / 2, j3mm3 = (tj3 - tm3) / 2;
  const int a = (tj3 - tj2 + tm1) / 2; // j3-j2+m1
  const int b = (tj3 - tj1 - tm2) / 2; // j3-j1-m2
  const int c = (tj1 + tj2 - tj3) / 2; // j1+j2-j3
  const int tmin = std::max({0, -a, -b});
  const int tmax = std::min({c, j1mm1, j2pm2});

  Rational sum = 0;
  for (int t = tmin; t <= tmax; ++t) {
    BigInt den = f(t) * f(a + t) * f(b + t) * f(c - t) * f(j1mm1 - t) *
                 f(j2pm2 - t);
    if (t % 2 == 0)
      sum += Rational(1, den);
    else
      sum -= Rational(1, den);
  }
  Rational radicand = triangle_delta(tj1, tj2, tj3);
  radicand *= Rational(f(j1pm1) * f(j1mm1) * f(j2pm2) * f(j2mm2) * f(j3pm3) *
                       f(j3mm3));
  const int phase = neg1pow_2(tj1 - tj2 - tm3);
  return phase * signed_sqrt_product(sum, radicand);
}

double sixj_exact(int tj1, int tj2, int tj3, int tj4, int tj5, int tj6) {
  auto &f = fact();
  const int a1 = (tj1 + tj2 + tj3) / 2;
  const int a2 = (tj1 + tj5 + tj6) / 2;
  const int a3 = (tj4 + tj2 + tj6) / 2;
  const int a4 = (tj4 + tj5 + tj3) / 2;
  const int b1 = (tj1 + tj2 + tj4 + tj5) / 2;
  const int b2 = (tj2 + tj3 + tj5 + tj6) / 2;
  const int b3 = (tj3 + tj1 + tj6 + tj4) / 2;
  const int tmin = std::max({a1, a2, a3, a4});
  const int tmax = std::min({b1, b2, b3});

  Rational sum = 0;
  for (int t = tmin; t <= tmax; ++t) {
    BigInt den = f(t - a1) * f(t - a2) * f(t - a3) * f(t - a4) * f(b1 - t) *
                 f(b2 - t) * f(b3 - t);
    Rational term(f(t + 1), den);
    if (t % 2 == 0)
      sum += term;
    else
      sum -= term;
  }
  Rational radicand = triangle_delta(tj1, tj2, tj3) *
                      triangle_delta(tj1, tj5, tj6) *
                      triangle_delta(tj4, tj2, tj6) *
                      triangle_delta(tj4, tj5, tj3);
  return signed_sqrt_product(sum, radicand);
}

// Arguments lie in [-255, 255] after offset; 9 bits each, six of them.
std::uint64_t pack6(const std::array<int, 6> &v) {
  std::uint64_t key = 0;
  for (int x : v) {
    if (x < -255 || x > 255)
      throw std::out_of_range("angular momentum argument too large");
    key = (key << 9) | static_cast<std::uint64_t>(x + 256);
  }
  return key;
}

class SymbolCache {
public:
  template <typename F> double get(std::uint64_t key, F &&compute) {
    {
      std::shared_lock lock(m_mutex);
      if (auto it = m_map.find(key); it != m_map.end())
        return it->second;
    }
    const double value = compute();
    std::unique_lock lock(m_mutex);
    m_map.emplace(key, value);
    return value;
  }
  std::size_t size() const {
    std::shared_lock lock(m_mutex);
    return m_map.size();
  }

private:
  std::unordered_map<std::uint64_t, double> m_map;
  mutable std::shared_mutex m_mutex;
};

SymbolCache &cache3j() {
  static SymbolCache c;
  return c;
}
SymbolCache &cache6j() {
  static SymbolCache c;
  return c;
}

} // namespace

//==============================================================================
double threej_2(int tj1, int tj2, int tj3, int tm1, int tm2, int tm3) {
  if (tm1 + tm2 + tm3 != 0)
    return 0.0;
  if (!triangle(tj1, tj2, tj3))
    return 0.0;
  if (!AngMom{tj1, tm1}.valid() || !AngMom{tj2, tm2}.valid() ||
      !AngMom{tj3, tm3}.valid())
    return 0.0;

  // Canonical form: columns sorted by (j, m), then overall m sign fixed so
  // that the first nonzero m is non-negative. Each odd column permutation and
  // the m-reversal carry the phase (-1)^(j1+j2+j3).
  std::array<std::pair<int, int>, 3> col{
      {{tj1, tm1}, {tj2, tm2}, {tj3, tm3}}};
  const int jsum_phase = neg1pow_2(tj1 + tj2 + tj3);
  int phase = 1;
  // bubble sort with sign tracking
  for (int pass = 0; pass < 2; ++pass) {
    for (int i = 0; i < 2; ++i) {
      if (col[i] > col[i + 1]) {
        std::swap(col[i], col[i + 1]);
        phase *= jsum_phase;
      }
    }
  }
  for (const auto &[j, m] : col) {
    if (m == 0)
      continue;
    if (m < 0) {
      for (auto &c : col)
        c.second = -c.second;
      phase *= jsum_phase;
    }
    break;
  }

  const auto key = pack6({col[0].first, col[1].first, col[2].first,
                          col[0].second, col[1].second, col[2].second});
  auto compute = [&]() {
    return threej_exact(col[0].first, col[1].first, col[2].first,
                        col[0].second, col[1].second, col[2].second);
  };
  return phase * cache3j().get(key, compute);
}

//==============================================================================
double cg_2(int tj1, int tm1, int tj2, int tm2, int tJ, int tM) {
  if (tm1 + tm2 != tM)
    return 0.0;
  // <j1 m1 j2 m2|J M> = (-1)^(j1-j2+M) sqrt(2J+1) (j1 j2 J; m1 m2 -M)
  const double tj = threej_2(tj1, tj2, tJ, tm1, tm2, -tM);
  if (tj == 0.0)
    return 0.0;
  return neg1pow_2(tj1 - tj2 + tM) * std::sqrt(tJ + 1.0) * tj;
}

//==============================================================================
double sixj_2(int tj1, int tj2, int tj3, int tj4, int tj5, int tj6) {
  if (!triangle(tj1, tj2, tj3) || !triangle(tj1, tj5, tj6) ||
      !triangle(tj4, tj2, tj6) || !triangle(tj4, tj5, tj3))
    return 0.0;

  // Canonicalise over the 24 tetrahedral symmetries: any column permutation,
  // and exchanging upper/lower entries in any two columns.
  std::array<std::array<int, 2>, 3> cols{
      {{tj1, tj4}, {tj2, tj5}, {tj3, tj6}}};
  std::array<int, 6> best{tj1, tj2, tj3, tj4, tj5, tj6};
  std::array<int, 3> perm{0, 1, 2};
  do {
    for (int flips = 0; flips < 4; ++flips) {
      // flips selects which pair of columns is exchanged: none, (0,1), (0,2),
      // (1,2)
      std::array<bool, 3> swap{false, false, false};
      if (flips == 1)
        swap = {true, true, false};
      else if (flips == 2)
        swap = {true, false, true};
      else if (flips == 3)
        swap = {false, true, true};
      std::array<int, 6> cand{};
      for (int c = 0; c < 3; ++c) {
        const auto &col = cols[static_cast<std::size_t>(perm[c])];
        const bool s = swap[static_cast<std::size_t>(c)];
        cand[static_cast<std::size_t>(c)] = s ? col[1] : col[0];
        cand[static_cast<std::size_t>(c + 3)] = s ? col[0] : col[1];
      }
      best = std::min(best, cand);
    }
  } while (std::next_permutation(perm.begin(), perm.end()));

  const auto key = pack6(best);
  auto compute = [&]() {
    return sixj_exact(best[0], best[1], best[2], best[3], best[4], best[5]);
  };
  return cache6j().get(key, compute);
}

//==============================================================================
double small_d_2(int tj, int tmp, int tm, double theta) {
  if (!AngMom{tj, tmp}.valid() || !AngMom{tj, tm}.valid())
    return 0.0;
  // Wigner's explicit sum; all factorial arguments are plain integers.
  const int jpmp = (tj + tmp) / 2, jmmp = (tj - tmp) / 2;
  const int jpm = (tj + tm) / 2, jmm = (tj - tm) / 2;
  const int mpmm = (tmp - tm) / 2;
  const double c = std::cos(0.5 * theta);
  const double s = std::sin(0.5 * theta);
  auto lf = [](int n) { return std::lgamma(n + 1.0); };
  const double pref = 0.5 * (lf(jpmp) + lf(jmmp) + lf(jpm) + lf(jmm));

  const int kmin = std::max(0, -mpmm);
  const int kmax = std::min(jpm, jmmp);
  double sum = 0.0;
  for (int k = kmin; k <= kmax; ++k) {
    const double logw =
        pref - lf(jpm - k) - lf(k) - lf(mpmm + k) - lf(jmmp - k);
    const int cos_pow = tj + (tm - tmp) / 2 - 2 * k; // 2j + m - m' - 2k
    const int sin_pow = mpmm + 2 * k;               // m' - m + 2k
    const double term =
        std::exp(logw) * std::pow(c, cos_pow) * std::pow(s, sin_pow);
    sum += ((mpmm + k) % 2 == 0) ? term : -term;
  }
  return sum;
}

std::size_t cache_size() { return cache3j().size() + cache6j().size(); }

} // namespace twogamma::angular
