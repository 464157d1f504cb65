#pragma once

// Angular-momentum recoupling coefficients in Racah closed form.
//
// Quantum numbers are passed as twice their physical value so half-integer
// spins stay exact. Factorial sums run in long double; the largest argument
// appearing for the atomic manifolds used here is tiny, so precision is far
// below 1e-14.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>

namespace vstirap::angular {

namespace detail {

inline long double factorial(int n) {
  static const auto table = [] {
    std::array<long double, 64> t{};
    t[0] = 1.0L;
    for (std::size_t i = 1; i < t.size(); ++i) t[i] = t[i - 1] * static_cast<long double>(i);
    return t;
  }();
  return table[static_cast<std::size_t>(n)];
}

// (a+b-c)/2 etc. as an integer, or -1 when the triple is not coupled.
inline int half_sum(int two_a, int two_b, int two_c) {
  int s = two_a + two_b + two_c;
  if (s % 2 != 0) return -1;
  return s / 2;
}

inline bool triangle_ok(int two_a, int two_b, int two_c) {
  return two_c >= std::abs(two_a - two_b) && two_c <= two_a + two_b &&
         (two_a + two_b + two_c) % 2 == 0;
}

inline long double triangle_coeff(int two_a, int two_b, int two_c) {
  int x = (two_a + two_b - two_c) / 2;
  int y = (two_a - two_b + two_c) / 2;
  int z = (-two_a + two_b + two_c) / 2;
  int w = (two_a + two_b + two_c) / 2 + 1;
  return factorial(x) * factorial(y) * factorial(z) / factorial(w);
}

}  // namespace detail

/// Clebsch-Gordan coefficient <j1 m1; j2 m2 | J M> (Condon-Shortley phase).
inline double cg(int two_j1, int two_m1, int two_j2, int two_m2, int two_J, int two_M) {
  using detail::factorial;
  if (two_m1 + two_m2 != two_M) return 0.0;
  if (!detail::triangle_ok(two_j1, two_j2, two_J)) return 0.0;
  if (std::abs(two_m1) > two_j1 || std::abs(two_m2) > two_j2 || std::abs(two_M) > two_J)
    return 0.0;
  if ((two_j1 + two_m1) % 2 != 0 || (two_j2 + two_m2) % 2 != 0 || (two_J + two_M) % 2 != 0)
    return 0.0;

  auto h = [](int two_x) { return two_x / 2; };  // arguments below are all even
  int j1pm1 = h(two_j1 + two_m1), j1mm1 = h(two_j1 - two_m1);
  int j2pm2 = h(two_j2 + two_m2), j2mm2 = h(two_j2 - two_m2);
  int JpM = h(two_J + two_M), JmM = h(two_J - two_M);
  int j1pj2mJ = h(two_j1 + two_j2 - two_J);
  int Jmj2pm1 = h(two_J - two_j2 + two_m1);
  int Jmj1mm2 = h(two_J - two_j1 - two_m2);

  long double pre = std::sqrt(static_cast<long double>(two_J + 1) *
                              detail::triangle_coeff(two_j1, two_j2, two_J) *
                              factorial(j1pm1) * factorial(j1mm1) * factorial(j2pm2) *
                              factorial(j2mm2) * factorial(JpM) * factorial(JmM));

  int k_min = std::max({0, -Jmj2pm1, -Jmj1mm2});
  int k_max = std::min({j1pj2mJ, j1mm1, j2pm2});
  long double sum = 0.0L;
  for (int k = k_min; k <= k_max; ++k) {
    long double term = factorial(k) * factorial(j1pj2mJ - k) * factorial(j1mm1 - k) *
                       factorial(j2pm2 - k) * factorial(Jmj2pm1 + k) *
                       factorial(Jmj1mm2 + k);
    sum += ((k % 2 == 0) ? 1.0L : -1.0L) / term;
  }
  return static_cast<double>(pre * sum);
}

/// Wigner 6-j symbol {a b c; d e f}.
inline double sixj(int two_a, int two_b, int two_c, int two_d, int two_e, int two_f) {
  using detail::factorial;
  if (!detail::triangle_ok(two_a, two_b, two_c) || !detail::triangle_ok(two_a, two_e, two_f) ||
      !detail::triangle_ok(two_d, two_b, two_f) || !detail::triangle_ok(two_d, two_e, two_c))
    return 0.0;

  long double pre = std::sqrt(detail::triangle_coeff(two_a, two_b, two_c) *
                              detail::triangle_coeff(two_a, two_e, two_f) *
                              detail::triangle_coeff(two_d, two_b, two_f) *
                              detail::triangle_coeff(two_d, two_e, two_c));

  int abc = detail::half_sum(two_a, two_b, two_c);
  int aef = detail::half_sum(two_a, two_e, two_f);
  int dbf = detail::half_sum(two_d, two_b, two_f);
  int dec = detail::half_sum(two_d, two_e, two_c);
  int abde = (two_a + two_b + two_d + two_e) / 2;
  int bcef = (two_b + two_c + two_e + two_f) / 2;
  int acdf = (two_a + two_c + two_d + two_f) / 2;

  int k_min = std::max({abc, aef, dbf, dec});
  int k_max = std::min({abde, bcef, acdf});
  long double sum = 0.0L;
  for (int k = k_min; k <= k_max; ++k) {
    long double num = factorial(k + 1);
    long double den = factorial(k - abc) * factorial(k - aef) * factorial(k - dbf) *
                      factorial(k - dec) * factorial(abde - k) * factorial(bcef - k) *
                      factorial(acdf - k);
    sum += ((k % 2 == 0) ? 1.0L : -1.0L) * num / den;
  }
  return static_cast<double>(pre * sum);
}

}  // namespace vstirap::angular
