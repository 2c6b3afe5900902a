#pragma once

// Certified evaluation of n^{-1-it} and of its sums over runs of consecutive
// integers [a, a+len). Runs may be far too long (or start far too high) to
// sum term by term; those go through Euler-Maclaurin with an explicit
// remainder bound.

#include <cstdint>

#include "twisted/numeric.hpp"

namespace twisted {

/// A computed value with a rigorous bound on its absolute error.
struct CertifiedSum {
  Complex value{};
  double err = 0.0;

  friend bool operator==(const CertifiedSum&, const CertifiedSum&) = default;
};

/// Sum of two certified values; err also covers the rounding of the addition.
CertifiedSum operator+(const CertifiedSum& x, const CertifiedSum& y);

/// Bound on the angular error of the phase used by term() for this (n, t).
inline constexpr double kExtPhaseErr = 1e-15;

struct SumOptions {
  /// Direct summation refuses runs longer than this.
  std::uint64_t direct_cap = 10'000'000;
  /// Number of Bernoulli corrections used by interval_sum's Euler-Maclaurin branch.
  int em_order = 1;
  /// Euler-Maclaurin sums leading terms directly until the remainder bound drops below this.
  double em_head_tol = 1e-15;
  std::uint64_t em_max_head = std::uint64_t{1} << 20;
  /// interval_sum switches to Euler-Maclaurin once its remainder is this small.
  double em_prefer_tol = 1e-18;
  /// Runs this short are always summed directly when the native path applies.
  std::uint64_t direct_always_below = 64;
};

enum class SumMethod { direct, euler_maclaurin };

/// True when n^{-it} can be evaluated in double arithmetic with phase error
/// below 2^-40: n < 2^53 and |t| ln n <= 512.
bool native_phase(const BigInt& n, double t);

/// n^{-1-it} for n >= 1.
Complex term(const BigInt& n, double t);

/// (-t ln n) mod 2pi in [0, 2pi), exact to well below 2^-100 before the final rounding.
ExtFloat phase_ext(const BigInt& n, double t);

/// phase_ext rounded to double, in [0, 2pi). Absolute error <= kExtPhaseErr.
double phase(const BigInt& n, double t);

/// Compensated sum of n^{-1-it} for n in [a, a+len). Throws CapExceeded above options.direct_cap.
CertifiedSum interval_sum_direct(const BigInt& a, const BigInt& len, double t,
                                 const SumOptions& options = {});

/// Euler-Maclaurin evaluation of the same sum with `order` in {0, 1, 2}
/// Bernoulli corrections. Needs a >= 2. t = 0 is allowed and yields the
/// harmonic sum (the integral becomes ln(b/a)).
CertifiedSum interval_sum_em(const BigInt& a, const BigInt& len, double t, int order = 1,
                             const SumOptions& options = {});

/// Upper bound on the Euler-Maclaurin remainder for a run starting at `a`
/// (any length), without the directly summed head.
double em_remainder_bound(double a, double t, int order);

SumMethod choose_method(const BigInt& a, const BigInt& len, double t, const SumOptions& options = {});

/// Dispatches to direct or Euler-Maclaurin; err is the chosen method's bound.
CertifiedSum interval_sum(const BigInt& a, const BigInt& len, double t, const SumOptions& options = {});

/// Sum of 1/n over [a, a+len), a >= 2. Imaginary part is zero.
CertifiedSum harmonic_mass(const BigInt& a, const BigInt& len, const SumOptions& options = {});

}  // namespace twisted
