#include "twisted/powersum.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/special_functions/log1p.hpp>

#include "twisted/compensated.hpp"
#include "twisted/errors.hpp"

namespace twisted {
namespace {

double inflate(double err) { return err * (1.0 + 1e-12); }

// Euler-Maclaurin remainder |R| <= C * integral |f^(k)|, with
// integral_a^inf |f^(k)| = prod_{j<k} |s+j| * a^-k / k.
struct RemainderShape {
  double constant;
  int derivative;
};

RemainderShape remainder_shape(int order) {
  switch (order) {
    case 0:
      return {1.0 / 12.0, 2};  // trapezoid kernel x(1-x)/2
    case 1:
      return {0.00970, 3};  // 2 zeta(3) / (2 pi)^3 = 0.0096923
    case 2:
      return {2.12e-4, 5};  // 2 zeta(5) / (2 pi)^5 = 2.1178e-4
    default:
      throw InvalidArgument("order", "Euler-Maclaurin order must be 0, 1 or 2");
  }
}

double rising_modulus(double t, int k) {
  double p = 1.0;
  for (int j = 0; j < k; ++j) p *= std::hypot(1.0 + j, t);
  return p;
}

double em_start_for_tolerance(double t, int order, double tol) {
  const auto [c, k] = remainder_shape(order);
  return std::pow(c * rising_modulus(t, k) / (k * tol), 1.0 / k);
}

CertifiedSum em_tail(const BigInt& a, const BigInt& len, double t, int order) {
  const ExtFloat big_a(a);
  const ExtFloat ratio = ExtFloat(len) / big_a;
  const ExtFloat log_ratio = boost::math::log1p(ratio);
  const double u = log_ratio.convert_to<double>();
  const double theta = ExtFloat(t * log_ratio).convert_to<double>();

  const Complex s(1.0, t);
  const Complex ea = std::polar(1.0, phase(a, t));  // a^{-it}
  const Complex eb = ea * std::polar(1.0, -theta);  // b^{-it} = a^{-it} (b/a)^{-it}
  const double inv_a = 1.0 / big_a.convert_to<double>();
  const double inv_b = 1.0 / (big_a + ExtFloat(len)).convert_to<double>();

  // integral_a^b x^{-1-it} dx = a^{-it} (1 - e^{-i theta}) / (it)
  Complex integral_rel;
  if (t == 0.0) {
    integral_rel = {u, 0.0};
  } else {
    const double half = std::sin(0.5 * theta);
    integral_rel = {std::sin(theta) / t, -2.0 * half * half / t};
  }
  const Complex integral = ea * integral_rel;

  // Half-open run: drop f(b) from the closed-interval trapezoid ends.
  const Complex fa = ea * inv_a;
  const Complex fb = eb * inv_b;
  Complex value = integral + 0.5 * (fa - fb);
  double magnitude = u + std::abs(fa) + std::abs(fb);

  if (order >= 1) {
    const Complex d1 = (-s / 12.0) * (eb * (inv_b * inv_b) - ea * (inv_a * inv_a));
    value += d1;
    magnitude += std::abs(d1);
  }
  if (order >= 2) {
    const Complex d3 = (s * (s + 1.0) * (s + 2.0) / 720.0) *
                       (eb * std::pow(inv_b, 4) - ea * std::pow(inv_a, 4));
    value += d3;
    magnitude += std::abs(d3);
  }

  const double remainder = em_remainder_bound(big_a.convert_to<double>(), t, order);
  const double rounding = (kExtPhaseErr + 16.0 * kEps * (1.0 + std::abs(theta))) * magnitude;
  return {value, inflate(remainder + rounding)};
}

}  // namespace

CertifiedSum operator+(const CertifiedSum& x, const CertifiedSum& y) {
  const Complex v = x.value + y.value;
  return {v, inflate(x.err + y.err + kEps * (std::abs(v.real()) + std::abs(v.imag())))};
}

bool native_phase(const BigInt& n, double t) {
  if (n > kNativeLimit) return false;
  return std::abs(t) * std::log(n.convert_to<double>()) <= 512.0;
}

ExtFloat phase_ext(const BigInt& n, double t) {
  if (n < 1) throw InvalidArgument("n", "must be >= 1");
  if (t == 0.0 || n == 1) return ExtFloat(0);
  const ExtFloat two_pi = ext_two_pi();
  ExtFloat x = -ExtFloat(t) * ext_log(n);
  x -= boost::multiprecision::floor(x / two_pi) * two_pi;
  if (x < 0) x += two_pi;
  if (x >= two_pi) x -= two_pi;
  return x;
}

double phase(const BigInt& n, double t) {
  const double x = phase_ext(n, t).convert_to<double>();
  return x >= kTwoPi ? 0.0 : x;
}

Complex term(const BigInt& n, double t) {
  if (n < 1) throw InvalidArgument("n", "must be >= 1");
  if (native_phase(n, t)) {
    const double nd = n.convert_to<double>();
    const double inv = 1.0 / nd;
    const double theta = t * std::log(nd);
    return {inv * std::cos(theta), -inv * std::sin(theta)};
  }
  return std::polar(1.0 / to_double(n), phase(n, t));
}

CertifiedSum interval_sum_direct(const BigInt& a, const BigInt& len, double t, const SumOptions& options) {
  if (a < 1) throw InvalidArgument("a", "must be >= 1");
  if (len < 1) throw InvalidArgument("len", "must be >= 1");
  if (len > options.direct_cap) {
    throw CapExceeded("direct summation of " + to_decimal(len) + " terms exceeds cap " +
                      std::to_string(options.direct_cap) + "; use interval_sum_em");
  }
  const auto count = len.convert_to<std::uint64_t>();
  CompensatedSum re, im;
  double bound = 0.0;
  double abs_total = 0.0;

  if (native_phase(a + len - 1, t)) {
    const auto first = a.convert_to<std::uint64_t>();
    for (std::uint64_t i = 0; i < count; ++i) {
      const double nd = static_cast<double>(first + i);
      const double inv = 1.0 / nd;
      const double theta = t * std::log(nd);
      re.add(inv * std::cos(theta));
      im.add(-inv * std::sin(theta));
      bound += inv * (3.0 * kEps * std::abs(theta) + 5.0 * kEps);
      abs_total += inv;
    }
  } else {
    BigInt n = a;
    for (std::uint64_t i = 0; i < count; ++i, ++n) {
      const double inv = 1.0 / to_double(n);
      const Complex x = std::polar(inv, phase(n, t));
      re.add(x.real());
      im.add(x.imag());
      bound += inv * (kExtPhaseErr + 5.0 * kEps);
      abs_total += inv;
    }
  }

  const Complex value(re.value(), im.value());
  const double summation = 2.0 * kEps * (std::abs(value.real()) + std::abs(value.imag())) +
                           8.0 * static_cast<double>(count) * kEps * kEps * abs_total;
  return {value, inflate(bound + summation)};
}

double em_remainder_bound(double a, double t, int order) {
  const auto [c, k] = remainder_shape(order);
  if (!std::isfinite(a)) return 0.0;
  return inflate(c * rising_modulus(t, k) / k * std::pow(a, -k));
}

CertifiedSum interval_sum_em(const BigInt& a, const BigInt& len, double t, int order, const SumOptions& options) {
  if (a < 2) throw InvalidArgument("a", "Euler-Maclaurin path needs a >= 2");
  if (len < 1) throw InvalidArgument("len", "must be >= 1");
  remainder_shape(order);

  // Sum the leading terms directly until the remainder bound is negligible.
  BigInt head = 0;
  const double start = em_start_for_tolerance(t, order, options.em_head_tol);
  if (std::isfinite(start) && a < BigInt(std::ceil(start))) {
    head = BigInt(std::ceil(start)) - a;
    head = std::min<BigInt>({head, len, BigInt(options.em_max_head)});
  }
  CertifiedSum total;
  if (head > 0) {
    SumOptions head_options = options;
    head_options.direct_cap = std::max<std::uint64_t>(options.direct_cap, options.em_max_head);
    total = interval_sum_direct(a, head, t, head_options);
    if (head == len) return total;
  }
  return total + em_tail(a + head, len - head, t, order);
}

SumMethod choose_method(const BigInt& a, const BigInt& len, double t, const SumOptions& options) {
  const bool native = native_phase(a + len - 1, t);
  if (native && len <= options.direct_always_below) return SumMethod::direct;
  if (len > options.direct_cap || !native) return SumMethod::euler_maclaurin;
  if (a >= 2 && em_remainder_bound(to_double(a), t, options.em_order) <= options.em_prefer_tol) {
    return SumMethod::euler_maclaurin;
  }
  return SumMethod::direct;
}

CertifiedSum interval_sum(const BigInt& a, const BigInt& len, double t, const SumOptions& options) {
  if (a < 1) throw InvalidArgument("a", "must be >= 1");
  if (len < 1) throw InvalidArgument("len", "must be >= 1");
  if (choose_method(a, len, t, options) == SumMethod::direct) {
    return interval_sum_direct(a, len, t, options);
  }
  if (a == 1) {
    const CertifiedSum one{{1.0, 0.0}, 0.0};
    return len == 1 ? one : one + interval_sum_em(2, len - 1, t, options.em_order, options);
  }
  return interval_sum_em(a, len, t, options.em_order, options);
}

CertifiedSum harmonic_mass(const BigInt& a, const BigInt& len, const SumOptions& options) {
  if (a < 2) throw InvalidArgument("a", "must be >= 2");
  CertifiedSum mass = interval_sum(a, len, 0.0, options);
  mass.value = {mass.value.real(), 0.0};
  return mass;
}

}  // namespace twisted
