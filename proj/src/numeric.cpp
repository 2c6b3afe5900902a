#include "twisted/numeric.hpp"

#include <charconv>
#include <cmath>

#include <boost/math/constants/constants.hpp>

#include "twisted/errors.hpp"

namespace twisted {

ExtFloat ext_two_pi() {
  static const ExtFloat value = boost::math::constants::two_pi<ExtFloat>();
  return value;
}

ExtFloat ext_log(const BigInt& n) {
  if (n < 1) throw InvalidArgument("n", "logarithm needs n >= 1");
  return boost::multiprecision::log(ExtFloat(n));
}

BigInt ceil_to_int(const ExtFloat& x) { return boost::multiprecision::ceil(x).convert_to<BigInt>(); }
BigInt floor_to_int(const ExtFloat& x) { return boost::multiprecision::floor(x).convert_to<BigInt>(); }
BigInt round_to_int(const ExtFloat& x) { return boost::multiprecision::round(x).convert_to<BigInt>(); }

BigInt parse_decimal(const std::string& text) {
  if (text.empty()) throw FormatError("empty integer string");
  for (char ch : text) {
    if (ch < '0' || ch > '9') throw FormatError("not a decimal integer: '" + text + "'");
  }
  return BigInt(text);
}

std::string to_decimal(const BigInt& n) { return n.str(); }

std::string format_double(double x) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
  if (ec != std::errc{}) throw Error("cannot format double");
  return std::string(buf, end);
}

double parse_double(const std::string& text) {
  double x = 0.0;
  const char* first = text.data();
  const char* last = first + text.size();
  auto [ptr, ec] = std::from_chars(first, last, x);
  if (ec != std::errc{} || ptr != last) throw FormatError("not a decimal number: '" + text + "'");
  return x;
}

double to_double(const BigInt& n) {
  if (abs(n) >= BigInt(1) << 1024) return n.sign() < 0 ? -HUGE_VAL : HUGE_VAL;
  return n.convert_to<double>();
}

}  // namespace twisted
