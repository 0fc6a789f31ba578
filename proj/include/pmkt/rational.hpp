#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace pmkt {

using Rat = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

inline double to_double(const Rat& r) { return r.convert_to<double>(); }

inline std::string to_string(const Rat& r) {
  if (denominator(r) == 1) return numerator(r).str();
  return numerator(r).str() + "/" + denominator(r).str();
}

// Accepts "n", "n/d", and decimal strings like "-1.25" or "0.3333".
inline Rat parse_rational(const std::string& s) {
  if (s.empty()) throw std::invalid_argument("empty rational literal");
  auto slash = s.find('/');
  if (slash != std::string::npos) {
    BigInt num(s.substr(0, slash));
    BigInt den(s.substr(slash + 1));
    if (den == 0) throw std::invalid_argument("zero denominator in '" + s + "'");
    return Rat(num, den);
  }
  auto dot = s.find('.');
  if (dot == std::string::npos) return Rat(BigInt(s));
  std::string head = s.substr(0, dot);
  std::string frac = s.substr(dot + 1);
  bool neg = !head.empty() && head[0] == '-';
  if (head == "-" || head.empty()) head = "0";
  BigInt ip(head);
  BigInt scale = 1;
  for (size_t k = 0; k < frac.size(); ++k) scale *= 10;
  BigInt fp = frac.empty() ? BigInt(0) : BigInt(frac);
  Rat mag = Rat(boost::multiprecision::abs(ip)) + Rat(fp, scale);
  return neg ? -mag : mag;
}

// Exact rational from a double (doubles are binary rationals).
inline Rat rat_from_double(double d) {
  if (d == 0.0) return Rat(0);
  int exp = 0;
  double mant = std::frexp(d, &exp);  // d = mant * 2^exp, |mant| in [0.5, 1)
  auto scaled = static_cast<long long>(mant * 9007199254740992.0);  // mant * 2^53
  Rat r{BigInt(scaled)};
  int shift = exp - 53;
  if (shift > 0) r *= Rat(BigInt(1) << shift);
  if (shift < 0) r /= Rat(BigInt(1) << (-shift));
  return r;
}

}  // namespace pmkt
