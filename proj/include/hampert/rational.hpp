#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <stdexcept>
#include <string>

namespace hampert {

// Exact rational coefficients everywhere in the symbolic layer.  No floating
// point is allowed on that side; doubles appear only in the numerical solvers.
using BigInt = boost::multiprecision::cpp_int;
using Rat = boost::multiprecision::cpp_rational;

inline Rat rat(long long num, long long den = 1) {
    if (den == 0) throw std::invalid_argument("rat: zero denominator");
    return Rat(BigInt(num), BigInt(den));
}

// Renders "5", "-5", "1/24", "-7/3840".
inline std::string rat_str(const Rat& r) {
    std::string s = numerator(r).str();
    if (denominator(r) != 1) s += "/" + denominator(r).str();
    return s;
}

// Parses "p" or "p/q" with optional sign; exact.
inline Rat rat_parse(const std::string& text) {
    auto slash = text.find('/');
    if (slash == std::string::npos) return Rat(BigInt(text));
    BigInt num(text.substr(0, slash));
    BigInt den(text.substr(slash + 1));
    if (den == 0) throw std::invalid_argument("rat_parse: zero denominator");
    return Rat(num, den);
}

}  // namespace hampert
