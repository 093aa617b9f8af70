#pragma once

#include <gmpxx.h>

#include <cctype>
#include <stdexcept>
#include <string>
#include <vector>

namespace oagfork {

using Integer = mpz_class;
using Rational = mpq_class;

// Malformed or inconsistent user input (CLI exit code 2).
struct input_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Broken internal invariant (CLI exit code 3).
struct internal_error : std::logic_error {
    using std::logic_error::logic_error;
};

inline void ensure(bool ok, const char* what) {
    if (!ok) throw internal_error(what);
}

inline bool all_digits(const std::string& s, size_t from, size_t to) {
    if (from >= to) return false;
    for (size_t i = from; i < to; ++i)
        if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
    return true;
}

// Accepts "p", "-p", "p/q" with q > 0.
inline Rational parse_rational(const std::string& s) {
    size_t start = (!s.empty() && (s[0] == '-' || s[0] == '+')) ? 1 : 0;
    size_t slash = s.find('/');
    size_t numEnd = slash == std::string::npos ? s.size() : slash;
    if (!all_digits(s, start, numEnd) ||
        (slash != std::string::npos && !all_digits(s, slash + 1, s.size())))
        throw input_error("malformed rational \"" + s + "\"");
    Integer num(s.substr(start, numEnd - start));
    if (start == 1 && s[0] == '-') num = -num;
    Integer den = 1;
    if (slash != std::string::npos) {
        den = Integer(s.substr(slash + 1));
        if (den == 0) throw input_error("zero denominator in \"" + s + "\"");
    }
    Rational q(num, den);
    q.canonicalize();
    return q;
}

inline std::string to_string(const Rational& q) {
    if (q.get_den() == 1) return q.get_num().get_str();
    return q.get_num().get_str() + "/" + q.get_den().get_str();
}

inline Rational abs_q(const Rational& q) { return q < 0 ? Rational(-q) : q; }

inline Integer floor_q(const Rational& q) {
    Integer r;
    mpz_fdiv_q(r.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
    return r;
}

inline Integer ceil_q(const Rational& q) {
    Integer r;
    mpz_cdiv_q(r.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
    return r;
}

// Simplest rational (least denominator, then least |numerator|) strictly inside (a, b).
inline Rational simplest_between(const Rational& a, const Rational& b) {
    ensure(a < b, "simplest_between: empty interval");
    if (a < 0 && b > 0) return 0;
    if (b <= 0) return -simplest_between(-b, -a);
    Integer fa = floor_q(a);
    if (fa + 1 < b) return Rational(fa + 1);
    // a and b share the integer part fa (or b is exactly fa + 1)
    Rational fr_a = a - fa, fr_b = b - fa;
    // 1/x maps (fr_a, fr_b) to (1/fr_b, 1/fr_a)
    Rational lo = 1 / fr_b;
    Rational hi = fr_a == 0 ? Rational(-1) : Rational(1 / fr_a);
    Rational inner;
    if (fr_a == 0) {
        Integer c = floor_q(lo) + 1;
        inner = Rational(c);
    } else {
        inner = simplest_between(lo, hi);
    }
    Rational r = fa + 1 / inner;
    r.canonicalize();
    return r;
}

// Height of a rational: max(|num|, den).
inline Integer height(const Rational& q) {
    Integer n = abs(q.get_num());
    return n > q.get_den() ? n : Integer(q.get_den());
}

}  // namespace oagfork
