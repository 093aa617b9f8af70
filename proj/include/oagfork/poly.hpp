#pragma once

#include "oagfork/rational.hpp"

#include <algorithm>
#include <utility>
#include <vector>

namespace oagfork {

// Dense univariate polynomials, coefficients lowest degree first.
using QPoly = std::vector<Rational>;
using ZPoly = std::vector<Integer>;

template <class P>
inline void trim(P& p) {
    while (!p.empty() && p.back() == 0) p.pop_back();
}

template <class P>
inline int deg(const P& p) {
    return static_cast<int>(p.size()) - 1;  // -1 for the zero polynomial
}

inline QPoly to_q(const ZPoly& p) {
    QPoly r(p.begin(), p.end());
    return r;
}

inline QPoly qp_add(const QPoly& a, const QPoly& b) {
    QPoly r(std::max(a.size(), b.size()));
    for (size_t i = 0; i < a.size(); ++i) r[i] += a[i];
    for (size_t i = 0; i < b.size(); ++i) r[i] += b[i];
    trim(r);
    return r;
}

inline QPoly qp_sub(const QPoly& a, const QPoly& b) {
    QPoly r(std::max(a.size(), b.size()));
    for (size_t i = 0; i < a.size(); ++i) r[i] += a[i];
    for (size_t i = 0; i < b.size(); ++i) r[i] -= b[i];
    trim(r);
    return r;
}

inline QPoly qp_scale(const QPoly& a, const Rational& s) {
    if (s == 0) return {};
    QPoly r(a);
    for (auto& c : r) c *= s;
    return r;
}

inline QPoly qp_mul(const QPoly& a, const QPoly& b) {
    if (a.empty() || b.empty()) return {};
    QPoly r(a.size() + b.size() - 1);
    for (size_t i = 0; i < a.size(); ++i) {
        if (a[i] == 0) continue;
        for (size_t j = 0; j < b.size(); ++j) r[i + j] += a[i] * b[j];
    }
    trim(r);
    return r;
}

inline std::pair<QPoly, QPoly> qp_divmod(const QPoly& a, const QPoly& b) {
    ensure(!b.empty(), "polynomial division by zero");
    QPoly rem(a);
    trim(rem);
    if (rem.size() < b.size()) return {{}, rem};
    QPoly quo(rem.size() - b.size() + 1);
    Rational lead_inv = 1 / b.back();
    for (int i = deg(rem) - deg(b); i >= 0; --i) {
        Rational c = rem[i + b.size() - 1] * lead_inv;
        quo[i] = c;
        if (c == 0) continue;
        for (size_t j = 0; j < b.size(); ++j) rem[i + j] -= c * b[j];
    }
    rem.resize(b.size() - 1);
    trim(rem);
    trim(quo);
    return {quo, rem};
}

inline QPoly qp_rem(const QPoly& a, const QPoly& b) { return qp_divmod(a, b).second; }

inline QPoly qp_monic(const QPoly& a) {
    if (a.empty()) return a;
    return qp_scale(a, 1 / a.back());
}

inline QPoly qp_gcd(QPoly a, QPoly b) {
    trim(a);
    trim(b);
    while (!b.empty()) {
        QPoly r = qp_rem(a, b);
        a = std::move(b);
        b = std::move(r);
    }
    return qp_monic(a);
}

// Returns (g, s) with s·a ≡ g (mod m), g = gcd(a, m) monic.
inline std::pair<QPoly, QPoly> qp_gcd_cofactor(const QPoly& a, const QPoly& m) {
    QPoly r0 = m, r1 = a, s0 = {}, s1 = {Rational(1)};
    trim(r1);
    while (!r1.empty()) {
        auto [q, r] = qp_divmod(r0, r1);
        QPoly s = qp_sub(s0, qp_mul(q, s1));
        r0 = std::move(r1);
        r1 = std::move(r);
        s0 = std::move(s1);
        s1 = std::move(s);
    }
    Rational inv = 1 / r0.back();
    return {qp_scale(r0, inv), qp_scale(s0, inv)};
}

inline QPoly qp_derivative(const QPoly& a) {
    if (a.size() <= 1) return {};
    QPoly r(a.size() - 1);
    for (size_t i = 1; i < a.size(); ++i) r[i - 1] = a[i] * static_cast<long>(i);
    trim(r);
    return r;
}

inline Rational qp_eval(const QPoly& a, const Rational& x) {
    Rational r = 0;
    for (size_t i = a.size(); i-- > 0;) r = r * x + a[i];
    return r;
}

// a(b(x))
inline QPoly qp_compose(const QPoly& a, const QPoly& b) {
    QPoly r;
    for (size_t i = a.size(); i-- > 0;) r = qp_add(qp_mul(r, b), QPoly{a[i]});
    return r;
}

inline QPoly qp_squarefree(const QPoly& a) {
    QPoly g = qp_gcd(a, qp_derivative(a));
    return qp_monic(qp_divmod(a, g).first);
}

inline Integer zp_content(const ZPoly& p) {
    Integer g = 0;
    for (const auto& c : p) g = gcd(g, c);
    return g;
}

// Primitive integer polynomial proportional to p with positive leading coefficient.
inline ZPoly primitive_part(const QPoly& p) {
    Integer l = 1;
    for (const auto& c : p) l = lcm(l, c.get_den());
    ZPoly z;
    z.reserve(p.size());
    for (const auto& c : p) z.push_back(Integer(c * l));
    trim(z);
    if (z.empty()) return z;
    Integer g = zp_content(z);
    if (z.back() < 0) g = -g;
    for (auto& c : z) c /= g;
    return z;
}

inline int sign_of(const Rational& q) { return sgn(q); }

// Sturm sequence of a squarefree polynomial.
inline std::vector<QPoly> sturm_chain(const QPoly& p) {
    std::vector<QPoly> chain{p, qp_derivative(p)};
    while (!chain.back().empty()) {
        QPoly r = qp_rem(chain[chain.size() - 2], chain.back());
        for (auto& c : r) c = -c;
        chain.push_back(r);
    }
    chain.pop_back();
    return chain;
}

inline int sign_changes_at(const std::vector<QPoly>& chain, const Rational& x) {
    int changes = 0, prev = 0;
    for (const auto& f : chain) {
        int s = sign_of(qp_eval(f, x));
        if (s == 0) continue;
        if (prev != 0 && s != prev) ++changes;
        prev = s;
    }
    return changes;
}

// Number of distinct real roots in the half-open interval (lo, hi].
inline int count_roots(const std::vector<QPoly>& chain, const Rational& lo, const Rational& hi) {
    return sign_changes_at(chain, lo) - sign_changes_at(chain, hi);
}

struct Interval {
    Rational lo, hi;
};

inline Interval iv_add(const Interval& a, const Interval& b) { return {a.lo + b.lo, a.hi + b.hi}; }

inline Interval iv_mul(const Interval& a, const Interval& b) {
    Rational p[4] = {a.lo * b.lo, a.lo * b.hi, a.hi * b.lo, a.hi * b.hi};
    return {*std::min_element(p, p + 4), *std::max_element(p, p + 4)};
}

// Horner evaluation of p over the box x ∈ [lo, hi].
inline Interval qp_eval_interval(const QPoly& p, const Interval& x) {
    Interval r{0, 0};
    for (size_t i = p.size(); i-- > 0;) {
        r = iv_mul(r, x);
        r.lo += p[i];
        r.hi += p[i];
    }
    return r;
}

// Sign of p at a point known only through an isolating interval that is refined on demand.
// `refine` halves the interval; returns 0 only if p vanishes identically.
template <class Refine>
inline int sign_by_refinement(const QPoly& p, Interval& box, Refine refine) {
    if (p.empty()) return 0;
    for (;;) {
        Interval v = qp_eval_interval(p, box);
        if (v.lo > 0) return 1;
        if (v.hi < 0) return -1;
        if (box.lo == box.hi) return sign_of(v.lo);
        refine(box);
    }
}

}  // namespace oagfork
