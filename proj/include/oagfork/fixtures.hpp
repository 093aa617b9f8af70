#pragma once

#include "oagfork/dlo.hpp"
#include "oagfork/ovs.hpp"
#include "oagfork/roag.hpp"

#include <vector>

namespace oagfork::fixtures {

inline const RealAlgebraic& one() {
    static const RealAlgebraic x = ra_rational(1);
    return x;
}
inline const RealAlgebraic& sqrt2() {
    static const RealAlgebraic x = ra_sqrt(2);
    return x;
}
inline const RealAlgebraic& sqrt3() {
    static const RealAlgebraic x = ra_sqrt(3);
    return x;
}

struct DoagFixture {
    ModelPtr model;
    std::vector<OvsElement> A, B, C;
};

// Four slots: {1,√2} ≫ {1} ≫ {1,√2} ≫ {1,√2}. A is the rationals of slots 0, 2 and 3.
// c₁ = √2 in slot 3, c₂ = √2 in slot 0, and c₃ lives alone in slot 1: the infinitesimal-but-not-
// too-small element is modelled by a fresh Archimedean class between slots 0 and 2.
inline DoagFixture fx316() {
    auto m = make_model({{one(), sqrt2()}, {one()}, {one(), sqrt2()}, {one(), sqrt2()}});
    return {m, {unit(m, 0), unit(m, 2), unit(m, 3)}, {}, {unit(m, 3, 1), unit(m, 0, 1), unit(m, 1)}};
}

// Two slots {1,√2}; ε is the unit of slot 1. A = ℚ, B = ℚ(√2)-rationals at the top,
// c₁ = √2 + ε, c₂ = √2·ε.
inline DoagFixture fx3319() {
    auto m = make_model({{one(), sqrt2()}, {one(), sqrt2()}});
    return {m, {unit(m, 0)}, {unit(m, 0, 1)}, {unit(m, 0, 1) + unit(m, 1), unit(m, 1, 1)}};
}

// Slot 0 is ℚ + ℚ√2 + ℚ√3, slot 1 (ε) is ℚ + ℚ√2. c₁ = √2 + ε, c₂ = √3 + √2·ε.
inline DoagFixture fx452() {
    auto m = make_model({{one(), sqrt2(), sqrt3()}, {one(), sqrt2()}});
    return {m, {unit(m, 0)}, {unit(m, 0, 1), unit(m, 0, 2)}, {unit(m, 0, 1) + unit(m, 1), unit(m, 0, 2) + unit(m, 1, 1)}};
}

// Slots {1,√2} ≫ {1} (c₂) ≫ {1} (ε). c₁ = √2 + ε, c₂ an infinitesimal above ε.
inline DoagFixture fx453() {
    auto m = make_model({{one(), sqrt2()}, {one()}, {one()}});
    return {m, {unit(m, 0)}, {unit(m, 0, 1)}, {unit(m, 0, 1) + unit(m, 2), unit(m, 1)}};
}

// ℤ[1/2] inside ℝ with generator 1; no prime of infinite index.
inline RoagModelPtr zhalf_model() { return make_dense_model({one()}, {false, {2}}, {}); }

// ⊕ℤrₙ truncated to r₁ = 1, r₂ = √2, r₃ = √3; every prime has infinite index.
inline RoagModelPtr sum_zr_model() { return make_dense_model({one(), sqrt2(), sqrt3()}, {}, {true, {}}); }

inline RoagElement relem(std::vector<long> c) {
    RoagElement e;
    for (long x : c) e.coords.push_back(Rational(x));
    return e;
}

// ℤ[1/2] ×lex ℤ[1/2] as a two-point value chain; (1, 0) sits at the dominant exponent.
inline RoagModelPtr lex_zhalf_squared() { return make_lexhahn_model({{ChainFactor::Finite, 2}}, {false, {2}}); }

// Hahn series over ℚ≤0 ×lex ℤ≤0 with integer coefficients.
inline RoagModelPtr hahn_qz() { return make_lexhahn_model({{ChainFactor::QNonPos, 0}, {ChainFactor::ZNonPos, 0}}, {}); }

inline HahnElement monomial(std::vector<long> exp, long coef = 1) {
    LexTerm t;
    for (long e : exp) t.exp.push_back(Rational(e));
    t.coef = coef;
    return {{t}};
}

// A = ∅, B = {0, 2}, C = {1}.
inline DloSets dlo_1210() { return {{}, {Rational(0), Rational(2)}, {Rational(1)}}; }

}  // namespace oagfork::fixtures
