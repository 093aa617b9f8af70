#pragma once

#include "oagfork/doag.hpp"
#include "oagfork/lattice.hpp"

#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

namespace oagfork {

// A finite set of primes, or all of them.
struct PrimeSet {
    bool all = false;
    std::set<long> primes;

    bool contains(long l) const { return all || primes.count(l) > 0; }
};

inline bool is_prime(long n) {
    if (n < 2) return false;
    for (long d = 2; d * d <= n; ++d)
        if (n % d == 0) return false;
    return true;
}

inline std::vector<long> prime_factors(Integer n) {
    if (n < 0) n = -n;
    std::vector<long> out;
    for (long d = 2; n > 1; ++d) {
        if (Integer(d) * d > n) {
            out.push_back(n.get_si());
            break;
        }
        if (n % d == 0) {
            out.push_back(d);
            while (n % d == 0) n /= d;
        }
    }
    return out;
}

// ℓ-adic valuation of a nonzero integer.
inline int vl(Integer n, long l) {
    if (n == 0) return 0;
    int v = 0;
    while (n % l == 0) {
        n /= l;
        ++v;
    }
    return v;
}

inline Integer pow_l(long l, int n) {
    Integer r = 1;
    for (int i = 0; i < n; ++i) r *= l;
    return r;
}

inline Integer mod_inverse(const Integer& a, const Integer& m) {
    Integer r;
    if (mpz_invert(r.get_mpz_t(), a.get_mpz_t(), m.get_mpz_t()) == 0) throw internal_error("no modular inverse");
    return r;
}

inline Integer mod_nonneg(const Integer& a, const Integer& m) {
    Integer r = a % m;
    if (r < 0) r += m;
    return r;
}

// Factors of a lexicographic value chain, most significant first.
struct ChainFactor {
    enum Kind { QNonPos, ZNonPos, Z, Q, Finite } kind = Q;
    long size = 0;  // Finite only: exponents 0..size-1
};

struct LexTerm {
    std::vector<Rational> exp;
    Rational coef;
};

struct PresburgerModel {
    enum Kind { DenseArch, ZGroup, LexHahn } kind = DenseArch;
    std::vector<RealAlgebraic> generators;  // DenseArch
    PrimeSet inverted;                      // DenseArch and LexHahn coefficient ring ℤ[S⁻¹]
    PrimeSet infinite_index;                // DenseArch: primes with [M : ℓM] infinite
    std::vector<std::vector<RealAlgebraic>> tower;  // ZGroup divisible slots
    std::vector<ChainFactor> chain;         // LexHahn
    ModelPtr div;                           // ordered ℚ-vector space holding div(M)

    size_t dim() const { return div ? div->dim : 0; }
};

using RoagModelPtr = std::shared_ptr<const PresburgerModel>;

// DenseArch: coordinates over the generators; ZGroup: tower coordinates then the 𝟙-coordinate.
struct RoagElement {
    QVec coords;
    bool operator==(const RoagElement& o) const { return coords == o.coords; }
};

// LexHahn element: finite sum of coef·t^exp (exponents distinct).
struct HahnElement {
    std::vector<LexTerm> terms;
};

inline bool s_integral(const Rational& q, const PrimeSet& S) {
    if (S.all) return true;
    Integer d = q.get_den();
    for (long p : S.primes)
        while (d % p == 0) d /= p;
    return d == 1;
}

inline RoagModelPtr make_dense_model(std::vector<RealAlgebraic> gens, PrimeSet inverted, PrimeSet infinite) {
    if (gens.empty()) throw input_error("roag-dense: at least one generator is required");
    for (long p : inverted.primes)
        if (!is_prime(p)) throw input_error("roag-dense: " + std::to_string(p) + " is not prime");
    for (long p : infinite.primes)
        if (!is_prime(p)) throw input_error("roag-dense: " + std::to_string(p) + " is not prime");
    auto m = std::make_shared<PresburgerModel>();
    m->kind = PresburgerModel::DenseArch;
    m->generators = gens;
    m->inverted = std::move(inverted);
    m->infinite_index = std::move(infinite);
    m->div = make_model({gens});  // rejects ℚ-dependent generators
    return m;
}

inline RoagModelPtr make_zgroup_model(std::vector<std::vector<RealAlgebraic>> tower) {
    auto m = std::make_shared<PresburgerModel>();
    m->kind = PresburgerModel::ZGroup;
    m->tower = tower;
    tower.push_back({ra_rational(1)});
    m->div = make_model(tower);
    return m;
}

inline RoagModelPtr make_lexhahn_model(std::vector<ChainFactor> chain, PrimeSet inverted) {
    if (chain.empty()) throw input_error("lex-hahn: empty value chain");
    for (const auto& f : chain)
        if (f.kind == ChainFactor::Finite && f.size < 1) throw input_error("lex-hahn: finite factor needs size ≥ 1");
    auto m = std::make_shared<PresburgerModel>();
    m->kind = PresburgerModel::LexHahn;
    m->chain = std::move(chain);
    m->inverted = std::move(inverted);
    return m;
}

inline RoagElement one_element(const PresburgerModel& m) {
    RoagElement e{QVec(m.dim())};
    if (m.kind == PresburgerModel::ZGroup) e.coords.back() = 1;
    return e;
}

inline void validate_element(const PresburgerModel& m, const RoagElement& x) {
    if (m.kind == PresburgerModel::LexHahn) throw input_error("lex-hahn models only support the spine operation (not regular)");
    if (x.coords.size() != m.dim()) throw input_error("element dimension does not match the model");
    if (m.kind == PresburgerModel::DenseArch) {
        for (const auto& q : x.coords)
            if (!s_integral(q, m.inverted)) throw input_error("coordinate " + to_string(q) + " is outside ℤ[S⁻¹]");
    } else if (x.coords.back().get_den() != 1) {
        throw input_error("discrete coordinate must be an integer");
    }
}

inline OvsElement to_div(const PresburgerModel& m, const RoagElement& x) { return {m.div, x.coords}; }

// ---------------------------------------------------------------------------------------------
// Lattice presentation of the touched fragment modulo ℓᴺ.
//
// For ℓ ∉ S the fragment ℤ[S⁻¹]ⁿ has ℤ[S⁻¹]ⁿ/ℓᴺ = (ℤ/ℓᴺ)ⁿ, and scaling every element by one common
// S-unit is an automorphism of that quotient, so the questions below reduce to saturated integer
// lattices. The fragment is treated as a direct summand of M, hence ℓᴺM ∩ fragment = ℓᴺ·fragment.

namespace detail {

inline Integer common_denominator(const std::vector<const std::vector<RoagElement>*>& lists) {
    Integer d = 1;
    for (const auto* l : lists)
        for (const auto& x : *l)
            for (const auto& q : x.coords) d = lcm(d, Integer(q.get_den()));
    return d;
}

inline ZVec scaled(const RoagElement& x, const Integer& D) {
    ZVec v;
    for (const auto& q : x.coords) {
        Rational s = q * Rational(D);
        v.push_back(s.get_num());
    }
    return v;
}

// Pure closure in ℤⁿ of the subgroup generated by xs.
inline IntLattice pure_closure(const ZMat& xs, size_t n) {
    return saturate(make_lattice(xs, n), full_lattice(n));
}

inline IntLattice plus_lN(const IntLattice& L, long l, int N) {
    ZMat g = L.basis;
    Integer q = pow_l(l, N);
    for (size_t i = 0; i < L.dim; ++i) {
        ZVec e(L.dim, 0);
        e[i] = q;
        g.push_back(e);
    }
    return make_lattice(g, L.dim);
}

inline IntLattice intersect(const IntLattice& a, const IntLattice& b) {
    ZMat st = a.basis;
    for (auto r : b.basis) {
        for (auto& x : r) x = -x;
        st.push_back(r);
    }
    ZMat ker = left_kernel(st, a.dim);
    ZMat gens;
    for (const auto& k : ker) {
        ZVec v(a.dim, 0);
        for (size_t i = 0; i < a.rank(); ++i) zv_axpy(v, k[i], a.basis[i]);
        gens.push_back(v);
    }
    return make_lattice(gens, a.dim);
}

inline bool divisible_by(const ZVec& v, const Integer& q) {
    for (const auto& x : v)
        if (x % q != 0) return false;
    return true;
}

// Writes x = Σ coords·basis + q·u and returns the Σ part.
inline ZVec split_off(const IntLattice& L, const ZVec& x, const Integer& q) {
    ZMat g = L.basis;
    for (size_t i = 0; i < L.dim; ++i) {
        ZVec e(L.dim, 0);
        e[i] = q;
        g.push_back(e);
    }
    ZMat st = g;
    st.push_back(x);
    ZMat ker = left_kernel(st, L.dim);
    // fold kernel vectors by extended gcd until the coefficient on x is ±1
    ZVec acc(st.size(), 0);
    for (const auto& k : ker) {
        if (k.back() == 0) continue;
        if (acc.back() == 0) {
            acc = k;
            continue;
        }
        Integer g, s, t;
        mpz_gcdext(g.get_mpz_t(), s.get_mpz_t(), t.get_mpz_t(), acc.back().get_mpz_t(), k.back().get_mpz_t());
        for (size_t i = 0; i < acc.size(); ++i) acc[i] = s * acc[i] + t * k[i];
    }
    if (abs(acc.back()) == 1) {
        ZVec part(L.dim, 0);
        for (size_t i = 0; i < L.rank(); ++i) zv_axpy(part, -acc.back() * acc[i], L.basis[i]);
        return part;
    }
    throw internal_error("split_off: vector outside L + qℤⁿ");
}

}  // namespace detail

// Saturated special subgroups A′ ⊆ B′, A′ ⊆ C′ of the touched fragment.
struct RoagSpaces {
    RoagModelPtr model;
    Integer scale = 1;  // common S-unit clearing every denominator (DenseArch)
    IntLattice A, B, C;
    std::vector<RoagElement> Agens, Bgens, Cgens;
};

inline RoagSpaces roag_spaces(const RoagModelPtr& m, const std::vector<RoagElement>& C, const std::vector<RoagElement>& A,
                              const std::vector<RoagElement>& B) {
    if (m->kind == PresburgerModel::LexHahn)
        throw input_error("lex-hahn models are not regular; forking queries need roag-dense or roag-zgroup");
    for (const auto* l : {&C, &A, &B})
        for (const auto& x : *l) validate_element(*m, x);
    RoagSpaces sp{m, 1, {}, {}, {}, A, B, C};
    if (m->kind == PresburgerModel::ZGroup) sp.Agens.push_back(one_element(*m));
    sp.Bgens.insert(sp.Bgens.begin(), sp.Agens.begin(), sp.Agens.end());
    sp.Cgens.insert(sp.Cgens.begin(), sp.Agens.begin(), sp.Agens.end());
    if (m->kind == PresburgerModel::DenseArch) {
        size_t n = m->dim();
        sp.scale = detail::common_denominator({&A, &B, &C});
        auto lat = [&](const std::vector<RoagElement>& xs) {
            ZMat z;
            for (const auto& x : xs) z.push_back(detail::scaled(x, sp.scale));
            return detail::pure_closure(z, n);
        };
        sp.A = lat(sp.Agens);
        sp.B = lat(sp.Bgens);
        sp.C = lat(sp.Cgens);
    }
    return sp;
}

inline bool inverted_prime(const PresburgerModel& m, long l) {
    return m.kind != PresburgerModel::ZGroup && m.inverted.contains(l);
}

// (C′ + ℓᴺ) ∩ (B′ + ℓᴺ) ≠ A′ + ℓᴺ: x lies on both sides, x − c, x − b ∈ ℓᴺ·fragment, x ∉ A′ + ℓᴺ.
struct CosetWitness {
    long l = 0;
    int N = 0;
    RoagElement x, c, b;
};

inline RoagElement unscaled(const ZVec& v, const Integer& D) {
    RoagElement e;
    for (const auto& x : v) e.coords.push_back(Rational(x) / Rational(D));
    for (auto& q : e.coords) q.canonicalize();
    return e;
}

// Lattice-level check of condition 2 at one (ℓ, N); DenseArch only.
inline std::optional<CosetWitness> condition2_at(const RoagSpaces& sp, long l, int N) {
    const PresburgerModel& m = *sp.model;
    if (m.kind != PresburgerModel::DenseArch || m.inverted.contains(l)) return std::nullopt;
    IntLattice lhs = detail::intersect(detail::plus_lN(sp.C, l, N), detail::plus_lN(sp.B, l, N));
    IntLattice rhs = detail::plus_lN(sp.A, l, N);
    Integer q = pow_l(l, N);
    for (const auto& x : lhs.basis) {
        if (contains(rhs, x)) continue;
        ZVec c = detail::split_off(sp.C, x, q), b = detail::split_off(sp.B, x, q);
        return CosetWitness{l, N, unscaled(x, sp.scale), unscaled(c, sp.scale), unscaled(b, sp.scale)};
    }
    return std::nullopt;
}

inline bool verify_coset_witness(const RoagSpaces& sp, const CosetWitness& w) {
    const PresburgerModel& m = *sp.model;
    if (m.kind != PresburgerModel::DenseArch || m.inverted.contains(w.l)) return false;
    Integer q = pow_l(w.l, w.N);
    ZVec x = detail::scaled(w.x, sp.scale), c = detail::scaled(w.c, sp.scale), b = detail::scaled(w.b, sp.scale);
    ZVec xc = x, xb = x;
    for (size_t i = 0; i < x.size(); ++i) {
        xc[i] -= c[i];
        xb[i] -= b[i];
    }
    return contains(sp.C, c) && contains(sp.B, b) && detail::divisible_by(xc, q) && detail::divisible_by(xb, q) &&
           !contains(detail::plus_lN(sp.A, w.l, w.N), x);
}

// Primes where condition 2 can fail, with the level N* beyond which its verdict is constant:
// only ℓ dividing the torsion of ℤⁿ/(B′ + C′) matter, and a failure at any level already shows at
// the largest ℓ-exponent of that torsion.
struct Condition2Plan {
    std::vector<std::pair<long, int>> checks;  // (ℓ, N*)
};

inline Condition2Plan condition2_plan(const RoagSpaces& sp) {
    Condition2Plan plan;
    const PresburgerModel& m = *sp.model;
    if (m.kind != PresburgerModel::DenseArch) return plan;
    IntLattice BC = lattice_sum(sp.B, sp.C);
    std::map<long, int> emax;
    if (BC.rank() > 0)
        for (const auto& d : snf(BC.basis, BC.dim).diag())
            for (long p : prime_factors(d)) emax[p] = std::max(emax[p], vl(d, p));
    for (const auto& [p, e] : emax)
        if (m.infinite_index.contains(p) && !m.inverted.contains(p)) plan.checks.push_back({p, e + 1});
    return plan;
}

struct RoagVerdict {
    bool independent = true;
    std::optional<DoagWitness> interval;      // condition 1, in div(M)
    std::optional<CosetWitness> coset;        // condition 2
};

// Condition 1 runs the interval criterion on the divisible closures (a ℚ-span interval scaled by
// n and divided back gives a ℤ-span one, so spans may be taken over ℚ); condition 2 compares the
// prime cosets of the saturated special subgroups.
inline RoagVerdict forking_independent_roag(const RoagSpaces& sp, std::optional<int> levelOverride = std::nullopt) {
    const PresburgerModel& m = *sp.model;
    RoagVerdict v;
    auto lift = [&](const std::vector<RoagElement>& xs) {
        std::vector<OvsElement> out;
        for (const auto& x : xs) out.push_back(to_div(m, x));
        return out;
    };
    auto d = forking_independent_doag(m.div, lift(sp.Cgens), lift(sp.Agens), lift(sp.Bgens));
    if (!d.independent) {
        v.independent = false;
        v.interval = d.witness;
    }
    for (auto [l, Nstar] : condition2_plan(sp).checks) {
        int top = levelOverride.value_or(Nstar);
        for (int N = 1; N <= top && !v.coset; ++N) {
            auto w = condition2_at(sp, l, N);
            if (w) {
                ensure(verify_coset_witness(sp, *w), "roag: coset witness failed verification");
                v.independent = false;
                v.coset = w;
            }
        }
        if (v.coset) break;
    }
    return v;
}

inline RoagVerdict forking_independent_roag(const RoagModelPtr& m, const std::vector<RoagElement>& C,
                                            const std::vector<RoagElement>& A, const std::vector<RoagElement>& B) {
    return forking_independent_roag(roag_spaces(m, C, A, B));
}

// C′ ⊆ A′ + ℓᴺ·fragment at one level.
inline bool c_in_a_mod(const RoagSpaces& sp, long l, int N) {
    if (sp.model->kind != PresburgerModel::DenseArch || sp.model->inverted.contains(l)) return true;
    IntLattice rhs = detail::plus_lN(sp.A, l, N);
    for (const auto& c : sp.C.basis)
        if (!contains(rhs, c)) return false;
    return true;
}

// Levels beyond which C′ ⊆ A′ + ℓᴺ is constant: 1 + the ℓ-exponent of C′ modulo A′.
inline int inv_level_bound(const RoagSpaces& sp, long l) {
    int e = 0;
    IntLattice CA = lattice_sum(sp.C, sp.A);
    ZMat st = sp.A.basis;
    st.insert(st.end(), CA.basis.begin(), CA.basis.end());
    for (const auto& d : snf(st, CA.dim).diag()) e = std::max(e, vl(d, l));
    return e + 1;
}

struct InvResult {
    bool exists = true;
    std::optional<long> failing_prime;
    std::optional<int> failing_level;
};

// Finite-index primes force C′ ⊆ A′ + ⋂ℓᴺM; with infinitely many such primes only C′ = A′ survives,
// and the smallest such prime already fails.
inline InvResult inv_extension_exists(const RoagSpaces& sp) {
    const PresburgerModel& m = *sp.model;
    InvResult r;
    if (m.kind != PresburgerModel::DenseArch) return r;
    if (m.infinite_index.all || m.inverted.all) return r;
    if (sp.C == sp.A) return r;
    for (long l = 2;; ++l) {
        if (!is_prime(l) || m.infinite_index.contains(l) || m.inverted.contains(l)) continue;
        int top = inv_level_bound(sp, l);
        for (int N = 1; N <= top; ++N)
            if (!c_in_a_mod(sp, l, N)) {
                r.exists = false;
                r.failing_prime = l;
                r.failing_level = N;
                return r;
            }
        throw internal_error("inv: C′ ≠ A′ but the first finite-index prime does not separate them");
    }
}

struct RoagExtensionDescriptor {
    ExtensionSpaceDescriptor s1;
    std::vector<long> L;  // primes contributing a closed subspace of ℤ_ℓⁿ
    size_t n = 0;         // rank of C′ over A′
    std::string shape;
};

inline RoagExtensionDescriptor extension_space_roag(const RoagSpaces& sp, const std::vector<RoagElement>& tuple,
                                                    const std::vector<long>& primes) {
    const PresburgerModel& m = *sp.model;
    auto lift = [&](const std::vector<RoagElement>& xs) {
        std::vector<OvsElement> out;
        for (const auto& x : xs) out.push_back(to_div(m, x));
        return out;
    };
    RoagExtensionDescriptor out;
    DoagSpaces ds = doag_spaces(m.div, lift(sp.Cgens), lift(sp.Agens), lift(sp.Bgens));
    out.s1 = extension_space_doag(ds, lift(tuple));
    out.n = ds.C.dim() - ds.A.dim();
    for (long l : primes) {
        if (!is_prime(l)) throw input_error("extensions: " + std::to_string(l) + " is not prime");
        if (m.kind != PresburgerModel::DenseArch || m.inverted.contains(l) || m.infinite_index.contains(l)) continue;
        if (!(sp.C == sp.A)) out.L.push_back(l);  // ⋂ℓᴺ·fragment = 0 for ℓ ∉ S
    }
    out.shape = "S1[" + out.s1.shape + "]";
    for (long l : out.L) out.shape += " x S2_" + std::to_string(l) + "[closed subspace of Z_" + std::to_string(l) + "^" + std::to_string(out.n) + "]";
    if (out.n == 0) out.shape = "point";
    return out;
}

// ---------------------------------------------------------------------------------------------
// ℓ-types and CRT.

namespace detail {

inline std::vector<Integer> snf_diag_of(const ZMat& rows, size_t n) {
    if (rows.empty()) return {};
    return snf(rows, n).diag();
}

}  // namespace detail

// Levels beyond which the ℓ-type comparison is constant (checked at N* + 1 by the property suite).
inline int ltype_level_bound(const RoagSpaces& sp, const std::vector<ZVec>& c, const std::vector<ZVec>& d, long l) {
    size_t n = sp.B.dim;
    int e = 0;
    auto take = [&](const ZMat& rows) {
        for (const auto& x : detail::snf_diag_of(rows, n)) e = std::max(e, vl(x, l));
    };
    ZMat all = sp.B.basis, bc = sp.B.basis, bd = sp.B.basis, diff;
    for (size_t i = 0; i < c.size(); ++i) {
        ZVec df = c[i];
        for (size_t j = 0; j < n; ++j) df[j] -= d[i][j];
        all.push_back(c[i]);
        all.push_back(d[i]);
        bc.push_back(c[i]);
        bd.push_back(d[i]);
        diff.push_back(df);
    }
    take(all);
    take(bc);
    take(bd);
    take(diff);
    ZMat bdiff = sp.B.basis;
    bdiff.insert(bdiff.end(), diff.begin(), diff.end());
    take(bdiff);
    return e + 1;
}

// At one level: every form f with f(c) or f(d) in B′ + ℓᴺ has f(c) − f(d) ∈ ℓᴺ. The forms with
// f(c) ∈ B′ + ℓᴺ make a lattice, so checking its basis suffices.
inline bool ltype_equal_at(const RoagSpaces& sp, const std::vector<ZVec>& c, const std::vector<ZVec>& d, long l, int N) {
    size_t n = sp.B.dim, k = c.size();
    Integer q = pow_l(l, N);
    IntLattice L = detail::plus_lN(sp.B, l, N);
    for (const auto* side : {&c, &d}) {
        ZMat st = *side;
        for (auto r : L.basis) {
            for (auto& x : r) x = -x;
            st.push_back(r);
        }
        for (const auto& rel : left_kernel(st, n)) {
            ZVec v(n, 0);
            for (size_t i = 0; i < k; ++i)
                for (size_t j = 0; j < n; ++j) v[j] += rel[i] * (c[i][j] - d[i][j]);
            if (!detail::divisible_by(v, q)) return false;
        }
    }
    return true;
}

struct LTypeResult {
    bool equal = true;
    int levels_checked = 0;
};

inline LTypeResult ltype_equal(const RoagModelPtr& m, const std::vector<RoagElement>& c, const std::vector<RoagElement>& d,
                               const std::vector<RoagElement>& B, long l, std::optional<int> levelOverride = std::nullopt) {
    if (c.size() != d.size()) throw input_error("ltype: tuples have different lengths");
    if (!is_prime(l)) throw input_error("ltype: " + std::to_string(l) + " is not prime");
    LTypeResult r;
    if (m->kind == PresburgerModel::ZGroup) {
        // 𝟙 ∈ B′ makes B′ + ℓᴺ everything; only the discrete coordinates of c − d matter
        for (const auto* l2 : {&c, &d, &B})
            for (const auto& x : *l2) validate_element(*m, x);
        int e = 0;
        for (size_t i = 0; i < c.size(); ++i) e = std::max(e, vl(c[i].coords.back().get_num() - d[i].coords.back().get_num(), l));
        r.levels_checked = levelOverride.value_or(e + 1);
        for (size_t i = 0; i < c.size(); ++i) {
            Integer df = c[i].coords.back().get_num() - d[i].coords.back().get_num();
            if (df % pow_l(l, r.levels_checked) != 0) r.equal = false;
        }
        return r;
    }
    std::vector<RoagElement> all = c;
    all.insert(all.end(), d.begin(), d.end());
    RoagSpaces sp = roag_spaces(m, all, {}, B);
    if (m->inverted.contains(l)) return r;
    std::vector<ZVec> cz, dz;
    for (const auto& x : c) cz.push_back(detail::scaled(x, sp.scale));
    for (const auto& x : d) dz.push_back(detail::scaled(x, sp.scale));
    r.levels_checked = levelOverride.value_or(ltype_level_bound(sp, cz, dz, l));
    for (int N = 1; N <= r.levels_checked && r.equal; ++N) r.equal = ltype_equal_at(sp, cz, dz, l, N);
    return r;
}

struct CrtConstraint {
    long l;
    int N;
    RoagElement a;
};

inline Integer residue_mod(const Rational& q, const Integer& m) {
    return mod_nonneg(Integer(q.get_num()) * mod_inverse(Integer(q.get_den()), m), m);
}

// b with aₗ − b ∈ ℓᴺ·fragment for every constraint; inverted primes impose nothing.
inline RoagElement crt_lift(const RoagModelPtr& m, const std::vector<CrtConstraint>& cs) {
    if (cs.empty()) throw input_error("crt: no constraints");
    std::set<long> seen;
    for (const auto& c : cs) {
        if (!is_prime(c.l)) throw input_error("crt: " + std::to_string(c.l) + " is not prime");
        if (c.N < 1) throw input_error("crt: level must be positive");
        if (!seen.insert(c.l).second) throw input_error("crt: primes must be pairwise distinct");
        validate_element(*m, c.a);
    }
    if (cs.size() == 1) return cs[0].a;
    std::vector<const CrtConstraint*> live;
    for (const auto& c : cs)
        if (!inverted_prime(*m, c.l)) live.push_back(&c);
    if (live.empty()) return cs[0].a;
    RoagElement b = cs[0].a;
    size_t from = m->kind == PresburgerModel::ZGroup ? b.coords.size() - 1 : 0;
    for (size_t j = from; j < b.coords.size(); ++j) {
        Integer x = 0, mod = 1;
        for (const auto* c : live) {
            Integer q = pow_l(c->l, c->N);
            Integer r = residue_mod(c->a.coords[j], q);
            // x + mod·t ≡ r (mod q)
            Integer t = mod_nonneg((r - x) * mod_inverse(mod, q), q);
            x += mod * t;
            mod *= q;
        }
        b.coords[j] = Rational(x);
    }
    return b;
}

inline bool crt_verifies(const RoagModelPtr& m, const std::vector<CrtConstraint>& cs, const RoagElement& b) {
    for (const auto& c : cs) {
        if (inverted_prime(*m, c.l)) continue;
        Integer q = pow_l(c.l, c.N);
        size_t from = m->kind == PresburgerModel::ZGroup ? b.coords.size() - 1 : 0;
        for (size_t j = from; j < b.coords.size(); ++j) {
            Rational df = c.a.coords[j] - b.coords[j];
            if (df != 0 && vl(df.get_num(), c.l) < c.N + vl(df.get_den(), c.l)) return false;
        }
    }
    return true;
}

// ---------------------------------------------------------------------------------------------
// Spine.

inline int compare_exp(const std::vector<Rational>& a, const std::vector<Rational>& b) {
    for (size_t i = 0; i < a.size(); ++i)
        if (a[i] != b[i]) return a[i] < b[i] ? -1 : 1;
    return 0;
}

inline void validate_hahn(const PresburgerModel& m, const HahnElement& g) {
    if (m.kind != PresburgerModel::LexHahn) throw input_error("hahn element on a non lex-hahn model");
    for (size_t i = 0; i < g.terms.size(); ++i) {
        const auto& t = g.terms[i];
        if (t.exp.size() != m.chain.size()) throw input_error("lex-hahn: exponent length does not match the chain");
        for (size_t k = 0; k < t.exp.size(); ++k) {
            const auto& f = m.chain[k];
            const Rational& e = t.exp[k];
            bool integral = e.get_den() == 1;
            bool ok = f.kind == ChainFactor::Q || (f.kind == ChainFactor::QNonPos && e <= 0) ||
                      (f.kind == ChainFactor::Z && integral) || (f.kind == ChainFactor::ZNonPos && integral && e <= 0) ||
                      (f.kind == ChainFactor::Finite && integral && e >= 0 && e < f.size);
            if (!ok) throw input_error("lex-hahn: exponent " + to_string(e) + " outside its chain factor");
        }
        if (!s_integral(t.coef, m.inverted)) throw input_error("lex-hahn: coefficient outside ℤ[S⁻¹]");
        for (size_t j = 0; j < i; ++j)
            if (compare_exp(g.terms[j].exp, t.exp) == 0) throw input_error("lex-hahn: repeated exponent");
    }
}

// Convex subgroup {x : Δ(x) < Δ(t^bound)} (or ≤ when inclusive); absent bound means {0}.
struct SpineResult {
    std::optional<std::vector<Rational>> bound;
    bool inclusive = false;

    bool is_zero() const { return !bound; }
};

inline bool coef_divisible(const PresburgerModel& m, const Rational& q, long l, int N) {
    if (m.inverted.contains(l) || q == 0) return true;
    return vl(q.get_num(), l) >= N;
}

// (g + H) ∩ ℓᴺG = ∅ ⟺ some coefficient of g outside H is not in ℓᴺ·ℤ[S⁻¹] (H absorbs the rest).
inline bool spine_empty(const PresburgerModel& m, const HahnElement& g, const SpineResult& H, long l, int N) {
    for (const auto& t : g.terms) {
        bool inH = H.bound && (H.inclusive ? compare_exp(t.exp, *H.bound) <= 0 : compare_exp(t.exp, *H.bound) < 0);
        if (!inH && !coef_divisible(m, t.coef, l, N)) return true;
    }
    return false;
}

// The next convex subgroup above H in the chain generated by the support of g.
inline SpineResult next_larger(const SpineResult& H) {
    if (!H.bound) return H;
    return {H.bound, true};
}

// Largest convex H with (g + H) ∩ ℓᴺG = ∅: everything strictly below the largest exponent whose
// coefficient is not divisible by ℓᴺ; {0} when g ∈ ℓᴺG. Archimedean and ℤ-group models have {0}.
inline SpineResult spine(const RoagModelPtr& m, const HahnElement& g, long l, int N) {
    if (!is_prime(l)) throw input_error("spine: " + std::to_string(l) + " is not prime");
    if (N < 1) throw input_error("spine: level must be positive");
    SpineResult r;
    if (m->kind != PresburgerModel::LexHahn) return r;
    validate_hahn(*m, g);
    for (const auto& t : g.terms)
        if (!coef_divisible(*m, t.coef, l, N) && (!r.bound || compare_exp(t.exp, *r.bound) > 0)) r.bound = t.exp;
    return r;
}

}  // namespace oagfork
