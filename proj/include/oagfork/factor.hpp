#pragma once

#include "oagfork/poly.hpp"

#include <cstdint>
#include <random>
#include <vector>

namespace oagfork {

// Factorization of squarefree integer polynomials into irreducibles over ℚ
// (Zassenhaus: factor mod p, Hensel-lift, recombine).
namespace detail {

using u64 = std::uint64_t;
using MPoly = std::vector<u64>;  // coefficients mod a small prime, lowest degree first

struct ModP {
    u64 p;

    u64 add(u64 a, u64 b) const { return (a + b) % p; }
    u64 sub(u64 a, u64 b) const { return (a + p - b) % p; }
    u64 mul(u64 a, u64 b) const { return (a * b) % p; }
    u64 pow(u64 a, u64 e) const {
        u64 r = 1;
        a %= p;
        while (e) {
            if (e & 1) r = mul(r, a);
            a = mul(a, a);
            e >>= 1;
        }
        return r;
    }
    u64 inv(u64 a) const { return pow(a, p - 2); }

    MPoly reduce(const ZPoly& z) const {
        MPoly r(z.size());
        Integer pp(static_cast<unsigned long>(p));
        for (size_t i = 0; i < z.size(); ++i) {
            Integer m = z[i] % pp;
            if (m < 0) m += pp;
            r[i] = m.get_ui();
        }
        trim(r);
        return r;
    }
    MPoly sub(const MPoly& a, const MPoly& b) const {
        MPoly r(std::max(a.size(), b.size()), 0);
        for (size_t i = 0; i < a.size(); ++i) r[i] = a[i];
        for (size_t i = 0; i < b.size(); ++i) r[i] = sub(r[i], b[i]);
        trim(r);
        return r;
    }
    MPoly mul(const MPoly& a, const MPoly& b) const {
        if (a.empty() || b.empty()) return {};
        MPoly r(a.size() + b.size() - 1, 0);
        for (size_t i = 0; i < a.size(); ++i)
            for (size_t j = 0; j < b.size(); ++j) r[i + j] = add(r[i + j], mul(a[i], b[j]));
        trim(r);
        return r;
    }
    std::pair<MPoly, MPoly> divmod(MPoly a, const MPoly& b) const {
        trim(a);
        if (a.size() < b.size()) return {{}, a};
        MPoly q(a.size() - b.size() + 1, 0);
        u64 li = inv(b.back());
        for (int i = deg(a) - deg(b); i >= 0; --i) {
            u64 c = mul(a[i + b.size() - 1], li);
            q[i] = c;
            if (!c) continue;
            for (size_t j = 0; j < b.size(); ++j) a[i + j] = sub(a[i + j], mul(c, b[j]));
        }
        a.resize(b.size() - 1);
        trim(a);
        trim(q);
        return {q, a};
    }
    MPoly rem(const MPoly& a, const MPoly& b) const { return divmod(a, b).second; }
    MPoly monic(MPoly a) const {
        if (a.empty()) return a;
        u64 li = inv(a.back());
        for (auto& c : a) c = mul(c, li);
        return a;
    }
    MPoly gcd(MPoly a, MPoly b) const {
        trim(a);
        trim(b);
        while (!b.empty()) {
            MPoly r = rem(a, b);
            a = std::move(b);
            b = std::move(r);
        }
        return monic(a);
    }
    // s with s·a ≡ 1 (mod m); a and m coprime.
    MPoly inverse_mod(const MPoly& a, const MPoly& m) const {
        MPoly r0 = m, r1 = rem(a, m), s0 = {}, s1 = {1};
        while (!r1.empty()) {
            auto [q, r] = divmod(r0, r1);
            MPoly s = sub(s0, mul(q, s1));
            r0 = std::move(r1);
            r1 = std::move(r);
            s0 = std::move(s1);
            s1 = std::move(s);
        }
        ensure(r0.size() == 1, "inverse_mod: not coprime");
        u64 li = inv(r0[0]);
        for (auto& c : s0) c = mul(c, li);
        return s0;
    }
    MPoly powmod(MPoly base, const Integer& e, const MPoly& m) const {
        MPoly r = {1};
        base = rem(base, m);
        size_t bits = mpz_sizeinbase(e.get_mpz_t(), 2);
        for (size_t i = bits; i-- > 0;) {
            r = rem(mul(r, r), m);
            if (mpz_tstbit(e.get_mpz_t(), i)) r = rem(mul(r, base), m);
        }
        return r;
    }
    MPoly derivative(const MPoly& a) const {
        if (a.size() <= 1) return {};
        MPoly r(a.size() - 1);
        for (size_t i = 1; i < a.size(); ++i) r[i - 1] = mul(a[i], i % p);
        trim(r);
        return r;
    }
};

// Distinct-degree then equal-degree splitting of a monic squarefree polynomial mod p (p odd).
inline std::vector<MPoly> factor_mod_p(const ModP& F, const MPoly& f, std::mt19937_64& rng) {
    std::vector<std::pair<MPoly, int>> dd;
    MPoly rest = f, h = {0, 1};
    for (int d = 1; 2 * d <= deg(rest); ++d) {
        h = F.powmod(h, Integer(static_cast<unsigned long>(F.p)), rest);
        MPoly g = F.gcd(F.sub(h, MPoly{0, 1}), rest);
        if (deg(g) > 0) {
            dd.push_back({g, d});
            rest = F.divmod(rest, g).first;
            h = F.rem(h, rest);
        }
    }
    if (deg(rest) > 0) dd.push_back({F.monic(rest), deg(rest)});

    std::vector<MPoly> out;
    for (auto& [g, d] : dd) {
        std::vector<MPoly> todo{g};
        Integer e;
        mpz_ui_pow_ui(e.get_mpz_t(), F.p, d);
        e = (e - 1) / 2;
        while (!todo.empty()) {
            MPoly cur = todo.back();
            todo.pop_back();
            if (deg(cur) == d) {
                out.push_back(F.monic(cur));
                continue;
            }
            for (;;) {
                MPoly a(deg(cur));
                for (auto& c : a) c = rng() % F.p;
                trim(a);
                if (deg(a) < 1) continue;
                MPoly b = F.sub(F.powmod(a, e, cur), MPoly{1});
                MPoly s = F.gcd(b, cur);
                if (deg(s) > 0 && deg(s) < deg(cur)) {
                    todo.push_back(s);
                    todo.push_back(F.divmod(cur, s).first);
                    break;
                }
            }
        }
    }
    return out;
}

inline ZPoly zp_mod(const ZPoly& a, const Integer& m) {
    ZPoly r(a.size());
    for (size_t i = 0; i < a.size(); ++i) {
        r[i] = a[i] % m;
        if (r[i] < 0) r[i] += m;
    }
    trim(r);
    return r;
}

inline ZPoly zp_mul(const ZPoly& a, const ZPoly& b) {
    if (a.empty() || b.empty()) return {};
    ZPoly r(a.size() + b.size() - 1);
    for (size_t i = 0; i < a.size(); ++i)
        for (size_t j = 0; j < b.size(); ++j) r[i + j] += a[i] * b[j];
    trim(r);
    return r;
}

inline ZPoly from_mod(const MPoly& a) {
    ZPoly r(a.size());
    for (size_t i = 0; i < a.size(); ++i) r[i] = Integer(static_cast<unsigned long>(a[i]));
    return r;
}

// Exact division of monic integer polynomials; returns false if b does not divide a.
inline bool zp_divides(const ZPoly& a, const ZPoly& b, ZPoly& quo) {
    ZPoly r(a);
    if (r.size() < b.size()) return false;
    quo.assign(r.size() - b.size() + 1, 0);
    for (int i = deg(r) - deg(b); i >= 0; --i) {
        Integer c = r[i + b.size() - 1];
        if (c % b.back() != 0) return false;
        c /= b.back();
        quo[i] = c;
        for (size_t j = 0; j < b.size(); ++j) r[i + j] -= c * b[j];
    }
    for (const auto& c : r)
        if (c != 0) return false;
    trim(quo);
    return true;
}

// Lift f ≡ g·h (mod p) to mod p^a; f monic, g and h monic and coprime mod p.
inline void hensel_lift(const ZPoly& f, ZPoly& g, ZPoly& h, const ModP& F, int a) {
    MPoly gp = F.reduce(g), hp = F.reduce(h);
    MPoly t = F.inverse_mod(hp, gp);  // t·h ≡ 1 (mod g)
    Integer p(static_cast<unsigned long>(F.p)), pk = p;
    for (int k = 1; k < a; ++k) {
        ZPoly diff = f;
        ZPoly gh = zp_mul(g, h);
        diff.resize(std::max(diff.size(), gh.size()));
        for (size_t i = 0; i < gh.size(); ++i) diff[i] -= gh[i];
        trim(diff);
        for (auto& c : diff) c /= pk;  // exact
        MPoly e = F.reduce(diff);
        MPoly dg = F.rem(F.mul(t, e), gp);
        MPoly dh = F.divmod(F.sub(e, F.mul(dg, hp)), gp).first;
        ZPoly DG = from_mod(dg), DH = from_mod(dh);
        for (size_t i = 0; i < DG.size(); ++i) g[i] += pk * DG[i];
        for (size_t i = 0; i < DH.size(); ++i) h[i] += pk * DH[i];
        pk *= p;
        g = zp_mod(g, pk);
        h = zp_mod(h, pk);
    }
}

inline bool is_prime_small(u64 n) {
    if (n < 2) return false;
    for (u64 d = 2; d * d <= n; ++d)
        if (n % d == 0) return false;
    return true;
}

// Factors a monic squarefree integer polynomial of degree ≥ 2.
inline std::vector<ZPoly> factor_monic(const ZPoly& f) {
    int n = deg(f);
    std::mt19937_64 rng(0x5eed);
    // choose a prime with few modular factors
    ModP best{0};
    std::vector<MPoly> bestFactors;
    int tried = 0;
    for (u64 p = 3; tried < 6 && p < 100000; p += 2) {
        if (!is_prime_small(p)) continue;
        ModP F{p};
        MPoly fp = F.reduce(f);
        if (deg(fp) != n) continue;
        if (deg(F.gcd(fp, F.derivative(fp))) != 0) continue;
        ++tried;
        auto fs = factor_mod_p(F, fp, rng);
        if (best.p == 0 || fs.size() < bestFactors.size()) {
            best = F;
            bestFactors = fs;
        }
        if (fs.size() == 1) break;
    }
    ensure(best.p != 0, "no good prime for factorization");
    if (bestFactors.size() == 1) return {f};

    Integer maxc = 0;
    for (const auto& c : f) maxc = std::max(maxc, Integer(abs(c)));
    Integer bound = (Integer(1) << n) * (n + 1) * maxc * 2;
    Integer p(static_cast<unsigned long>(best.p)), pa = p;
    int a = 1;
    while (pa <= bound) {
        pa *= p;
        ++a;
    }

    // lift one factor at a time against the product of the rest
    std::vector<ZPoly> lifted;
    ZPoly cur = zp_mod(f, pa);
    ZPoly curExact = f;
    for (size_t i = 0; i + 1 < bestFactors.size(); ++i) {
        ZPoly g = from_mod(bestFactors[i]);
        MPoly restp = {1};
        for (size_t j = i + 1; j < bestFactors.size(); ++j) restp = best.mul(restp, bestFactors[j]);
        ZPoly h = from_mod(restp);
        hensel_lift(curExact, g, h, best, a);
        lifted.push_back(g);
        curExact = h;  // continue lifting inside the cofactor (correct modulo p^a)
    }
    lifted.push_back(curExact);

    auto symmetric = [&](ZPoly q) {
        Integer half = pa / 2;
        for (auto& c : q) {
            c %= pa;
            if (c < 0) c += pa;
            if (c > half) c -= pa;
        }
        trim(q);
        return q;
    };

    std::vector<ZPoly> result;
    ZPoly F = f;
    std::vector<ZPoly> pool = lifted;
    for (size_t s = 1; 2 * s <= pool.size();) {
        bool found = false;
        std::vector<size_t> idx(s);
        for (size_t i = 0; i < s; ++i) idx[i] = i;
        for (;;) {
            ZPoly g = {1};
            for (size_t i : idx) g = zp_mod(zp_mul(g, pool[i]), pa);
            g = symmetric(g);
            ZPoly quo;
            if (zp_divides(F, g, quo)) {
                result.push_back(g);
                F = quo;
                std::vector<ZPoly> next;
                for (size_t i = 0, k = 0; i < pool.size(); ++i) {
                    if (k < s && idx[k] == i) {
                        ++k;
                        continue;
                    }
                    next.push_back(pool[i]);
                }
                pool = std::move(next);
                found = true;
                break;
            }
            // next combination
            int pos = static_cast<int>(s) - 1;
            while (pos >= 0 && idx[pos] == pool.size() - s + pos) --pos;
            if (pos < 0) break;
            ++idx[pos];
            for (size_t k = pos + 1; k < s; ++k) idx[k] = idx[k - 1] + 1;
        }
        if (!found) ++s;
    }
    if (deg(F) > 0) result.push_back(F);
    return result;
}

}  // namespace detail

// Irreducible factors (primitive, positive leading coefficient) of a squarefree nonconstant polynomial.
inline std::vector<ZPoly> factor_squarefree(const QPoly& poly) {
    ZPoly f = primitive_part(poly);
    ensure(deg(f) >= 1, "factor_squarefree: constant polynomial");
    std::vector<ZPoly> out;
    if (f[0] == 0) {
        out.push_back({0, 1});
        f.erase(f.begin());
    }
    if (deg(f) == 1) out.push_back(f);
    if (deg(f) <= 1) return out;
    int n = deg(f);
    Integer lc = f.back();
    // F(x) = lc^{n-1} f(x/lc) is monic
    ZPoly F(n + 1);
    F[n] = 1;
    Integer pw = 1;
    for (int i = n - 1; i >= 0; --i) {
        F[i] = f[i] * pw;
        pw *= lc;
    }
    for (auto& g : detail::factor_monic(F)) {
        QPoly back(g.size());
        Integer s = 1;
        for (size_t i = 0; i < g.size(); ++i) {
            back[i] = Rational(g[i] * s);
            s *= lc;
        }
        out.push_back(primitive_part(back));
    }
    return out;
}

}  // namespace oagfork
