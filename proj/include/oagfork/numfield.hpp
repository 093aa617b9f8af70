#pragma once

#include "oagfork/factor.hpp"
#include "oagfork/linalg.hpp"
#include "oagfork/poly.hpp"

#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

namespace oagfork {

// A real algebraic number: the unique root of `minpoly` inside the open interval (lo, hi).
struct RealAlgebraic {
    ZPoly minpoly;
    Rational lo, hi;

    bool operator==(const RealAlgebraic& o) const {
        return minpoly == o.minpoly && lo == o.lo && hi == o.hi;
    }
};

inline std::string key_of(const RealAlgebraic& a) {
    std::string k = "[";
    for (const auto& c : a.minpoly) k += c.get_str() + ",";
    return k + "](" + to_string(a.lo) + "," + to_string(a.hi) + ")";
}

// Normalizes to a primitive minpoly and checks the isolation invariants.
inline RealAlgebraic validated(RealAlgebraic a) {
    QPoly q = to_q(a.minpoly);
    trim(q);
    if (deg(q) < 1) throw input_error("real algebraic number: minpoly must have degree >= 1");
    a.minpoly = primitive_part(q);
    q = to_q(a.minpoly);
    if (deg(qp_gcd(q, qp_derivative(q))) > 0)
        throw input_error("real algebraic number: minpoly is not squarefree");
    if (!(a.lo < a.hi)) throw input_error("real algebraic number: empty isolating interval");
    if (qp_eval(q, a.lo) == 0 || qp_eval(q, a.hi) == 0)
        throw input_error("real algebraic number: interval endpoint is a root");
    if (count_roots(sturm_chain(q), a.lo, a.hi) != 1)
        throw input_error("real algebraic number: interval does not isolate exactly one root");
    return a;
}

inline RealAlgebraic ra_rational(const Rational& q) {
    return validated({primitive_part(QPoly{-q, 1}), q - 1, q + 1});
}

// Positive square root of n > 0.
inline RealAlgebraic ra_sqrt(long n) {
    return validated({ZPoly{Integer(-n), 0, 1}, 0, Rational(n + 1)});
}

// ℚ(θ) for a real algebraic θ, presented by its monic minimal polynomial and an
// isolating interval that is refined lazily (guarded, so fields can be shared across threads).
class NumberField {
public:
    NumberField(QPoly modulus, Interval box) : m_(qp_monic(modulus)), box_(box) {
        if (deg(m_) == 1) box_ = {-m_[0], -m_[0]};
        refine_to(Rational(1, 1 << 30));
    }

    const QPoly& modulus() const { return m_; }
    int degree() const { return deg(m_); }

    QPoly reduce(const QPoly& f) const { return qp_rem(f, m_); }
    QPoly mul(const QPoly& a, const QPoly& b) const { return reduce(qp_mul(a, b)); }
    QPoly inv(const QPoly& a) const {
        ensure(!a.empty(), "field inverse of zero");
        auto [g, s] = qp_gcd_cofactor(a, m_);
        ensure(g.size() == 1, "field inverse: modulus not irreducible");
        return reduce(s);
    }

    Interval box() const {
        std::lock_guard<std::mutex> lk(mu_);
        return box_;
    }

    // Exact sign of f(θ); f must already be reduced.
    int sign(const QPoly& f) const {
        if (f.empty()) return 0;
        if (f.size() == 1) return sign_of(f[0]);
        Interval b = box();
        int s = sign_by_refinement(f, b, [this](Interval& x) { bisect(x); });
        store(b);
        return s;
    }

    // Rational enclosure of f(θ) of width at most w.
    Interval enclose(const QPoly& f, const Rational& w) const {
        Interval b = box();
        for (;;) {
            Interval v = qp_eval_interval(f, b);
            if (v.hi - v.lo <= w) {
                store(b);
                return v;
            }
            bisect(b);
        }
    }

    void refine_to(const Rational& w) {
        Interval b = box();
        while (b.hi - b.lo > w) bisect(b);
        store(b);
    }

private:
    void bisect(Interval& x) const {
        if (x.lo == x.hi) return;
        Rational mid = (x.lo + x.hi) / 2;
        int sm = sign_of(qp_eval(m_, mid)), sl = sign_of(qp_eval(m_, x.lo));
        ensure(sm != 0, "number field: rational root of irreducible modulus");
        if (sm == sl) x.lo = mid;
        else x.hi = mid;
    }

    void store(const Interval& b) const {
        std::lock_guard<std::mutex> lk(mu_);
        if (b.hi - b.lo < box_.hi - box_.lo) box_ = b;
    }

    QPoly m_;
    mutable Interval box_;
    mutable std::mutex mu_;
};

// A common number field containing a list of real algebraic numbers, with each number's representation.
struct FieldEmbedding {
    std::shared_ptr<const NumberField> field;
    std::vector<QPoly> reps;
};

namespace detail {

// Minimal polynomial factor of a whose root is the isolated one; refines a's interval to the factor's isolation.
inline RealAlgebraic irreducible_part(const RealAlgebraic& a) {
    for (const auto& f : factor_squarefree(to_q(a.minpoly))) {
        QPoly q = to_q(f);
        if (count_roots(sturm_chain(q), a.lo, a.hi) == 1) return {f, a.lo, a.hi};
    }
    throw internal_error("irreducible_part: no factor owns the root");
}

inline void bisect_root(const QPoly& q, Interval& x) {
    Rational mid = (x.lo + x.hi) / 2;
    int sm = sign_of(qp_eval(q, mid));
    if (sm == 0) {
        x = {mid, mid};
        return;
    }
    if (sm == sign_of(qp_eval(q, x.lo))) x.lo = mid;
    else x.hi = mid;
}

struct Adjoined {
    QPoly modulus;
    Interval box;
    QPoly oldTheta;  // previous generator in terms of the new one
    QPoly alpha;     // adjoined number in terms of the new one
};

// Primitive element for ℚ(θ, α): θ' = θ + kα, with minimal polynomial from the Krylov sequence.
inline Adjoined adjoin(const NumberField& F, const RealAlgebraic& alpha) {
    const QPoly& m = F.modulus();
    QPoly p = qp_monic(to_q(alpha.minpoly));
    int d1 = deg(m), d2 = deg(p), D = d1 * d2;
    auto idx = [d2](int i, int j) { return i * d2 + j; };
    // multiply two elements of ℚ[y,z]/(m(y), p(z)), stored as d1×d2 coefficient grids
    auto mulR = [&](const QVec& a, const QVec& b) {
        std::vector<QPoly> prod(2 * d1 - 1);
        // as polynomials in y with coefficients in ℚ[z]/(p)
        std::vector<QPoly> A(d1), B(d1);
        for (int i = 0; i < d1; ++i) {
            A[i].assign(a.begin() + idx(i, 0), a.begin() + idx(i, 0) + d2);
            B[i].assign(b.begin() + idx(i, 0), b.begin() + idx(i, 0) + d2);
            trim(A[i]);
            trim(B[i]);
        }
        for (int i = 0; i < d1; ++i)
            for (int j = 0; j < d1; ++j)
                prod[i + j] = qp_add(prod[i + j], qp_rem(qp_mul(A[i], B[j]), p));
        // reduce in y by m (monic)
        for (int k = 2 * d1 - 2; k >= d1; --k) {
            if (prod[k].empty()) continue;
            for (int t = 0; t < d1; ++t)
                prod[k - d1 + t] = qp_sub(prod[k - d1 + t], qp_scale(prod[k], m[t]));
            prod[k].clear();
        }
        QVec out(D);
        for (int i = 0; i < d1; ++i)
            for (int j = 0; j < static_cast<int>(prod[i].size()); ++j) out[idx(i, j)] = prod[i][j];
        return out;
    };
    QVec yv(D), zv(D), one(D);
    one[idx(0, 0)] = 1;
    if (d1 > 1) yv[idx(1, 0)] = 1;
    else yv[idx(0, 0)] = -m[0];
    if (d2 > 1) zv[idx(0, 1)] = 1;
    else zv[idx(0, 0)] = -p[0];

    for (long step = 1;; ++step) {
        long k = (step + 1) / 2 * ((step % 2) ? 1 : -1);
        QVec th = qv_add(yv, qv_scale(zv, Rational(k)));
        QMat powers{one};
        for (int i = 1; i <= D; ++i) powers.push_back(mulR(powers.back(), th));
        QMat basis(powers.begin(), powers.begin() + D);
        if (rank(basis) < static_cast<size_t>(D)) continue;
        auto c = solve_left(basis, powers[D]);
        auto ycoef = solve_left(basis, yv);
        auto zcoef = solve_left(basis, zv);
        ensure(c && ycoef && zcoef, "adjoin: Krylov solve failed");
        QPoly Q(D + 1);
        for (int i = 0; i < D; ++i) Q[i] = -(*c)[i];
        Q[D] = 1;
        QPoly Y(ycoef->begin(), ycoef->end()), Z(zcoef->begin(), zcoef->end());
        trim(Y);
        trim(Z);

        // locate θ + kα among the roots of Q
        auto chain = sturm_chain(Q);
        Interval tb = F.box(), ab{alpha.lo, alpha.hi};
        QPoly pa = to_q(alpha.minpoly);
        for (;;) {
            Interval e = iv_add(tb, iv_mul(Interval{Rational(k), Rational(k)}, ab));
            if (e.lo < e.hi && qp_eval(Q, e.lo) != 0 && qp_eval(Q, e.hi) != 0 &&
                count_roots(chain, e.lo, e.hi) == 1) {
                for (const auto& f : factor_squarefree(Q)) {
                    QPoly fq = to_q(f);
                    if (count_roots(sturm_chain(fq), e.lo, e.hi) == 1)
                        return {qp_monic(fq), e, qp_rem(Y, fq), qp_rem(Z, fq)};
                }
                throw internal_error("adjoin: no factor owns the primitive element");
            }
            if (tb.lo != tb.hi) {
                Rational mid = (tb.lo + tb.hi) / 2;
                int sm = sign_of(qp_eval(m, mid));
                if (sm == sign_of(qp_eval(m, tb.lo))) tb.lo = mid;
                else tb.hi = mid;
            }
            bisect_root(pa, ab);
        }
    }
}

inline FieldEmbedding build_embedding(const std::vector<RealAlgebraic>& xs) {
    auto F = std::make_shared<NumberField>(QPoly{0, 1}, Interval{0, 0});
    std::vector<QPoly> reps;
    for (const auto& raw : xs) {
        RealAlgebraic a = irreducible_part(raw);
        if (deg(a.minpoly) == 1) {
            QPoly r{Rational(-a.minpoly[0], a.minpoly[1])};
            trim(r);
            reps.push_back(r);
            continue;
        }
        if (F->degree() == 1) {
            F = std::make_shared<NumberField>(to_q(a.minpoly), Interval{a.lo, a.hi});
            reps.push_back({0, 1});
            continue;
        }
        Adjoined adj = adjoin(*F, a);
        auto G = std::make_shared<NumberField>(adj.modulus, adj.box);
        for (auto& r : reps) r = G->reduce(qp_compose(r, adj.oldTheta));
        reps.push_back(adj.alpha);
        F = G;
    }
    return {F, reps};
}

}  // namespace detail

// Shared, cached common field for a list of numbers (identical inputs give the identical field).
inline FieldEmbedding common_field(const std::vector<RealAlgebraic>& xs) {
    static std::mutex mu;
    static std::map<std::string, FieldEmbedding> cache;
    std::string key;
    for (const auto& x : xs) key += key_of(x) + ";";
    {
        std::lock_guard<std::mutex> lk(mu);
        auto it = cache.find(key);
        if (it != cache.end()) return it->second;
    }
    FieldEmbedding e = detail::build_embedding(xs);
    std::lock_guard<std::mutex> lk(mu);
    return cache.emplace(key, e).first->second;
}

inline int sign_combo(const std::vector<Rational>& coeffs, const std::vector<RealAlgebraic>& basis) {
    if (coeffs.size() != basis.size()) throw input_error("sign_combo: length mismatch");
    std::vector<RealAlgebraic> vb;
    for (const auto& b : basis) vb.push_back(validated(b));
    FieldEmbedding e = common_field(vb);
    QPoly s;
    for (size_t i = 0; i < coeffs.size(); ++i) s = qp_add(s, qp_scale(e.reps[i], coeffs[i]));
    return e.field->sign(s);
}

// Coefficient vector of a field element of degree < n.
inline QVec coeff_vector(const QPoly& f, int n) {
    QVec v(n);
    for (size_t i = 0; i < f.size(); ++i) v[i] = f[i];
    return v;
}

inline bool q_linear_independent(const std::vector<RealAlgebraic>& xs) {
    if (xs.empty()) throw input_error("q_linear_independent: empty list");
    std::vector<RealAlgebraic> v;
    for (const auto& x : xs) v.push_back(validated(x));
    FieldEmbedding e = common_field(v);
    QMat m;
    for (const auto& r : e.reps) m.push_back(coeff_vector(r, e.field->degree()));
    return rank(m) == xs.size();
}

}  // namespace oagfork
