#pragma once

#include "oagfork/linlex.hpp"
#include "oagfork/ovs.hpp"

#include <algorithm>
#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace oagfork {

inline void check_same_model(const ModelPtr& a, const ModelPtr& b) {
    if (a != b && (!a || !b || a->slots != b->slots)) throw input_error("elements belong to different models");
}

// Convex subgroup {x : Δ(x) < cls} or, when inclusive, {x : Δ(x) ≤ cls}. In the monster model
// {Δ ≤ k} strictly contains {Δ < k+1}, hence the doubled key.
struct ConvexTrace {
    ArchClass cls = BOTTOM;
    bool inclusive = true;

    int key() const { return 2 * cls + (inclusive ? 1 : 0); }
    bool operator==(const ConvexTrace& o) const { return key() == o.key(); }
    bool is_zero() const { return cls == BOTTOM && inclusive; }
};

inline std::optional<ArchClass> max_below(const std::set<ArchClass>& D, ArchClass x) {
    auto it = D.lower_bound(x);
    if (it == D.begin()) return std::nullopt;
    return *std::prev(it);
}

inline std::optional<ArchClass> min_above(const std::set<ArchClass>& D, ArchClass x) {
    auto it = D.upper_bound(x);
    if (it == D.end()) return std::nullopt;
    return *it;
}

enum class CutKind { InBase, Archimedean, Ramified };

inline const char* cut_kind_name(CutKind k) {
    switch (k) {
        case CutKind::InBase: return "in_base";
        case CutKind::Archimedean: return "archimedean";
        case CutKind::Ramified: return "ramified";
    }
    return "?";
}

struct CutClass {
    CutKind kind = CutKind::InBase;
    ConvexTrace g, h;
    std::optional<ArchClass> stab_top;
    std::optional<OvsElement> ramifier;
    std::optional<ArchClass> delta;
    int side = 0;          // sign of the residual when ramified
    OvsElement residual;   // canonical reduction modulo the base
};

inline CutClass classify_cut(const OvsElement& c, const QSubspace& A) {
    check_same_model(c.model, A.model);
    const OvsModel& m = *c.model;
    CutClass cc;
    cc.residual = reduce_mod(c, A);
    if (is_zero(cc.residual.coords)) return cc;
    auto D = delta_set(A);
    ArchClass gamma = delta(cc.residual);
    auto below = max_below(D, gamma);
    cc.h = {below.value_or(BOTTOM), true};
    cc.stab_top = below;
    if (D.count(gamma)) {
        cc.kind = CutKind::Archimedean;
        cc.g = {gamma, false};
    } else {
        cc.kind = CutKind::Ramified;
        cc.g = {min_above(D, gamma).value_or(static_cast<ArchClass>(m.nslots() + 1)), false};
        cc.ramifier = c - cc.residual;
        cc.delta = gamma;
        cc.side = sign(cc.residual);
    }
    return cc;
}

// ram(c/A) = representative + (A ∩ stab), stab = {Δ ≤ stab_top}.
struct RamifierCoset {
    OvsElement representative;
    ConvexTrace stab;
};

inline std::optional<RamifierCoset> ramifiers(const OvsElement& c, const QSubspace& A) {
    CutClass cc = classify_cut(c, A);
    if (cc.kind != CutKind::Ramified) return std::nullopt;
    return RamifierCoset{*cc.ramifier, cc.h};
}

struct AdHocValue {
    int v1 = 1;
    int v2 = 2;
    std::pair<int, int> v3{2, 0};
};

// v1 = G-threshold; v2 puts ramified below Archimedean at equal v1; v3 sub-orders ramified by δ.
inline AdHocValue adhoc_value(const CutClass& cc) {
    AdHocValue v;
    v.v1 = cc.g.key();
    v.v2 = 2 * v.v1 + (cc.kind == CutKind::Archimedean ? 1 : 0);
    v.v3 = {v.v2, cc.kind == CutKind::Ramified ? *cc.delta : 0};
    return v;
}

enum class ValKey { V1, V2, V3 };

struct BlockDecomposition {
    std::vector<std::vector<size_t>> v1, v2, v3;  // index blocks in increasing value
    std::vector<QMat> rays;  // per v3-block: slot-δ coordinates of the residuals (ramified blocks only)

    const std::vector<std::vector<size_t>>& blocks(ValKey k) const {
        return k == ValKey::V1 ? v1 : k == ValKey::V2 ? v2 : v3;
    }
};

namespace detail {

template <class V>
std::vector<std::vector<size_t>> group_by_value(const std::vector<V>& vals) {
    std::vector<size_t> idx(vals.size());
    for (size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::stable_sort(idx.begin(), idx.end(), [&](size_t a, size_t b) { return vals[a] < vals[b]; });
    std::vector<std::vector<size_t>> out;
    for (size_t i : idx) {
        if (out.empty() || vals[out.back().front()] != vals[i]) out.emplace_back();
        out.back().push_back(i);
    }
    return out;
}

inline QVec restrict_slots(const OvsModel& m, const QVec& v, size_t lo, size_t hi) {
    size_t a = lo < m.nslots() ? m.offset[lo] : m.dim;
    size_t b = hi < m.nslots() ? m.offset[hi] : m.dim;
    return QVec(v.begin() + static_cast<long>(a), v.begin() + static_cast<long>(b));
}

// Slots [lo, hi) holding the Archimedean classes [cmin, cmax].
inline std::pair<size_t, size_t> slots_of_classes(const OvsModel& m, int cmin, int cmax) {
    int n = static_cast<int>(m.nslots());
    cmin = std::max(cmin, 1);
    cmax = std::min(cmax, n);
    if (cmin > cmax) return {0, 0};
    return {static_cast<size_t>(n - cmax), static_cast<size_t>(n - cmin + 1)};
}

// Slots where a nontrivial combination of a block must stay nonzero to keep the block's value.
inline std::pair<size_t, size_t> block_window(const OvsModel& m, const CutClass& cc, ValKey key) {
    int h = cc.h.cls, g = cc.g.cls;
    bool ram = cc.kind == CutKind::Ramified;
    switch (key) {
        case ValKey::V1: return slots_of_classes(m, h + 1, g);
        case ValKey::V2: return ram ? slots_of_classes(m, h + 1, g - 1) : slots_of_classes(m, g, g);
        case ValKey::V3: return ram ? slots_of_classes(m, *cc.delta, *cc.delta) : slots_of_classes(m, g, g);
    }
    return {0, 0};
}

// Row-reduces vectors while tracking combinations: rows with pivot < width are independent
// combinations (value, coefficients); rows with pivot ≥ width are kernel vectors.
struct Tracked {
    QMat values, coeffs;
    std::vector<int> pivots;
    QMat kernel;
};

inline Tracked tracked_rref(const QMat& vs, size_t width) {
    Rref r;
    for (size_t i = 0; i < vs.size(); ++i) {
        QVec row(vs[i]);
        row.resize(width + vs.size());
        row[width + i] = 1;
        r.insert(row);
    }
    Tracked t;
    for (size_t i = 0; i < r.rows.size(); ++i) {
        QVec coef(r.rows[i].begin() + static_cast<long>(width), r.rows[i].end());
        if (r.pivots[i] < static_cast<int>(width)) {
            t.values.emplace_back(r.rows[i].begin(), r.rows[i].begin() + static_cast<long>(width));
            t.coeffs.push_back(coef);
            t.pivots.push_back(r.pivots[i]);
        } else {
            t.kernel.push_back(coef);
        }
    }
    return t;
}

inline size_t qrank(const QMat& vs) {
    Rref r;
    for (const auto& v : vs) r.insert(v);
    return r.rank();
}

inline OvsElement combine(const ModelPtr& m, const std::vector<OvsElement>& xs, const QVec& coef) {
    OvsElement e = zero_element(m);
    for (size_t i = 0; i < xs.size(); ++i)
        if (coef[i] != 0) qv_axpy(e.coords, coef[i], xs[i].coords);
    return e;
}

}  // namespace detail

inline std::pair<std::vector<AdHocValue>, BlockDecomposition> adhoc_values(const std::vector<OvsElement>& tuple,
                                                                          const QSubspace& A) {
    std::vector<AdHocValue> vals;
    std::vector<CutClass> ccs;
    for (const auto& x : tuple) {
        ccs.push_back(classify_cut(x, A));
        vals.push_back(adhoc_value(ccs.back()));
    }
    std::vector<int> k1, k2;
    std::vector<std::pair<int, int>> k3;
    for (const auto& v : vals) {
        k1.push_back(v.v1);
        k2.push_back(v.v2);
        k3.push_back(v.v3);
    }
    BlockDecomposition bd{detail::group_by_value(k1), detail::group_by_value(k2), detail::group_by_value(k3), {}};
    for (const auto& blk : bd.v3) {
        QMat ray;
        const CutClass& cc = ccs[blk.front()];
        if (cc.kind == CutKind::Ramified) {
            size_t s = slot_of_class(*A.model, *cc.delta);
            for (size_t i : blk) ray.push_back(detail::restrict_slots(*A.model, ccs[i].residual.coords, s, s + 1));
        }
        bd.rays.push_back(ray);
    }
    return {vals, bd};
}

// Every block keeps its value under nontrivial combinations. Slot bases are ℚ-independent, so
// ℚ-freeness of the leading slot values (the P⁺ ray for ramified v3-blocks) is rank of coordinates.
inline bool is_separated(const std::vector<OvsElement>& tuple, ValKey key, const QSubspace& base) {
    if (tuple.empty()) return true;
    std::vector<CutClass> ccs;
    for (const auto& x : tuple) ccs.push_back(classify_cut(x, base));
    auto bd = adhoc_values(tuple, base).second;
    const OvsModel& m = *base.model;
    for (const auto& blk : bd.blocks(key)) {
        const CutClass& cc = ccs[blk.front()];
        if (cc.kind == CutKind::InBase) continue;
        auto [lo, hi] = detail::block_window(m, cc, key);
        QMat rows;
        for (size_t i : blk) rows.push_back(detail::restrict_slots(m, ccs[i].residual.coords, lo, hi));
        if (detail::qrank(rows) != blk.size()) return false;
    }
    return true;
}

// ---------------------------------------------------------------------------------------------
// Cut membership as lexicographic constraints.

namespace detail {

inline LexExpr expr_lin(const LexExpr& a, const Rational& sa, const LexExpr& b, const Rational& sb) {
    LexExpr e{qv_add(qv_scale(a.constant, sa), qv_scale(b.constant, sb)), {}};
    for (size_t i = 0; i < a.coef.size(); ++i) e.coef.push_back(qv_add(qv_scale(a.coef[i], sa), qv_scale(b.coef[i], sb)));
    return e;
}

inline LexExpr span_expr(const LexSystem& sys, size_t first, const std::vector<OvsElement>& basis) {
    LexExpr e = sys.zero_expr();
    for (size_t i = 0; i < basis.size(); ++i) e.coef[first + i] = basis[i].coords;
    return e;
}

inline LexExpr const_expr(const LexSystem& sys, const QVec& v) {
    LexExpr e = sys.zero_expr();
    e.constant = v;
    return e;
}

inline size_t add_vars(LexSystem& sys, const std::string& prefix, size_t n) {
    size_t first = sys.nvars();
    for (size_t i = 0; i < n; ++i) sys.add_var(prefix + std::to_string(i));
    return first;
}

// Shape of ct(r/A′) for a residual r with leading slot `slot`.
struct CutProfile {
    CutKind kind;
    size_t slot;
    int side;        // ramified only
    ArchClass g, h;  // g = nslots + 1 when unbounded, h = ⊥ when absent
};

inline CutProfile profile_of(const OvsModel& m, const CutClass& cc) {
    return {cc.kind, slot_of_class(m, delta(cc.residual)), cc.side, cc.g.cls, cc.h.cls};
}

// y ∈ ct(r/A′): Archimedean ⟺ Δ(y − r) < Δ(r); ramified ⟺ sign y = side and h < Δ(y) < g.
inline void add_cut_membership(LexSystem& sys, const LexExpr& y, const LexExpr& r, const CutProfile& p) {
    const OvsModel& m = *sys.model;
    if (p.kind == CutKind::Archimedean) {
        sys.add(expr_lin(y, 1, r, -1), Rel::EQ, 0, p.slot + 1);
        return;
    }
    if (p.g <= static_cast<ArchClass>(m.nslots())) sys.add(y, Rel::EQ, 0, slot_of_class(m, p.g) + 1);
    size_t hs = p.h == BOTTOM ? m.nslots() : slot_of_class(m, p.h);
    sys.add(expr_lin(y, p.side, y, 0), Rel::GT, 0, hs);
}

}  // namespace detail

enum class Leaning { Left, Right, Both, Neither };

inline const char* leaning_name(Leaning l) {
    switch (l) {
        case Leaning::Left: return "left";
        case Leaning::Right: return "right";
        case Leaning::Both: return "both";
        case Leaning::Neither: return "neither";
    }
    return "?";
}

inline bool subspace_contains(const QSubspace& big, const QSubspace& small) {
    for (const auto& b : small.basis())
        if (!big.contains(b)) return false;
    return true;
}

// c leans right when the B-points of its cut over A all lie on its left, and vice versa.
inline Leaning leaning(const OvsElement& c, const QSubspace& A, const QSubspace& B) {
    check_same_model(c.model, A.model);
    check_same_model(c.model, B.model);
    if (!subspace_contains(B, A)) throw input_error("leaning: A is not contained in B");
    CutClass cc = classify_cut(c, A);
    if (cc.kind == CutKind::InBase) return Leaning::Both;
    const OvsModel& m = *c.model;
    auto p = detail::profile_of(m, cc);
    OvsElement a0 = c - cc.residual;
    auto bb = B.basis();
    auto side_has_points = [&](int dir) {
        LexSystem sys{c.model, {}, {}};
        size_t first = detail::add_vars(sys, "b", bb.size());
        LexExpr b = detail::span_expr(sys, first, bb);
        LexExpr y = detail::expr_lin(b, 1, detail::const_expr(sys, a0.coords), -1);
        detail::add_cut_membership(sys, y, detail::const_expr(sys, cc.residual.coords), p);
        sys.add(detail::expr_lin(detail::const_expr(sys, c.coords), dir, b, -dir), Rel::GE);
        return feasible(sys).feasible;
    };
    bool left = side_has_points(1), right = side_has_points(-1);
    if (left && right) return Leaning::Neither;
    if (left) return Leaning::Right;
    if (right) return Leaning::Left;
    return Leaning::Both;
}

// ---------------------------------------------------------------------------------------------
// Forking decider.

struct DoagSpaces {
    ModelPtr model;
    QSubspace A, B, C;  // A′ = span A, B′ = span(A ∪ B), C′ = span(A ∪ C)
};

inline DoagSpaces doag_spaces(const ModelPtr& m, const std::vector<OvsElement>& C, const std::vector<OvsElement>& A,
                              const std::vector<OvsElement>& B) {
    for (const auto* list : {&C, &A, &B})
        for (const auto& x : *list) check_same_model(m, x.model);
    DoagSpaces sp{m, span_subspace(m, A), {}, {}};
    sp.B = sp.A;
    for (const auto& b : B) sp.B.ech.insert(b.coords);
    sp.C = sp.A;
    for (const auto& c : C) sp.C.ech.insert(c.coords);
    return sp;
}

struct DoagWitness {
    OvsElement c, b1, b2;
};

struct DoagVerdict {
    bool independent = true;
    std::optional<DoagWitness> witness;
};

// b₁ ≤ c ≤ b₂ with c ∈ C′, bᵢ ∈ B′, and no point of A′ in [b₁, b₂].
inline bool verify_doag_witness(const DoagSpaces& sp, const DoagWitness& w) {
    if (!sp.C.contains(w.c) || !sp.B.contains(w.b1) || !sp.B.contains(w.b2)) return false;
    if (compare(w.b1, w.c) > 0 || compare(w.c, w.b2) > 0) return false;
    LexSystem sys{sp.model, {}, {}};
    auto ab = sp.A.basis();
    size_t first = detail::add_vars(sys, "a", ab.size());
    LexExpr a = detail::span_expr(sys, first, ab);
    sys.add(detail::expr_lin(a, 1, detail::const_expr(sys, w.b1.coords), -1), Rel::GE);
    sys.add(detail::expr_lin(detail::const_expr(sys, w.b2.coords), 1, a, -1), Rel::GE);
    return !feasible(sys).feasible;
}

// Dependent iff some c ∈ C′ \ A′ has points b₁ < c < b₂ of B′ inside ct(c/A′) (or c ∈ B′ itself).
// Translating by A′ reduces c to its residual r; each leading slot of r gives one cut shape.
inline DoagVerdict forking_independent_doag(const DoagSpaces& sp) {
    const OvsModel& m = *sp.model;
    DoagVerdict v;
    QSubspace common = subspace_intersection(sp.C, sp.B);
    for (const auto& x : common.basis())
        if (!sp.A.contains(x)) {
            v.independent = false;
            v.witness = DoagWitness{x, x, x};
            ensure(verify_doag_witness(sp, *v.witness), "doag: degenerate witness failed verification");
            return v;
        }
    QSubspace R{sp.model, {}};
    for (const auto& x : sp.C.basis()) R.ech.insert(reduce_mod(x, sp.A).coords);
    auto rb = R.basis(), bb = sp.B.basis();
    auto DA = delta_set(sp.A);
    std::set<size_t> leadSlots;
    for (int p : R.ech.pivots) leadSlots.insert(m.slot_of(p));
    for (size_t s : leadSlots) {
        ArchClass gamma = class_of_slot(m, s);
        std::vector<detail::CutProfile> profiles;
        auto below = max_below(DA, gamma);
        ArchClass h = below.value_or(BOTTOM);
        if (DA.count(gamma)) {
            profiles.push_back({CutKind::Archimedean, s, 0, gamma, h});
        } else {
            ArchClass g = min_above(DA, gamma).value_or(static_cast<ArchClass>(m.nslots() + 1));
            profiles.push_back({CutKind::Ramified, s, 1, g, h});
            profiles.push_back({CutKind::Ramified, s, -1, g, h});
        }
        for (const auto& p : profiles) {
            LexSystem sys{sp.model, {}, {}};
            size_t tr = detail::add_vars(sys, "r", rb.size());
            size_t t1 = detail::add_vars(sys, "u", bb.size());
            size_t t2 = detail::add_vars(sys, "w", bb.size());
            LexExpr r = detail::span_expr(sys, tr, rb);
            LexExpr b1 = detail::span_expr(sys, t1, bb);
            LexExpr b2 = detail::span_expr(sys, t2, bb);
            if (s > 0) sys.add(r, Rel::EQ, 0, s);
            if (p.kind == CutKind::Archimedean)
                sys.add(r, Rel::NE, s, s + 1);
            else
                sys.add(detail::expr_lin(r, p.side, r, 0), Rel::GT, s, s + 1);
            detail::add_cut_membership(sys, b1, r, p);
            detail::add_cut_membership(sys, b2, r, p);
            sys.add(detail::expr_lin(r, 1, b1, -1), Rel::GT);
            sys.add(detail::expr_lin(b2, 1, r, -1), Rel::GT);
            auto res = feasible(sys);
            if (!res.feasible) continue;
            auto pick = [&](size_t first, const std::vector<OvsElement>& basis) {
                QVec t(res.witness.begin() + static_cast<long>(first),
                       res.witness.begin() + static_cast<long>(first + basis.size()));
                return detail::combine(sp.model, basis, t);
            };
            v.independent = false;
            v.witness = DoagWitness{pick(tr, rb), pick(t1, bb), pick(t2, bb)};
            ensure(verify_doag_witness(sp, *v.witness), "doag: witness failed verification");
            return v;
        }
    }
    return v;
}

inline DoagVerdict forking_independent_doag(const ModelPtr& m, const std::vector<OvsElement>& C,
                                            const std::vector<OvsElement>& A, const std::vector<OvsElement>& B) {
    return forking_independent_doag(doag_spaces(m, C, A, B));
}

// Step i decides {dᵢ} against B over A ∪ d_{<i}.
inline std::vector<DoagVerdict> chain_independent(const ModelPtr& m, const std::vector<OvsElement>& d,
                                                  const std::vector<OvsElement>& A, const std::vector<OvsElement>& B) {
    std::vector<DoagVerdict> out;
    std::vector<OvsElement> base = A;
    for (const auto& x : d) {
        out.push_back(forking_independent_doag(m, {x}, base, B));
        base.push_back(x);
    }
    return out;
}

// ---------------------------------------------------------------------------------------------
// Normal form.

struct dependence_error : input_error {
    DoagWitness witness;
    explicit dependence_error(DoagWitness w)
        : input_error("the tuple is not cut-independent from B over A"), witness(std::move(w)) {}
};

// Ordinal measure of one rewriting loop; each entry lists coefficients from the top power down.
struct LoopTrace {
    std::string loop;
    std::vector<std::vector<int>> measures;

    void push(std::vector<int> m) {
        if (!measures.empty()) ensure(m < measures.back(), "normal form: loop measure did not decrease");
        measures.push_back(std::move(m));
    }
    bool strictly_decreasing() const {
        for (size_t i = 1; i < measures.size(); ++i)
            if (!(measures[i] < measures[i - 1])) return false;
        return true;
    }
};

struct NormalForm {
    std::vector<OvsElement> d, dprime, dtilde;
    QMat gl;                               // k×k over the input tuple
    std::vector<OvsElement> translations;  // one per row, in A′
    std::array<bool, 5> flags{};
    std::vector<LoopTrace> traces;

    std::vector<OvsElement> elements() const {
        std::vector<OvsElement> all = d;
        all.insert(all.end(), dprime.begin(), dprime.end());
        all.insert(all.end(), dtilde.begin(), dtilde.end());
        return all;
    }
};

struct NormalFormCheck {
    bool enumeration = true, free = true;
    std::array<bool, 5> p{true, true, true, true, true};
    bool all() const { return enumeration && free && p[0] && p[1] && p[2] && p[3] && p[4]; }
};

namespace detail {

// All pivots of the reduced vectors lie in slot s and the vectors are independent.
inline bool pivots_in_slot(const OvsModel& m, const QMat& vs, size_t s) {
    if (vs.empty()) return true;
    auto t = tracked_rref(vs, m.dim);
    if (!t.kernel.empty()) return false;
    for (int p : t.pivots)
        if (m.slot_of(static_cast<size_t>(p)) != s) return false;
    return true;
}

inline QMat reduced_coords(const std::vector<OvsElement>& xs, const QSubspace& W) {
    QMat out;
    for (const auto& x : xs) out.push_back(reduce_mod(x, W).coords);
    return out;
}

}  // namespace detail

inline NormalFormCheck verify_normal_form(const std::vector<OvsElement>& d, const std::vector<OvsElement>& dprime,
                                          const std::vector<OvsElement>& dtilde, const DoagSpaces& sp) {
    NormalFormCheck chk;
    const OvsModel& m = *sp.model;
    auto DA = delta_set(sp.A), DB = delta_set(sp.B);
    std::vector<OvsElement> all = d;
    all.insert(all.end(), dprime.begin(), dprime.end());
    all.insert(all.end(), dtilde.begin(), dtilde.end());
    if (detail::qrank(detail::reduced_coords(all, sp.B)) != all.size()) chk.free = false;

    // index every element by its classification
    std::map<int, std::vector<OvsElement>> dG, dpG;                 // by G(·/B)
    std::map<std::pair<int, int>, std::vector<OvsElement>> dpGd;    // d′ by (G(·/B), δ(·/B))
    std::map<std::pair<int, int>, std::vector<OvsElement>> dtGd;    // d̃ by (G(·/B), δ(·/A))
    for (const auto& x : d) {
        auto cb = classify_cut(x, sp.B);
        if (cb.kind != CutKind::Archimedean) chk.enumeration = false;
        dG[cb.g.key()].push_back(x);
    }
    for (const auto& x : dprime) {
        auto ca = classify_cut(x, sp.A), cb = classify_cut(x, sp.B);
        if (ca.kind != CutKind::Archimedean || cb.kind != CutKind::Ramified) {
            chk.enumeration = false;
            continue;
        }
        dpG[cb.g.key()].push_back(x);
        dpGd[{cb.g.key(), *cb.delta}].push_back(x);
    }
    for (const auto& x : dtilde) {
        auto ca = classify_cut(x, sp.A), cb = classify_cut(x, sp.B);
        if (ca.kind != CutKind::Ramified) {
            chk.enumeration = false;
            continue;
        }
        auto key = std::make_pair(cb.g.key(), *ca.delta);
        dtGd[key].push_back(x);
        // P1: the raw element lies in M_{≤δ̃} with nonzero δ̃-slot
        if (delta(x) != *ca.delta) chk.p[0] = false;
    }
    if (!chk.enumeration) {
        chk.p = {false, false, false, false, false};
        return chk;
    }
    for (const auto& [key, xs] : dtGd) {
        size_t s = slot_of_class(m, key.second);
        QMat rows;
        for (const auto& x : xs) rows.push_back(detail::restrict_slots(m, x.coords, s, s + 1));
        if (detail::qrank(rows) != xs.size()) chk.p[0] = false;
    }
    // P2: combinations of dd′ are Archimedean over A
    std::vector<OvsElement> arch = d;
    arch.insert(arch.end(), dprime.begin(), dprime.end());
    if (!arch.empty()) {
        auto t = detail::tracked_rref(detail::reduced_coords(arch, sp.A), m.dim);
        if (!t.kernel.empty()) chk.p[1] = false;
        for (int p : t.pivots)
            if (!DA.count(class_of_slot(m, m.slot_of(static_cast<size_t>(p))))) chk.p[1] = false;
    }
    // P3: for each G, combinations of d_G d′_G have G(e/A) = G
    std::set<int> keys;
    for (const auto& kv : dG) keys.insert(kv.first);
    for (const auto& kv : dpG) keys.insert(kv.first);
    for (int key : keys) {
        std::vector<OvsElement> blk = dG[key];
        blk.insert(blk.end(), dpG[key].begin(), dpG[key].end());
        int cls = key / 2;
        if (key % 2 != 0 || cls < 1 || cls > static_cast<int>(m.nslots())) {
            chk.p[2] = false;
            continue;
        }
        if (!detail::pivots_in_slot(m, detail::reduced_coords(blk, sp.A), slot_of_class(m, cls))) chk.p[2] = false;
    }
    // P4: combinations of d_G are Archimedean over B (with G(·/B) = G)
    for (const auto& [key, xs] : dG) {
        int cls = key / 2;
        if (!detail::pivots_in_slot(m, detail::reduced_coords(xs, sp.B), slot_of_class(m, cls))) chk.p[3] = false;
    }
    // P5: each ramified val_B³-block (d′ and d̃ sharing G(·/B) and δ) keeps δ under combinations
    std::set<std::pair<int, int>> rkeys;
    for (const auto& kv : dpGd) rkeys.insert(kv.first);
    for (const auto& kv : dtGd) rkeys.insert(kv.first);
    for (const auto& key : rkeys) {
        if (DB.count(key.second)) {
            chk.p[4] = false;
            continue;
        }
        std::vector<OvsElement> blk = dpGd[key];
        blk.insert(blk.end(), dtGd[key].begin(), dtGd[key].end());
        if (!detail::pivots_in_slot(m, detail::reduced_coords(blk, sp.B), slot_of_class(m, key.second)))
            chk.p[4] = false;
    }
    return chk;
}

inline NormalFormCheck verify_normal_form(const NormalForm& nf, const DoagSpaces& sp) {
    return verify_normal_form(nf.d, nf.dprime, nf.dtilde, sp);
}

// Outputs of the interdefinability record: row i gives Σⱼ glᵢⱼ·cⱼ + translationᵢ.
inline std::vector<OvsElement> apply_record(const NormalForm& nf, const std::vector<OvsElement>& input) {
    std::vector<OvsElement> out;
    for (size_t i = 0; i < nf.gl.size(); ++i) out.push_back(detail::combine(nf.translations[i].model, input, nf.gl[i]) + nf.translations[i]);
    return out;
}

// The record re-applies exactly: outputs are the normal form then zeros, translations lie in A′,
// and the matrix is invertible.
inline bool record_reapplies(const NormalForm& nf, const std::vector<OvsElement>& input, const DoagSpaces& sp) {
    size_t k = input.size();
    if (nf.gl.size() != k || nf.translations.size() != k) return false;
    if (detail::qrank(nf.gl) != k) return false;
    for (const auto& t : nf.translations)
        if (!sp.A.contains(t)) return false;
    auto out = apply_record(nf, input);
    auto els = nf.elements();
    if (els.size() > k) return false;
    for (size_t i = 0; i < k; ++i) {
        if (i < els.size() ? !(out[i] == els[i]) : !is_zero(out[i].coords)) return false;
    }
    return true;
}

namespace detail {

inline void categorize(const DoagSpaces& sp, const std::vector<OvsElement>& xs, std::vector<OvsElement>& d,
                       std::vector<OvsElement>& dp, std::vector<OvsElement>& dt) {
    for (const auto& x : xs) {
        auto ca = classify_cut(x, sp.A);
        if (ca.kind == CutKind::Ramified)
            dt.push_back(x);
        else if (classify_cut(x, sp.B).kind == CutKind::Archimedean)
            d.push_back(x);
        else
            dp.push_back(x);
    }
}

// Fills gl/translations so that the outputs are nf.elements() followed by zeros.
inline void build_record(NormalForm& nf, const std::vector<OvsElement>& input, const DoagSpaces& sp) {
    size_t k = input.size();
    QMat red = reduced_coords(input, sp.A);
    nf.gl.clear();
    nf.translations.clear();
    for (const auto& x : nf.elements()) {
        auto mu = solve_left(red, reduce_mod(x, sp.A).coords);
        ensure(mu.has_value(), "normal form: output outside the span of the input");
        nf.gl.push_back(*mu);
        nf.translations.push_back(x - combine(sp.model, input, *mu));
    }
    for (const auto& kv : left_nullspace(red, sp.model->dim)) {
        nf.gl.push_back(kv);
        nf.translations.push_back(-combine(sp.model, input, kv));
    }
    ensure(nf.gl.size() == k, "normal form: record has the wrong size");
}

inline std::vector<int> top_first(std::vector<int> v) {
    std::reverse(v.begin(), v.end());
    return v;
}

}  // namespace detail

inline NormalForm normal_form(const DoagSpaces& sp, const std::vector<OvsElement>& input, bool fastPath = true) {
    auto verdict = forking_independent_doag(sp);
    if (!verdict.independent) throw dependence_error(*verdict.witness);
    const OvsModel& m = *sp.model;
    const ModelPtr& M = sp.model;
    auto DA = delta_set(sp.A), DB = delta_set(sp.B);
    NormalForm nf;

    // already under normal form: keep the input, up to ordering
    if (fastPath && detail::qrank(detail::reduced_coords(input, sp.A)) == input.size()) {
        std::vector<OvsElement> d, dp, dt;
        detail::categorize(sp, input, d, dp, dt);
        if (verify_normal_form(d, dp, dt, sp).all()) {
            nf.d = d;
            nf.dprime = dp;
            nf.dtilde = dt;
            detail::build_record(nf, input, sp);
            nf.flags = {true, true, true, true, true};
            return nf;
        }
    }

    // lifts of bases of C_{≤δ}/C_{<δ} for δ ∈ Δ(C′) \ Δ(A′), and a completion to a basis over A
    std::vector<OvsElement> u, v;
    std::vector<ArchClass> uClass, newClasses;
    Rref acc;
    for (size_t i = 0; i < sp.C.ech.rows.size(); ++i) {
        ArchClass k = class_of_slot(m, m.slot_of(static_cast<size_t>(sp.C.ech.pivots[i])));
        if (DA.count(k)) continue;
        OvsElement x = reduce_mod({M, sp.C.ech.rows[i]}, sp.A);
        u.push_back(x);
        uClass.push_back(k);
        acc.insert(x.coords);
        if (newClasses.empty() || newClasses.back() != k) newClasses.push_back(k);
    }
    std::sort(newClasses.begin(), newClasses.end());
    newClasses.erase(std::unique(newClasses.begin(), newClasses.end()), newClasses.end());
    for (const auto& c : input) {
        OvsElement x = reduce_mod(c, sp.A);
        if (acc.insert(x.coords)) v.push_back(x);
    }
    for (size_t i = 0; i < sp.C.ech.rows.size(); ++i) {
        OvsElement x = reduce_mod({M, sp.C.ech.rows[i]}, sp.A);
        if (acc.insert(x.coords)) v.push_back(x);
    }

    // push ramified combinations of v below a new class using the lifts
    LoopTrace t10{"ramified-repair", {}};
    auto measure10 = [&] {
        std::vector<int> F(newClasses.size() + 1, 0);
        for (const auto& x : v) {
            ArchClass dx = delta(x);
            F[static_cast<size_t>(std::upper_bound(newClasses.begin(), newClasses.end(), dx) - newClasses.begin())]++;
        }
        return detail::top_first(F);
    };
    t10.push(measure10());
    for (;;) {
        QMat vs;
        for (const auto& x : v) vs.push_back(x.coords);
        auto t = detail::tracked_rref(vs, m.dim);
        std::optional<size_t> row;
        for (size_t i = 0; i < t.values.size() && !row; ++i)
            if (!DA.count(class_of_slot(m, m.slot_of(static_cast<size_t>(t.pivots[i]))))) row = i;
        if (!row) break;
        size_t s = m.slot_of(static_cast<size_t>(t.pivots[*row]));
        ArchClass dl = class_of_slot(m, s);
        OvsElement vp{M, t.values[*row]};
        size_t j = v.size();
        for (size_t i = 0; i < v.size(); ++i)
            if (t.coeffs[*row][i] != 0 && (j == v.size() || delta(v[i]) > delta(v[j]))) j = i;
        QMat us;
        std::vector<OvsElement> lifts;
        for (size_t i = 0; i < u.size(); ++i)
            if (uClass[i] == dl) {
                us.push_back(detail::restrict_slots(m, u[i].coords, s, s + 1));
                lifts.push_back(u[i]);
            }
        auto mu = solve_left(us, detail::restrict_slots(m, vp.coords, s, s + 1));
        ensure(mu.has_value(), "normal form: combination not covered by the lifts");
        OvsElement repl = vp - detail::combine(M, lifts, *mu);
        ensure(delta(repl) < dl && dl <= delta(v[j]), "normal form: replacement did not lower the class");
        v[j] = repl;
        t10.push(measure10());
    }
    nf.traces.push_back(t10);

    // separate each G-block of v over A by GL operations
    LoopTrace t12{"separate-over-A", {}};
    auto measure12 = [&] {
        std::vector<int> F(m.nslots() + 1, 0);
        for (const auto& x : v) F[static_cast<size_t>(delta(x))]++;
        return detail::top_first(F);
    };
    t12.push(measure12());
    for (;;) {
        bool changed = false;
        for (int cls = static_cast<int>(m.nslots()); cls >= 1 && !changed; --cls) {
            std::vector<size_t> idx;
            for (size_t i = 0; i < v.size(); ++i)
                if (delta(v[i]) == cls) idx.push_back(i);
            if (idx.size() < 2) continue;
            size_t s = slot_of_class(m, cls);
            QMat rows;
            for (size_t i : idx) rows.push_back(detail::restrict_slots(m, v[i].coords, s, s + 1));
            auto t = detail::tracked_rref(rows, rows[0].size());
            if (t.kernel.empty()) continue;
            const QVec& kv = t.kernel.front();
            OvsElement e = zero_element(M);
            size_t target = idx.size();
            for (size_t a = 0; a < idx.size(); ++a)
                if (kv[a] != 0) {
                    qv_axpy(e.coords, kv[a], v[idx[a]].coords);
                    if (target == idx.size()) target = a;
                }
            v[idx[target]] = e;
            changed = true;
        }
        if (!changed) break;
        t12.push(measure12());
    }
    nf.traces.push_back(t12);

    // split off combinations of d_G that are ramified over B
    std::vector<OvsElement> d, dp;
    for (const auto& x : v) (classify_cut(x, sp.B).kind == CutKind::Archimedean ? d : dp).push_back(x);
    LoopTrace t14{"split-over-B", {}};
    t14.push({static_cast<int>(d.size())});
    for (;;) {
        bool changed = false;
        std::map<ArchClass, std::vector<size_t>> groups;
        for (size_t i = 0; i < d.size(); ++i) groups[delta(d[i])].push_back(i);
        for (auto it = groups.rbegin(); it != groups.rend() && !changed; ++it) {
            const auto& idx = it->second;
            QMat rows;
            for (size_t i : idx) rows.push_back(reduce_mod(d[i], sp.B).coords);
            auto t = detail::tracked_rref(rows, m.dim);
            for (size_t r = 0; r < t.values.size() && !changed; ++r) {
                if (DB.count(class_of_slot(m, m.slot_of(static_cast<size_t>(t.pivots[r]))))) continue;
                OvsElement e = zero_element(M);
                size_t target = idx.size();
                for (size_t a = 0; a < idx.size(); ++a)
                    if (t.coeffs[r][a] != 0) {
                        qv_axpy(e.coords, t.coeffs[r][a], d[idx[a]].coords);
                        if (target == idx.size()) target = a;
                    }
                d.erase(d.begin() + static_cast<long>(idx[target]));
                dp.push_back(e);
                changed = true;
            }
        }
        if (!changed) break;
        t14.push({static_cast<int>(d.size())});
    }
    nf.traces.push_back(t14);

    // lower δ(·/B) of d′ terms until each ramified B-block is separated
    std::vector<OvsElement> dt = u;
    std::vector<ArchClass> newOverB;
    {
        QSubspace CB = subspace_sum(sp.C, sp.B);
        for (ArchClass k : delta_set(CB))
            if (!DB.count(k)) newOverB.push_back(k);
    }
    LoopTrace t17{"lower-delta-over-B", {}};
    auto measure17 = [&] {
        std::vector<int> F(newOverB.size(), 0);
        for (const auto& x : dp) {
            auto cb = classify_cut(x, sp.B);
            auto it = std::find(newOverB.begin(), newOverB.end(), cb.delta.value_or(BOTTOM));
            ensure(it != newOverB.end(), "normal form: d′ term outside Δ(CB) \\ Δ(B)");
            F[static_cast<size_t>(it - newOverB.begin())]++;
        }
        return detail::top_first(F);
    };
    t17.push(measure17());
    for (;;) {
        std::map<std::pair<int, int>, std::vector<size_t>> pBlk, tBlk;
        for (size_t i = 0; i < dp.size(); ++i) {
            auto cb = classify_cut(dp[i], sp.B);
            ensure(cb.kind == CutKind::Ramified, "normal form: d′ term is not ramified over B");
            pBlk[{cb.g.key(), *cb.delta}].push_back(i);
        }
        for (size_t i = 0; i < dt.size(); ++i) {
            auto cb = classify_cut(dt[i], sp.B);
            tBlk[{cb.g.key(), *classify_cut(dt[i], sp.A).delta}].push_back(i);
        }
        bool changed = false;
        for (auto it = pBlk.rbegin(); it != pBlk.rend() && !changed; ++it) {
            const auto& pi = it->second;
            const auto& ti = tBlk[it->first];
            size_t s = slot_of_class(m, it->first.second);
            QMat rows;
            for (size_t i : pi) rows.push_back(detail::restrict_slots(m, reduce_mod(dp[i], sp.B).coords, s, s + 1));
            for (size_t i : ti) rows.push_back(detail::restrict_slots(m, reduce_mod(dt[i], sp.B).coords, s, s + 1));
            auto t = detail::tracked_rref(rows, rows[0].size());
            for (const auto& kv : t.kernel) {
                size_t target = pi.size();
                for (size_t a = 0; a < pi.size() && target == pi.size(); ++a)
                    if (kv[a] != 0) target = a;
                if (target == pi.size()) continue;
                OvsElement e = zero_element(M);
                for (size_t a = 0; a < pi.size(); ++a) qv_axpy(e.coords, kv[a], dp[pi[a]].coords);
                for (size_t b = 0; b < ti.size(); ++b) qv_axpy(e.coords, kv[pi.size() + b], dt[ti[b]].coords);
                dp[pi[target]] = e;
                changed = true;
                break;
            }
        }
        if (!changed) break;
        t17.push(measure17());
    }
    nf.traces.push_back(t17);

    nf.d = d;
    nf.dprime = dp;
    nf.dtilde = dt;
    detail::build_record(nf, input, sp);
    auto chk = verify_normal_form(nf, sp);
    nf.flags = chk.p;
    ensure(chk.all(), "normal form: construction did not reach P1-P5");
    return nf;
}

// ---------------------------------------------------------------------------------------------
// Extension space descriptors.

struct ExtensionBlock {
    ConvexTrace G, H;
    size_t arch_arity = 0;              // members Archimedean over B
    std::vector<ArchClass> deltas;      // E: ramified val_B³-blocks in increasing δ
    std::vector<size_t> sizes;
    std::vector<bool> a_archimedean;    // the block has a member Archimedean over A
    bool g_definable = true, h_definable = true;
    std::vector<size_t> I, J, O;
    size_t count = 1;                   // strong block extensions: |J| + 1
    std::vector<std::vector<std::string>> labels;  // per extension, inner/outer for each index of E

    bool ramified() const { return !deltas.empty(); }
};

struct ExtensionSpaceDescriptor {
    NormalForm nf;
    std::vector<ExtensionBlock> blocks;
    std::optional<Integer> total;  // absent when an Archimedean factor has arity ≥ 2 (infinite)
    std::string shape;
};

// Space of ℚ-free parameter-free types of arity n: one point, the two signs, or infinitely many.
inline std::optional<Integer> free_type_count(size_t n) {
    if (n == 0) return Integer(1);
    if (n == 1) return Integer(2);
    return std::nullopt;
}

inline ExtensionSpaceDescriptor extension_space_doag(const DoagSpaces& sp, const std::vector<OvsElement>& input) {
    ExtensionSpaceDescriptor out;
    out.nf = normal_form(sp, input);
    const OvsModel& m = *sp.model;
    auto DA = delta_set(sp.A), DB = delta_set(sp.B);
    struct Member {
        CutClass overB;
        bool aArch;
    };
    std::map<int, std::vector<Member>> byG;
    for (const auto& x : out.nf.elements()) {
        auto cb = classify_cut(x, sp.B);
        byG[cb.g.key()].push_back({cb, classify_cut(x, sp.A).kind == CutKind::Archimedean});
    }
    out.total = Integer(1);
    std::string shape;
    for (auto it = byG.rbegin(); it != byG.rend(); ++it) {
        ExtensionBlock blk;
        blk.G = it->second.front().overB.g;
        std::map<ArchClass, std::pair<size_t, bool>> E;
        for (const auto& mb : it->second) {
            if (mb.overB.kind == CutKind::Archimedean) {
                ++blk.arch_arity;
                continue;
            }
            auto& e = E[*mb.overB.delta];
            e.first++;
            e.second = e.second || mb.aArch;
            blk.H = mb.overB.h;
        }
        for (const auto& [dl, info] : E) {
            blk.deltas.push_back(dl);
            blk.sizes.push_back(info.first);
            blk.a_archimedean.push_back(info.second);
        }
        size_t n = blk.deltas.size();
        if (n > 0) {
            ArchClass g = blk.G.cls, h = blk.H.cls;
            blk.g_definable = g == static_cast<ArchClass>(m.nslots() + 1) || DA.count(g);
            blk.h_definable = h == BOTTOM || DA.count(h);
            std::vector<bool> inI(n, false), inO(n, false);
            if (!blk.h_definable) {
                inO.assign(n, true);
            } else if (!blk.g_definable) {
                inI.assign(n, true);
            } else {
                for (size_t i = 0; i < n; ++i)
                    if (blk.a_archimedean[i]) {
                        for (size_t j = i; j < n; ++j) inO[j] = true;
                        break;
                    }
            }
            for (size_t i = 0; i < n; ++i) (inI[i] ? blk.I : inO[i] ? blk.O : blk.J).push_back(i);
            blk.count = blk.J.size() + 1;
            // extension K (initial segment of J of length k): inner on I and K, outer elsewhere
            for (size_t k = 0; k <= blk.J.size(); ++k) {
                std::vector<std::string> lab(n, "outer");
                for (size_t i : blk.I) lab[i] = "inner";
                for (size_t j = 0; j < k; ++j) lab[blk.J[j]] = "inner";
                blk.labels.push_back(lab);
            }
        }
        auto f = free_type_count(blk.arch_arity);
        if (out.total && f)
            *out.total *= Integer(static_cast<unsigned long>(blk.count)) * *f;
        else
            out.total.reset();
        std::string factor = "F(" + std::to_string(blk.arch_arity) + ")";
        if (!shape.empty()) shape += " x ";
        shape += blk.ramified() ? "coprod_" + std::to_string(blk.count) + "[" + factor + "]" : factor;
        out.blocks.push_back(blk);
    }
    out.shape = shape.empty() ? "point" : shape;
    return out;
}

}  // namespace oagfork
