#pragma once

#include "oagfork/linalg.hpp"
#include "oagfork/numfield.hpp"

#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace oagfork {

// Lexicographic tower of real-algebraic slots, most significant first.
struct OvsModel {
    std::vector<std::vector<RealAlgebraic>> slots;
    std::shared_ptr<const NumberField> field;
    std::vector<std::vector<QPoly>> reps;  // slot basis numbers inside `field`
    std::vector<size_t> offset;            // first flat coordinate of each slot
    size_t dim = 0;

    size_t nslots() const { return slots.size(); }
    size_t slot_dim(size_t s) const { return slots[s].size(); }
    size_t slot_of(size_t col) const {
        size_t s = 0;
        while (s + 1 < offset.size() && offset[s + 1] <= col) ++s;
        return s;
    }
};

using ModelPtr = std::shared_ptr<const OvsModel>;

inline ModelPtr make_model(const std::vector<std::vector<RealAlgebraic>>& slots) {
    if (slots.empty()) throw input_error("model: no slots");
    auto m = std::make_shared<OvsModel>();
    std::vector<RealAlgebraic> all;
    bool anyNonempty = false;
    for (const auto& s : slots) {
        std::vector<RealAlgebraic> vs;
        for (const auto& x : s) vs.push_back(validated(x));
        if (!vs.empty()) {
            anyNonempty = true;
            if (!q_linear_independent(vs)) throw input_error("model: slot basis is not Q-linearly independent");
        }
        m->offset.push_back(m->dim);
        m->dim += vs.size();
        all.insert(all.end(), vs.begin(), vs.end());
        m->slots.push_back(vs);
    }
    if (!anyNonempty) throw input_error("model: every slot is empty");
    FieldEmbedding e = common_field(all);
    m->field = e.field;
    size_t k = 0;
    for (const auto& s : m->slots) {
        m->reps.emplace_back();
        for (size_t j = 0; j < s.size(); ++j) m->reps.back().push_back(e.reps[k++]);
    }
    return m;
}

// Archimedean class: 0 is ⊥ (class of zero); slot s has class nslots − s, so larger = more significant.
using ArchClass = int;
constexpr ArchClass BOTTOM = 0;

inline ArchClass class_of_slot(const OvsModel& m, size_t s) { return static_cast<int>(m.nslots() - s); }
inline size_t slot_of_class(const OvsModel& m, ArchClass c) { return m.nslots() - static_cast<size_t>(c); }

struct OvsElement {
    ModelPtr model;
    QVec coords;  // flat, slot-major

    bool operator==(const OvsElement& o) const { return coords == o.coords; }
};

inline OvsElement zero_element(const ModelPtr& m) { return {m, QVec(m->dim)}; }

inline OvsElement unit(const ModelPtr& m, size_t slot, size_t j = 0) {
    OvsElement e = zero_element(m);
    e.coords[m->offset[slot] + j] = 1;
    return e;
}

inline void same_model(const OvsElement& x, const OvsElement& y) {
    if (x.model != y.model && (!x.model || !y.model || x.model->slots != y.model->slots))
        throw input_error("elements belong to different models");
}

inline OvsElement operator+(const OvsElement& x, const OvsElement& y) {
    same_model(x, y);
    return {x.model, qv_add(x.coords, y.coords)};
}
inline OvsElement operator-(const OvsElement& x, const OvsElement& y) {
    same_model(x, y);
    return {x.model, qv_sub(x.coords, y.coords)};
}
inline OvsElement operator*(const Rational& q, const OvsElement& x) { return {x.model, qv_scale(x.coords, q)}; }
inline OvsElement operator-(const OvsElement& x) { return Rational(-1) * x; }

inline bool slot_zero(const OvsModel& m, const QVec& v, size_t s) {
    for (size_t j = 0; j < m.slot_dim(s); ++j)
        if (v[m.offset[s] + j] != 0) return false;
    return true;
}

// Real value of slot s of a flat coordinate vector, as an element of the model field.
inline QPoly slot_value(const OvsModel& m, const QVec& v, size_t s) {
    QPoly r;
    for (size_t j = 0; j < m.slot_dim(s); ++j) {
        const Rational& c = v[m.offset[s] + j];
        if (c != 0) r = qp_add(r, qp_scale(m.reps[s][j], c));
    }
    return r;
}

inline int slot_sign(const OvsModel& m, const QVec& v, size_t s) {
    if (slot_zero(m, v, s)) return 0;
    return m.field->sign(slot_value(m, v, s));
}

// Sign of the projection onto slots [lo, hi) in the lexicographic order.
inline int window_sign(const OvsModel& m, const QVec& v, size_t lo, size_t hi) {
    for (size_t s = lo; s < hi; ++s)
        if (!slot_zero(m, v, s)) return slot_sign(m, v, s);
    return 0;
}

inline int sign(const OvsElement& x) { return window_sign(*x.model, x.coords, 0, x.model->nslots()); }

inline int compare(const OvsElement& x, const OvsElement& y) { return sign(x - y); }

inline std::optional<size_t> leading_slot(const OvsModel& m, const QVec& v) {
    for (size_t s = 0; s < m.nslots(); ++s)
        if (!slot_zero(m, v, s)) return s;
    return std::nullopt;
}

inline ArchClass delta(const OvsModel& m, const QVec& v) {
    auto s = leading_slot(m, v);
    return s ? class_of_slot(m, *s) : BOTTOM;
}

inline ArchClass delta(const OvsElement& x) { return delta(*x.model, x.coords); }

// ℚ-span of elements, in canonical reduced echelon form over the flat coordinates.
struct QSubspace {
    ModelPtr model;
    Rref ech;

    size_t dim() const { return ech.rank(); }
    std::vector<OvsElement> basis() const {
        std::vector<OvsElement> b;
        for (const auto& r : ech.rows) b.push_back({model, r});
        return b;
    }
    bool contains(const OvsElement& x) const { return is_zero(ech.reduce(x.coords)); }
    bool operator==(const QSubspace& o) const { return ech.rows == o.ech.rows; }
};

inline QSubspace span_subspace(const ModelPtr& m, const std::vector<OvsElement>& gens) {
    QSubspace W{m, {}};
    for (const auto& g : gens) {
        if (g.coords.size() != m->dim) throw input_error("span: element dimension does not match the model");
        W.ech.insert(g.coords);
    }
    return W;
}

inline QSubspace subspace_sum(const QSubspace& a, const QSubspace& b) {
    QSubspace W = a;
    for (const auto& r : b.ech.rows) W.ech.insert(r);
    return W;
}

inline QSubspace subspace_intersection(const QSubspace& a, const QSubspace& b) {
    // x = Σ uᵢaᵢ = Σ vⱼbⱼ
    QMat stacked;
    for (const auto& r : a.ech.rows) stacked.push_back(r);
    for (const auto& r : b.ech.rows) stacked.push_back(qv_scale(r, -1));
    QMat ker = left_nullspace(stacked, a.model->dim);
    QSubspace W{a.model, {}};
    for (const auto& k : ker) {
        QVec x(a.model->dim);
        for (size_t i = 0; i < a.dim(); ++i) qv_axpy(x, k[i], a.ech.rows[i]);
        W.ech.insert(x);
    }
    return W;
}

// Canonical residual: x − r ∈ W and every pivot coordinate of r is zero.
inline OvsElement reduce_mod(const OvsElement& x, const QSubspace& W) { return {x.model, W.ech.reduce(x.coords)}; }

inline std::set<ArchClass> delta_set(const QSubspace& W) {
    std::set<ArchClass> d;
    for (int p : W.ech.pivots) d.insert(class_of_slot(*W.model, W.model->slot_of(p)));
    return d;
}

struct AffineSubspace {
    OvsElement base;
    QSubspace direction;
};

// Positive element of base + direction, if any. Decided slot by slot: the first slot on which the
// set is not identically zero is either constant (its sign decides) or spans both signs.
inline std::optional<OvsElement> exists_lex_positive(const AffineSubspace& L) {
    const OvsModel& m = *L.base.model;
    auto dirs = L.direction.basis();
    for (size_t s = 0; s < m.nslots(); ++s) {
        for (const auto& d : dirs) {
            if (slot_zero(m, d.coords, s)) continue;
            int dir = slot_sign(m, d.coords, s);
            for (Integer k = 1;; k *= 2) {
                OvsElement w = L.base + Rational(k * dir) * d;
                if (slot_sign(m, w.coords, s) > 0) return w;
            }
        }
        if (!slot_zero(m, L.base.coords, s)) {
            if (slot_sign(m, L.base.coords, s) > 0) return L.base;
            return std::nullopt;
        }
    }
    return std::nullopt;
}

}  // namespace oagfork
