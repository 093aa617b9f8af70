#pragma once

#include "oagfork/ovs.hpp"

#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace oagfork {

enum class Rel { EQ, GT, GE, NE };

inline const char* rel_name(Rel r) {
    switch (r) {
        case Rel::EQ: return "= 0";
        case Rel::GT: return "> 0";
        case Rel::GE: return ">= 0";
        case Rel::NE: return "!= 0";
    }
    return "?";
}

// constant + Σ varᵢ·coefᵢ, each an element of the model (flat coordinates).
struct LexExpr {
    QVec constant;
    std::vector<QVec> coef;  // one per variable
};

// The relation is applied to the projection of the expression onto slots [lo, hi).
struct LexConstraint {
    LexExpr expr;
    Rel rel;
    size_t lo = 0, hi = 0;
};

struct LexSystem {
    ModelPtr model;
    std::vector<std::string> names;
    std::vector<LexConstraint> cons;

    size_t nvars() const { return names.size(); }

    size_t add_var(const std::string& name) {
        names.push_back(name);
        for (auto& c : cons) c.expr.coef.emplace_back(model->dim);
        return names.size() - 1;
    }

    LexExpr zero_expr() const { return {QVec(model->dim), std::vector<QVec>(nvars(), QVec(model->dim))}; }

    void add(LexExpr e, Rel r) { add(std::move(e), r, 0, model->nslots()); }
    void add(LexExpr e, Rel r, size_t lo, size_t hi) {
        if (e.constant.size() != model->dim || e.coef.size() != nvars())
            throw input_error("lex constraint: dimension mismatch");
        for (const auto& c : e.coef)
            if (c.size() != model->dim) throw input_error("lex constraint: mixed models");
        cons.push_back({std::move(e), r, lo, std::min(hi, model->nslots())});
    }
};

inline QVec eval_expr(const LexExpr& e, const QVec& t) {
    QVec v = e.constant;
    for (size_t i = 0; i < t.size(); ++i) qv_axpy(v, t[i], e.coef[i]);
    return v;
}

inline bool satisfies(const OvsModel& m, const LexConstraint& c, const QVec& t) {
    int s = window_sign(m, eval_expr(c.expr, t), c.lo, c.hi);
    switch (c.rel) {
        case Rel::EQ: return s == 0;
        case Rel::GT: return s > 0;
        case Rel::GE: return s >= 0;
        case Rel::NE: return s != 0;
    }
    return false;
}

struct LexResult {
    bool feasible = false;
    QVec witness;
    size_t leaves = 0;
};

namespace detail {

// Affine rational form over the variables: coefficients then the constant (length n + 1).
using Affine = QVec;

// Real affine form over the free parameters: field-valued coefficients then constant.
struct KForm {
    std::vector<QPoly> coef;
    QPoly constant;
};

struct StrictSlot {
    const LexConstraint* src;
    size_t slot;
    int side;  // the slot value times `side` must be positive
};

class LexSolver {
public:
    LexSolver(const LexSystem& sys, std::ostream* trace) : sys_(sys), m_(*sys.model), trace_(trace) {}

    LexResult run() {
        LexResult res;
        Rref eq;
        std::vector<StrictSlot> strict;
        if (dfs(0, eq, strict, res, 0)) {
            res.feasible = true;
            for (const auto& c : sys_.cons)
                ensure(satisfies(m_, c, res.witness), "linlex: witness failed re-verification");
        }
        return res;
    }

private:
    size_t n() const { return sys_.nvars(); }

    // Rational affine form of coordinate col of a constraint's expression.
    Affine coord_form(const LexConstraint& c, size_t col) const {
        Affine a(n() + 1);
        for (size_t i = 0; i < n(); ++i) a[i] = c.expr.coef[i][col];
        a[n()] = c.expr.constant[col];
        return a;
    }

    // Adds "slot s of c is zero"; false if the equalities become inconsistent.
    bool add_zero_slot(Rref& eq, const LexConstraint& c, size_t s) const {
        for (size_t j = 0; j < m_.slot_dim(s); ++j) {
            eq.insert(coord_form(c, m_.offset[s] + j));
            if (!eq.pivots.empty() && eq.pivots.back() == static_cast<int>(n())) return false;
        }
        return true;
    }

    // Status of a strict slot constraint under the equalities: +1 satisfied for all solutions,
    // -1 violated for all, 0 undetermined.
    int strict_status(const Rref& eq, const StrictSlot& st) const {
        bool constant = true, zero = true;
        QVec value(m_.dim);
        for (size_t j = 0; j < m_.slot_dim(st.slot); ++j) {
            size_t col = m_.offset[st.slot] + j;
            Affine a = eq.reduce(coord_form(*st.src, col));
            for (size_t i = 0; i < n(); ++i)
                if (a[i] != 0) constant = false;
            value[col] = a[n()];
            if (a[n()] != 0) zero = false;
        }
        if (!constant) return 0;
        if (zero) return -1;
        return slot_sign(m_, value, st.slot) * st.side > 0 ? 1 : -1;
    }

    bool prune(const Rref& eq, const std::vector<StrictSlot>& strict) const {
        for (const auto& st : strict)
            if (strict_status(eq, st) < 0) return true;
        return false;
    }

    void note(size_t depth, const std::string& s) const {
        if (trace_) *trace_ << std::string(2 * depth, ' ') << s << "\n";
    }

    bool dfs(size_t k, const Rref& eq, const std::vector<StrictSlot>& strict, LexResult& res, size_t depth) {
        if (k == sys_.cons.size()) {
            ++res.leaves;
            bool ok = solve_leaf(eq, strict, res.witness);
            note(depth, ok ? "leaf: feasible" : "leaf: infeasible");
            return ok;
        }
        const LexConstraint& c = sys_.cons[k];
        auto branch_zero = [&](size_t from, size_t to, Rref& e) {
            for (size_t s = from; s < to; ++s)
                if (!add_zero_slot(e, c, s)) return false;
            return true;
        };
        auto try_eq = [&]() {
            Rref e = eq;
            note(depth, "c" + std::to_string(k) + " = 0 on [" + std::to_string(c.lo) + "," + std::to_string(c.hi) + ")");
            if (!branch_zero(c.lo, c.hi, e) || prune(e, strict)) return false;
            return dfs(k + 1, e, strict, res, depth + 1);
        };
        auto try_lead = [&](size_t s, int side) {
            Rref e = eq;
            note(depth, "c" + std::to_string(k) + " leads at slot " + std::to_string(s) + (side > 0 ? " (+)" : " (-)"));
            if (!branch_zero(c.lo, s, e)) return false;
            auto st = strict;
            st.push_back({&c, s, side});
            if (prune(e, st)) return false;
            return dfs(k + 1, e, st, res, depth + 1);
        };
        switch (c.rel) {
            case Rel::EQ: return try_eq();
            case Rel::GE:
                if (try_eq()) return true;
                [[fallthrough]];
            case Rel::GT:
                for (size_t s = c.lo; s < c.hi; ++s)
                    if (try_lead(s, 1)) return true;
                return false;
            case Rel::NE:
                for (size_t s = c.lo; s < c.hi; ++s)
                    for (int side : {1, -1})
                        if (try_lead(s, side)) return true;
                return false;
        }
        return false;
    }

    // Strict inequalities over the free parameters, with real-algebraic coefficients.
    bool solve_leaf(const Rref& eq, const std::vector<StrictSlot>& strict, QVec& witness) const {
        std::vector<bool> pivot(n(), false);
        for (int p : eq.pivots) pivot[p] = true;
        std::vector<size_t> freeVars;
        for (size_t i = 0; i < n(); ++i)
            if (!pivot[i]) freeVars.push_back(i);
        const NumberField& K = *m_.field;

        std::vector<KForm> forms;
        for (const auto& st : strict) {
            KForm f{std::vector<QPoly>(freeVars.size()), {}};
            for (size_t j = 0; j < m_.slot_dim(st.slot); ++j) {
                size_t col = m_.offset[st.slot] + j;
                Affine a = eq.reduce(coord_form(*st.src, col));
                const QPoly& beta = m_.reps[st.slot][j];
                for (size_t v = 0; v < freeVars.size(); ++v)
                    f.coef[v] = qp_add(f.coef[v], qp_scale(beta, a[freeVars[v]] * st.side));
                f.constant = qp_add(f.constant, qp_scale(beta, a[n()] * st.side));
            }
            forms.push_back(std::move(f));
        }

        // Fourier–Motzkin, eliminating the last parameter first; keep each stage for back-substitution.
        std::vector<std::vector<KForm>> stages{forms};
        for (size_t v = freeVars.size(); v-- > 0;) {
            std::vector<KForm> pos, neg, next;
            for (auto f : stages.back()) {
                int s = K.sign(f.coef[v]);
                if (s == 0) {
                    push_unique(next, std::move(f), K);
                    continue;
                }
                // normalize so the coefficient of v is ±1
                QPoly inv = K.inv(f.coef[v]);
                if (s < 0) inv = qp_scale(inv, -1);
                for (auto& c : f.coef) c = K.mul(c, inv);
                f.constant = K.mul(f.constant, inv);
                (s > 0 ? pos : neg).push_back(std::move(f));
            }
            for (const auto& p : pos)
                for (const auto& q : neg) {
                    KForm sum{std::vector<QPoly>(freeVars.size()), qp_add(p.constant, q.constant)};
                    for (size_t i = 0; i < v; ++i) sum.coef[i] = qp_add(p.coef[i], q.coef[i]);
                    push_unique(next, std::move(sum), K);
                }
            stages.push_back(std::move(next));
        }
        for (const auto& f : stages.back())
            if (K.sign(f.constant) <= 0) return false;

        // back-substitute, choosing simple rationals strictly inside each interval
        std::vector<Rational> u(freeVars.size());
        for (size_t v = 0; v < freeVars.size(); ++v) {
            const auto& stage = stages[freeVars.size() - 1 - v];
            std::vector<QPoly> lowers, uppers;  // v > -rest, v < rest
            for (const auto& f : stage) {
                int s = K.sign(f.coef[v]);
                if (s == 0) continue;
                QPoly rest = f.constant;
                for (size_t i = 0; i < v; ++i) rest = qp_add(rest, qp_scale(f.coef[i], u[i]));
                QPoly inv = K.inv(f.coef[v]);
                QPoly bound = K.mul(rest, qp_scale(inv, -1));  // v·c + rest > 0 ⇔ v > -rest/c (c > 0)
                (s > 0 ? lowers : uppers).push_back(bound);
            }
            u[v] = pick_between(lowers, uppers, K);
        }
        QVec t(n() + 1);
        for (size_t v = 0; v < freeVars.size(); ++v) t[freeVars[v]] = u[v];
        for (size_t r = 0; r < eq.rows.size(); ++r) {
            Rational val = -eq.rows[r][n()];
            for (size_t i = 0; i < n(); ++i)
                if (i != static_cast<size_t>(eq.pivots[r])) val -= eq.rows[r][i] * t[i];
            t[eq.pivots[r]] = val;
        }
        t.pop_back();
        witness = t;
        return true;
    }

    static void push_unique(std::vector<KForm>& out, KForm f, const NumberField& K) {
        // scale by the inverse absolute value of the first nonzero coefficient
        QPoly lead;
        for (const auto& c : f.coef)
            if (!c.empty()) {
                lead = c;
                break;
            }
        if (lead.empty()) lead = f.constant;
        if (!lead.empty()) {
            QPoly inv = K.inv(lead);
            if (K.sign(lead) < 0) inv = qp_scale(inv, -1);
            for (auto& c : f.coef) c = K.mul(c, inv);
            f.constant = K.mul(f.constant, inv);
        }
        for (const auto& g : out)
            if (g.coef == f.coef && g.constant == f.constant) return;
        out.push_back(std::move(f));
    }

    // A simple rational strictly above every lower bound and below every upper bound.
    static Rational pick_between(const std::vector<QPoly>& lowers, const std::vector<QPoly>& uppers,
                                 const NumberField& K) {
        auto maxOf = [&](const std::vector<QPoly>& xs, int dir) {
            QPoly best = xs[0];
            for (const auto& x : xs)
                if (K.sign(qp_sub(x, best)) * dir > 0) best = x;
            return best;
        };
        std::optional<QPoly> lo, hi;
        if (!lowers.empty()) lo = maxOf(lowers, 1);
        if (!uppers.empty()) hi = maxOf(uppers, -1);
        if (!lo && !hi) return 0;
        if (lo && !hi) {
            if (K.sign(*lo) < 0) return 0;
            return Rational(floor_q(K.enclose(*lo, 1).hi) + 1);
        }
        if (!lo && hi) {
            if (K.sign(*hi) > 0) return 0;
            return Rational(ceil_q(K.enclose(*hi, 1).lo) - 1);
        }
        ensure(K.sign(qp_sub(*hi, *lo)) > 0, "linlex: empty interval in back-substitution");
        for (Rational w = 1;; w /= 4) {
            Interval a = K.enclose(*lo, w), b = K.enclose(*hi, w);
            if (a.hi < b.lo) return simplest_between(a.hi, b.lo);
        }
    }

    const LexSystem& sys_;
    const OvsModel& m_;
    std::ostream* trace_;
};

}  // namespace detail

inline LexResult feasible(const LexSystem& sys) { return detail::LexSolver(sys, nullptr).run(); }

// Text dump of the explored case tree (debugging aid).
inline std::string dump_case_tree(const LexSystem& sys) {
    std::ostringstream os;
    auto r = detail::LexSolver(sys, &os).run();
    os << (r.feasible ? "feasible" : "infeasible") << " after " << r.leaves << " leaves\n";
    return os.str();
}

}  // namespace oagfork
