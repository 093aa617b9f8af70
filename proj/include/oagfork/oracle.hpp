#pragma once

#include "oagfork/doag.hpp"
#include "oagfork/linlex.hpp"
#include "oagfork/roag.hpp"

#include <algorithm>
#include <random>
#include <string>
#include <vector>

namespace oagfork {

// Plain rational constraint Σ coefᵢxᵢ + constant REL 0 (independent of the lex machinery).
struct RationalConstraint {
    std::vector<Rational> coef;
    Rational constant;
    Rel rel = Rel::GE;
};

namespace detail {

struct FmRow {
    std::vector<Rational> a;
    Rational b;
    bool strict;
};

inline bool fm_rows_feasible(std::vector<FmRow> rows, size_t n) {
    for (size_t v = n; v-- > 0;) {
        std::vector<FmRow> pos, neg, next;
        for (auto& r : rows) {
            if (r.a[v] == 0) {
                next.push_back(r);
                continue;
            }
            Rational s = abs_q(r.a[v]);
            for (auto& c : r.a) c /= s;
            r.b /= s;
            (r.a[v] > 0 ? pos : neg).push_back(r);
        }
        for (const auto& p : pos)
            for (const auto& q : neg) {
                FmRow s{std::vector<Rational>(n), p.b + q.b, p.strict || q.strict};
                for (size_t i = 0; i < n; ++i) s.a[i] = p.a[i] + q.a[i];
                next.push_back(s);
            }
        rows = std::move(next);
    }
    for (const auto& r : rows)
        if (r.strict ? r.b <= 0 : r.b < 0) return false;
    return true;
}

inline bool fm_branch(const std::vector<RationalConstraint>& cs, size_t k, std::vector<FmRow>& acc, size_t n) {
    if (k == cs.size()) return fm_rows_feasible(acc, n);
    const auto& c = cs[k];
    auto neg = [](std::vector<Rational> a) {
        for (auto& x : a) x = -x;
        return a;
    };
    auto with = [&](std::initializer_list<FmRow> extra) {
        size_t before = acc.size();
        acc.insert(acc.end(), extra);
        bool ok = fm_branch(cs, k + 1, acc, n);
        acc.resize(before);
        return ok;
    };
    switch (c.rel) {
        case Rel::GE: return with({{c.coef, c.constant, false}});
        case Rel::GT: return with({{c.coef, c.constant, true}});
        case Rel::EQ: return with({{c.coef, c.constant, false}, {neg(c.coef), -c.constant, false}});
        case Rel::NE:
            return with({{c.coef, c.constant, true}}) || with({{neg(c.coef), -c.constant, true}});
    }
    return false;
}

}  // namespace detail

// Exact rational Fourier–Motzkin with strictness tracking; disequations by branching.
inline bool rational_fm_feasible(const std::vector<RationalConstraint>& cs, size_t n) {
    std::vector<detail::FmRow> acc;
    return detail::fm_branch(cs, 0, acc, n);
}

// ---------------------------------------------------------------------------------------------
// Bounded witness search. Sound for "dependent" only: an exhausted search proves nothing.

struct SearchBudget {
    long height = 2;       // max |numerator| of each coefficient
    long denominator = 1;  // max denominator of each coefficient
};

namespace detail {

inline std::vector<Rational> coefficient_grid(const SearchBudget& b) {
    // small heights first, positive before negative, so the first hit is a simplest one
    std::vector<Rational> out{Rational(0)};
    for (long p = 1; p <= b.height; ++p)
        for (long q = 1; q <= b.denominator; ++q)
            for (long s : {1, -1}) {
                Rational x(s * p, q);
                x.canonicalize();
                if (std::find(out.begin(), out.end(), x) == out.end()) out.push_back(x);
            }
    return out;
}

inline std::vector<OvsElement> independent_subset(const ModelPtr& m, const std::vector<OvsElement>& xs) {
    Rref r;
    std::vector<OvsElement> out;
    for (const auto& x : xs) {
        if (x.coords.size() != m->dim) throw input_error("element dimension does not match the model");
        if (r.insert(x.coords)) out.push_back(x);
    }
    return out;
}

// Every combination of gens with coefficients from the grid.
inline std::vector<OvsElement> combinations(const ModelPtr& m, const std::vector<OvsElement>& gens,
                                            const std::vector<Rational>& grid) {
    std::vector<OvsElement> out{zero_element(m)};
    for (const auto& g : gens) {
        std::vector<OvsElement> next;
        next.reserve(out.size() * grid.size());
        for (const auto& x : out)
            for (const auto& q : grid) next.push_back(q == 0 ? x : x + q * g);
        out = std::move(next);
    }
    return out;
}

}  // namespace detail

// Searches c ∈ C′ and the tightest b₁ ≤ c ≤ b₂ among bounded combinations of the generators of B′.
inline std::optional<DoagWitness> search_witness(const ModelPtr& m, const std::vector<OvsElement>& C,
                                                 const std::vector<OvsElement>& A, const std::vector<OvsElement>& B,
                                                 const SearchBudget& budget) {
    DoagSpaces sp = doag_spaces(m, C, A, B);
    auto grid = detail::coefficient_grid(budget);
    std::vector<OvsElement> bg = A;
    bg.insert(bg.end(), B.begin(), B.end());
    auto bpool = detail::combinations(m, detail::independent_subset(m, bg), grid);
    std::sort(bpool.begin(), bpool.end(), [](const OvsElement& x, const OvsElement& y) { return compare(x, y) < 0; });
    bpool.erase(std::unique(bpool.begin(), bpool.end()), bpool.end());
    auto cpool = detail::combinations(m, detail::independent_subset(m, C), grid);
    for (const auto& c : cpool) {
        if (sp.A.contains(c)) continue;
        auto hi = std::lower_bound(bpool.begin(), bpool.end(), c,
                                   [](const OvsElement& x, const OvsElement& y) { return compare(x, y) < 0; });
        if (hi == bpool.end()) continue;
        const OvsElement& b2 = *hi;
        const OvsElement& b1 = compare(b2, c) == 0 ? b2 : (hi == bpool.begin() ? b2 : *std::prev(hi));
        if (compare(b1, c) > 0) continue;
        DoagWitness w{c, b1, b2};
        if (verify_doag_witness(sp, w)) return w;
    }
    return std::nullopt;
}

// Coset search for condition 2: small c ∈ C′, b ∈ B′ with c − b ∈ ℓᴺ·fragment and c ∉ A′ + ℓᴺ.
inline std::optional<CosetWitness> search_coset_witness(const RoagSpaces& sp, const std::vector<long>& primes, int maxN,
                                                        long height) {
    if (sp.model->kind != PresburgerModel::DenseArch) return std::nullopt;
    size_t n = sp.model->dim();
    auto combos = [&](const IntLattice& L) {
        std::vector<ZVec> out{ZVec(n, 0)};
        for (const auto& g : L.basis) {
            std::vector<ZVec> next;
            for (const auto& x : out)
                for (long k = -height; k <= height; ++k) {
                    ZVec y = x;
                    zv_axpy(y, Integer(k), g);
                    next.push_back(y);
                }
            out = std::move(next);
        }
        return out;
    };
    auto cs = combos(sp.C), bs = combos(sp.B);
    for (long l : primes) {
        if (sp.model->inverted.contains(l) || !sp.model->infinite_index.contains(l)) continue;
        for (int N = 1; N <= maxN; ++N) {
            Integer q = pow_l(l, N);
            IntLattice AlN = detail::plus_lN(sp.A, l, N);
            for (const auto& c : cs) {
                if (contains(AlN, c)) continue;
                for (const auto& b : bs) {
                    ZVec d = c;
                    for (size_t j = 0; j < n; ++j) d[j] -= b[j];
                    if (!detail::divisible_by(d, q)) continue;
                    CosetWitness w{l, N, unscaled(c, sp.scale), unscaled(c, sp.scale), unscaled(b, sp.scale)};
                    if (verify_coset_witness(sp, w)) return w;
                }
            }
        }
    }
    return std::nullopt;
}

// ---------------------------------------------------------------------------------------------
// Random instances and the structural-vs-search cross check.

struct DoagInstance {
    ModelPtr model;
    std::vector<OvsElement> A, B, C;
};

inline DoagInstance random_doag_instance(std::mt19937_64& rng, int maxHeight = 4, long maxGens = 2) {
    static const std::vector<RealAlgebraic> pool{ra_rational(1), ra_sqrt(2), ra_sqrt(3)};
    auto pick = [&](long n) { return static_cast<long>(rng() % static_cast<unsigned long>(n)); };
    size_t ns = 1 + pick(3);
    std::vector<std::vector<RealAlgebraic>> slots;
    for (size_t s = 0; s < ns; ++s) {
        size_t d = 1 + pick(2);
        size_t first = pick(3);
        std::vector<RealAlgebraic> basis;
        for (size_t j = 0; j < d; ++j) basis.push_back(pool[(first + j) % 3]);
        slots.push_back(basis);
    }
    auto m = make_model(slots);
    auto elem = [&] {
        OvsElement e = zero_element(m);
        for (auto& c : e.coords)
            if (pick(2)) c = Rational(pick(2 * maxHeight + 1) - maxHeight, 1 + pick(2));
        for (auto& c : e.coords) c.canonicalize();
        return e;
    };
    auto list = [&](long maxLen) {
        std::vector<OvsElement> xs;
        for (long i = pick(maxLen + 1); i > 0; --i) xs.push_back(elem());
        return xs;
    };
    DoagInstance inst{m, list(maxGens), list(maxGens), list(maxGens)};
    if (inst.C.empty()) inst.C.push_back(elem());
    return inst;
}

struct RoagInstance {
    RoagModelPtr model;
    std::vector<RoagElement> A, B, C;
};

// Dense Archimedean instances with small torsion so that prime cosets matter.
inline RoagInstance random_roag_instance(std::mt19937_64& rng, bool divisible = false) {
    static const std::vector<RealAlgebraic> pool{ra_rational(1), ra_sqrt(2), ra_sqrt(3)};
    auto pick = [&](long n) { return static_cast<long>(rng() % static_cast<unsigned long>(n)); };
    size_t n = 1 + pick(3);
    std::vector<RealAlgebraic> gens(pool.begin(), pool.begin() + static_cast<long>(n));
    PrimeSet inv, inf;
    if (divisible) {
        inv.all = true;
    } else {
        if (pick(3) == 0) inv.primes.insert(3);
        if (pick(2)) inf.all = true;
        else
            for (long p : {2, 3, 5})
                if (pick(2)) inf.primes.insert(p);
    }
    auto m = make_dense_model(gens, inv, inf);
    auto elem = [&] {
        RoagElement e;
        long scale = std::vector<long>{1, 1, 2, 3, 4}[static_cast<size_t>(pick(5))];
        for (size_t i = 0; i < n; ++i) e.coords.push_back(Rational(scale * (pick(7) - 3)));
        return e;
    };
    auto list = [&](long maxLen) {
        std::vector<RoagElement> xs;
        for (long i = pick(maxLen + 1); i > 0; --i) xs.push_back(elem());
        return xs;
    };
    RoagInstance inst{m, list(1), list(2), list(2)};
    if (inst.C.empty()) inst.C.push_back(elem());
    return inst;
}

struct CrossCheckRow {
    size_t id = 0;
    bool independent = true;
    bool decider_witness_verified = false;
    bool search_found = false;
    bool agree = true;
};

struct CrossCheckReport {
    std::vector<CrossCheckRow> rows;
    size_t disagreements = 0;
    size_t dependent = 0;
    std::vector<std::pair<size_t, DoagInstance>> minimized;  // one per disagreement
    bool passed() const { return disagreements == 0; }
};

// Dependent verdicts must carry a verified witness; independent ones must survive the search.
inline CrossCheckRow cross_check_instance(size_t id, const DoagInstance& inst, const SearchBudget& budget) {
    CrossCheckRow row{id};
    auto sp = doag_spaces(inst.model, inst.C, inst.A, inst.B);
    auto v = forking_independent_doag(sp);
    row.independent = v.independent;
    auto found = search_witness(inst.model, inst.C, inst.A, inst.B, budget);
    row.search_found = found.has_value();
    if (v.independent) {
        row.agree = !found;
    } else {
        row.decider_witness_verified = verify_doag_witness(sp, *v.witness);
        row.agree = row.decider_witness_verified;
    }
    return row;
}

// Drops generators one at a time while the disagreement persists.
inline DoagInstance minimize_disagreement(DoagInstance inst, const SearchBudget& budget) {
    for (bool shrunk = true; shrunk;) {
        shrunk = false;
        for (auto* list : {&inst.C, &inst.B, &inst.A})
            for (size_t i = 0; i < list->size(); ++i) {
                DoagInstance trial = inst;
                auto& l = list == &inst.C ? trial.C : list == &inst.B ? trial.B : trial.A;
                l.erase(l.begin() + static_cast<long>(i));
                if (trial.C.empty() || cross_check_instance(0, trial, budget).agree) continue;
                inst = trial;
                shrunk = true;
                break;
            }
    }
    return inst;
}

inline CrossCheckReport cross_check(size_t n, uint64_t seed, const SearchBudget& budget) {
    CrossCheckReport rep;
    std::mt19937_64 rng(seed);
    for (size_t i = 0; i < n; ++i) {
        auto inst = random_doag_instance(rng);
        auto row = cross_check_instance(i, inst, budget);
        if (!row.agree) {
            ++rep.disagreements;
            rep.minimized.push_back({i, minimize_disagreement(inst, budget)});
        }
        if (!row.independent) ++rep.dependent;
        rep.rows.push_back(row);
    }
    return rep;
}

}  // namespace oagfork
