#include "oagfork/oracle.hpp"
#include "oagfork/query.hpp"

#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <string>

using namespace oagfork;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
};

// Counts cases and remembers the first failure.
struct Tally {
    long cases = 0, failures = 0;
    std::string first;

    void check(bool ok, const std::string& what) {
        ++cases;
        if (ok) return;
        if (!failures++) first = what;
    }
    Outcome outcome(long minCases, const std::string& label) const {
        std::string d = label + ": " + std::to_string(cases) + " checks, " + std::to_string(failures) + " failures";
        if (failures) d += " (first: " + first + ")";
        if (cases < minCases) d += " (too few cases, need " + std::to_string(minCases) + ")";
        return {failures == 0 && cases >= minCases, d};
    }
};

OvsElement random_element(std::mt19937_64& rng, const ModelPtr& m) {
    OvsElement e = zero_element(m);
    for (auto& c : e.coords)
        if (rng() % 2) c = static_cast<long>(rng() % 9) - 4;
    return e;
}

Outcome fixture_verdicts() {
    auto rows = run_fixtures();
    Outcome o{rows.size() == 9, ""};
    for (const auto& r : rows) {
        bool ok = r.pass && r.seconds < 1.0;
        o.pass = o.pass && ok;
        if (!ok) o.detail += r.name + " observed \"" + r.observed + "\"; ";
    }
    if (o.detail.empty()) o.detail = std::to_string(rows.size()) + " fixtures exact, each < 1 s";
    return o;
}

Outcome property_suites() {
    std::vector<Outcome> parts;
    {
        Tally t;
        std::mt19937_64 rng(201);
        for (int it = 0; it < 250; ++it) {
            auto inst = random_doag_instance(rng, 4, 3);
            auto A = span_subspace(inst.model, inst.A);
            auto x = random_element(rng, inst.model), y = random_element(rng, inst.model);
            auto v = [&](const OvsElement& e) { return adhoc_value(classify_cut(e, A)); };
            auto vx = v(x), vy = v(y), vd = v(x - y);
            t.check(delta(x - y) <= std::max(delta(x), delta(y)), "Δ");
            t.check(vd.v1 <= std::max(vx.v1, vy.v1), "v1");
            t.check(vd.v2 <= std::max(vx.v2, vy.v2), "v2");
            t.check(vd.v3 <= std::max(vx.v3, vy.v3), "v3");
        }
        parts.push_back(t.outcome(1000, "ultrametric"));
    }
    {
        Tally t;
        std::mt19937_64 rng(202);
        for (int it = 0; it < 250; ++it) {
            auto inst = random_doag_instance(rng, 4, 3);
            auto A = span_subspace(inst.model, inst.A);
            auto x = random_element(rng, inst.model), y = random_element(rng, inst.model);
            auto [vals, bd] = adhoc_values({x, y, x + y, x - y}, A);
            bool ok = bd.v3.size() >= bd.v2.size() && bd.v2.size() >= bd.v1.size();
            for (const auto& a : vals)
                for (const auto& b : vals) {
                    if (a.v3 == b.v3) ok = ok && a.v2 == b.v2;
                    if (a.v2 == b.v2) ok = ok && a.v1 == b.v1;
                }
            t.check(ok, "refinement");
        }
        parts.push_back(t.outcome(200, "refinement"));
    }
    {
        Tally t;
        std::mt19937_64 rng(203);
        for (int it = 0; it < 250; ++it) {
            auto inst = random_doag_instance(rng, 4, 3);
            auto A = span_subspace(inst.model, inst.A);
            auto x = random_element(rng, inst.model);
            OvsElement a = zero_element(inst.model);
            for (const auto& b : A.basis()) a = a + Rational(static_cast<long>(rng() % 7) - 3) * b;
            Rational q(static_cast<long>(1 + rng() % 5), static_cast<long>(1 + rng() % 3));
            auto c = classify_cut(x, A), ct = classify_cut(x + a, A), cs = classify_cut(q * x, A);
            t.check(c.kind == ct.kind && c.g == ct.g && c.h == ct.h && c.delta == ct.delta && c.side == ct.side &&
                        (!c.ramifier || *c.ramifier + a == *ct.ramifier),
                    "translation");
            t.check(c.kind == cs.kind && c.g == cs.g && c.h == cs.h, "scaling");
        }
        parts.push_back(t.outcome(400, "covariance"));
    }
    {
        Tally t;
        std::mt19937_64 rng(204);
        for (int it = 0; it < 600; ++it) {
            auto inst = random_doag_instance(rng);
            auto sp = doag_spaces(inst.model, inst.C, inst.A, inst.B);
            auto v = forking_independent_doag(sp);
            if (!v.independent) t.check(v.witness && verify_doag_witness(sp, *v.witness), "witness");
        }
        parts.push_back(t.outcome(200, "witnesses"));
    }
    {
        Tally t;
        std::mt19937_64 rng(205);
        for (int it = 0; it < 600; ++it) {
            auto inst = random_doag_instance(rng, 4, 3);
            if (!forking_independent_doag(inst.model, inst.C, inst.A, inst.B).independent) continue;
            auto shrink = [&](const std::vector<OvsElement>& xs) {
                std::vector<OvsElement> out;
                for (const auto& x : xs)
                    if (rng() % 2) out.push_back(x + Rational(static_cast<long>(rng() % 3) - 1) * xs[0]);
                return out;
            };
            t.check(forking_independent_doag(inst.model, shrink(inst.C), inst.A, shrink(inst.B)).independent, "monotone");
        }
        parts.push_back(t.outcome(200, "monotonicity"));
    }
    Outcome o;
    for (const auto& p : parts) {
        o.pass = o.pass && p.pass;
        o.detail += (o.detail.empty() ? "" : "; ") + p.detail;
    }
    return o;
}

Outcome oracle_equivalence() {
    auto rep = cross_check(500, 1, SearchBudget{});
    return {rep.passed() && rep.rows.size() == 500,
            std::to_string(rep.rows.size()) + " instances, " + std::to_string(rep.dependent) + " dependent, " +
                std::to_string(rep.disagreements) + " disagreements"};
}

Outcome normal_forms() {
    Tally t;
    auto check = [&](const DoagSpaces& sp, const std::vector<OvsElement>& in, const std::string& what) {
        auto nf = normal_form(sp, in, false);
        bool dec = std::all_of(nf.traces.begin(), nf.traces.end(), [](const LoopTrace& tr) { return tr.strictly_decreasing(); });
        t.check(dec && verify_normal_form(nf, sp).all() && record_reapplies(nf, in, sp), what);
    };
    auto f452 = fixtures::fx452();
    check(doag_spaces(f452.model, f452.C, f452.A, f452.B), f452.C, "FX-452");
    auto f3319 = fixtures::fx3319();
    for (const auto& c : f3319.C) check(doag_spaces(f3319.model, {c}, f3319.A, f3319.B), {c}, "FX-3319");
    auto f453 = fixtures::fx453();
    check(doag_spaces(f453.model, f453.C, f453.A, f453.B), f453.C, "FX-453");
    std::mt19937_64 rng(206);
    int random = 0;
    for (int it = 0; random < 100 && it < 5000; ++it) {
        auto inst = random_doag_instance(rng, 4, 3);
        auto sp = doag_spaces(inst.model, inst.C, inst.A, inst.B);
        if (!forking_independent_doag(sp).independent) continue;
        ++random;
        check(sp, inst.C, "random #" + std::to_string(random));
    }
    return t.outcome(104, "normal forms");
}

Outcome roag_doag_agreement() {
    Tally t;
    std::mt19937_64 rng(207);
    for (int it = 0; it < 200; ++it) {
        auto inst = random_roag_instance(rng, true);
        auto rv = forking_independent_roag(inst.model, inst.C, inst.A, inst.B);
        auto m = make_model({inst.model->generators});
        auto lift = [&](const std::vector<RoagElement>& xs) {
            std::vector<OvsElement> out;
            for (const auto& x : xs) out.push_back({m, x.coords});
            return out;
        };
        auto dv = forking_independent_doag(m, lift(inst.C), lift(inst.A), lift(inst.B));
        t.check(rv.independent == dv.independent && !rv.coset, "instance " + std::to_string(it));
    }
    return t.outcome(200, "divisible instances");
}

Outcome stabilization() {
    Tally t;
    long cond2 = 0;
    std::mt19937_64 rng(208);
    for (int it = 0; it < 500; ++it) {
        auto inst = random_roag_instance(rng);
        auto sp = roag_spaces(inst.model, inst.C, inst.A, inst.B);
        for (auto [l, Nstar] : condition2_plan(sp).checks) {
            ++cond2;
            t.check(condition2_at(sp, l, Nstar).has_value() == condition2_at(sp, l, Nstar + 1).has_value(),
                    "condition 2 at ℓ=" + std::to_string(l));
        }
        for (long l : {2L, 3L, 5L, 7L}) {
            int Nstar = inv_level_bound(sp, l);
            t.check(c_in_a_mod(sp, l, Nstar) == c_in_a_mod(sp, l, Nstar + 1), "inv at ℓ=" + std::to_string(l));
        }
    }
    auto o = t.outcome(500, "stabilization");
    o.detail += " (" + std::to_string(cond2) + " condition-2 plans)";
    return o;
}

Outcome spines() {
    Tally t;
    auto m = fixtures::hahn_qz();
    std::mt19937_64 rng(209);
    int nonzero = 0, elements = 0;
    while (elements < 100) {
        HahnElement g;
        for (int k = 0; k < 1 + static_cast<int>(rng() % 4); ++k) {
            LexTerm term{{Rational(-static_cast<long>(rng() % 4), 1 + static_cast<long>(rng() % 2)), Rational(-static_cast<long>(rng() % 3))},
                         Rational(static_cast<long>(rng() % 13) - 6)};
            term.exp[0].canonicalize();
            bool dup = std::any_of(g.terms.begin(), g.terms.end(), [&](const LexTerm& u) { return compare_exp(u.exp, term.exp) == 0; });
            if (!dup) g.terms.push_back(term);
        }
        long l = rng() % 2 ? 2 : 3;
        int N = 1 + static_cast<int>(rng() % 2);
        auto H = spine(m, g, l, N);
        if (H.is_zero()) {
            // convention case: g ∈ ℓᴺG, so no coset avoids ℓᴺG
            if (rng() % 4) continue;
            ++elements;
            t.check(!spine_empty(*m, g, H, l, N), "zero spine");
            continue;
        }
        ++elements;
        ++nonzero;
        t.check(spine_empty(*m, g, H, l, N), "empty at H");
        t.check(!spine_empty(*m, g, next_larger(H), l, N), "non-empty at next");
    }
    auto o = t.outcome(100, "spine elements");
    o.detail += " (" + std::to_string(nonzero) + " with non-trivial spine)";
    return o;
}

}  // namespace

int main() {
    struct Criterion {
        const char* name;
        double limitSeconds;
        std::function<Outcome()> run;
    };
    std::vector<Criterion> criteria{
        {"fixture verdicts", 9.0, fixture_verdicts},
        {"property suites", 120.0, property_suites},
        {"oracle equivalence (500 instances)", 300.0, oracle_equivalence},
        {"normal form", 600.0, normal_forms},
        {"roag/doag agreement on divisible models", 600.0, roag_doag_agreement},
        {"stabilization soundness", 600.0, stabilization},
        {"spine maximality", 600.0, spines},
    };
    bool all = true;
    for (const auto& c : criteria) {
        auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        bool pass = o.pass && dt <= c.limitSeconds;
        all = all && pass;
        std::printf("[%s] %s — %s (%.2f s)\n", pass ? "PASS" : "FAIL", c.name, o.detail.c_str(), dt);
    }
    return all ? 0 : 1;
}
