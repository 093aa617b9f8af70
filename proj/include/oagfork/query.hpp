#pragma once

#include "oagfork/fixtures.hpp"
#include "oagfork/json_io.hpp"
#include "oagfork/oracle.hpp"

#include <algorithm>
#include <chrono>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

namespace oagfork {

struct QueryOptions {
    std::vector<long> primes;  // extension-space queries over ROAG
    std::optional<int> level;  // overrides the stabilization bound
};

struct QueryResult {
    Json json;
    std::string summary;
};

namespace detail {

inline std::string theory_of(const Json& q, const AnyModel& m) {
    if (q.contains("theory")) return q["theory"].get<std::string>();
    return std::holds_alternative<ModelPtr>(m) ? "doag" : "roag";
}

inline const ModelPtr& need_ovs(const AnyModel& m, const std::string& task) {
    if (!std::holds_alternative<ModelPtr>(m)) throw input_error("query.model: task \"" + task + "\" needs an \"ovs\" model");
    return std::get<ModelPtr>(m);
}

inline const RoagModelPtr& need_roag(const AnyModel& m, const std::string& task) {
    if (!std::holds_alternative<RoagModelPtr>(m))
        throw input_error("query.model: task \"" + task + "\" needs a roag-dense, roag-zgroup or lex-hahn model");
    return std::get<RoagModelPtr>(m);
}

inline long prime_field(const Json& q, const char* key) {
    long l = jio::integer(jio::field(q, key, "query"), std::string("query.") + key);
    if (!is_prime(l)) jio::fail(std::string("query.") + key, std::to_string(l) + " is not prime");
    return l;
}

inline int level_field(const Json& q, const char* key, int fallback) {
    if (!q.contains(key)) return fallback;
    long n = jio::integer(q[key], std::string("query.") + key);
    if (n < 1) jio::fail(std::string("query.") + key, "level must be positive");
    return static_cast<int>(n);
}

inline Json verdict_json(bool independent) { return independent ? "independent" : "dependent"; }

inline QueryResult dlo_forking(const Json& q) {
    DloSets s{rational_list(q, "A"), rational_list(q, "B"), rational_list(q, "C")};
    auto v = forking_independent_dlo(s);
    QueryResult r{{{"verdict", verdict_json(v.independent)}}, {}};
    if (v.witness) {
        r.json["witness"] = {{"b1", to_string(v.witness->first)}, {"b2", to_string(v.witness->second)}};
        r.summary = "dependent: [" + to_string(v.witness->first) + ", " + to_string(v.witness->second) +
                    "] meets C and misses A";
    } else {
        r.summary = "independent: every closed interval over A∪B meeting C meets A";
    }
    return r;
}

inline QueryResult doag_forking(const ModelPtr& m, const Json& q) {
    auto sp = doag_spaces(m, ovs_list(m, q, "C", true), ovs_list(m, q, "A"), ovs_list(m, q, "B"));
    auto v = forking_independent_doag(sp);
    QueryResult r{{{"verdict", verdict_json(v.independent)}}, {}};
    if (v.witness) {
        r.json["witness"] = to_json(*v.witness);
        r.summary = "dependent: a closed interval with ends in B′ meets C′ but not A′";
    } else {
        auto C = ovs_list(m, q, "C", true);
        auto nf = normal_form(sp, C);
        r.json["certificate"] = {{"normal_form", to_json(nf, verify_normal_form(nf, sp))}};
        r.summary = "independent: no B′-interval separates C′ from A′; normal form attached";
    }
    return r;
}

inline QueryResult roag_forking(const RoagModelPtr& m, const Json& q, const QueryOptions& o) {
    auto sp = roag_spaces(m, roag_list(m, q, "C", true), roag_list(m, q, "A"), roag_list(m, q, "B"));
    auto v = forking_independent_roag(sp, o.level);
    QueryResult r{{{"verdict", verdict_json(v.independent)}}, {}};
    r.json["conditions"] = {{"interval", !v.interval}, {"coset", !v.coset}};
    Json w = Json::object();
    if (v.interval) w["interval"] = to_json(*v.interval);
    if (v.coset) w["coset"] = to_json(*v.coset, *m);
    if (!w.empty()) r.json["witness"] = w;
    std::ostringstream s;
    s << (v.independent ? "independent" : "dependent") << ": interval condition " << (v.interval ? "fails" : "holds")
      << ", prime-coset condition ";
    if (v.coset) s << "fails at ℓ=" << v.coset->l << ", N=" << v.coset->N;
    else s << "holds";
    r.summary = s.str();
    return r;
}

inline QueryResult classify(const ModelPtr& m, const Json& q) {
    auto C = ovs_list(m, q, "C", true);
    auto A = span_subspace(m, ovs_list(m, q, "A"));
    std::optional<QSubspace> B;
    if (q.contains("B")) {
        auto ab = ovs_list(m, q, "A");
        auto b = ovs_list(m, q, "B");
        ab.insert(ab.end(), b.begin(), b.end());
        B = span_subspace(m, ab);
    }
    auto [vals, bd] = adhoc_values(C, A);
    Json items = Json::array();
    std::ostringstream s;
    for (size_t i = 0; i < C.size(); ++i) {
        auto cc = classify_cut(C[i], A);
        Json j = to_json(cc);
        j["value"] = to_json(vals[i]);
        if (B) j["leaning"] = leaning_name(leaning(C[i], A, *B));
        items.push_back(j);
        s << (i ? "; " : "") << "c" << i + 1 << " " << cut_kind_name(cc.kind);
    }
    Json sep = Json::object();
    const QSubspace& over = B ? *B : A;
    sep["v1"] = is_separated(C, ValKey::V1, over);
    sep["v2"] = is_separated(C, ValKey::V2, over);
    sep["v3"] = is_separated(C, ValKey::V3, over);
    return {{{"cuts", items}, {"blocks", {{"v1", bd.v1}, {"v2", bd.v2}, {"v3", bd.v3}}}, {"separated", sep}}, s.str()};
}

inline QueryResult normal_form_task(const ModelPtr& m, const Json& q) {
    auto C = ovs_list(m, q, "C", true);
    auto sp = doag_spaces(m, C, ovs_list(m, q, "A"), ovs_list(m, q, "B"));
    auto nf = normal_form(sp, C);
    auto chk = verify_normal_form(nf, sp);
    bool reapplies = record_reapplies(nf, C, sp);
    Json j = to_json(nf, chk);
    j["record_reapplies"] = reapplies;
    return {{{"normal_form", j}},
            "normal form with " + std::to_string(nf.elements().size()) + " elements; P1–P5 " +
                (chk.all() ? "hold" : "FAIL") + ", record " + (reapplies ? "re-applies" : "does NOT re-apply")};
}

inline QueryResult extensions(const AnyModel& am, const std::string& theory, const Json& q, const QueryOptions& o) {
    if (theory == "dlo") {
        auto A = rational_list(q, "A");
        Json per = Json::array();
        for (const auto& c : rational_list(q, "C", true)) {
            Json e = Json::array();
            for (auto x : generic_extensions(c, A)) e.push_back(dlo_extension_name(x));
            per.push_back({{"c", to_string(c)}, {"extensions", e}});
        }
        return {{{"per_element", per}}, "DLO: realized points have one extension, others a left and a right generic"};
    }
    if (theory == "doag") {
        const auto& m = need_ovs(am, "extensions");
        auto C = ovs_list(m, q, "C", true);
        auto sp = doag_spaces(m, C, ovs_list(m, q, "A"), ovs_list(m, q, "B"));
        auto e = extension_space_doag(sp, C);
        return {{{"extensions", to_json(e, sp)}},
                "invariant extensions: " + (e.total ? e.total->get_str() : std::string("infinitely many")) + " (" + e.shape + ")"};
    }
    const auto& m = need_roag(am, "extensions");
    PrimeSet fromQuery = jio::optional_prime_set(q, "primes", "query");
    if (fromQuery.all) throw input_error("query.primes: extension spaces need a finite prime list");
    std::set<long> merged(o.primes.begin(), o.primes.end());
    merged.insert(fromQuery.primes.begin(), fromQuery.primes.end());
    std::vector<long> primes(merged.begin(), merged.end());
    if (primes.empty()) throw input_error("query.primes: extension spaces over ROAG need an explicit prime list (--primes)");
    auto C = roag_list(m, q, "C", true);
    auto sp = roag_spaces(m, C, roag_list(m, q, "A"), roag_list(m, q, "B"));
    auto inv = inv_extension_exists(sp);
    Json j = {{"inv_extension_exists", inv.exists}};
    if (inv.failing_prime) j["failing_prime"] = *inv.failing_prime;
    if (inv.failing_level) j["failing_level"] = *inv.failing_level;
    auto d = extension_space_roag(sp, C, primes);
    j["L"] = d.L;
    j["rank"] = d.n;
    j["shape"] = d.shape;
    j["divisible_part"] = {{"total", d.s1.total ? Json(d.s1.total->get_str()) : Json("infinite")}, {"shape", d.s1.shape}};
    std::string s = std::string("invariant extension ") + (inv.exists ? "exists" : "does not exist");
    if (inv.failing_prime) s += " (fails at ℓ=" + std::to_string(*inv.failing_prime) + ")";
    return {j, s + "; shape " + d.shape};
}

inline QueryResult spine_task(const RoagModelPtr& m, const Json& q) {
    long l = prime_field(q, "l");
    int N = level_field(q, "N", 1);
    HahnElement g;
    if (m->kind == PresburgerModel::LexHahn) g = hahn_element_from_json(m, jio::field(q, "g", "query"), "query.g");
    auto H = spine(m, g, l, N);
    std::string s = H.is_zero() ? "spine is {0}" : std::string("spine = elements with Δ ") + (H.inclusive ? "≤" : "<") + " Δ(t^e)";
    Json j = {{"spine", to_json(H)}};
    if (m->kind == PresburgerModel::LexHahn && !H.is_zero()) {
        j["check"] = {{"empty_at_H", spine_empty(*m, g, H, l, N)}, {"empty_at_next", spine_empty(*m, g, next_larger(H), l, N)}};
    }
    return {j, s};
}

inline QueryResult ltype(const RoagModelPtr& m, const Json& q, const QueryOptions& o) {
    long l = prime_field(q, "l");
    auto r = ltype_equal(m, roag_list(m, q, "c", true), roag_list(m, q, "d", true), roag_list(m, q, "B"), l, o.level);
    return {{{"equal", r.equal}, {"levels_checked", r.levels_checked}},
            std::string("ℓ-types ") + (r.equal ? "agree" : "differ") + " (levels up to " + std::to_string(r.levels_checked) + ")"};
}

inline QueryResult crt(const RoagModelPtr& m, const Json& q) {
    std::vector<CrtConstraint> cs;
    const auto& a = jio::array_at(jio::field(q, "constraints", "query"), "query.constraints");
    for (size_t i = 0; i < a.size(); ++i) {
        std::string p = jio::sub("query.constraints", i);
        cs.push_back({jio::integer(jio::field(a[i], "l", p), jio::sub(p, "l")),
                      static_cast<int>(jio::integer(jio::field(a[i], "N", p), jio::sub(p, "N"))),
                      roag_element_from_json(m, jio::field(a[i], "a", p), jio::sub(p, "a"))});
    }
    auto b = crt_lift(m, cs);
    bool ok = crt_verifies(m, cs, b);
    return {{{"b", to_json(*m, b)}, {"verified", ok}}, std::string("lift found; congruences ") + (ok ? "verified" : "NOT verified")};
}

inline QueryResult chain(const ModelPtr& m, const Json& q) {
    auto steps = chain_independent(m, ovs_list(m, q, "d", true), ovs_list(m, q, "A"), ovs_list(m, q, "B"));
    Json a = Json::array();
    std::string s = "steps:";
    for (const auto& v : steps) {
        Json j = {{"verdict", verdict_json(v.independent)}};
        if (v.witness) j["witness"] = to_json(*v.witness);
        a.push_back(j);
        s += v.independent ? " independent" : " dependent";
    }
    bool all = std::all_of(steps.begin(), steps.end(), [](const DoagVerdict& v) { return v.independent; });
    return {{{"steps", a}, {"verdict", verdict_json(all)}}, s};
}

}  // namespace detail

inline const std::vector<std::string>& query_tasks() {
    static const std::vector<std::string> t{"forking", "classify", "normal-form", "extensions", "spine", "ltype", "crt", "chain"};
    return t;
}

// Dispatches one query document; input problems throw input_error with a JSON path.
inline Json run_query(const Json& q, const QueryOptions& o = {}, std::string* summary = nullptr) {
    if (!q.is_object()) throw input_error("query: expected an object");
    if (q.contains("format") && q["format"] != kFormat) throw input_error("query.format: unsupported format version");
    std::string task = q.contains("task") ? q["task"].get<std::string>() : "forking";
    if (std::find(query_tasks().begin(), query_tasks().end(), task) == query_tasks().end())
        throw input_error("query.task: unknown task \"" + task + "\"");
    QueryResult r;
    std::string theory;
    if (q.contains("theory") && q["theory"] == "dlo") {
        theory = "dlo";
        if (task == "forking") r = detail::dlo_forking(q);
        else if (task == "extensions") r = detail::extensions(AnyModel{}, theory, q, o);
        else throw input_error("query.task: \"" + task + "\" is not defined for DLO");
    } else {
        AnyModel m = model_from_json(jio::field(q, "model", "query"));
        theory = detail::theory_of(q, m);
        if (theory != "doag" && theory != "roag") throw input_error("query.theory: unknown theory \"" + theory + "\"");
        if (theory == "doag") detail::need_ovs(m, task);
        if (task == "forking")
            r = theory == "doag" ? detail::doag_forking(std::get<ModelPtr>(m), q) : detail::roag_forking(detail::need_roag(m, task), q, o);
        else if (task == "classify") r = detail::classify(detail::need_ovs(m, task), q);
        else if (task == "normal-form") r = detail::normal_form_task(detail::need_ovs(m, task), q);
        else if (task == "extensions") r = detail::extensions(m, theory, q, o);
        else if (task == "spine") r = detail::spine_task(detail::need_roag(m, task), q);
        else if (task == "ltype") r = detail::ltype(detail::need_roag(m, task), q, o);
        else if (task == "crt") r = detail::crt(detail::need_roag(m, task), q);
        else r = detail::chain(detail::need_ovs(m, task), q);
    }
    r.json["format"] = kFormat;
    r.json["task"] = task;
    r.json["theory"] = theory;
    if (summary) *summary = r.summary;
    return r.json;
}

// ---------------------------------------------------------------------------------------------
// Built-in fixture corpus: each row recomputes observed facts and compares them to expectations.

struct FixtureRow {
    std::string name;
    std::string expected;
    std::function<std::string()> observe;
};

namespace detail {

inline std::string yesno(bool b) { return b ? "yes" : "no"; }

inline std::string verdict_word(bool independent) { return independent ? "independent" : "dependent"; }

inline std::vector<OvsElement> cat(std::vector<OvsElement> a, const std::vector<OvsElement>& b) {
    a.insert(a.end(), b.begin(), b.end());
    return a;
}

}  // namespace detail

inline std::vector<FixtureRow> fixture_corpus() {
    using namespace fixtures;
    using detail::cat;
    using detail::verdict_word;
    std::vector<FixtureRow> rows;
    rows.push_back({"FX-316",
                    "c1=archimedean H=0 c2=archimedean c3=ramified ramifier=0 v2:c1<c3<c2",
                    [] {
                        auto f = fx316();
                        auto A = span_subspace(f.model, f.A);
                        auto c1 = classify_cut(f.C[0], A), c2 = classify_cut(f.C[1], A), c3 = classify_cut(f.C[2], A);
                        auto [vals, bd] = adhoc_values(f.C, A);
                        std::string s = std::string("c1=") + cut_kind_name(c1.kind) + " H=" + (c1.h.is_zero() ? "0" : "?") +
                                        " c2=" + cut_kind_name(c2.kind) + " c3=" + cut_kind_name(c3.kind) +
                                        " ramifier=" + (c3.ramifier && is_zero(c3.ramifier->coords) ? "0" : "?");
                        bool order = vals[0].v2 < vals[2].v2 && vals[2].v2 < vals[1].v2;
                        return s + (order ? " v2:c1<c3<c2" : " v2:other");
                    }});
    rows.push_back({"FX-3319", "count(c1)=1 count(c2)=2", [] {
                        auto f = fx3319();
                        auto e1 = extension_space_doag(doag_spaces(f.model, {f.C[0]}, f.A, f.B), {f.C[0]});
                        auto e2 = extension_space_doag(doag_spaces(f.model, {f.C[1]}, f.A, f.B), {f.C[1]});
                        auto str = [](const ExtensionSpaceDescriptor& e) { return e.total ? e.total->get_str() : "inf"; };
                        return "count(c1)=" + str(e1) + " count(c2)=" + str(e2);
                    }});
    rows.push_back({"FX-452", "forking=independent chain(c1,c2)=independent,dependent chain(c2,c1)=independent,dependent", [] {
                        auto f = fx452();
                        auto v = forking_independent_doag(f.model, f.C, f.A, f.B);
                        auto ch = [&](std::vector<OvsElement> d) {
                            auto r = chain_independent(f.model, d, f.A, f.B);
                            return verdict_word(r[0].independent) + "," + verdict_word(r[1].independent);
                        };
                        return "forking=" + verdict_word(v.independent) + " chain(c1,c2)=" + ch({f.C[0], f.C[1]}) +
                               " chain(c2,c1)=" + ch({f.C[1], f.C[0]});
                    }});
    rows.push_back({"FX-453", "chain(c1,c2)=independent,independent chain(c2,c1)=independent,dependent witness=[√2,√2+c2]:valid", [] {
                        auto f = fx453();
                        auto ch = [&](std::vector<OvsElement> d) {
                            auto r = chain_independent(f.model, d, f.A, f.B);
                            return verdict_word(r[0].independent) + "," + verdict_word(r[1].independent);
                        };
                        auto sp = doag_spaces(f.model, {f.C[0]}, cat(f.A, {f.C[1]}), f.B);
                        DoagWitness w{f.C[0], unit(f.model, 0, 1), unit(f.model, 0, 1) + f.C[1]};
                        auto v = forking_independent_doag(sp);
                        bool ok = !v.independent && verify_doag_witness(sp, *v.witness) && verify_doag_witness(sp, w);
                        return "chain(c1,c2)=" + ch({f.C[0], f.C[1]}) + " chain(c2,c1)=" + ch({f.C[1], f.C[0]}) +
                               " witness=[√2,√2+c2]:" + (ok ? "valid" : "invalid");
                    }});
    rows.push_back({"FX-454-spine", "H3((1,0)) = {0}×Z[1/2]", [] {
                        auto m = lex_zhalf_squared();
                        auto g = monomial({1});
                        auto H = spine(m, g, 3, 1);
                        // exponent 1 carries the dominant coordinate: H = {Δ < Δ(t¹)} is the second factor
                        bool ok = !H.is_zero() && *H.bound == std::vector<Rational>{Rational(1)} && !H.inclusive &&
                                  spine_empty(*m, g, H, 3, 1) && !spine_empty(*m, g, next_larger(H), 3, 1);
                        return std::string("H3((1,0)) = ") + (ok ? "{0}×Z[1/2]" : "other");
                    }});
    rows.push_back({"FX-455-spine", "H2(t^(-1,-1)) = {Δ < Δ(t^(-1,-1))}", [] {
                        auto m = hahn_qz();
                        auto g = monomial({-1, -1});
                        auto H = spine(m, g, 2, 1);
                        bool ok = !H.is_zero() && *H.bound == std::vector<Rational>{Rational(-1), Rational(-1)} && !H.inclusive &&
                                  spine_empty(*m, g, H, 2, 1) && !spine_empty(*m, g, next_larger(H), 2, 1);
                        return std::string("H2(t^(-1,-1)) = ") + (ok ? "{Δ < Δ(t^(-1,-1))}" : "other");
                    }});
    rows.push_back({"FX-zhalf", "forking=independent inv=no failing_prime=3", [] {
                        auto sp = roag_spaces(zhalf_model(), {relem({1})}, {}, {});
                        auto v = forking_independent_roag(sp);
                        auto inv = inv_extension_exists(sp);
                        return "forking=" + verdict_word(v.independent) + " inv=" + detail::yesno(inv.exists) +
                               " failing_prime=" + (inv.failing_prime ? std::to_string(*inv.failing_prime) : "none");
                    }});
    rows.push_back({"FX-sumZr", "forking=dependent coset=(2,1):valid", [] {
                        auto sp = roag_spaces(sum_zr_model(), {relem({1, 2, 0})}, {}, {relem({1, 0, 0})});
                        auto v = forking_independent_roag(sp);
                        std::string c = v.coset ? "(" + std::to_string(v.coset->l) + "," + std::to_string(v.coset->N) + "):" +
                                                      (verify_coset_witness(sp, *v.coset) ? "valid" : "invalid")
                                                : "none";
                        return "forking=" + verdict_word(v.independent) + " coset=" + c;
                    }});
    rows.push_back({"FX-dlo-1210", "dependent witness=[0,2]", [] {
                        auto v = forking_independent_dlo(fixtures::dlo_1210());
                        std::string w = v.witness ? "[" + to_string(v.witness->first) + "," + to_string(v.witness->second) + "]" : "none";
                        return verdict_word(v.independent) + " witness=" + w;
                    }});
    return rows;
}

struct FixtureOutcome {
    std::string name, expected, observed;
    bool pass = false;
    double seconds = 0;
};

// Runs rows whose name contains `filter`; `corrupt` names a row whose expectation is deliberately altered.
inline std::vector<FixtureOutcome> run_fixtures(const std::string& filter = "", const std::string& corrupt = "") {
    std::vector<FixtureOutcome> out;
    for (auto& row : fixture_corpus()) {
        if (row.name.find(filter) == std::string::npos) continue;
        if (!corrupt.empty() && row.name == corrupt) row.expected += " (corrupted)";
        auto t0 = std::chrono::steady_clock::now();
        std::string obs;
        try {
            obs = row.observe();
        } catch (const std::exception& e) {
            obs = std::string("error: ") + e.what();
        }
        double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        out.push_back({row.name, row.expected, obs, obs == row.expected, dt});
    }
    return out;
}

}  // namespace oagfork
