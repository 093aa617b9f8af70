#pragma once

#include "oagfork/dlo.hpp"
#include "oagfork/doag.hpp"
#include "oagfork/roag.hpp"

#include <json.hpp>

#include <string>
#include <variant>
#include <vector>

namespace oagfork {

using Json = nlohmann::json;

inline constexpr int kFormat = 1;

namespace jio {

// Schema errors carry the JSON path of the offending value.
[[noreturn]] inline void fail(const std::string& path, const std::string& what) {
    throw input_error(path + ": " + what);
}

inline const Json& field(const Json& j, const char* key, const std::string& path) {
    if (!j.is_object()) fail(path, "expected an object");
    auto it = j.find(key);
    if (it == j.end()) fail(path, std::string("missing field \"") + key + "\"");
    return *it;
}

inline const Json& array_at(const Json& j, const std::string& path) {
    if (!j.is_array()) fail(path, "expected an array");
    return j;
}

inline std::string sub(const std::string& path, size_t i) { return path + "[" + std::to_string(i) + "]"; }
inline std::string sub(const std::string& path, const char* key) { return path + "." + key; }

inline Rational rational(const Json& j, const std::string& path) {
    if (j.is_number_integer()) return Rational(Integer(j.dump()));
    if (!j.is_string()) fail(path, "expected a rational string \"p/q\"");
    try {
        return parse_rational(j.get<std::string>());
    } catch (const input_error& e) {
        fail(path, e.what());
    }
}

inline long integer(const Json& j, const std::string& path) {
    if (!j.is_number_integer()) fail(path, "expected an integer");
    return j.get<long>();
}

inline Json rational(const Rational& q) { return to_string(q); }

inline RealAlgebraic real_algebraic(const Json& j, const std::string& path) {
    RealAlgebraic a;
    const auto& mp = array_at(field(j, "minpoly", path), sub(path, "minpoly"));
    for (size_t i = 0; i < mp.size(); ++i) {
        const auto& c = mp[i];
        if (c.is_number_integer()) a.minpoly.push_back(Integer(c.dump()));
        else if (c.is_string()) {
            Rational q = rational(c, sub(sub(path, "minpoly"), i));
            if (q.get_den() != 1) fail(sub(sub(path, "minpoly"), i), "minpoly coefficients must be integers");
            a.minpoly.push_back(q.get_num());
        } else
            fail(sub(sub(path, "minpoly"), i), "expected an integer");
    }
    const auto& iv = array_at(field(j, "interval", path), sub(path, "interval"));
    if (iv.size() != 2) fail(sub(path, "interval"), "expected [lo, hi]");
    a.lo = rational(iv[0], sub(sub(path, "interval"), size_t{0}));
    a.hi = rational(iv[1], sub(sub(path, "interval"), size_t{1}));
    try {
        return validated(a);
    } catch (const input_error& e) {
        fail(path, e.what());
    }
}

inline Json real_algebraic(const RealAlgebraic& a) {
    Json mp = Json::array();
    for (const auto& c : a.minpoly) mp.push_back(c.fits_slong_p() ? Json(c.get_si()) : Json(c.get_str()));
    return {{"minpoly", mp}, {"interval", {to_string(a.lo), to_string(a.hi)}}};
}

inline std::vector<std::vector<RealAlgebraic>> slots(const Json& j, const std::string& path) {
    std::vector<std::vector<RealAlgebraic>> out;
    const auto& s = array_at(j, path);
    for (size_t i = 0; i < s.size(); ++i) {
        std::string p = sub(path, i);
        const auto& basis = array_at(field(s[i], "basis", p), sub(p, "basis"));
        std::vector<RealAlgebraic> slot;
        for (size_t k = 0; k < basis.size(); ++k) slot.push_back(real_algebraic(basis[k], sub(sub(p, "basis"), k)));
        out.push_back(std::move(slot));
    }
    return out;
}

inline Json slots(const std::vector<std::vector<RealAlgebraic>>& s) {
    Json out = Json::array();
    for (const auto& slot : s) {
        Json basis = Json::array();
        for (const auto& a : slot) basis.push_back(real_algebraic(a));
        out.push_back({{"basis", basis}});
    }
    return out;
}

inline PrimeSet prime_set(const Json& j, const std::string& path) {
    PrimeSet s;
    if (j.is_string() && j.get<std::string>() == "all") {
        s.all = true;
        return s;
    }
    const auto& a = array_at(j, path);
    for (size_t i = 0; i < a.size(); ++i) {
        long p = integer(a[i], sub(path, i));
        if (!is_prime(p)) fail(sub(path, i), std::to_string(p) + " is not prime");
        s.primes.insert(p);
    }
    return s;
}

inline Json prime_set(const PrimeSet& s) {
    if (s.all) return "all";
    Json a = Json::array();
    for (long p : s.primes) a.push_back(p);
    return a;
}

inline PrimeSet optional_prime_set(const Json& j, const char* key, const std::string& path) {
    return j.contains(key) ? prime_set(j[key], sub(path, key)) : PrimeSet{};
}

// Slot-major rational groups flattened against the given slot sizes.
inline QVec grouped(const Json& j, const std::vector<size_t>& sizes, const std::string& path) {
    const auto& groups = array_at(field(j, "coords", path), sub(path, "coords"));
    std::string p = sub(path, "coords");
    if (groups.size() != sizes.size())
        fail(p, "expected " + std::to_string(sizes.size()) + " slot groups, got " + std::to_string(groups.size()));
    QVec v;
    for (size_t s = 0; s < sizes.size(); ++s) {
        const auto& g = array_at(groups[s], sub(p, s));
        if (g.size() != sizes[s])
            fail(sub(p, s), "expected " + std::to_string(sizes[s]) + " coordinates, got " + std::to_string(g.size()));
        for (size_t k = 0; k < g.size(); ++k) v.push_back(rational(g[k], sub(sub(p, s), k)));
    }
    return v;
}

inline Json grouped(const QVec& v, const std::vector<size_t>& sizes) {
    Json groups = Json::array();
    size_t at = 0;
    for (size_t n : sizes) {
        Json g = Json::array();
        for (size_t k = 0; k < n; ++k) g.push_back(rational(v[at++]));
        groups.push_back(g);
    }
    return {{"coords", groups}};
}

inline std::vector<size_t> slot_sizes(const OvsModel& m) {
    std::vector<size_t> s;
    for (size_t i = 0; i < m.nslots(); ++i) s.push_back(m.slot_dim(i));
    return s;
}

inline std::vector<size_t> slot_sizes(const PresburgerModel& m) {
    std::vector<size_t> s;
    if (m.kind == PresburgerModel::DenseArch) return {m.generators.size()};
    for (const auto& slot : m.tower) s.push_back(slot.size());
    s.push_back(1);
    return s;
}

inline ChainFactor chain_factor(const Json& j, const std::string& path) {
    if (j.is_object()) {
        long k = integer(field(j, "finite", path), sub(path, "finite"));
        return {ChainFactor::Finite, k};
    }
    if (!j.is_string()) fail(path, "expected \"Q<=0\", \"Z<=0\", \"Z\", \"Q\" or {\"finite\": k}");
    auto s = j.get<std::string>();
    if (s == "Q<=0") return {ChainFactor::QNonPos, 0};
    if (s == "Z<=0") return {ChainFactor::ZNonPos, 0};
    if (s == "Z") return {ChainFactor::Z, 0};
    if (s == "Q") return {ChainFactor::Q, 0};
    fail(path, "unknown chain factor \"" + s + "\"");
}

inline Json chain_factor(const ChainFactor& f) {
    switch (f.kind) {
        case ChainFactor::QNonPos: return "Q<=0";
        case ChainFactor::ZNonPos: return "Z<=0";
        case ChainFactor::Z: return "Z";
        case ChainFactor::Q: return "Q";
        case ChainFactor::Finite: return {{"finite", f.size}};
    }
    return nullptr;
}

}  // namespace jio

using AnyModel = std::variant<ModelPtr, RoagModelPtr>;

inline ModelPtr ovs_model_from_json(const Json& j, const std::string& path = "model") {
    try {
        return make_model(jio::slots(jio::field(j, "slots", path), jio::sub(path, "slots")));
    } catch (const input_error& e) {
        std::string what = e.what();
        if (what.rfind(path, 0) == 0) throw;
        jio::fail(path, what);
    }
}

inline RoagModelPtr roag_model_from_json(const Json& j, const std::string& path = "model") {
    auto kind = jio::field(j, "kind", path).get<std::string>();
    try {
        if (kind == "roag-dense") {
            const auto& g = jio::array_at(jio::field(j, "generators", path), jio::sub(path, "generators"));
            std::vector<RealAlgebraic> gens;
            for (size_t i = 0; i < g.size(); ++i) gens.push_back(jio::real_algebraic(g[i], jio::sub(jio::sub(path, "generators"), i)));
            return make_dense_model(gens, jio::optional_prime_set(j, "inverted_primes", path),
                                    jio::optional_prime_set(j, "infinite_index_primes", path));
        }
        if (kind == "roag-zgroup")
            return make_zgroup_model(j.contains("slots") ? jio::slots(j["slots"], jio::sub(path, "slots"))
                                                         : std::vector<std::vector<RealAlgebraic>>{});
        if (kind == "lex-hahn") {
            const auto& c = jio::array_at(jio::field(j, "chain", path), jio::sub(path, "chain"));
            std::vector<ChainFactor> chain;
            for (size_t i = 0; i < c.size(); ++i) chain.push_back(jio::chain_factor(c[i], jio::sub(jio::sub(path, "chain"), i)));
            return make_lexhahn_model(chain, jio::optional_prime_set(j, "inverted_primes", path));
        }
    } catch (const input_error& e) {
        std::string what = e.what();
        if (what.rfind(path, 0) == 0) throw;
        jio::fail(path, what);
    }
    jio::fail(jio::sub(path, "kind"), "unknown model kind \"" + kind + "\"");
}

inline AnyModel model_from_json(const Json& j, const std::string& path = "model") {
    const auto& k = jio::field(j, "kind", path);
    if (!k.is_string()) jio::fail(jio::sub(path, "kind"), "expected a string");
    if (k.get<std::string>() == "ovs") return ovs_model_from_json(j, path);
    return roag_model_from_json(j, path);
}

inline Json to_json(const OvsModel& m) { return {{"kind", "ovs"}, {"slots", jio::slots(m.slots)}}; }

inline Json to_json(const PresburgerModel& m) {
    switch (m.kind) {
        case PresburgerModel::DenseArch: {
            Json g = Json::array();
            for (const auto& a : m.generators) g.push_back(jio::real_algebraic(a));
            return {{"kind", "roag-dense"},
                    {"generators", g},
                    {"inverted_primes", jio::prime_set(m.inverted)},
                    {"infinite_index_primes", jio::prime_set(m.infinite_index)}};
        }
        case PresburgerModel::ZGroup: return {{"kind", "roag-zgroup"}, {"slots", jio::slots(m.tower)}};
        case PresburgerModel::LexHahn: {
            Json c = Json::array();
            for (const auto& f : m.chain) c.push_back(jio::chain_factor(f));
            return {{"kind", "lex-hahn"}, {"chain", c}, {"inverted_primes", jio::prime_set(m.inverted)}};
        }
    }
    return nullptr;
}

inline OvsElement ovs_element_from_json(const ModelPtr& m, const Json& j, const std::string& path) {
    QVec coords = jio::grouped(j, jio::slot_sizes(*m), path);  // parsed first: a throwing aggregate initializer leaks on GCC 11
    return {m, std::move(coords)};
}

inline Json to_json(const OvsElement& x) { return jio::grouped(x.coords, jio::slot_sizes(*x.model)); }

inline RoagElement roag_element_from_json(const RoagModelPtr& m, const Json& j, const std::string& path) {
    if (m->kind == PresburgerModel::LexHahn) jio::fail(path, "lex-hahn elements use {\"terms\": [...]}");
    RoagElement x{jio::grouped(j, jio::slot_sizes(*m), path)};
    try {
        validate_element(*m, x);
    } catch (const input_error& e) {
        jio::fail(path, e.what());
    }
    return x;
}

inline Json to_json(const PresburgerModel& m, const RoagElement& x) { return jio::grouped(x.coords, jio::slot_sizes(m)); }

inline HahnElement hahn_element_from_json(const RoagModelPtr& m, const Json& j, const std::string& path) {
    HahnElement g;
    const auto& ts = jio::array_at(jio::field(j, "terms", path), jio::sub(path, "terms"));
    for (size_t i = 0; i < ts.size(); ++i) {
        std::string p = jio::sub(jio::sub(path, "terms"), i);
        LexTerm t;
        const auto& e = jio::array_at(jio::field(ts[i], "exp", p), jio::sub(p, "exp"));
        for (size_t k = 0; k < e.size(); ++k) t.exp.push_back(jio::rational(e[k], jio::sub(jio::sub(p, "exp"), k)));
        t.coef = jio::rational(jio::field(ts[i], "coef", p), jio::sub(p, "coef"));
        g.terms.push_back(std::move(t));
    }
    try {
        validate_hahn(*m, g);
    } catch (const input_error& e) {
        jio::fail(path, e.what());
    }
    return g;
}

inline Json exponent_json(const std::vector<Rational>& e) {
    Json a = Json::array();
    for (const auto& q : e) a.push_back(jio::rational(q));
    return a;
}

inline Json to_json(const HahnElement& g) {
    Json ts = Json::array();
    for (const auto& t : g.terms) ts.push_back({{"exp", exponent_json(t.exp)}, {"coef", jio::rational(t.coef)}});
    return {{"terms", ts}};
}

template <class Elem, class Parse>
std::vector<Elem> element_list(const Json& q, const char* key, const std::string& path, Parse parse, bool required = false) {
    std::vector<Elem> out;
    if (!q.contains(key)) {
        if (required) jio::fail(path, std::string("missing field \"") + key + "\"");
        return out;
    }
    std::string p = jio::sub(path, key);
    const auto& a = jio::array_at(q[key], p);
    for (size_t i = 0; i < a.size(); ++i) out.push_back(parse(a[i], jio::sub(p, i)));
    return out;
}

inline std::vector<OvsElement> ovs_list(const ModelPtr& m, const Json& q, const char* key, bool required = false) {
    return element_list<OvsElement>(q, key, "query", [&](const Json& j, const std::string& p) { return ovs_element_from_json(m, j, p); },
                                    required);
}

inline std::vector<RoagElement> roag_list(const RoagModelPtr& m, const Json& q, const char* key, bool required = false) {
    return element_list<RoagElement>(q, key, "query", [&](const Json& j, const std::string& p) { return roag_element_from_json(m, j, p); },
                                     required);
}

inline std::vector<Rational> rational_list(const Json& q, const char* key, bool required = false) {
    return element_list<Rational>(q, key, "query", [](const Json& j, const std::string& p) { return jio::rational(j, p); }, required);
}

// ---------------------------------------------------------------------------------------------
// Result encoders.

inline Json to_json(const ConvexTrace& t) { return {{"class", t.cls}, {"inclusive", t.inclusive}}; }

inline Json to_json(const DoagWitness& w) { return {{"c", to_json(w.c)}, {"b1", to_json(w.b1)}, {"b2", to_json(w.b2)}}; }

inline Json to_json(const CosetWitness& w, const PresburgerModel& m) {
    return {{"l", w.l}, {"N", w.N}, {"x", to_json(m, w.x)}, {"c", to_json(m, w.c)}, {"b", to_json(m, w.b)}};
}

inline Json to_json(const CutClass& cc) {
    Json j = {{"kind", cut_kind_name(cc.kind)}, {"G", to_json(cc.g)}, {"H", to_json(cc.h)}};
    j["ramifier"] = cc.ramifier ? to_json(*cc.ramifier) : Json(nullptr);
    j["delta"] = cc.delta ? Json(*cc.delta) : Json(nullptr);
    j["side"] = cc.side;
    j["stab_top"] = cc.stab_top ? Json(*cc.stab_top) : Json(nullptr);
    return j;
}

inline Json to_json(const AdHocValue& v) { return {{"v1", v.v1}, {"v2", v.v2}, {"v3", {v.v3.first, v.v3.second}}}; }

inline Json to_json(const QMat& m) {
    Json rows = Json::array();
    for (const auto& r : m) {
        Json row = Json::array();
        for (const auto& q : r) row.push_back(jio::rational(q));
        rows.push_back(row);
    }
    return rows;
}

inline Json to_json(const std::vector<OvsElement>& xs) {
    Json a = Json::array();
    for (const auto& x : xs) a.push_back(to_json(x));
    return a;
}

inline Json to_json(const NormalForm& nf, const NormalFormCheck& chk) {
    Json traces = Json::array();
    for (const auto& t : nf.traces) traces.push_back({{"loop", t.loop}, {"measures", t.measures}});
    Json props = Json::object();
    for (size_t i = 0; i < chk.p.size(); ++i) props["P" + std::to_string(i + 1)] = chk.p[i];
    return {{"d", to_json(nf.d)},
            {"dprime", to_json(nf.dprime)},
            {"dtilde", to_json(nf.dtilde)},
            {"gl", to_json(nf.gl)},
            {"translations", to_json(nf.translations)},
            {"properties", props},
            {"normal_enumeration", chk.enumeration},
            {"free_over_base", chk.free},
            {"traces", traces}};
}

inline Json to_json(const ExtensionSpaceDescriptor& e, const DoagSpaces& sp) {
    Json blocks = Json::array();
    for (const auto& b : e.blocks) {
        blocks.push_back({{"G", to_json(b.G)},
                          {"H", to_json(b.H)},
                          {"arch_arity", b.arch_arity},
                          {"deltas", b.deltas},
                          {"sizes", b.sizes},
                          {"a_archimedean", b.a_archimedean},
                          {"g_definable", b.g_definable},
                          {"h_definable", b.h_definable},
                          {"I", b.I},
                          {"J", b.J},
                          {"O", b.O},
                          {"count", b.count},
                          {"labels", b.labels}});
    }
    return {{"blocks", blocks},
            {"total", e.total ? Json(e.total->get_str()) : Json("infinite")},
            {"shape", e.shape},
            {"normal_form", to_json(e.nf, verify_normal_form(e.nf, sp))}};
}

inline Json to_json(const SpineResult& s) {
    if (s.is_zero()) return {{"zero", true}};
    return {{"zero", false}, {"below", exponent_json(*s.bound)}, {"inclusive", s.inclusive}};
}

}  // namespace oagfork
