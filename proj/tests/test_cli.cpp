#include "oagfork/fixtures.hpp"
#include "oagfork/json_io.hpp"
#include "oagfork/oracle.hpp"
#include "oagfork/query.hpp"

#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <random>
#include <sstream>

using namespace oagfork;

namespace {

struct Run {
    int rc = -1;
    std::string out, err;
};

std::string bin() {
    const char* b = std::getenv("OAGFORK_BIN");
    return b ? b : "oagfork";
}

std::string query(const std::string& name) { return std::string(OAGFORK_SOURCE_DIR) + "/examples/queries/" + name; }

std::vector<std::string> lines(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream in(s);
    for (std::string l; std::getline(in, l);)
        if (!l.empty()) out.push_back(l);
    return out;
}

Run run(const std::string& args) {
    std::string errPath = testing::TempDir() + "oagfork_stderr.txt";
    std::string cmd = bin() + " " + args + " 2>" + errPath;
    Run r;
    FILE* p = popen(cmd.c_str(), "r");
    if (!p) return r;
    char buf[4096];
    for (size_t n; (n = fread(buf, 1, sizeof buf, p)) > 0;) r.out.append(buf, n);
    int status = pclose(p);
    r.rc = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    std::ifstream e(errPath);
    std::stringstream ss;
    ss << e.rdbuf();
    r.err = ss.str();
    return r;
}

}  // namespace

TEST(Cli, DloExampleVerdict) {
    auto r = run("check " + query("dlo-1210.json"));
    EXPECT_EQ(r.rc, 0);
    auto j = Json::parse(r.out);
    EXPECT_EQ(j["verdict"], "dependent");
    EXPECT_EQ(j["witness"], Json::parse(R"({"b1":"0","b2":"2"})"));
    EXPECT_EQ(j["format"], 1);
    EXPECT_FALSE(r.err.empty());
}

TEST(Cli, Fx452Independent) {
    auto r = run("check --json-only " + query("fx452-forking.json"));
    EXPECT_EQ(r.rc, 0);
    auto j = Json::parse(r.out);
    EXPECT_EQ(j["verdict"], "independent");
    for (const auto& [k, v] : j["certificate"]["normal_form"]["properties"].items()) EXPECT_TRUE(v.get<bool>()) << k;
    EXPECT_TRUE(r.err.empty());
}

TEST(Cli, SubcommandsMatchTheirQueries) {
    EXPECT_EQ(Json::parse(run("chain " + query("fx453-chain-reversed.json")).out)["steps"][1]["verdict"], "dependent");
    EXPECT_EQ(Json::parse(run("classify " + query("fx316-classify.json")).out)["cuts"][2]["kind"], "ramified");
    EXPECT_EQ(Json::parse(run("extensions " + query("fx3319-extensions.json")).out)["extensions"]["total"], "2");
    EXPECT_EQ(Json::parse(run("spine " + query("lexhahn-spine-zhalf.json")).out)["spine"]["below"], Json::parse(R"(["1"])"));
    EXPECT_EQ(Json::parse(run("crt " + query("zgroup-crt.json")).out)["b"]["coords"][0][0], "5");
    EXPECT_EQ(Json::parse(run("ltype " + query("sumzr-ltype.json")).out)["equal"], false);
    EXPECT_EQ(Json::parse(run("normal-form " + query("fx452-normal-form.json")).out)["normal_form"]["record_reapplies"], true);
    auto sumzr = Json::parse(run("check " + query("sumzr-forking.json")).out);
    EXPECT_EQ(sumzr["witness"]["coset"]["l"], 2);
    EXPECT_EQ(sumzr["witness"]["coset"]["N"], 1);
}

TEST(Cli, PrimesFlagFeedsExtensionQueries) {
    auto r = run("extensions --primes 3,7 " + query("zhalf-extensions.json"));
    EXPECT_EQ(r.rc, 0);
    auto j = Json::parse(r.out);
    EXPECT_EQ(j["L"], Json::parse("[3,5,7]"));
    EXPECT_EQ(j["failing_prime"], 3);
    EXPECT_EQ(run("extensions --primes 4 " + query("zhalf-extensions.json")).rc, 2);
}

TEST(Cli, InputErrorsExitTwo) {
    auto bad = run("check " + query("bad-rational.json"));
    EXPECT_EQ(bad.rc, 2);
    EXPECT_NE(bad.err.find("query.B[0]"), std::string::npos) << bad.err;
    EXPECT_TRUE(bad.out.empty());
    EXPECT_EQ(run("check /nonexistent/query.json").rc, 2);
    EXPECT_EQ(run("spine " + query("dlo-1210.json")).rc, 2);  // task mismatch
    EXPECT_EQ(run("--no-such-flag").rc, 2);
    EXPECT_EQ(run("").rc, 2);
}

TEST(Cli, MalformedJsonFromStdin) {
    std::string path = testing::TempDir() + "oagfork_bad.json";
    std::ofstream(path) << "{\"task\": \"forking\", ";
    EXPECT_EQ(run("check - < " + path).rc, 2);
    std::ofstream(path) << R"({"theory":"doag","model":{"kind":"ovs","slots":[{"basis":[{"minpoly":[-2,0,1],"interval":["0","1"]}]}]},"C":[]})";
    auto r = run("check " + path);
    EXPECT_EQ(r.rc, 2);
    EXPECT_NE(r.err.find("model.slots[0].basis[0]"), std::string::npos) << r.err;
}

TEST(Cli, VerdictsAreStable) {
    for (const char* q : {"fx452-forking.json", "sumzr-forking.json", "fx3319-extensions.json"})
        EXPECT_EQ(run("check " + query(q)).out, run("check " + query(q)).out) << q;
}

TEST(Cli, FixtureCorpusAndFilter) {
    auto all = run("fixtures run");
    EXPECT_EQ(all.rc, 0);
    auto rows = lines(all.out);
    EXPECT_EQ(rows.size(), 9u);
    for (const auto& l : rows) EXPECT_TRUE(Json::parse(l)["pass"].get<bool>()) << l;
    auto one = run("fixtures run FX-454");
    EXPECT_EQ(lines(one.out).size(), 1u);
    EXPECT_EQ(Json::parse(one.out)["fixture"], "FX-454-spine");
}

TEST(Cli, CorruptedExpectationFails) {
    auto r = run("fixtures run --corrupt FX-sumZr");
    EXPECT_EQ(r.rc, 1);
    int failed = 0;
    for (const auto& l : lines(r.out)) {
        auto j = Json::parse(l);
        if (!j["pass"].get<bool>()) {
            ++failed;
            EXPECT_EQ(j["fixture"], "FX-sumZr");
        }
    }
    EXPECT_EQ(failed, 1);
}

TEST(Cli, OracleCompareSmallRun) {
    auto r = run("oracle-compare --count 40 --seed 3 --budget-height 2");
    EXPECT_EQ(r.rc, 0);
    auto ls = lines(r.out);
    ASSERT_EQ(ls.size(), 41u);
    auto s = Json::parse(ls.back())["summary"];
    EXPECT_EQ(s["instances"], 40);
    EXPECT_EQ(s["disagreements"], 0);
    EXPECT_TRUE(s["passed"].get<bool>());
    EXPECT_EQ(r.out, run("oracle-compare --count 40 --seed 3 --budget-height 2").out);
}

TEST(RoundTrip, OvsModelsAndElements) {
    std::mt19937_64 rng(11);
    for (int it = 0; it < 200; ++it) {
        auto inst = random_doag_instance(rng, 4, 3);
        Json mj = to_json(*inst.model);
        auto m2 = ovs_model_from_json(Json::parse(mj.dump()));
        EXPECT_EQ(to_json(*m2), mj);
        EXPECT_EQ(m2->slots, inst.model->slots);
        for (const auto& x : inst.C) {
            auto y = ovs_element_from_json(m2, Json::parse(to_json(x).dump()), "x");
            EXPECT_EQ(y.coords, x.coords);
        }
    }
}

TEST(RoundTrip, PresburgerModelsAndElements) {
    using namespace fixtures;
    std::vector<RoagModelPtr> models{zhalf_model(), sum_zr_model(), make_zgroup_model({{sqrt2(), sqrt3()}}),
                                     make_zgroup_model({}), lex_zhalf_squared(), hahn_qz(),
                                     make_lexhahn_model({{ChainFactor::Z, 0}, {ChainFactor::Q, 0}}, {true, {}})};
    for (const auto& m : models) {
        Json j = to_json(*m);
        auto m2 = roag_model_from_json(Json::parse(j.dump()));
        EXPECT_EQ(to_json(*m2), j) << j.dump();
    }
    std::mt19937_64 rng(12);
    for (int it = 0; it < 200; ++it) {
        auto inst = random_roag_instance(rng, it % 3 == 0);
        auto m2 = roag_model_from_json(to_json(*inst.model));
        for (const auto& x : inst.C) EXPECT_EQ(roag_element_from_json(m2, to_json(*m2, x), "x"), x);
    }
    HahnElement g = monomial({-1, -2}, 3);
    g.terms.push_back({{Rational(-1, 2), Rational(0)}, Rational(-5)});
    auto h = hahn_element_from_json(hahn_qz(), Json::parse(to_json(g).dump()), "g");
    EXPECT_EQ(to_json(h), to_json(g));
}

TEST(Query, RejectsSchemaViolationsWithPaths) {
    auto expect_path = [](const Json& q, const std::string& path) {
        try {
            run_query(q);
            ADD_FAILURE() << "accepted " << q.dump();
        } catch (const input_error& e) {
            EXPECT_NE(std::string(e.what()).find(path), std::string::npos) << e.what();
        }
    };
    Json m = to_json(*fixtures::fx452().model);
    expect_path({{"model", m}, {"C", {{{"coords", {{"1"}}}}}}}, "query.C[0].coords");
    expect_path({{"model", m}}, "missing field \"C\"");
    expect_path({{"task", "frobnicate"}, {"model", m}, {"C", Json::array()}}, "query.task");
    expect_path({{"format", 2}, {"model", m}, {"C", Json::array()}}, "query.format");
    expect_path({{"model", {{"kind", "roag-dense"}, {"generators", Json::array()}}}, {"C", Json::array()}}, "model");
    expect_path({{"task", "spine"}, {"model", to_json(*fixtures::hahn_qz())}, {"l", 4}, {"g", {{"terms", Json::array()}}}}, "query.l");
}
