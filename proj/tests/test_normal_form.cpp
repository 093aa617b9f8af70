#include "oagfork/fixtures.hpp"
#include "oagfork/oracle.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace oagfork;
using namespace oagfork::fixtures;

namespace {

void expect_sound(const DoagSpaces& sp, const std::vector<OvsElement>& input, bool fastPath) {
    auto nf = normal_form(sp, input, fastPath);
    auto chk = verify_normal_form(nf, sp);
    EXPECT_TRUE(chk.enumeration);
    EXPECT_TRUE(chk.free);
    for (size_t i = 0; i < chk.p.size(); ++i) EXPECT_TRUE(chk.p[i]) << "property " << i + 1;
    EXPECT_TRUE(record_reapplies(nf, input, sp));
    for (const auto& t : nf.traces) EXPECT_TRUE(t.strictly_decreasing()) << t.loop;
    // the output spans the same space modulo A′
    auto lhs = span_subspace(sp.model, [&] {
        auto xs = nf.elements();
        for (const auto& a : sp.A.basis()) xs.push_back(a);
        return xs;
    }());
    auto rhs = span_subspace(sp.model, [&] {
        auto xs = input;
        for (const auto& a : sp.A.basis()) xs.push_back(a);
        return xs;
    }());
    EXPECT_EQ(lhs.dim(), rhs.dim());
    for (const auto& x : nf.elements()) EXPECT_TRUE(rhs.contains(x));
}

}  // namespace

TEST(NormalForm, FixturesBothPaths) {
    for (bool fast : {true, false}) {
        auto f452 = fx452();
        expect_sound(doag_spaces(f452.model, f452.C, f452.A, f452.B), f452.C, fast);
        auto f3319 = fx3319();
        for (const auto& c : f3319.C) expect_sound(doag_spaces(f3319.model, {c}, f3319.A, f3319.B), {c}, fast);
        auto f316 = fx316();
        expect_sound(doag_spaces(f316.model, f316.C, f316.A, {}), f316.C, fast);
    }
}

TEST(NormalForm, RandomIndependentInstancesSlowPath) {
    std::mt19937_64 rng(301);
    int done = 0, looped = 0;
    for (int it = 0; done < 100 && it < 5000; ++it) {
        auto inst = random_doag_instance(rng, 4, 3);
        auto sp = doag_spaces(inst.model, inst.C, inst.A, inst.B);
        if (!forking_independent_doag(sp).independent) continue;
        ++done;
        auto nf = normal_form(sp, inst.C, false);
        for (const auto& t : nf.traces) looped += t.measures.size() > 1;
        expect_sound(sp, inst.C, false);
    }
    EXPECT_EQ(done, 100);
    EXPECT_GT(looped, 0);
}

TEST(NormalForm, DependentInputsThrowWithWitness) {
    std::mt19937_64 rng(302);
    int seen = 0;
    for (int it = 0; seen < 50 && it < 2000; ++it) {
        auto inst = random_doag_instance(rng);
        auto sp = doag_spaces(inst.model, inst.C, inst.A, inst.B);
        if (forking_independent_doag(sp).independent) continue;
        ++seen;
        try {
            normal_form(sp, inst.C);
            ADD_FAILURE() << "accepted a dependent input";
        } catch (const dependence_error& e) {
            EXPECT_TRUE(verify_doag_witness(sp, e.witness));
        }
    }
    EXPECT_EQ(seen, 50);
}
