#include "oagfork/fixtures.hpp"
#include "oagfork/oracle.hpp"

#include <gtest/gtest.h>

using namespace oagfork;
using namespace oagfork::fixtures;

TEST(SearchWitness, Fx453ReversedBase) {
    auto f = fx453();
    const auto& c1 = f.C[0];
    const auto& c2 = f.C[1];
    std::vector<OvsElement> A{f.A[0], c2};
    auto w = search_witness(f.model, {c1}, A, f.B, {2, 1});
    ASSERT_TRUE(w);
    EXPECT_EQ(w->c, c1);
    EXPECT_EQ(w->b1, unit(f.model, 0, 1));
    EXPECT_EQ(w->b2, unit(f.model, 0, 1) + c2);
    EXPECT_TRUE(verify_doag_witness(doag_spaces(f.model, {c1}, A, f.B), *w));
}

TEST(SearchWitness, InsideBaseExhausts) {
    auto f = fx316();
    EXPECT_FALSE(search_witness(f.model, {f.A[0] + f.A[2]}, f.A, f.C, {2, 1}));
}

TEST(SearchWitness, Fx452FindsNothing) {
    auto f = fx452();
    EXPECT_FALSE(search_witness(f.model, f.C, f.A, f.B, {2, 1}));
}

TEST(SearchCoset, SumZr) {
    auto sp = roag_spaces(sum_zr_model(), {relem({1, 2, 0})}, {}, {relem({1, 0, 0})});
    auto w = search_coset_witness(sp, {2, 3}, 2, 2);
    ASSERT_TRUE(w);
    EXPECT_EQ(w->l, 2);
    EXPECT_EQ(w->N, 1);
    EXPECT_TRUE(verify_coset_witness(sp, *w));
}

TEST(CrossCheck, EmptyRun) {
    auto rep = cross_check(0, 1, {});
    EXPECT_TRUE(rep.rows.empty());
    EXPECT_TRUE(rep.passed());
}

TEST(CrossCheck, FixtureCorpusAgrees) {
    SearchBudget b{2, 1};
    size_t id = 0;
    for (const auto& f : {fx316(), fx3319(), fx452(), fx453()}) {
        auto row = cross_check_instance(id++, {f.model, f.A, f.B, f.C}, b);
        EXPECT_TRUE(row.agree) << "fixture " << id;
    }
    auto f = fx453();
    auto row = cross_check_instance(id, {f.model, {f.A[0], f.C[1]}, f.B, {f.C[0]}}, b);
    EXPECT_FALSE(row.independent);
    EXPECT_TRUE(row.agree);
    EXPECT_TRUE(row.search_found);
}

TEST(CrossCheck, DeterministicAndAgreeing) {
    auto r1 = cross_check(60, 7, {2, 1});
    auto r2 = cross_check(60, 7, {2, 1});
    EXPECT_TRUE(r1.passed());
    ASSERT_EQ(r1.rows.size(), r2.rows.size());
    for (size_t i = 0; i < r1.rows.size(); ++i) {
        EXPECT_EQ(r1.rows[i].independent, r2.rows[i].independent);
        EXPECT_EQ(r1.rows[i].search_found, r2.rows[i].search_found);
    }
    EXPECT_GT(r1.dependent, 0u);
    EXPECT_LT(r1.dependent, r1.rows.size());
}
