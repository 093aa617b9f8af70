#include "oagfork/linlex.hpp"
#include "oagfork/oracle.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace oagfork;

namespace {

const RealAlgebraic ONE = ra_rational(1), R2 = ra_sqrt(2), R3 = ra_sqrt(3);

QVec flat(const ModelPtr& m, std::vector<long> c) {
    QVec v(m->dim);
    for (size_t i = 0; i < c.size(); ++i) v[i] = c[i];
    return v;
}

}  // namespace

TEST(LinLex, EmptySystemFeasible) {
    LexSystem sys{make_model({{ONE}}), {}, {}};
    auto r = feasible(sys);
    EXPECT_TRUE(r.feasible);
    EXPECT_TRUE(r.witness.empty());
}

TEST(LinLex, Contradiction) {
    auto m = make_model({{ONE}});
    LexSystem sys{m, {}, {}};
    sys.add_var("x");
    auto e = sys.zero_expr();
    e.coef[0] = flat(m, {1});
    e.constant = flat(m, {-1});
    sys.add(e, Rel::EQ);
    sys.add(e, Rel::GT);
    EXPECT_FALSE(feasible(sys).feasible);
}

TEST(LinLex, RationalBetweenOneAndSqrtTwo) {
    auto m = make_model({{ONE, R2}});
    LexSystem sys{m, {}, {}};
    sys.add_var("t");
    auto lo = sys.zero_expr();  // t·1 − 1 > 0
    lo.coef[0] = flat(m, {1, 0});
    lo.constant = flat(m, {-1, 0});
    sys.add(lo, Rel::GT);
    auto hi = sys.zero_expr();  // √2 − t > 0
    hi.coef[0] = flat(m, {-1, 0});
    hi.constant = flat(m, {0, 1});
    sys.add(hi, Rel::GT);
    auto r = feasible(sys);
    ASSERT_TRUE(r.feasible);
    EXPECT_EQ(r.witness[0], Rational(4, 3));  // simplest rational in (1, √2)
    EXPECT_NE(dump_case_tree(sys).find("feasible"), std::string::npos);
}

TEST(LinLex, EqualitiesBeforeInequalities) {
    // t·√2 = s·1 has only t = s = 0 as rational solutions; then t > 0 is infeasible
    auto m = make_model({{ONE, R2}});
    LexSystem sys{m, {}, {}};
    sys.add_var("t");
    sys.add_var("s");
    auto e = sys.zero_expr();
    e.coef[0] = flat(m, {0, 1});
    e.coef[1] = flat(m, {-1, 0});
    sys.add(e, Rel::EQ);
    auto pos = sys.zero_expr();
    pos.coef[0] = flat(m, {1, 0});
    sys.add(pos, Rel::GT);
    EXPECT_FALSE(feasible(sys).feasible);
}

TEST(LinLex, WindowedLexConstraints) {
    // expression (x, x − 1) over two ℚ slots, constrained slot by slot
    auto m = make_model({{ONE}, {ONE}});
    LexSystem sys{m, {}, {}};
    sys.add_var("x");
    auto e = sys.zero_expr();
    e.coef[0] = flat(m, {1, 1});
    e.constant = flat(m, {0, -1});
    sys.add(e, Rel::GT, 1, 2);  // x − 1 > 0
    sys.add(e, Rel::EQ, 0, 1);  // x = 0
    EXPECT_FALSE(feasible(sys).feasible);
}

TEST(LinLex, AgreesWithRationalFourierMotzkin) {
    auto m = make_model({{ONE}});
    std::mt19937 rng(21);
    int feasibleCount = 0;
    for (int it = 0; it < 400; ++it) {
        LexSystem sys{m, {}, {}};
        size_t nv = 1 + rng() % 3;
        for (size_t i = 0; i < nv; ++i) sys.add_var("x" + std::to_string(i));
        std::vector<RationalConstraint> plain;
        size_t nc = 1 + rng() % 4;
        for (size_t k = 0; k < nc; ++k) {
            auto e = sys.zero_expr();
            RationalConstraint rc;
            for (size_t i = 0; i < nv; ++i) {
                Rational c(static_cast<long>(rng() % 7) - 3);
                e.coef[i] = QVec{c};
                rc.coef.push_back(c);
            }
            Rational c0(static_cast<long>(rng() % 9) - 4);
            e.constant = QVec{c0};
            rc.constant = c0;
            Rel rel = static_cast<Rel>(rng() % 4);
            rc.rel = rel;
            sys.add(e, rel);
            plain.push_back(rc);
        }
        auto r = feasible(sys);
        EXPECT_EQ(r.feasible, rational_fm_feasible(plain, nv));
        if (r.feasible) ++feasibleCount;
        // monotonicity: adding a constraint never turns infeasible into feasible
        if (!r.feasible) {
            auto e = sys.zero_expr();
            e.coef[0] = QVec{Rational(1)};
            sys.add(e, Rel::GE);
            EXPECT_FALSE(feasible(sys).feasible);
        }
    }
    EXPECT_GT(feasibleCount, 50);
}

TEST(LinLex, IrrationalCoefficientsAgreeWithGridSearch) {
    // constraints a·t + b > 0 (slot basis {1, √2, √3}); grid search is sound for "feasible"
    auto m = make_model({{ONE, R2, R3}});
    std::mt19937 rng(6);
    for (int it = 0; it < 200; ++it) {
        LexSystem sys{m, {}, {}};
        sys.add_var("t");
        for (int k = 0; k < 3; ++k) {
            auto e = sys.zero_expr();
            for (auto& c : e.coef[0]) c = static_cast<long>(rng() % 5) - 2;
            for (auto& c : e.constant) c = static_cast<long>(rng() % 5) - 2;
            sys.add(e, Rel::GT);
        }
        auto r = feasible(sys);
        bool grid = false;
        for (long num = -64; num <= 64 && !grid; ++num)
            for (long den = 1; den <= 8 && !grid; ++den) {
                QVec t{Rational(num, den)};
                bool ok = true;
                for (const auto& c : sys.cons) ok = ok && satisfies(*m, c, t);
                grid = ok;
            }
        if (grid) {
            EXPECT_TRUE(r.feasible);
        }
        if (r.feasible) {
            for (const auto& c : sys.cons) EXPECT_TRUE(satisfies(*m, c, r.witness));
        }
    }
}
