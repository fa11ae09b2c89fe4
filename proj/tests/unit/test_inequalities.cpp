#include <gtest/gtest.h>

#include <cmath>

#include "fracdiff/estimates.hpp"
#include "fracdiff/evolve.hpp"
#include "fracdiff/suites.hpp"

using namespace fracdiff;

namespace {

Field random_field(const Grid& g, Rng& rng, bool positive) {
    Field f(g);
    for (int k = 0; k < 6; ++k) {
        const Point c{rng.uniform(-0.4, 0.4) * g.L, g.d == 2 ? rng.uniform(-0.4, 0.4) * g.L : 0.0};
        const double sign = positive || rng.uniform() < 0.5 ? 1.0 : -1.0;
        const Field b = bump_field(g, c, rng.uniform(0.3, 2.0), sign * rng.uniform(0.2, 2.0));
        for (std::size_t i = 0; i < f.size(); ++i) f[i] += b[i];
    }
    return f;
}

}  // namespace

TEST(StroockVaropoulos, HoldsOnRandomFields) {
    Rng rng(7);
    for (int d : {1, 2}) {
        const Grid g = make_grid(d, 10.0, d == 1 ? 512 : 64);
        for (double s : {0.25, 0.5, 0.75})
            for (double q : {1.5, 3.0, 4.0})
                for (int k = 0; k < 5; ++k) {
                    const auto r = check_stroock_varopoulos(random_field(g, rng, k % 2 == 0), s, q);
                    EXPECT_TRUE(r.pass) << d << " " << s << " " << q << " margin " << r.margin;
                }
    }
}

TEST(StroockVaropoulos, EqualityAtQTwo) {
    Rng rng(11);
    const Grid g = make_grid(1, 10.0, 512);
    for (double s : {0.25, 0.5, 0.75}) {
        const auto r = check_stroock_varopoulos(random_field(g, rng, true), s, 2.0);
        EXPECT_LE(std::abs(r.margin), 1e-10 * std::abs(r.rhs));
    }
}

TEST(Sobolev, RandomFieldsRespectSharpConstant) {
    Rng rng(3);
    const Grid g1 = make_grid(1, 10.0, 512), g2 = make_grid(2, 10.0, 64);
    for (int k = 0; k < 10; ++k) {
        EXPECT_TRUE(check_sobolev(random_field(g1, rng, k % 2 == 0), 0.25).pass);
        EXPECT_TRUE(check_sobolev(random_field(g2, rng, k % 2 == 0), 0.5).pass);
    }
}

TEST(Sobolev, ExtremalNearlyAttains) {
    const Grid g = make_grid(2, 40.0, 256);
    const auto r = check_sobolev(sobolev_extremal(g, 0.5, 1.0), 0.5);
    const double ratio = r.metric_value("ratio");
    EXPECT_GE(ratio, 0.95);
    EXPECT_LE(ratio, 1.0 + 1e-9);
}

TEST(Optimization, ClosedFormsMatchGridSearch) {
    Rng rng(5);
    for (int k = 0; k < 10; ++k) {
        const Params p(rng.uniform(0.55, 0.95), rng.uniform(0.3, 0.9), 1);
        if (!(p.m > p.m_c())) continue;
        const auto o = optimize_F(rng.uniform(0.5, 2.0), rng.uniform(0.5, 2.0), rng.uniform(0.5, 2.0), p);
        EXPECT_LE(o.rel_gap_R, 1e-6);
        EXPECT_LE(o.rel_gap_F, 1e-6);
        EXPECT_LE(o.rel_gap_t_rbar_min, 1e-6);
        EXPECT_LE(o.A_zero_residual, 1e-12);
    }
}

TEST(Optimization, DisplayedCoefficientExactWhenThetaIsOne) {
    const Params p(0.5, 0.75, 1);
    ASSERT_DOUBLE_EQ(p.theta(), 1.0);
    const auto o = optimize_F(1.3, 0.7, 1.1, p);
    EXPECT_LE(o.rel_gap_F_displayed, 1e-6);
}

TEST(Optimization, RejectsOutsideGoodFastRange) {
    EXPECT_THROW(optimize_F(1, 1, 1, Params(2.0, 0.5, 1)), std::domain_error);
    EXPECT_THROW(optimize_F(-1, 1, 1, Params(0.5, 0.75, 1)), std::invalid_argument);
}
