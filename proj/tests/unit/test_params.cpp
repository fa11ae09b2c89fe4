#include <gtest/gtest.h>

#include "fracdiff/params.hpp"

using namespace fracdiff;

TEST(Params, DerivedExponents) {
    const Params p(0.5, 0.75, 1);
    EXPECT_DOUBLE_EQ(p.m_c(), -0.5);
    EXPECT_DOUBLE_EQ(p.m_1(), 0.4);
    EXPECT_DOUBLE_EQ(p.p_c(), 1.0 / 3.0);
    EXPECT_DOUBLE_EQ(p.theta(), 1.0);
    EXPECT_EQ(p.regime(), Regime::good_fast);
}

TEST(Params, Regimes) {
    EXPECT_EQ(Params(0.3, 0.5, 2).regime(), Regime::very_fast);
    EXPECT_EQ(Params(0.7, 0.5, 2).regime(), Regime::good_fast);
    EXPECT_EQ(Params(1.0, 0.5, 2).regime(), Regime::heat);
    EXPECT_EQ(Params(2.0, 0.5, 1).regime(), Regime::porous_medium);
    EXPECT_STREQ(regime_name(Regime::porous_medium), "pme");
}

TEST(Params, ThetaPmeAndCritical) {
    EXPECT_DOUBLE_EQ(Params(2.0, 0.5, 1).theta(), 0.5);
    EXPECT_THROW(Params(0.5, 0.5, 2).theta(), std::domain_error);
}

TEST(Params, ThetaPositiveIffAboveCritical) {
    for (int d : {1, 2})
        for (double s = 0.05; s < 1.0; s += 0.1)
            for (double m = 0.05; m < 3.0; m += 0.07) {
                const Params p(m, s, d);
                if (std::abs(m - p.m_c()) < 1e-9) continue;
                EXPECT_EQ(p.theta() > 0, m > p.m_c()) << m << " " << s << " " << d;
            }
}

TEST(Params, Validation) {
    EXPECT_THROW(Params(0.0, 0.5, 1), std::invalid_argument);
    EXPECT_THROW(Params(1.0, 1.5, 1), std::invalid_argument);
    EXPECT_THROW(Params(1.0, 0.5, 3), std::invalid_argument);
}
