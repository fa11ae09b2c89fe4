#include <gtest/gtest.h>

#include <cmath>

#include "fracdiff/estimates.hpp"
#include "fracdiff/evolve.hpp"

using namespace fracdiff;

namespace {

SolverConfig base(const Params& p, const Grid& g, double t_end) {
    SolverConfig c;
    c.params = p;
    c.grid = g;
    c.t_end = t_end;
    c.eps_t = 1e-6;
    for (int k = 1; k <= 8; ++k) c.snapshots.push_back(t_end * k / 8.0);
    return c;
}

}  // namespace

TEST(Evolve, LinearRunMatchesExactSemigroup) {
    const Grid g = make_grid(1, 16.0, 256);
    const Field u0 = bump_field(g, {0.0, 0.0}, 1.5, 1.0);
    const auto ts = run(base(Params(1.0, 0.5, 1), g, 0.5), u0);
    const Field exact = fractional_heat_exact(u0, 0.5, 0.5);
    const Field& u = ts.snapshots.back().u;
    double err = 0.0, ref = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        err = std::max(err, std::abs(u[i] - exact[i]));
        ref = std::max(ref, std::abs(exact[i]));
    }
    EXPECT_LE(err / ref, 1e-4);
}

TEST(Evolve, PorousMediumConservesMassAndSatisfiesAleksandrov) {
    const Grid g = make_grid(1, 32.0, 256);
    const auto ts = run(base(Params(2.0, 0.5, 1), g, 1.0), bump_field(g, {0.0, 0.0}, 1.0, 1.0));
    EXPECT_TRUE(check_mass(ts).pass);
    EXPECT_TRUE(check_aleksandrov(ts, 1.0).pass);
    for (const auto& sn : ts.snapshots)
        for (double v : sn.u.values) EXPECT_GE(v, 0.0);
}

TEST(Evolve, FastDiffusionBenilanCrandall) {
    const Grid g = make_grid(1, 32.0, 256);
    auto c = base(Params(0.5, 0.75, 1), g, 0.5);
    c.integrator = Integrator::implicit_euler;
    c.eps_t = 1e-4;
    const auto ts = run(c, bump_field(g, {0.0, 0.0}, 1.0, 1.0));
    EXPECT_TRUE(check_benilan_crandall(ts).pass);
    EXPECT_TRUE(check_mass(ts).pass);
}

TEST(Evolve, RunsAreDeterministic) {
    const Grid g = make_grid(1, 16.0, 128);
    const auto c = base(Params(2.0, 0.5, 1), g, 0.2);
    const Field u0 = bump_field(g, {0.5, 0.0}, 1.0, 2.0);
    const auto a = run(c, u0), b = run(c, u0);
    EXPECT_EQ(a.config_hash, b.config_hash);
    ASSERT_EQ(a.snapshots.size(), b.snapshots.size());
    EXPECT_EQ(a.snapshots.back().u.values, b.snapshots.back().u.values);
}

TEST(Evolve, ConfigValidation) {
    const Grid g = make_grid(1, 16.0, 128);
    auto c = base(Params(2.0, 0.5, 1), g, 0.2);
    c.integrator = Integrator::implicit_euler;
    EXPECT_THROW(c.validate(), std::invalid_argument);
    c = base(Params(2.0, 0.5, 1), g, 0.2);
    c.eps_t = 0.1;
    EXPECT_THROW(c.validate(), std::invalid_argument);
    c = base(Params(2.0, 0.5, 2), g, 0.2);
    EXPECT_THROW(c.validate(), std::invalid_argument);
}

TEST(Barenblatt, PorousMediumProfileCollapsesAndCarriesMass) {
    const Grid g = make_grid(1, 64.0, 1024);
    const Params p(2.0, 0.5, 1);
    const auto bp = barenblatt_profile(p, g);
    EXPECT_LE(bp.collapse_l1, 0.02);
    EXPECT_DOUBLE_EQ(bp.tail_exponent, -2.0);
    const Field b = bp.field(g, 2.0, 1.0);
    EXPECT_NEAR(integrate(b), 2.0, 0.05);
    // mass scaling M τ^{-dθ} F(rτ^{-θ}) with τ = M^{m-1}t
    EXPECT_NEAR(bp.value(2.0, 1.0, 0.0), 2.0 * std::pow(2.0, -p.theta()) * bp.value(1.0, 1.0, 0.0), 1e-12);
}

TEST(Barenblatt, EvolvesIntoItself) {
    const Grid g = make_grid(1, 64.0, 1024);
    const Params p(2.0, 0.5, 1);
    const auto bp = barenblatt_profile(p, g);
    SolverConfig c = base(p, g, 1.0);
    c.contamination_threshold = 0.05;
    const auto ts = run(c, bp.field(g, 1.0, 1.0));
    const Field want = bp.field(g, 1.0, 2.0);
    const Field& got = ts.snapshots.back().u;
    double diff = 0.0, ref = 0.0;
    for (std::size_t i = 0; i < got.size(); ++i)
        if (std::abs(g.point(i)[0]) <= 0.25 * g.L) {
            diff += std::abs(got[i] - want[i]);
            ref += std::abs(want[i]);
        }
    EXPECT_LE(diff / ref, 0.03);
}

TEST(Barenblatt, RequiresMAboveCritical) {
    const Grid g = make_grid(2, 8.0, 64);
    EXPECT_THROW(barenblatt_profile(Params(0.3, 0.5, 2), g), std::domain_error);
}
