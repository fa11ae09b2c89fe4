#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "fracdiff/evolve.hpp"
#include "fracdiff/fraclap.hpp"
#include "fracdiff/weights.hpp"

using namespace fracdiff;

TEST(Spectral, FourierModeIsEigenfunction) {
    const Grid g = make_grid(1, 4.0, 256);
    const double k = 3.0 / (2.0 * g.L);   // three periods across the box
    const Field f = sample(g, [&](const Point& x) { return std::cos(2 * std::numbers::pi * k * x[0]); });
    for (double s : {0.25, 0.5, 0.75, 1.0}) {
        const Field lf = spectral_apply(f, s);
        const double lam = std::pow(2 * std::numbers::pi * k, 2 * s);
        for (std::size_t i = 0; i < f.size(); ++i) EXPECT_NEAR(lf[i], lam * f[i], 1e-10 * lam);
    }
}

TEST(Spectral, ConstantsAreAnnihilated) {
    const Grid g = make_grid(2, 3.0, 64);
    const Field one = sample(g, [](const Point&) { return 2.5; });
    const Field lf = spectral_apply(one, 0.4);
    for (std::size_t i = 0; i < lf.size(); ++i) EXPECT_NEAR(lf[i], 0.0, 1e-12);
}

TEST(Spectral, HalfPowersCompose) {
    const Grid g = make_grid(1, 8.0, 512);
    const Field f = bump_field(g, {0.0, 0.0}, 1.5, 1.0);
    const Field a = spectral_power(spectral_power(f, 0.6), 0.6);
    const Field b = spectral_apply(f, 0.6);
    for (std::size_t i = 0; i < f.size(); ++i) EXPECT_NEAR(a[i], b[i], 1e-9);
}

TEST(Spectral, SymmetricInL2) {
    const Grid g = make_grid(1, 6.0, 256);
    const Field f = bump_field(g, {-0.7, 0.0}, 1.0, 1.0);
    const Field h = bump_field(g, {0.9, 0.0}, 1.3, 2.0);
    const double a = weighted_integral(spectral_apply(f, 0.35), h);
    const double b = weighted_integral(f, spectral_apply(h, 0.35));
    EXPECT_NEAR(a, b, 1e-12 * std::abs(a));
}

TEST(CrossValidation, BumpAgreesAcrossMethods) {
    const Grid g = make_grid(1, 8.0, 1024);
    const Field f = bump_field(g, {0.0, 0.0}, 1.0, 1.0);
    for (double s : {0.25, 0.5, 0.75}) {
        const auto rep = cross_validate(f, s);
        EXPECT_TRUE(rep.failures.empty()) << s;
        EXPECT_LE(rep.max_rel_discrepancy, 1e-3) << s;
    }
}

TEST(Weights, PhiProfileShape) {
    EXPECT_DOUBLE_EQ(phi_profile(0.5, 3.0), 1.0);
    EXPECT_DOUBLE_EQ(phi_profile(1.0, 3.0), 1.0);
    // far field behaves like r^{-alpha}
    const double r = 1e3;
    EXPECT_NEAR(std::log(phi_profile(r, 2.5)) / std::log(r), -2.5, 1e-3);
    double prev = 1.0;
    for (double x = 1.0; x < 50.0; x += 0.37) {
        const double v = phi_profile(x, 1.7);
        EXPECT_LE(v, prev);
        prev = v;
    }
}

TEST(Weights, AlphaWindow) {
    const auto w = alpha_window(1, 0.5, 0.5);
    EXPECT_DOUBLE_EQ(w.lo, -1.0);
    EXPECT_DOUBLE_EQ(w.hi, 3.0);
    EXPECT_TRUE(w.contains(2.0));
    EXPECT_FALSE(w.contains(3.0));
    EXPECT_THROW(alpha_window(1, 0.5, 1.0), std::domain_error);
}
