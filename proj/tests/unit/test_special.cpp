#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "fracdiff/special.hpp"

using namespace fracdiff;

namespace {

void expect_rel(double got, double want, double tol) {
    EXPECT_LE(std::abs(got - want), tol * std::abs(want)) << "got " << got << " want " << want;
}

}  // namespace

// Reference values below were evaluated with mpmath at 30 digits.

TEST(Special, GammaMatchesOracle) {
    expect_rel(gamma_fn(0.3), 2.9915689876875906283, 1e-13);
    expect_rel(gamma_fn(4.5), 11.631728396567448929, 1e-13);
    expect_rel(gamma_fn(-1.5), 2.3632718012073547031, 1e-13);
}

TEST(Special, HurwitzZetaMatchesOracle) {
    expect_rel(hurwitz_zeta(2.5, 0.25), 32.847451954697685863, 1e-12);
    expect_rel(riemann_zeta(1.5), 2.6123753486854883433, 1e-12);
    expect_rel(dirichlet_beta(1.5), 0.86450265346120204036, 1e-12);
}

TEST(Special, KernelConstantMatchesOracle) {
    struct Case { int d; double sigma, want; };
    const Case cases[] = {
        {1, 0.5, 0.19947114020071633897}, {1, 1.0, 0.31830988618379067154}, {1, 1.5, 0.29920671030107450845},
        {2, 0.5, 0.083241983875425065489}, {2, 1.0, 0.15915494309189533577}, {2, 1.5, 0.17116712969055234293},
    };
    for (const auto& c : cases) expect_rel(kernel_constant(c.d, c.sigma), c.want, 1e-10);
    expect_rel(kernel_constant(1, 1.0), 1.0 / std::numbers::pi, 1e-10);
}

TEST(Special, SobolevConstantMatchesOracle) {
    expect_rel(sobolev_constant_sq(1, 0.25), 1.180340599016096226, 1e-10);
    expect_rel(sobolev_constant_sq(2, 0.25), 0.71805919151981753575, 1e-10);
    expect_rel(sobolev_constant_sq(2, 0.5), 0.56418958354775628695, 1e-10);
    expect_rel(sobolev_constant_sq(2, 0.75), 0.59105598339336108751, 1e-10);
    // classical d=3, s=1 value (4/3)(2π²)^{-2/3}
    expect_rel(sobolev_constant_sq(3, 1.0), 0.18255157148718098549, 1e-10);
}

TEST(Special, SobolevFormsAgree) {
    for (int d : {1, 2})
        for (double s : {0.1, 0.2, 0.3, 0.45})
            if (2 * s < d) expect_rel(sobolev_constant_sq_sphere_form(d, s), sobolev_constant_sq(d, s), 1e-12);
    for (double s : {0.6, 0.75, 0.9}) expect_rel(sobolev_constant_sq_sphere_form(2, s), sobolev_constant_sq(2, s), 1e-12);
}

TEST(Special, RieszConstantMatchesOracle) {
    expect_rel(riesz_constant(1, 0.25), 0.39894228040143267794, 1e-12);
    expect_rel(riesz_constant(2, 0.5), 0.15915494309189533577, 1e-12);
}

TEST(Special, DomainErrors) {
    EXPECT_THROW(kernel_constant(1, 2.0), std::domain_error);
    EXPECT_THROW(kernel_constant(1, 0.0), std::domain_error);
    EXPECT_THROW(sobolev_constant_sq(1, 0.5), std::domain_error);
    EXPECT_THROW(riesz_constant(2, 1.0), std::domain_error);
}

TEST(Special, BallVolume) {
    expect_rel(unit_ball_volume(1), 2.0, 1e-14);
    expect_rel(unit_ball_volume(2), std::numbers::pi, 1e-14);
    expect_rel(unit_ball_volume(3), 4.1887902047863909846, 1e-13);
}
