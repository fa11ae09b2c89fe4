#pragma once

#include <boost/math/quadrature/exp_sinh.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "fraclap.hpp"
#include "grid.hpp"
#include "special.hpp"

namespace fracdiff {

/// Test-function family φ_R(x) = φ((x-c)/R) with decay exponent α.
struct WeightSpec {
    double alpha = 1.0;
    double R = 1.0;
    Point center{0.0, 0.0};

    void validate() const {
        if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw std::invalid_argument("WeightSpec: alpha must be nonnegative");
        if (!(R > 0.0)) throw std::invalid_argument("WeightSpec: R must be positive");
    }
};

/// φ(r) for the unit-scale profile: 1 on r <= 1, (1 + (r²-1)⁴)^{-α/8} outside.
inline double phi_profile(double r, double alpha) {
    if (r <= 1.0 || alpha == 0.0) return 1.0;
    const double q = r * r - 1.0;
    // log(1 + q⁴) without overflowing q⁴ for large r
    const double lq4 = 4.0 * std::log(q);
    const double l = lq4 > 30.0 ? lq4 + std::log1p(std::exp(-lq4)) : std::log1p(std::exp(lq4));
    return std::exp(-0.125 * alpha * l);
}

inline double phi(const Point& x, const WeightSpec& w, int d) {
    return phi_profile(distance(x, w.center, d) / w.R, w.alpha);
}

inline Field phi_field(const Grid& g, const WeightSpec& w) {
    w.validate();
    return sample(g, [&](const Point& x) { return phi(x, w, g.d); });
}

/// Lower and upper ends of the admissible window d - 2s/(1-m) < α < d + 2s/m.
struct AlphaWindow {
    double lo, hi;
    bool contains(double a) const { return a > lo && a < hi; }
};

inline AlphaWindow alpha_window(int d, double s, double m) {
    if (!(m > 0.0 && m < 1.0)) throw std::domain_error("alpha_window: m must lie in (0,1)");
    return {d - 2.0 * s / (1.0 - m), d + 2.0 * s / m};
}

// ---------------------------------------------------------------------------
// Decay of (-Δ)^s φ
// ---------------------------------------------------------------------------

enum class DecayRegime { none, below_d, at_d, above_d };

inline const char* decay_regime_name(DecayRegime r) {
    switch (r) {
        case DecayRegime::none: return "constant";
        case DecayRegime::below_d: return "alpha<d";
        case DecayRegime::at_d: return "alpha=d";
        case DecayRegime::above_d: return "alpha>d";
    }
    return "?";
}

struct DecayReport {
    double alpha = 0.0, s = 0.0;
    int d = 1;
    DecayRegime regime = DecayRegime::none;
    double r_min = 0.0, r_max = 0.0;
    double expected_exponent = 0.0;   ///< slope of log|g| (log|g|/log log|x| for α=d) against log|x|
    double fitted_exponent = 0.0;
    double fit_rms = 0.0;
    int shell_nodes = 0;
    bool exponent_match = false;      ///< fitted within ±0.2 of expected
    bool lemma_bound_pass = false;    ///< decays at least as fast as the lemma's envelope, minus 0.2
    double lower_constant = 0.0;      ///< α>d: min over the shell of -g |x|^{d+2s}
    bool lower_bound_pass = true;
    std::string note;
};

namespace detail {

/// Free-space (-Δ)^s φ with the exact φ continued outside the box. The exterior source is only
/// evaluated at the listed nodes; elsewhere the result treats φ as zero outside the box.
inline Field free_space_phi_operator(const Grid& g, const WeightSpec& w, double s,
                                     const std::vector<std::size_t>& ext_nodes) {
    const Field f = phi_field(g, w);
    auto ext = [&](const Point& y) { return phi(y, w, g.d); };
    KernelOptions opt;
    opt.domain = KernelDomain::free_space;
    Field out = kernel_apply(f, s, opt);
    const double c = kernel_constant(g.d, 2.0 * s);
    for (auto i : ext_nodes) {
        const Point x = g.point(i);
        out[i] -= c * (g.d == 1 ? exterior_source_1d(g, x[0], s, ext) : exterior_source_2d(g, x, s, ext));
    }
    return out;
}

}  // namespace detail

/// Checks the three decay regimes of (-Δ)^s φ over the shell [0.4L, 0.8L] (or the given one).
inline DecayReport verify_decay(const WeightSpec& w, double s, const Grid& g, double r_min = -1.0,
                                double r_max = -1.0) {
    w.validate();
    if (!(s > 0.0 && s < 1.0)) throw std::invalid_argument("verify_decay: s must lie in (0,1)");
    DecayReport rep;
    rep.alpha = w.alpha;
    rep.s = s;
    rep.d = g.d;
    rep.r_min = r_min > 0.0 ? r_min : 0.4 * g.L;
    rep.r_max = r_max > 0.0 ? r_max : 0.8 * g.L;
    if (w.alpha == 0.0) {
        rep.regime = DecayRegime::none;
        rep.exponent_match = rep.lemma_bound_pass = true;
        rep.note = "phi is constant, (-Delta)^s phi = 0";
        return rep;
    }
    if (w.R < 8.0 * g.h) throw std::invalid_argument("verify_decay: shell under-resolved (R < 8h)");
    if (rep.r_min <= w.R + norm(w.center, g.d)) throw std::invalid_argument("verify_decay: shell overlaps the plateau");

    const double sigma = g.d + 2.0 * s;
    if (std::abs(w.alpha - g.d) < 1e-12) {
        rep.regime = DecayRegime::at_d;
        rep.expected_exponent = -sigma;
    } else if (w.alpha < g.d) {
        rep.regime = DecayRegime::below_d;
        rep.expected_exponent = -(w.alpha + 2.0 * s);
    } else {
        rep.regime = DecayRegime::above_d;
        rep.expected_exponent = -sigma;
    }
    if (std::abs(w.alpha - (g.d - 2.0 * s)) < 1e-9)
        rep.note = "alpha = d-2s: the leading coefficient vanishes, decay is faster than the envelope";

    // φ is radial, so in d=2 the shell is sampled along the grid row through the center
    std::vector<std::size_t> shell;
    for (std::size_t i = 0; i < g.size(); ++i) {
        const Point x = g.point(i);
        if (g.d == 2 && std::abs(x[1] - w.center[1]) > 0.5 * g.h) continue;
        const double r = distance(x, w.center, g.d);
        if (r >= rep.r_min && r <= rep.r_max) shell.push_back(i);
    }
    const Field gphi = detail::free_space_phi_operator(g, w, s, shell);
    std::vector<double> lx, ly;
    double min_scaled = std::numeric_limits<double>::infinity();
    bool sign_ok = true;
    for (auto i : shell) {
        const double r = distance(g.point(i), w.center, g.d);
        double v = std::abs(gphi[i]);
        if (rep.regime == DecayRegime::at_d) v /= std::log(r);
        if (!(v > 0.0)) continue;
        lx.push_back(std::log(r));
        ly.push_back(std::log(v));
        if (rep.regime == DecayRegime::above_d) {
            if (!(gphi[i] < 0.0)) sign_ok = false;
            min_scaled = std::min(min_scaled, -gphi[i] * std::pow(r, sigma));
        }
    }
    if (lx.size() < 8) throw std::invalid_argument("verify_decay: shell under-resolved (fewer than 8 nodes)");
    const auto fit = detail::fit_line(lx, ly);
    rep.fitted_exponent = fit.slope;
    rep.fit_rms = fit.rms;
    rep.shell_nodes = int(lx.size());
    if (fit.rms > 0.5) throw std::runtime_error("verify_decay: fit residual too large");
    rep.exponent_match = std::abs(rep.fitted_exponent - rep.expected_exponent) <= 0.2;
    rep.lemma_bound_pass = rep.fitted_exponent <= rep.expected_exponent + 0.2;
    if (rep.regime == DecayRegime::above_d) {
        rep.lower_constant = sign_ok ? min_scaled : 0.0;
        rep.lower_bound_pass = sign_ok && min_scaled > 0.0;
    }
    return rep;
}

// ---------------------------------------------------------------------------
// The constant C_ψ
// ---------------------------------------------------------------------------

struct CpsiResult {
    double k1 = 0.0;          ///< ∫ |(-Δ)^s φ|^{1/(1-m)} / φ^{m/(1-m)} at R = 1
    double box_part = 0.0;    ///< quadrature over |y| <= r_cut
    double tail_part = 0.0;   ///< envelope bound for |y| > r_cut
    double tail_exponent = 0.0;
    double r_cut = 0.0;
    double scaling_exponent = 0.0;   ///< d - 2s/(1-m)

    /// C_ψ(R) = k₁ R^{d - 2s/(1-m)}.
    double at(double R) const { return k1 * std::pow(R, scaling_exponent); }
};

/// Default grid for cpsi_constant: d=1 L=64 n=8192, d=2 L=16 n=256.
inline Grid cpsi_default_grid(int d, int refine = 1) {
    return d == 1 ? make_grid(1, 64.0, 8192 * refine) : make_grid(2, 16.0, 256 * refine);
}

inline CpsiResult cpsi_constant(const WeightSpec& spec, double s, double m, const Grid& g) {
    spec.validate();
    if (!(m > 0.0 && m < 1.0)) throw std::domain_error("cpsi_constant: m must lie in (0,1)");
    if (!(s > 0.0 && s < 1.0)) throw std::invalid_argument("cpsi_constant: s must lie in (0,1)");
    const int d = g.d;
    const double alpha = spec.alpha;
    const auto win = alpha_window(d, s, m);
    if (!win.contains(alpha)) throw std::domain_error("cpsi_constant: alpha outside the admissible window, k1 diverges");

    // unit scale, centered
    const WeightSpec w{alpha, 1.0, {0.0, 0.0}};
    const int i0 = g.n / 2;
    std::vector<std::size_t> axis;
    for (int i = i0; i < g.n; ++i) axis.push_back(d == 1 ? std::size_t(i) : std::size_t(i) * g.n + i0);
    const Field gphi = detail::free_space_phi_operator(g, w, s, axis);

    const double p = 1.0 / (1.0 - m), q = m / (1.0 - m);
    auto integrand = [&](double gv, double r) { return std::pow(std::abs(gv), p) * std::pow(phi_profile(r, alpha), -q); };

    CpsiResult res;
    res.scaling_exponent = d - 2.0 * s / (1.0 - m);
    res.r_cut = 0.8 * g.L;
    // radial trapezoid: measure |S^{d-1}| r^{d-1} dr
    const double area = d == 1 ? 2.0 : 2.0 * std::numbers::pi;
    std::vector<double> rr, ff;
    for (std::size_t k = 0; k < axis.size(); ++k) {
        const double r = k * g.h;
        if (r > res.r_cut + 1e-12) break;
        rr.push_back(r);
        ff.push_back(integrand(gphi[axis[k]], r) * std::pow(r, d - 1));
    }
    CompensatedSum box;
    for (std::size_t k = 0; k + 1 < rr.size(); ++k) box.add(0.5 * (ff[k] + ff[k + 1]) * (rr[k + 1] - rr[k]));
    res.box_part = area * box.value();

    // tail envelope F(r) <= A r^{-γ} ℓ(r) fitted as the max over the outer half of the box range
    bool log_factor = false;
    double gamma;
    if (alpha < d - 1e-12) gamma = alpha + 2.0 * s / (1.0 - m);
    else if (alpha > d + 1e-12) gamma = (d + 2.0 * s - alpha * m) / (1.0 - m);
    else { gamma = d + 2.0 * s / (1.0 - m); log_factor = true; }
    res.tail_exponent = gamma;
    auto ell = [&](double r) { return log_factor ? std::pow(std::log(r), p) : 1.0; };
    double A = 0.0;
    for (std::size_t k = 0; k < rr.size(); ++k) {
        if (rr[k] < 0.5 * res.r_cut) continue;
        const double fr = ff[k] / std::pow(rr[k], d - 1);
        A = std::max(A, fr * std::pow(rr[k], gamma) / ell(rr[k]));
    }
    const double X = res.r_cut;
    double tail_integral;
    if (!log_factor) {
        tail_integral = std::pow(X, d - gamma) / (gamma - d);
    } else {
        boost::math::quadrature::exp_sinh<double> qd;
        tail_integral = qd.integrate([&](double t) { return std::pow(X + t, d - 1 - gamma) * ell(X + t); }, 1e-10);
    }
    res.tail_part = area * A * tail_integral;
    res.k1 = res.box_part + res.tail_part;
    return res;
}

inline CpsiResult cpsi_constant(const WeightSpec& spec, double s, double m, int d) {
    return cpsi_constant(spec, s, m, cpsi_default_grid(d));
}

/// C₁ = 2(1-m) k₁^{1-m}, the weighted-L¹ growth constant.
inline double weighted_l1_constant(double k1, double m) { return 2.0 * (1.0 - m) * std::pow(k1, 1.0 - m); }

// ---------------------------------------------------------------------------
// Riesz potentials
// ---------------------------------------------------------------------------

/// Annular density: 1 on the middle half of B_{R₁} \ B_{2R₀}, cosine-tapered to 0 at both ends.
struct RieszSpec {
    double R0 = 1.0;
    double R1 = 0.0;   ///< 0 means 3 R₀
    Point center{0.0, 0.0};

    double outer() const { return R1 > 0.0 ? R1 : 3.0 * R0; }
    void validate() const {
        if (!(R0 > 0.0)) throw std::invalid_argument("RieszSpec: R0 must be positive");
        if (!(outer() > 2.0 * R0)) throw std::invalid_argument("RieszSpec: R1 must exceed 2 R0");
    }
};

inline double annulus_density(double r, const RieszSpec& sp) {
    const double a = 2.0 * sp.R0, b = sp.outer(), w = b - a;
    if (r <= a || r >= b) return 0.0;
    const double lo = a + 0.25 * w, hi = b - 0.25 * w;
    if (r >= lo && r <= hi) return 1.0;
    const double t = r < lo ? (r - a) / (0.25 * w) : (b - r) / (0.25 * w);
    return 0.5 * (1.0 - std::cos(std::numbers::pi * t));
}

inline Field annulus_density_field(const Grid& g, const RieszSpec& sp) {
    return sample(g, [&](const Point& x) { return annulus_density(distance(x, sp.center, g.d), sp); });
}

/// k₀ = (k_{s,d} ω_d / 2) (R₁ - 2R₀)^d / (R₁ + R₀)^{d-2s}.
inline double riesz_floor_constant(int d, double s, double R0, double R1) {
    return 0.5 * riesz_constant(d, s) * unit_ball_volume(d) * std::pow(R1 - 2.0 * R0, d) /
           std::pow(R1 + R0, d - 2.0 * s);
}

struct RieszResult {
    Field phi;
    Field rho;
    double k_sd = 0.0;
    double k0 = 0.0;
    double rho_mass = 0.0;
    double min_inner = 0.0;        ///< min of φ over B_{R₀}(c)
    double check_rel_err = 0.0;    ///< max over B_{0.6L} of |(-Δ)^s φ - ρ| / max ρ (spectral)
    bool pass = false;
};

/// Convolves ρ with k_{s,d}|x|^{2s-d} on the grid, then checks (-Δ)^s φ ≈ ρ and φ >= k₀ on B_{R₀}.
/// The singular self-cell is handled by the zeta-regularized lattice sum: ∫ ≈ h^dΣ' - ρ(x) h^{2s} Z_d(d-2s).
inline RieszResult riesz_convolve(const Field& rho, double s, double R0, double R1, const Point& center) {
    const Grid& g = rho.grid;
    if (!(2.0 * s < g.d)) throw std::domain_error("riesz_potential: requires 2s < d");
    RieszResult res;
    res.rho = rho;
    res.k_sd = riesz_constant(g.d, s);
    res.k0 = riesz_floor_constant(g.d, s, R0, R1);
    res.rho_mass = integrate(rho);

    const int n = g.n, m = 2 * n;
    const double hd = g.cell_volume(), p = g.d - 2.0 * s;
    std::vector<double> kern(g.d == 1 ? std::size_t(m) : std::size_t(m) * m, 0.0), padded(kern.size(), 0.0);
    if (g.d == 1) {
        for (int i = 1; i < m; ++i) {
            const int j = wavenumber(i, m);
            if (std::abs(j) < n) kern[i] = hd * std::pow(std::abs(j) * g.h, -p);
        }
    } else {
        for (int i = 0; i < m; ++i)
            for (int k = 0; k < m; ++k) {
                const int a = wavenumber(i, m), b = wavenumber(k, m);
                if ((a == 0 && b == 0) || std::abs(a) >= n || std::abs(b) >= n) continue;
                kern[std::size_t(i) * m + k] = hd * std::pow(std::hypot(a * g.h, b * g.h), -p);
            }
    }
    for (std::size_t i = 0; i < rho.size(); ++i) padded[g.d == 1 ? i : (i / n) * m + (i % n)] = rho[i];
    const auto conv = detail::circular_convolve(g.d, m, padded, detail::spectrum_of(g.d, m, kern));
    const double self = std::pow(g.h, 2.0 * s) * lattice_zeta(g.d, p);
    res.phi = Field(g);
    for (std::size_t i = 0; i < rho.size(); ++i)
        res.phi[i] = res.k_sd * (conv[g.d == 1 ? i : (i / n) * m + (i % n)] - rho[i] * self);

    const Field back = spectral_apply(res.phi, s);
    double rmax = 0.0, err = 0.0;
    res.min_inner = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < rho.size(); ++i) rmax = std::max(rmax, std::abs(rho[i]));
    for (std::size_t i = 0; i < rho.size(); ++i) {
        const Point x = g.point(i);
        if (norm(x, g.d) <= 0.6 * g.L) err = std::max(err, std::abs(back[i] - rho[i]));
        if (distance(x, center, g.d) <= R0) res.min_inner = std::min(res.min_inner, res.phi[i]);
    }
    res.check_rel_err = rmax > 0.0 ? err / rmax : err;
    res.pass = res.check_rel_err <= 5e-2 && (rmax == 0.0 || res.min_inner >= res.k0);
    return res;
}

inline RieszResult riesz_potential(const RieszSpec& sp, double s, const Grid& g) {
    sp.validate();
    if (!(2.0 * s < g.d)) throw std::domain_error("riesz_potential: requires 2s < d");
    auto res = riesz_convolve(annulus_density_field(g, sp), s, sp.R0, sp.outer(), sp.center);
    if (!res.pass) throw std::runtime_error("riesz_potential: a-posteriori check failed");
    return res;
}

}  // namespace fracdiff
