#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "fft.hpp"
#include "fraclap.hpp"
#include "grid.hpp"
#include "params.hpp"
#include "weights.hpp"

namespace fracdiff {

/// Raised when the adaptive step collapses below the underflow limit.
class StiffnessError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// How the box meets the rest of space: periodic images, or u = 0 outside the box (mass leaks out).
enum class Exterior { periodic, absorbing };

inline const char* exterior_name(Exterior e) { return e == Exterior::periodic ? "periodic" : "absorbing"; }

/// Explicit Bogacki–Shampine 3(2), or backward Euler in the pressure w = u^m (m < 1 only).
enum class Integrator { explicit_rk, implicit_euler };

inline const char* integrator_name(Integrator i) { return i == Integrator::explicit_rk ? "explicit_rk" : "implicit_euler"; }

struct SolverConfig {
    Params params;
    Grid grid;
    Exterior exterior = Exterior::periodic;
    Integrator integrator = Integrator::explicit_rk;
    double eps_t = 1e-6;              ///< relative local error target per step
    double safety = 0.9;
    double floor = 0.0;               ///< ε added to the data when m < 1 (u₀ + ε device)
    double t_end = 1.0;
    std::vector<double> snapshots;    ///< sorted, <= t_end; t = 0 is always recorded
    double extinction_rel = 1e-10;    ///< extinction when ‖u‖∞ < extinction_rel·‖u₀‖∞
    double dt_initial = 0.0;          ///< 0 picks h^{2s}/100
    double dt_min = 1e-14;
    double negativity_rel = 1e-10;    ///< reject steps whose minimum is below -negativity_rel·‖u‖∞
    double contamination_radius = 0.8;     ///< in units of L
    double contamination_threshold = 1e-4;
    long max_steps = 5'000'000;
    std::vector<WeightSpec> weights;  ///< weighted masses cached at each snapshot

    void validate() const {
        params.validate();
        if (!(eps_t > 1e-8 && eps_t < 1e-2)) throw std::invalid_argument("SolverConfig: eps_t must lie in (1e-8, 1e-2)");
        if (!(t_end > 0.0)) throw std::invalid_argument("SolverConfig: t_end must be positive");
        if (integrator == Integrator::implicit_euler && !(params.m < 1.0))
            throw std::invalid_argument("SolverConfig: the implicit integrator requires m < 1");
        if (!(floor >= 0.0)) throw std::invalid_argument("SolverConfig: floor must be nonnegative");
        if (params.d != grid.d) throw std::invalid_argument("SolverConfig: params.d and grid.d differ");
        for (std::size_t i = 0; i < snapshots.size(); ++i) {
            if (!(snapshots[i] >= 0.0 && snapshots[i] <= t_end)) throw std::invalid_argument("SolverConfig: snapshot outside [0, t_end]");
            if (i > 0 && !(snapshots[i] > snapshots[i - 1])) throw std::invalid_argument("SolverConfig: snapshot times must increase");
        }
    }
};

struct Snapshot {
    double t = 0.0;
    Field u;
    double mass = 0.0;
    double linf = 0.0;
    double lpc = std::numeric_limits<double>::quiet_NaN();   ///< ‖u‖_{p_c} when p_c > 1
    std::vector<double> weighted;                             ///< ∫u φ for each registered weight
};

struct TimeSeries {
    Params params;
    Exterior exterior = Exterior::periodic;
    std::vector<Snapshot> snapshots;
    std::uint64_t config_hash = 0;
    double contamination = 0.0;     ///< max over snapshots of the mass fraction beyond the contamination radius
    bool contaminated = false;
    bool extinct = false;
    double extinction_time = std::numeric_limits<double>::quiet_NaN();
    double clipped_mass = 0.0;      ///< total mass removed by clipping negative values
    long steps = 0;
    long rejected = 0;
    std::string diagnostic;

    const Snapshot& at_time(double t) const {
        for (const auto& s : snapshots)
            if (std::abs(s.t - t) <= 1e-12 * std::max(1.0, std::abs(t))) return s;
        throw std::out_of_range("TimeSeries: no snapshot at requested time");
    }
};

// ---------------------------------------------------------------------------
// Right-hand side
// ---------------------------------------------------------------------------

/// |u|^{m-1}u nodewise, with 0^m = 0.
inline Field signed_power(const Field& u, double m) {
    Field out(u.grid);
    if (m == 1.0) { out.values = u.values; return out; }
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double v = u[i];
        out[i] = v == 0.0 ? 0.0 : std::copysign(std::pow(std::abs(v), m), v);
    }
    return out;
}

namespace detail {

/// (-Δ)^s w: spectral on the torus, free-space kernel with w = 0 outside the box when absorbing.
inline Field operator_apply(const Field& w, double s, Exterior ext) {
    if (ext == Exterior::periodic || s >= 1.0) return spectral_apply(w, s);
    KernelOptions opt;
    opt.domain = KernelDomain::free_space;
    return kernel_apply(w, s, opt);
}

inline Field rhs_unchecked(const Field& u, const Params& p, Exterior ext = Exterior::periodic) {
    Field out = operator_apply(signed_power(u, p.m), p.s, ext);
    for (auto& v : out.values) v = -v;
    return out;
}

}  // namespace detail

/// -(-Δ)^s(u^m) for nonnegative u. The absorbing exterior uses the free-space kernel form.
inline Field rhs(const Field& u, const Params& p, Exterior ext = Exterior::periodic) {
    p.validate();
    for (double v : u.values)
        if (v < -1e-12) throw std::domain_error("rhs: negative values beyond -1e-12");
    return detail::rhs_unchecked(u, p, ext);
}

// ---------------------------------------------------------------------------
// Bogacki–Shampine 3(2) stepping
// ---------------------------------------------------------------------------

struct StepResult {
    Field u;
    double dt_used = 0.0;
    double dt_next = 0.0;
    double clipped_mass = 0.0;
    int rejected = 0;
};

struct StepPolicy {
    double eps_t = 1e-6;
    double safety = 0.9;
    double dt_min = 1e-14;
    double negativity_rel = 1e-10;
    Exterior exterior = Exterior::periodic;
    Integrator integrator = Integrator::explicit_rk;
};

namespace detail {

struct RkTrial {
    Field y;
    double err = 0.0;   ///< ‖local error‖∞ / ‖y‖∞
};

/// One Bogacki–Shampine trial from u with step dt; k1 = rhs(u) supplied by the caller.
inline RkTrial bs23_trial(const Field& u, const Field& k1, double dt, const Params& p,
                          Exterior ext = Exterior::periodic) {
    const std::size_t n = u.size();
    Field tmp(u.grid);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = u[i] + 0.5 * dt * k1[i];
    const Field k2 = rhs_unchecked(tmp, p, ext);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = u[i] + 0.75 * dt * k2[i];
    const Field k3 = rhs_unchecked(tmp, p, ext);
    RkTrial r{Field(u.grid), 0.0};
    for (std::size_t i = 0; i < n; ++i)
        r.y[i] = u[i] + dt * (2.0 / 9.0 * k1[i] + 1.0 / 3.0 * k2[i] + 4.0 / 9.0 * k3[i]);
    const Field k4 = rhs_unchecked(r.y, p, ext);
    double emax = 0.0, ymax = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double e = dt * (-5.0 / 72.0 * k1[i] + 1.0 / 12.0 * k2[i] + 1.0 / 9.0 * k3[i] - 1.0 / 8.0 * k4[i]);
        emax = std::max(emax, std::abs(e));
        ymax = std::max(ymax, std::abs(r.y[i]));
    }
    r.err = ymax > 0.0 ? emax / ymax : emax;
    return r;
}

/// Clips negatives to zero; returns the removed mass h^d Σ|negative part|.
inline double clip_negative(Field& y) {
    double removed = 0.0;
    for (auto& v : y.values)
        if (v < 0.0) { removed -= v; v = 0.0; }
    return removed * y.grid.cell_volume();
}

}  // namespace detail

namespace detail {

struct ImplicitSolve {
    Field u;
    bool converged = false;
    int newton = 0;
    int cg = 0;
};

/// (A e_c)_c at the central node: the diagonal scale used by the Jacobi preconditioner.
inline double operator_diagonal(const Grid& g, double s, Exterior ext) {
    Field e(g);
    const std::size_t c = g.d == 1 ? std::size_t(g.n / 2) : std::size_t(g.n / 2) * g.n + g.n / 2;
    e[c] = 1.0;
    return operator_apply(e, s, ext)[c];
}

/// Backward Euler u + dt(-Δ)^s(u^m) = u_n solved for w = u^m by damped Newton. The Newton matrix
/// diag(q|w|^{q-1}) + dt(-Δ)^s, q = 1/m, is symmetric positive definite and is inverted by
/// Jacobi-preconditioned conjugate gradients.
inline ImplicitSolve backward_euler(const Field& un, double dt, const Params& p, Exterior ext) {
    const double q = 1.0 / p.m;
    const double scale = lp_norm(un, std::numeric_limits<double>::infinity());
    const double a0 = dt * operator_diagonal(un.grid, p.s, ext);
    const std::size_t n = un.size();
    ImplicitSolve res;
    Field w = signed_power(un, p.m);
    auto residual = [&](const Field& ww, Field& G) {
        const Field Aw = operator_apply(ww, p.s, ext);
        double r = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double a = std::abs(ww[i]);
            G[i] = std::copysign(std::pow(a, q), ww[i]) - un[i] + dt * Aw[i];
            r = std::max(r, std::abs(G[i]));
        }
        return r;
    };
    Field G(un.grid);
    double r = residual(w, G);
    const double tol = 1e-12 * scale;
    for (res.newton = 0; res.newton < 60 && r > tol; ++res.newton) {
        std::vector<double> dg(n), pre(n);
        for (std::size_t i = 0; i < n; ++i) {
            dg[i] = q * std::pow(std::abs(w[i]), q - 1.0);
            pre[i] = 1.0 / (dg[i] + a0);
        }
        auto J = [&](const Field& x) {
            Field y = operator_apply(x, p.s, ext);
            for (std::size_t i = 0; i < n; ++i) y[i] = dg[i] * x[i] + dt * y[i];
            return y;
        };
        // CG on J δ = -G
        Field x(un.grid), rr(un.grid), z(un.grid), d(un.grid);
        double bnorm = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            rr[i] = -G[i];
            z[i] = pre[i] * rr[i];
            d[i] = z[i];
            bnorm += rr[i] * rr[i];
        }
        bnorm = std::sqrt(bnorm);
        double rz = 0.0;
        for (std::size_t i = 0; i < n; ++i) rz += rr[i] * z[i];
        for (int it = 0; it < 2000; ++it) {
            const Field Jd = J(d);
            double dJd = 0.0;
            for (std::size_t i = 0; i < n; ++i) dJd += d[i] * Jd[i];
            if (!(dJd > 0.0)) break;
            const double alpha = rz / dJd;
            double rn = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                x[i] += alpha * d[i];
                rr[i] -= alpha * Jd[i];
                rn += rr[i] * rr[i];
            }
            ++res.cg;
            if (std::sqrt(rn) <= 1e-10 * bnorm) break;
            double rz_new = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                z[i] = pre[i] * rr[i];
                rz_new += rr[i] * z[i];
            }
            const double beta = rz_new / rz;
            rz = rz_new;
            for (std::size_t i = 0; i < n; ++i) d[i] = z[i] + beta * d[i];
        }
        // backtracking on the residual
        double lam = 1.0;
        Field trial(un.grid), Gt(un.grid);
        double rt = 0.0;
        for (;;) {
            for (std::size_t i = 0; i < n; ++i) trial[i] = w[i] + lam * x[i];
            rt = residual(trial, Gt);
            if (rt < (1.0 - 1e-4 * lam) * r || lam < 1e-6) break;
            lam *= 0.5;
        }
        if (!(rt < r)) break;
        w = std::move(trial);
        G = std::move(Gt);
        r = rt;
    }
    res.converged = r <= tol;
    res.u = signed_power(w, q);
    return res;
}

inline StepResult implicit_step(const Field& u, double dt, const Params& p, const StepPolicy& pol) {
    StepResult res;
    for (;;) {
        if (dt < pol.dt_min) throw StiffnessError("step: dt underflow (stiffness failure)");
        const auto full = backward_euler(u, dt, p, pol.exterior);
        const auto half = full.converged ? backward_euler(u, 0.5 * dt, p, pol.exterior) : ImplicitSolve{};
        const auto two = half.converged ? backward_euler(half.u, 0.5 * dt, p, pol.exterior) : ImplicitSolve{};
        if (!two.converged) {
            ++res.rejected;
            dt *= 0.5;
            continue;
        }
        double emax = 0.0, ymax = 0.0;
        for (std::size_t i = 0; i < u.size(); ++i) {
            emax = std::max(emax, std::abs(two.u[i] - full.u[i]));
            ymax = std::max(ymax, std::abs(two.u[i]));
        }
        const double err = ymax > 0.0 ? emax / ymax : emax;
        if (err > pol.eps_t) {
            ++res.rejected;
            dt *= std::clamp(pol.safety * std::sqrt(pol.eps_t / err), 0.1, 0.5);
            continue;
        }
        res.u = two.u;
        res.clipped_mass = clip_negative(res.u);
        res.dt_used = dt;
        const double grow = err > 0.0 ? pol.safety * std::sqrt(pol.eps_t / err) : 4.0;
        res.dt_next = dt * std::clamp(grow, 0.2, res.rejected > 0 ? 1.0 : 4.0);
        return res;
    }
}

}  // namespace detail

/// One accepted adaptive step: halves dt on error or negativity rejection, then clips at 0.
inline StepResult step(const Field& u, double dt, const Params& p, const StepPolicy& pol = {}) {
    if (!(dt > 0.0)) throw std::invalid_argument("step: dt must be positive");
    if (pol.integrator == Integrator::implicit_euler) return detail::implicit_step(u, dt, p, pol);
    const Field k1 = detail::rhs_unchecked(u, p, pol.exterior);
    StepResult res;
    for (;;) {
        if (dt < pol.dt_min) throw StiffnessError("step: dt underflow (stiffness failure)");
        auto trial = detail::bs23_trial(u, k1, dt, p, pol.exterior);
        double ymin = 0.0, ymax = 0.0;
        bool finite = true;
        for (double v : trial.y.values) {
            if (!std::isfinite(v)) { finite = false; break; }
            ymin = std::min(ymin, v);
            ymax = std::max(ymax, std::abs(v));
        }
        const bool negative = ymin < -pol.negativity_rel * ymax;
        if (!finite || trial.err > pol.eps_t || negative) {
            ++res.rejected;
            dt *= 0.5;
            continue;
        }
        res.clipped_mass = detail::clip_negative(trial.y);
        res.u = std::move(trial.y);
        res.dt_used = dt;
        const double grow = trial.err > 0.0 ? pol.safety * std::cbrt(pol.eps_t / trial.err) : 5.0;
        // no growth right after a rejection: the stability limit sits just above dt
        res.dt_next = dt * std::clamp(grow, 0.2, res.rejected > 0 ? 1.0 : 5.0);
        return res;
    }
}

// ---------------------------------------------------------------------------
// Runs
// ---------------------------------------------------------------------------

/// FNV-1a over a byte range, chained through `h`.
inline std::uint64_t fnv1a(const void* data, std::size_t len, std::uint64_t h = 1469598103934665603ull) {
    const auto* b = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) { h ^= b[i]; h *= 1099511628211ull; }
    return h;
}

inline std::uint64_t config_hash(const SolverConfig& c, const Field& u0) {
    std::ostringstream os;
    os.precision(17);
    os << c.params.m << ' ' << c.params.s << ' ' << c.params.d << ' ' << c.grid.L << ' ' << c.grid.n << ' '
       << exterior_name(c.exterior) << ' ' << integrator_name(c.integrator) << ' '
       << c.eps_t << ' ' << c.safety << ' ' << c.floor << ' ' << c.t_end << ' ' << c.extinction_rel << ' '
       << c.dt_initial << ' ' << c.dt_min << ' ' << c.negativity_rel << ' ' << c.contamination_radius << ' '
       << c.contamination_threshold;
    for (double t : c.snapshots) os << ' ' << t;
    for (const auto& w : c.weights) os << " w" << w.alpha << ',' << w.R << ',' << w.center[0] << ',' << w.center[1];
    const std::string s = os.str();
    std::uint64_t h = fnv1a(s.data(), s.size());
    return fnv1a(u0.values.data(), u0.values.size() * sizeof(double), h);
}

inline Snapshot make_snapshot(double t, Field u, const SolverConfig& c, const std::vector<Field>& weight_fields) {
    Snapshot s;
    s.t = t;
    s.mass = integrate(u);
    s.linf = lp_norm(u, std::numeric_limits<double>::infinity());
    const double pc = c.params.p_c();
    if (c.params.m < 1.0 && pc > 1.0) s.lpc = lp_norm(u, pc);
    for (const auto& w : weight_fields) s.weighted.push_back(weighted_integral(u, w));
    s.u = std::move(u);
    return s;
}

/// Integrates to t_end or extinction, recording the requested snapshots.
inline TimeSeries run(const SolverConfig& cfg, const Field& u0_in) {
    cfg.validate();
    require_same_grid(u0_in, Field(cfg.grid), "run");
    if (!all_finite(u0_in)) throw std::invalid_argument("run: nonfinite initial data");
    for (double v : u0_in.values)
        if (v < 0.0) throw std::invalid_argument("run: initial data must be nonnegative");
    Field u0 = u0_in;
    if (cfg.params.m < 1.0 && cfg.floor > 0.0)
        for (auto& v : u0.values) v += cfg.floor;

    TimeSeries ts;
    ts.params = cfg.params;
    ts.exterior = cfg.exterior;
    ts.config_hash = config_hash(cfg, u0_in);
    std::vector<Field> wf;
    for (const auto& w : cfg.weights) wf.push_back(phi_field(cfg.grid, w));

    const double radius = cfg.contamination_radius * cfg.grid.L;
    auto record = [&](double t, const Field& u) {
        const double c = mass_fraction_outside(u, radius);
        ts.contamination = std::max(ts.contamination, c);
        ts.snapshots.push_back(make_snapshot(t, u, cfg, wf));
    };
    const double c0 = mass_fraction_outside(u0, radius);
    if (c0 > cfg.contamination_threshold)
        throw std::invalid_argument("run: initial data already contaminates the box edge");
    record(0.0, u0);

    const double u0max = lp_norm(u0, std::numeric_limits<double>::infinity());
    if (u0max == 0.0) {
        for (double t : cfg.snapshots)
            if (t > 0.0) record(t, u0);
        return ts;
    }
    const double u_ext = cfg.extinction_rel * u0max;
    const StepPolicy pol{cfg.eps_t, cfg.safety, cfg.dt_min, cfg.negativity_rel, cfg.exterior, cfg.integrator};

    std::vector<double> targets;
    for (double t : cfg.snapshots)
        if (t > 0.0) targets.push_back(t);
    if (targets.empty() || targets.back() < cfg.t_end) targets.push_back(cfg.t_end);
    const bool record_end = !cfg.snapshots.empty() && cfg.snapshots.back() == cfg.t_end;

    Field u = u0;
    double t = 0.0;
    double dt = cfg.dt_initial > 0.0 ? cfg.dt_initial : std::pow(cfg.grid.h, 2.0 * cfg.params.s) / 100.0;
    std::size_t next = 0;
    while (next < targets.size()) {
        if (ts.steps >= cfg.max_steps) throw StiffnessError("run: step budget exhausted");
        const double target = targets[next];
        const double h = std::min(dt, target - t);
        const bool hits = h == target - t;
        StepResult sr;
        try {
            sr = step(u, h, cfg.params, pol);
        } catch (const StiffnessError& e) {
            std::ostringstream os;
            os << e.what() << " at t=" << t << " after " << ts.steps << " steps";
            throw StiffnessError(os.str());
        }
        ts.steps++;
        ts.rejected += sr.rejected;
        ts.clipped_mass += sr.clipped_mass;
        const double t_new = (hits && sr.dt_used == h) ? target : t + sr.dt_used;
        const double umax = lp_norm(sr.u, std::numeric_limits<double>::infinity());
        if (umax < u_ext) {
            // bisection on the sub-step length from the last positive state
            double lo = 0.0, hi = sr.dt_used;
            for (int it = 0; it < 60 && hi - lo > 1e-15 * std::max(1.0, t); ++it) {
                const double mid = 0.5 * (lo + hi);
                Field y;
                if (cfg.integrator == Integrator::implicit_euler) {
                    y = detail::backward_euler(u, mid, cfg.params, cfg.exterior).u;
                } else {
                    const Field k1 = detail::rhs_unchecked(u, cfg.params, cfg.exterior);
                    y = detail::bs23_trial(u, k1, mid, cfg.params, cfg.exterior).y;
                }
                detail::clip_negative(y);
                (lp_norm(y, std::numeric_limits<double>::infinity()) < u_ext ? hi : lo) = mid;
            }
            ts.extinct = true;
            ts.extinction_time = t + 0.5 * (lo + hi);
            Field zero(cfg.grid);
            for (; next < targets.size(); ++next)
                if (next + 1 < targets.size() || record_end) record(targets[next], zero);
            break;
        }
        u = std::move(sr.u);
        t = t_new;
        // the accepted length was clipped to reach the target, so do not let it shrink the next guess
        dt = hits && sr.dt_used == h ? std::max(sr.dt_next, dt) : sr.dt_next;
        if (t == target) {
            if (next + 1 < targets.size() || record_end) record(t, u);
            ++next;
        }
    }
    ts.contaminated = ts.contamination > cfg.contamination_threshold;
    if (ts.contaminated) {
        std::ostringstream os;
        os << "domain-contaminated: mass fraction beyond " << cfg.contamination_radius << "L reached " << ts.contamination;
        ts.diagnostic = os.str();
    }
    return ts;
}

// ---------------------------------------------------------------------------
// Exact linear propagator and self-similar solutions
// ---------------------------------------------------------------------------

/// e^{-t(-Δ)^s} u₀ through the Fourier multiplier e^{-t(2π|ξ|)^{2s}}.
inline Field fractional_heat_exact(const Field& u0, double s, double t) {
    if (!(t >= 0.0)) throw std::invalid_argument("fractional_heat_exact: t must be nonnegative");
    if (t == 0.0) return u0;
    return apply_multiplier(u0, [&](double xi) { return std::exp(-t * std::pow(2.0 * std::numbers::pi * xi, 2.0 * s)); });
}

/// Smooth compactly supported bump exp(1 - 1/(1-(r/w)²)) of height 1 and radius w about c.
inline double bump(const Point& x, const Point& c, double w, int d) {
    const double r = distance(x, c, d) / w;
    if (r >= 1.0) return 0.0;
    return std::exp(1.0 - 1.0 / (1.0 - r * r));
}

inline Field bump_field(const Grid& g, const Point& c, double w, double mass) {
    Field f = sample(g, [&](const Point& x) { return bump(x, c, w, g.d); });
    const double m0 = integrate(f);
    if (!(m0 > 0.0)) throw std::invalid_argument("bump_field: bump not resolved by the grid");
    for (auto& v : f.values) v *= mass / m0;
    return f;
}

/// Self-similar profile F sampled at t = 1 from a unit-mass source run.
struct BarenblattProfile {
    Params params;
    double theta = 0.0;
    RadialProfile profile;        ///< F(r) = τ^{dθ} u₁(1, rτ^θ), τ = 1 + t0
    double tail_exponent = 0.0;   ///< used beyond the sampled range
    double collapse_l1 = 0.0;     ///< relative L¹ gap between the t=1 and rescaled t=4 profiles
    double time_shift = 0.0;      ///< t0 with u(t) ≈ u*(t + t0) for the source bump
    double contamination = 0.0;
    TimeSeries series;

    /// u*(t, r) for mass M: M τ^{-dθ} F(r τ^{-θ}) with τ = M^{m-1} t.
    double value(double M, double t, double r) const {
        const double tau = std::pow(M, params.m - 1.0) * t;
        const double sc = std::pow(tau, -theta);
        return M * std::pow(sc, params.d) * interpolate_profile(profile, r * sc, tail_exponent);
    }
    Field field(const Grid& g, double M, double t, const Point& c = {0.0, 0.0}) const {
        return sample(g, [&](const Point& x) { return value(M, t, distance(x, c, g.d)); });
    }
};

struct BarenblattOptions {
    double source_width = 0.0;   ///< 0 picks 4h
    double collapse_tol = 0.02;
    double eps_t = 1e-6;
    double contamination_threshold = 1e-2;
};

/// Builds the profile by evolving a narrow unit-mass bump to t = 1 and t = 4 and checking that the
/// two collapse under x ↦ x τ^{-θ}, u ↦ τ^{dθ} u with τ = t + t0.
inline BarenblattProfile barenblatt_profile(const Params& p, const Grid& g, const BarenblattOptions& opt = {}) {
    p.validate();
    if (!(p.m > p.m_c())) throw std::domain_error("barenblatt: requires m > m_c");
    BarenblattProfile bp;
    bp.params = p;
    bp.theta = p.theta();
    SolverConfig cfg;
    cfg.params = p;
    cfg.grid = g;
    cfg.eps_t = opt.eps_t;
    cfg.t_end = 4.0;
    cfg.snapshots = {1.0, 4.0};
    cfg.contamination_threshold = opt.contamination_threshold;
    const double w = opt.source_width > 0.0 ? opt.source_width : 4.0 * g.h;
    bp.series = run(cfg, bump_field(g, {0.0, 0.0}, w, 1.0));
    bp.contamination = bp.series.contamination;
    const Snapshot& s1 = bp.series.at_time(1.0);
    const Snapshot& s4 = bp.series.at_time(4.0);
    if (p.m < p.m_1()) bp.tail_exponent = -2.0 * p.s / (1.0 - p.m);
    else bp.tail_exponent = -(p.d + 2.0 * p.s);

    // The bump behaves like u*(t + t0); t0 from the peak decay t^{-dθ} between the two snapshots.
    const double q = std::pow(s1.linf / s4.linf, 1.0 / (p.d * bp.theta));
    bp.time_shift = (4.0 - q) / (q - 1.0);
    if (!(q > 1.0 && bp.time_shift > -0.5)) throw std::runtime_error("barenblatt: peak decay not self-similar");
    const double tau1 = 1.0 + bp.time_shift, tau4 = 4.0 + bp.time_shift;

    const auto p1 = axis_profile(s1.u);
    const auto p4 = axis_profile(s4.u);
    const double a1 = std::pow(tau1, bp.theta);
    bp.profile = p1;
    for (auto& r : bp.profile.r) r /= a1;
    for (auto& v : bp.profile.value) v *= std::pow(a1, p.d);

    // radial L¹ comparison where the rescaled t=4 profile lies in the inner half-box, away from the
    // periodic images of its tail
    const double k = std::pow(tau4 / tau1, bp.theta);
    const double kd = std::pow(k, p.d);
    const double r_hi = std::min(p4.r.back(), 0.5 * g.L) / k;
    CompensatedSum diff, ref;
    for (std::size_t i = 0; i < p1.r.size() && p1.r[i] <= r_hi; ++i) {
        const double r = p1.r[i];
        const double wgt = p.d == 1 ? 1.0 : std::max(r, 0.5 * g.h);
        const double a = p1.value[i];
        const double b = kd * interpolate_profile(p4, r * k, bp.tail_exponent);
        diff.add(std::abs(a - b) * wgt);
        ref.add(std::abs(a) * wgt);
    }
    bp.collapse_l1 = ref.value() > 0.0 ? diff.value() / ref.value() : 0.0;
    if (bp.collapse_l1 > opt.collapse_tol) {
        std::ostringstream os;
        os << "barenblatt: collapse check failed (relative L1 gap " << bp.collapse_l1 << ")";
        throw std::runtime_error(os.str());
    }
    return bp;
}

}  // namespace fracdiff
