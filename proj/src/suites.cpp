#include "fracdiff/suites.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <sstream>

#include "fracdiff/field_io.hpp"
#include "fracdiff/fraclap.hpp"
#include "fracdiff/report.hpp"
#include "fracdiff/special.hpp"
#include "fracdiff/weights.hpp"

namespace fracdiff {

bool SuiteResult::passed() const {
    return std::all_of(reports.begin(), reports.end(), [](const EstimateReport& r) { return r.flagged || r.pass; });
}

std::vector<const EstimateReport*> SuiteResult::failures() const {
    std::vector<const EstimateReport*> out;
    for (const auto& r : reports)
        if (!r.flagged && !r.pass) out.push_back(&r);
    return out;
}

std::vector<double> snapshot_times(const SnapshotSpec& s, double t_end) {
    std::vector<double> t;
    if (s.spacing == "linear") {
        for (int k = 1; k <= s.count; ++k) t.push_back(t_end * k / s.count);
        return t;
    }
    for (int k = 0;; ++k) {
        const double v = s.t_first * std::pow(s.ratio, k);
        if (v >= t_end * (1.0 - 1e-9)) break;
        t.push_back(v);
    }
    t.push_back(t_end);
    return t;
}

SolverConfig solver_config(const RunConfig& c, const Params& p, double t_end) {
    SolverConfig sc;
    sc.params = p;
    sc.grid = make_grid(p.d, c.L, c.n);
    sc.exterior = c.exterior == "absorbing" ? Exterior::absorbing : Exterior::periodic;
    const bool implicit = p.m < 1.0 && (c.integrator == "implicit_euler" || c.integrator == "auto");
    sc.integrator = implicit ? Integrator::implicit_euler : Integrator::explicit_rk;
    sc.eps_t = c.eps_t;
    sc.t_end = t_end;
    sc.snapshots = snapshot_times(c.snapshots, t_end);
    sc.contamination_threshold = c.contamination_threshold;
    return sc;
}

Field initial_data(const RunConfig& c, const Grid& g, double width) {
    const DataSpec& d = c.data;
    if (d.kind == "gaussian") {
        Field f = sample(g, [&](const Point& x) {
            const double r = distance(x, {0.0, 0.0}, g.d);
            return std::exp(-0.5 * r * r / (width * width));
        });
        const double m0 = integrate(f);
        for (auto& v : f.values) v *= d.mass / m0;
        return f;
    }
    if (d.kind == "file") {
        Field f = read_field_binary(d.path);
        if (!(f.grid == g)) throw ConfigError(c.source, 0, "data.path", "field grid does not match [grid] and params.d");
        return f;
    }
    if (d.kind == "barenblatt") return barenblatt_profile(c.params, g).field(g, d.mass, d.t0);
    return bump_field(g, {0.0, 0.0}, width, d.mass);
}

namespace {

std::string hex(std::uint64_t h) {
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string label_m(double m) { return "m=" + fmt(m); }

EstimateReport failed_report(const std::string& name, const Params& p, const std::string& why) {
    EstimateReport r;
    r.name = name;
    r.params = p;
    r.require(false, why);
    return r;
}

/// Evaluates a check; an exception becomes a failed report of that name.
EstimateReport guarded(const std::string& name, const Params& p, const std::function<EstimateReport()>& fn) {
    try {
        return fn();
    } catch (const std::exception& e) {
        return failed_report(name, p, std::string("exception: ") + e.what());
    }
}

/// Runs one evolution, recording it; stiffness aborts and errors become failed reports and the
/// suite carries on without the series.
std::optional<TimeSeries> evolve_logged(const std::string& label, const SolverConfig& sc, const Field& u0,
                                        std::vector<RunRecord>& runs, std::vector<EstimateReport>& aborts) {
    RunRecord rec;
    rec.label = label;
    try {
        rec.config_hash = config_hash(sc, u0);
        TimeSeries ts = run(sc, u0);
        rec.steps = ts.steps;
        rec.rejected = ts.rejected;
        rec.contamination = ts.contamination;
        rec.contaminated = ts.contaminated;
        rec.extinct = ts.extinct;
        rec.extinction_time = ts.extinct ? ts.extinction_time : 0.0;
        rec.clipped_mass = ts.clipped_mass;
        rec.snapshots = ts.snapshots.size();
        rec.diagnostic = ts.diagnostic;
        runs.push_back(rec);
        return ts;
    } catch (const StiffnessError& e) {
        rec.status = "stiffness_abort";
        rec.diagnostic = e.what();
    } catch (const std::exception& e) {
        rec.status = "error";
        rec.diagnostic = e.what();
    }
    runs.push_back(rec);
    aborts.push_back(failed_report("run_aborted:" + label, sc.params, rec.status + ": " + rec.diagnostic));
    return std::nullopt;
}

void append_ledger(SuiteResult& out, const std::string& prefix, const ConstantLedger& L) {
    for (const auto& [name, c] : L.entries()) {
        ConstantUse u = c;
        if (!prefix.empty()) u.name = prefix + ":" + name;
        out.ledger.push_back(u);
    }
}

const TimeSeries* find_series(const Calibration& cal, const std::string& label) {
    auto it = cal.series.find(label);
    return it == cal.series.end() ? nullptr : &it->second;
}

// ---------------------------------------------------------------------------
// Random data
// ---------------------------------------------------------------------------

/// Eight bumps with random centers, widths and amplitudes. compact keeps the support well inside the
/// box; positive makes the amplitudes positive and, when not compact, adds a small floor.
Field random_bumps(const Grid& g, Rng& rng, bool positive, bool compact) {
    Field f(g);
    for (int k = 0; k < 8; ++k) {
        const double spread = g.L * (compact ? 0.4 : 0.9);
        const Point c{rng.uniform(-1.0, 1.0) * spread, g.d == 2 ? rng.uniform(-1.0, 1.0) * spread : 0.0};
        const double w = g.L * (0.05 + 0.15 * rng.uniform());
        const double a = positive ? rng.uniform(-1.0, 1.0) + 1.2 : rng.uniform(-1.0, 1.0);
        for (std::size_t i = 0; i < f.size(); ++i) f[i] += a * bump(g.point(i), c, w, g.d);
    }
    if (positive && !compact)
        for (auto& v : f.values) v += 0.05;
    return f;
}

/// Four positive bumps near the origin: the weighted-L¹ pair data.
Field random_pair_component(const Grid& g, Rng& rng) {
    Field f(g);
    for (int k = 0; k < 4; ++k) {
        const Point c{rng.uniform(-1.0, 1.0) * 4.0, 0.0};
        const double w = 1.0 + 0.5 * rng.uniform(-1.0, 1.0) + 0.5;
        const double a = 0.5 + 0.5 * (rng.uniform(-1.0, 1.0) + 1.0);
        for (std::size_t i = 0; i < f.size(); ++i) f[i] += a * bump(g.point(i), c, w, g.d);
    }
    return f;
}

// ---------------------------------------------------------------------------
// operator
// ---------------------------------------------------------------------------

struct ConstantOracle {
    const char* name;
    int d;
    double arg;
    double value;   ///< 30-digit evaluation, rounded to double
};

// c_{d,σ} and S_s² evaluated independently in multiprecision
constexpr ConstantOracle kernel_oracle[] = {
    {"c_d_sigma", 1, 0.5, 0.19947114020071633897}, {"c_d_sigma", 1, 1.0, 0.31830988618379067154},
    {"c_d_sigma", 1, 1.5, 0.29920671030107450845}, {"c_d_sigma", 2, 0.5, 0.083241983875425065489},
    {"c_d_sigma", 2, 1.0, 0.15915494309189533577}, {"c_d_sigma", 2, 1.5, 0.17116712969055234293},
};
constexpr ConstantOracle sobolev_oracle[] = {
    {"S_s_sq", 1, 0.25, 1.180340599016096226}, {"S_s_sq", 2, 0.25, 0.71805919151981753575},
    {"S_s_sq", 2, 0.5, 0.56418958354775628695}, {"S_s_sq", 2, 0.75, 0.59105598339336108751},
};

SuiteResult verify_operator(const RunConfig& c) {
    SuiteResult out;
    const Grid g = make_grid(c.params.d, c.L, c.n);
    const Field f = bump_field(g, {0.0, 0.0}, c.data.width, c.data.mass);
    for (double s : c.s_values) {
        const Params p(1.0, s, g.d);
        out.reports.push_back(guarded("operator_cross_validation", p, [&] {
            const auto cv = cross_validate(f, s);
            EstimateReport r;
            r.name = "operator_cross_validation";
            r.params = p;
            r.inequality(cv.max_rel_discrepancy, c.operator_rel, 0.0);
            for (const auto& [k, v] : cv.pairs) r.metric("gap_" + k, v);
            r.metric("free_space_deviation", cv.free_space_deviation);
            for (const auto& e : cv.failures) r.require(false, e);
            return r;
        }));
    }
    EstimateReport k;
    k.name = "kernel_constants";
    k.params = Params(1.0, 0.5, 1);
    for (const auto& o : kernel_oracle) {
        const double rel = std::abs(kernel_constant(o.d, o.arg) - o.value) / o.value;
        k.metric("rel_err_d=" + std::to_string(o.d) + "_sigma=" + fmt(o.arg), rel);
        k.inequality(rel, c.constant_rel, 0.0);
    }
    const double pi_rel = std::abs(kernel_constant(1, 1.0) * std::numbers::pi - 1.0);
    k.metric("c_1_1_times_pi_minus_1", pi_rel);
    k.inequality(pi_rel, c.constant_rel, 0.0);
    out.reports.push_back(k);
    EstimateReport sb;
    sb.name = "sobolev_constants";
    sb.params = Params(1.0, 0.5, 2);
    for (const auto& o : sobolev_oracle) {
        const double rel = std::abs(sobolev_constant_sq(o.d, o.arg) - o.value) / o.value;
        sb.metric("rel_err_d=" + std::to_string(o.d) + "_s=" + fmt(o.arg), rel);
        sb.inequality(rel, c.constant_rel, 0.0);
    }
    out.reports.push_back(sb);
    return out;
}

// ---------------------------------------------------------------------------
// weights
// ---------------------------------------------------------------------------

SuiteResult verify_weights(const RunConfig& c) {
    SuiteResult out;
    const Grid g = make_grid(c.params.d, c.L, c.n);
    const double d = g.d;
    for (double s : c.s_values)
        for (double alpha : {0.25 * d, d, d + 1.0}) {
            const Params p(1.0, s, g.d);
            out.reports.push_back(guarded("weight_decay", p, [&] {
                const auto rep = verify_decay(WeightSpec{alpha, 1.0, {0.0, 0.0}}, s, g);
                EstimateReport r;
                r.name = "weight_decay";
                r.params = p;
                r.metric("alpha", alpha);
                r.metric("expected_exponent", rep.expected_exponent);
                r.metric("fitted_exponent", rep.fitted_exponent);
                r.metric("fit_rms", rep.fit_rms);
                r.note(std::string("regime ") + decay_regime_name(rep.regime));
                if (!rep.note.empty()) r.note(rep.note);
                r.inequality(std::abs(rep.fitted_exponent - rep.expected_exponent), c.decay_tol, 0.0);
                if (rep.regime == DecayRegime::above_d) {
                    r.metric("lower_constant", rep.lower_constant);
                    r.require(rep.lower_bound_pass && rep.lower_constant > 0.0, "lower bound not positive on the shell");
                }
                return r;
            }));
        }
    return out;
}

// ---------------------------------------------------------------------------
// weighted_l1
// ---------------------------------------------------------------------------

SuiteResult verify_weighted_l1(const RunConfig& c, Calibration& cal) {
    SuiteResult out;
    Rng rng(c.seed);
    for (double m : c.m_values) {
        const Params p(m, c.params.s, c.params.d);
        ConstantLedger L(p);
        ledger_add_weighted_l1(L, c.alpha);
        append_ledger(out, label_m(m), L);
        const double C1 = L.get("C1");
        const SolverConfig sc = solver_config(c, p, c.t_end);
        for (int k = 0; k < c.samples; ++k) {
            const Field v0 = random_pair_component(sc.grid, rng);
            Field u0 = v0;
            const Field e = random_pair_component(sc.grid, rng);
            for (std::size_t i = 0; i < u0.size(); ++i) u0[i] += e[i];
            const std::string tag = label_m(m) + ":pair" + std::to_string(k);
            auto tu = evolve_logged(tag + ":u", sc, u0, out.runs, cal.aborts);
            auto tv = evolve_logged(tag + ":v", sc, v0, out.runs, cal.aborts);
            if (!tu || !tv) continue;
            for (double R : c.weight_radii) {
                auto r = guarded("weighted_l1", p, [&] { return check_weighted_l1(*tu, *tv, WeightSpec{c.alpha, R, {0.0, 0.0}}, C1); });
                r.metric("R", R);
                r.metric("pair", k);
                out.reports.push_back(r);
            }
            out.reports.push_back(guarded("benilan_crandall", p, [&] { return check_benilan_crandall(*tu, c.tol); }));
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// gfde
// ---------------------------------------------------------------------------

void calibrate_main_and_widths(const RunConfig& c, Calibration& cal) {
    const Params& p = c.params;
    const SolverConfig sc = solver_config(c, p, c.t_end);
    if (auto ts = evolve_logged("main", sc, initial_data(c, sc.grid, c.data.width), cal.runs, cal.aborts))
        cal.series.emplace("main", std::move(*ts));
    for (double w : c.calibration_widths) {
        const std::string label = "calibration_width=" + fmt(w);
        if (auto ts = evolve_logged(label, sc, initial_data(c, sc.grid, w), cal.runs, cal.aborts))
            cal.series.emplace(label, std::move(*ts));
    }
    std::vector<const TimeSeries*> all;
    for (const auto& [k, ts] : cal.series) all.push_back(&ts);
    ConstantLedger L(p);
    if (!all.empty()) calibrate_I_inf(L, all);
    cal.ledgers.emplace("main", std::move(L));
}

SuiteResult verify_gfde(const RunConfig& c, Calibration& cal) {
    SuiteResult out;
    const Params& p = c.params;
    const TimeSeries* ts = find_series(cal, "main");
    ConstantLedger& L = cal.ledgers.at("main");
    if (!ts || !L.has("I_inf")) return out;
    const double alpha = c.alpha > 0.0 ? c.alpha : p.d / p.m;
    ledger_add_weighted_l1(L, alpha);
    append_ledger(out, "", L);
    const double R0 = c.ball_radius > 0.0 ? c.ball_radius : c.data.width;
    const BallSpec ball{{0.0, 0.0}, R0};
    out.reports.push_back(guarded("mass_conservation", p, [&] { return check_mass(*ts, c.tol.mass); }));
    out.reports.push_back(guarded("benilan_crandall", p, [&] { return check_benilan_crandall(*ts, c.tol); }));
    out.reports.push_back(guarded("aleksandrov", p, [&] { return check_aleksandrov(*ts, R0, c.tol); }));
    out.reports.push_back(guarded("smoothing", p, [&] { return check_smoothing(*ts, L.get("I_inf"), c.tol.exponent); }));
    GfdeConstants k;
    try {
        k = gfde_constants(L);
    } catch (const std::exception& e) {
        out.reports.push_back(failed_report("lower_gfde", p, std::string("exception: ") + e.what()));
        return out;
    }
    out.reports.push_back(guarded("lower_gfde", p, [&] { return check_lower_gfde(*ts, ball, k, c.late_fit_from, c.tol); }));

    // two-range bound against the measured infimum
    const double M = detail::ball_mass(ts->snapshots.front().u, ball);
    const double th = p.theta(), s = p.s, m = p.m;
    const double t_star = k.C_star * std::pow(R0, 2.0 * s - p.d * (1.0 - m)) * std::pow(M, 1.0 - m);
    std::vector<double> t, inf, te, early, tl, late;
    const BallSpec half{{0.0, 0.0}, 0.5 * R0};
    for (const auto& sn : ts->snapshots) {
        if (sn.t <= 0.0) continue;
        t.push_back(sn.t);
        inf.push_back(inf_over_ball(sn.u, half));
        if (sn.t <= t_star) {
            te.push_back(sn.t);
            early.push_back(k.K1 * std::pow(R0, -2.0 * s / (1.0 - m)) * std::pow(sn.t, 1.0 / (1.0 - m)));
        }
        if (sn.t >= t_star) {
            tl.push_back(sn.t);
            late.push_back(k.K2 * std::pow(M, 2.0 * s * th) * std::pow(sn.t, -p.d * th));
        }
    }
    out.data["figure_lower_bounds"] = {{"t", t}, {"inf", inf}, {"t_early", te}, {"early", early}, {"t_late", tl},
                                       {"late", late}, {"t_star", t_star}};
    PlotSpec ps;
    ps.title = "Lower bounds in two time ranges, (d,s,m) = (" + std::to_string(p.d) + ", " + fmt(s) + ", " + fmt(m) + ")";
    ps.xlabel = "t";
    ps.ylabel = "inf over B_{R0/2} of u(t)";
    ps.logx = ps.logy = true;
    ps.series.push_back({"measured inf", "black", t, inf, false, false});
    ps.series.push_back({"early branch", "#1f77b4", te, early, true, false});
    ps.series.push_back({"late branch", "crimson", tl, late, true, false});
    ps.vlines.emplace_back(t_star, "t*");
    out.figures.push_back({"fig_lower_bounds.svg", render_svg(ps)});
    return out;
}

// ---------------------------------------------------------------------------
// vfde
// ---------------------------------------------------------------------------

SuiteResult verify_vfde(const RunConfig& c, Calibration& cal) {
    SuiteResult out;
    const Params& p = c.params;
    const SolverConfig sc = solver_config(c, p, c.t_end);
    auto ts = evolve_logged("main", sc, initial_data(c, sc.grid, c.data.width), out.runs, cal.aborts);
    ConstantLedger L(p);
    ledger_add_weighted_l1(L, c.alpha);
    append_ledger(out, "", L);
    if (!ts) return out;
    const double R0 = c.ball_radius > 0.0 ? c.ball_radius : c.data.width;
    const auto k = vfde_constants(L);
    out.reports.push_back(guarded("mass_nonincreasing", p, [&] { return check_mass(*ts, c.tol.mass); }));
    out.reports.push_back(guarded("benilan_crandall", p, [&] { return check_benilan_crandall(*ts, c.tol); }));
    out.reports.push_back(guarded("aleksandrov", p, [&] { return check_aleksandrov(*ts, R0, c.tol); }));
    out.reports.push_back(guarded("extinction_bounds", p, [&] { return check_extinction_bounds(*ts, c.alpha, L.get("C1"), k, c.radii); }));
    out.reports.push_back(guarded("lower_vfde", p, [&] { return check_lower_vfde(*ts, BallSpec{{0.0, 0.0}, R0}, k); }));
    out.reports.push_back(guarded("non_extinction", p, [&] { return check_non_extinction(*ts, c.radii); }));
    return out;
}

// ---------------------------------------------------------------------------
// pme
// ---------------------------------------------------------------------------

SuiteResult verify_pme(const RunConfig& c, Calibration& cal) {
    SuiteResult out;
    const Params& p = c.params;
    const TimeSeries* ts = find_series(cal, "main");
    ConstantLedger& L = cal.ledgers.at("main");
    if (!ts || !L.has("I_inf")) return out;
    const auto b = phi_operator_bounds(p.d, p.s);
    L.set("c3", b.c3, Provenance::paper_formula, "sup |(-Delta)^s phi|, alpha = d+2s");
    L.set("c4", b.c4, Provenance::paper_formula, "integral of phi, alpha = d+2s");
    append_ledger(out, "", L);
    const double R0 = c.ball_radius > 0.0 ? c.ball_radius : c.data.width;
    out.reports.push_back(guarded("mass_conservation", p, [&] { return check_mass(*ts, c.tol.mass); }));
    out.reports.push_back(guarded("aleksandrov", p, [&] { return check_aleksandrov(*ts, R0, c.tol); }));
    out.reports.push_back(guarded("smoothing", p, [&] { return check_smoothing(*ts, L.get("I_inf"), c.tol.exponent); }));
    out.reports.push_back(guarded("lower_pme", p, [&] {
        return check_lower_pme(*ts, BallSpec{{0.0, 0.0}, R0}, pme_constants(L), c.late_fit_from, c.tol);
    }));
    return out;
}

// ---------------------------------------------------------------------------
// linear
// ---------------------------------------------------------------------------

SuiteResult verify_linear(const RunConfig& c, Calibration& cal) {
    SuiteResult out;
    const Params& p = c.params;
    const SolverConfig sc = solver_config(c, p, c.t_end);
    const Field u0 = initial_data(c, sc.grid, c.data.width);
    auto ts = evolve_logged("main", sc, u0, out.runs, cal.aborts);
    if (!ts) return out;
    const double R0 = c.ball_radius > 0.0 ? c.ball_radius : c.data.width;
    const BallSpec ball{{0.0, 0.0}, R0};
    out.reports.push_back(guarded("mass_conservation", p, [&] { return check_mass(*ts, c.tol.mass); }));
    out.reports.push_back(guarded("aleksandrov", p, [&] { return check_aleksandrov(*ts, R0, c.tol); }));
    out.reports.push_back(guarded("lower_linear", p, [&] {
        const auto k = linear_constants(u0, ball, p.s, sc.snapshots);
        return check_lower_linear(*ts, ball, k, c.late_fit_from, c.tol);
    }));
    return out;
}

// ---------------------------------------------------------------------------
// tail
// ---------------------------------------------------------------------------

SuiteResult verify_tail(const RunConfig& c, Calibration& cal) {
    SuiteResult out;
    const double s = c.params.s;
    const int d = c.params.d;
    std::map<double, TimeSeries> cache;
    auto settings = [&](double m) {
        // the listed m on the same side of m₁ that is nearest, else the nearest overall
        const double m1 = Params(m, s, d).m_1();
        std::size_t best = 0;
        double bd = std::numeric_limits<double>::infinity();
        for (int pass = 0; pass < 2 && !std::isfinite(bd); ++pass)
            for (std::size_t i = 0; i < c.m_values.size(); ++i) {
                if (pass == 0 && ((c.m_values[i] < m1) != (m < m1))) continue;
                const double dist = std::abs(c.m_values[i] - m);
                if (dist < bd) { bd = dist; best = i; }
            }
        return best;
    };
    auto series_for = [&](double m, std::size_t i) -> const TimeSeries* {
        auto it = cache.find(m);
        if (it != cache.end()) return &it->second;
        RunConfig rc = c;
        const double te = c.t_end_values[i];
        rc.snapshots.spacing = "geometric";
        rc.snapshots.t_first = te / 64.0;
        rc.snapshots.ratio = 2.0;
        const SolverConfig sc = solver_config(rc, Params(m, s, d), te);
        auto ts = evolve_logged(label_m(m), sc, initial_data(c, sc.grid, c.data.width), out.runs, cal.aborts);
        if (!ts) return nullptr;
        return &cache.emplace(m, std::move(*ts)).first->second;
    };
    for (std::size_t i = 0; i < c.m_values.size(); ++i) {
        const double m = c.m_values[i];
        const TimeSeries* ts = series_for(m, i);
        if (!ts) continue;
        out.reports.push_back(guarded("tail", Params(m, s, d), [&] {
            return check_tail(*ts, c.shell_min_values[i], c.shell_max_values[i], c.tol);
        }));
    }
    std::vector<double> mm, slope;
    for (double m : c.map_m_values) {
        const std::size_t i = settings(m);
        const TimeSeries* ts = series_for(m, i);
        if (!ts) continue;
        try {
            slope.push_back(tail_slope_periodized(ts->snapshots.back().u, c.shell_min_values[i], c.shell_max_values[i]).slope);
            mm.push_back(m);
        } catch (const std::exception&) {
            // a shell that is not positive yet leaves a gap in the map
        }
    }
    const double m_c = Params(0.5, s, d).m_c(), m1 = Params(0.5, s, d).m_1();
    std::vector<double> rx, r_minimal, r_heavy;
    for (int k = 0; k <= 100; ++k) {
        const double m = std::max(m_c, 0.0) + (1.0 - std::max(m_c, 0.0)) * (0.02 + 0.96 * k / 100.0);
        rx.push_back(m);
        r_minimal.push_back(-2.0 * s / (1.0 - m));
        r_heavy.push_back(-(d + 2.0 * s));
    }
    out.data["figure_tail_map"] = {{"m", mm}, {"slope", slope}, {"m1", m1}};
    PlotSpec ps;
    ps.title = "Fitted tail exponent, (d,s) = (" + std::to_string(d) + ", " + fmt(s) + ")";
    ps.xlabel = "m";
    ps.ylabel = "spatial slope of u at late time";
    ps.series.push_back({"fitted", "black", mm, slope, false, true});
    std::vector<double> lo_x, lo_y, hi_x, hi_y;
    for (std::size_t k = 0; k < rx.size(); ++k) {
        if (rx[k] <= m1) { lo_x.push_back(rx[k]); lo_y.push_back(std::max(r_minimal[k], -6.0)); }
        else { hi_x.push_back(rx[k]); hi_y.push_back(r_heavy[k]); }
    }
    ps.series.push_back({"-2s/(1-m)", "#1f77b4", lo_x, lo_y, true, false});
    ps.series.push_back({"-(d+2s)", "crimson", hi_x, hi_y, true, false});
    ps.vlines.emplace_back(m1, "m1");
    out.figures.push_back({"fig_tail_map.svg", render_svg(ps)});
    return out;
}

// ---------------------------------------------------------------------------
// inequalities
// ---------------------------------------------------------------------------

SuiteResult verify_inequalities(const RunConfig& c) {
    SuiteResult out;
    Rng rng(c.seed);
    auto grid_for = [&](int d) { return d == 1 ? make_grid(1, c.L, c.n) : make_grid(2, c.L, std::min(c.n, 128)); };
    for (int d : {1, 2})
        for (double s : c.s_values)
            for (double q : {1.5, 2.0, 3.0, 4.0}) {
                const Grid g = grid_for(d);
                const Params p(1.0, s, d);
                EstimateReport r;
                r.name = "stroock_varopoulos";
                r.params = p;
                r.metric("q", q);
                double eq_gap = 0.0;
                for (int k = 0; k < c.samples; ++k) {
                    const bool positive = (k % 2) == 1;
                    const auto one = check_stroock_varopoulos(random_bumps(g, rng, positive, false), s, q);
                    r.inequality(one.lhs, one.rhs, one.tolerance);
                    if (q == 2.0 && positive) eq_gap = std::max(eq_gap, std::abs(one.rhs - one.lhs) / std::abs(one.rhs));
                }
                if (q == 2.0) {
                    r.metric("equality_gap_nonnegative", eq_gap);
                    r.require(eq_gap <= c.sv_equality, "q = 2 equality gap " + fmt(eq_gap));
                }
                out.reports.push_back(r);
            }
    for (int d : {1, 2})
        for (double m : {0.5, 2.0})
            for (double pp : {2.0, 3.0}) {
                const Grid g = grid_for(d);
                const Params p(m, 0.5, d);
                EstimateReport r;
                r.name = "stroock_varopoulos_um";
                r.params = p;
                r.metric("p", pp);
                for (int k = 0; k < std::max(1, c.samples / 5); ++k) {
                    const auto one = check_stroock_varopoulos_um(random_bumps(g, rng, true, false), 0.5, m, pp);
                    r.inequality(one.lhs, one.rhs, one.tolerance);
                }
                out.reports.push_back(r);
            }
    for (int d : {1, 2})
        for (double s : c.s_values) {
            if (!(2.0 * s < d)) continue;
            const Grid g = grid_for(d);
            EstimateReport r;
            r.name = "sobolev";
            r.params = Params(1.0, s, d);
            double worst = 0.0;
            for (int k = 0; k < c.samples; ++k) {
                const auto one = check_sobolev(random_bumps(g, rng, false, true), s);
                r.inequality(one.lhs, one.rhs, one.tolerance);
                worst = std::max(worst, one.metric_value("ratio"));
            }
            r.metric("max_ratio", worst);
            out.reports.push_back(r);
        }
    out.reports.push_back(guarded("sobolev_extremal", Params(1.0, 0.5, 2), [&] {
        const Grid g = make_grid(2, c.extremal_L, c.extremal_n);
        auto r = check_sobolev(sobolev_extremal(g, 0.5, c.extremal_b), 0.5);
        r.name = "sobolev_extremal";
        const double ratio = r.metric_value("ratio");
        r.require(ratio >= c.sobolev_extremal_min, "extremal ratio " + fmt(ratio) + " below " + fmt(c.sobolev_extremal_min));
        return r;
    }));

    // optimization lemma over random draws with m_c < m < 1
    std::vector<std::pair<const char*, double OptimizationResult::*>> gaps{
        {"optimization_R_bar", &OptimizationResult::rel_gap_R},
        {"optimization_F_max", &OptimizationResult::rel_gap_F},
        {"optimization_F_displayed", &OptimizationResult::rel_gap_F_displayed},
        {"optimization_t_star", &OptimizationResult::rel_gap_t},
        {"optimization_R_bar_t_star", &OptimizationResult::rel_gap_R_t_star},
        {"optimization_t_rbar_min", &OptimizationResult::rel_gap_t_rbar_min}};
    std::vector<EstimateReport> opt(gaps.size() + 1);
    for (std::size_t i = 0; i < gaps.size(); ++i) opt[i].name = gaps[i].first;
    opt.back().name = "optimization_positivity_time";
    for (auto& r : opt) r.params = c.params;
    for (int k = 0; k < 20; ++k) {
        const int d = rng.uniform() < 0.5 ? 1 : 2;
        const double s = rng.uniform(0.2, 0.9);
        const double lo = std::max(Params(0.5, s, d).m_c(), 0.0) + 0.05;
        const double m = rng.uniform(lo, 0.95);
        const double M = rng.uniform(0.5, 2.0), C = rng.uniform(0.2, 2.0), B = rng.uniform(0.2, 3.0);
        try {
            const auto res = optimize_F(M, C, B, Params(m, s, d));
            for (std::size_t i = 0; i < gaps.size(); ++i) opt[i].inequality(res.*gaps[i].second, c.optimize_rel, 0.0);
            opt.back().inequality(res.A_zero_residual, c.optimize_zero, 0.0);
        } catch (const std::exception& e) {
            for (auto& r : opt) r.require(false, std::string("draw ") + std::to_string(k) + ": " + e.what());
        }
    }
    opt[2].note("displayed coefficient [(2s/(d(1-m)))^(1/theta) - 1]; equals the derived one only when theta = 1");
    opt[3].note("displayed t* = 2s theta (C/M)^(1/(d(1-m)theta)) against the grid argmin of R_bar(t)");
    opt[5].note("zero of A(t) - t A'(t): ((1 + d(1-m)theta) C/M)^(1/(d(1-m)theta))");
    for (auto& r : opt) out.reports.push_back(r);
    return out;
}

// ---------------------------------------------------------------------------
// trace
// ---------------------------------------------------------------------------

void calibrate_trace(const RunConfig& c, Calibration& cal) {
    for (std::size_t i = 0; i < c.m_values.size(); ++i) {
        const Params p(c.m_values[i], c.s_values[i], c.params.d);
        const std::string label = label_m(p.m);
        const SolverConfig sc = solver_config(c, p, c.t_end);
        auto ts = evolve_logged(label, sc, initial_data(c, sc.grid, c.data.width), cal.runs, cal.aborts);
        ConstantLedger L(p);
        if (ts) {
            if (p.m < 1.0) {
                ledger_add_weighted_l1(L, p.d / p.m);
            } else if (p.m > 1.0) {
                calibrate_I_inf(L, {&*ts});
                const auto b = phi_operator_bounds(p.d, p.s);
                L.set("c3", b.c3, Provenance::paper_formula, "sup |(-Delta)^s phi|, alpha = d+2s");
                L.set("c4", b.c4, Provenance::paper_formula, "integral of phi, alpha = d+2s");
            }
            cal.series.emplace(label, std::move(*ts));
        }
        cal.ledgers.emplace(label, std::move(L));
    }
}

SuiteResult verify_trace(const RunConfig& c, Calibration& cal) {
    SuiteResult out;
    static constexpr double centers[5][2] = {{0.0, 4.0}, {0.5, 1.0}, {-1.0, 2.0}, {0.25, 1.5}, {0.0, 8.0}};
    for (std::size_t i = 0; i < c.m_values.size(); ++i) {
        const Params p(c.m_values[i], c.s_values[i], c.params.d);
        const std::string label = label_m(p.m);
        const TimeSeries* ts = find_series(cal, label);
        if (!ts) continue;
        ConstantLedger& L = cal.ledgers.at(label);
        TraceConstants k;
        k.R = 1.0;
        if (p.m < 1.0) {
            k.C1 = L.get("C1");
            k.alpha = L.get("alpha");
        } else if (p.m == 1.0) {
            k.K0 = phi_operator_bounds(p.d, p.s).ratio_sup;
            L.set("K0", k.K0, Provenance::paper_formula, "sup |(-Delta)^s phi / phi|, alpha = d+2s");
        } else {
            const auto pk = pme_constants(L);
            k.I_inf = pk.I_inf;
            k.C_AC = pk.C_AC;
            L.set("C_AC", pk.C_AC, Provenance::measured, "inherits measured I_inf");
        }
        append_ledger(out, label, L);
        const Grid& g = ts->snapshots.front().u.grid;
        std::vector<TraceTestFunction> tests;
        for (const auto& cc : centers) tests.push_back(make_trace_test_function(g, {cc[0], 0.0}, cc[1], p.s, k.R));
        TraceOptions o;
        o.fit_modulus = p.m > 1.0;
        o.fit_lo = c.fit_lo;
        o.fit_hi = c.fit_hi;
        o.dirac_mass = c.data.mass;
        out.reports.push_back(guarded(std::string("initial_trace_") + regime_name(p.regime()), p,
                                      [&] { return check_initial_trace(*ts, tests, k, o, c.tol); }));
        if (p.m < 1.0) out.reports.push_back(guarded("benilan_crandall", p, [&] { return check_benilan_crandall(*ts, c.tol); }));
        out.reports.push_back(guarded("mass_conservation", p, [&] { return check_mass(*ts, c.tol.mass); }));
    }
    return out;
}

// ---------------------------------------------------------------------------
// evolve
// ---------------------------------------------------------------------------

SuiteResult verify_evolve(const RunConfig& c, Calibration& cal) {
    SuiteResult out;
    const SolverConfig sc = solver_config(c, c.params, c.t_end);
    auto ts = evolve_logged("main", sc, initial_data(c, sc.grid, c.data.width), out.runs, cal.aborts);
    if (!ts) return out;
    out.reports.push_back(guarded("mass", c.params, [&] { return check_mass(*ts, c.tol.mass); }));
    std::vector<double> t, mass, linf;
    for (const auto& sn : ts->snapshots) {
        t.push_back(sn.t);
        mass.push_back(sn.mass);
        linf.push_back(sn.linf);
    }
    out.data["series"] = {{"t", t}, {"mass", mass}, {"linf", linf}};
    const auto& last = ts->snapshots.back();
    const auto prof = axis_profile(last.u);
    out.data["final_profile"] = {{"r", prof.r}, {"u", prof.value}};
    return out;
}

}  // namespace

Calibration calibrate(const RunConfig& c) {
    validate_regime(c);
    Calibration cal;
    if (c.suite == "gfde" || c.suite == "pme") calibrate_main_and_widths(c, cal);
    else if (c.suite == "trace") calibrate_trace(c, cal);
    return cal;
}

SuiteResult verify(const RunConfig& c, Calibration cal) {
    SuiteResult out;
    const std::string& s = c.suite;
    if (s == "operator") out = verify_operator(c);
    else if (s == "weights") out = verify_weights(c);
    else if (s == "weighted_l1") out = verify_weighted_l1(c, cal);
    else if (s == "gfde") out = verify_gfde(c, cal);
    else if (s == "vfde") out = verify_vfde(c, cal);
    else if (s == "pme") out = verify_pme(c, cal);
    else if (s == "linear") out = verify_linear(c, cal);
    else if (s == "tail") out = verify_tail(c, cal);
    else if (s == "inequalities") out = verify_inequalities(c);
    else if (s == "trace") out = verify_trace(c, cal);
    else if (s == "evolve") out = verify_evolve(c, cal);
    else throw std::invalid_argument("verify: unknown suite " + s);
    out.config = c;
    out.config_hash = run_config_hash(c);
    out.runs.insert(out.runs.begin(), cal.runs.begin(), cal.runs.end());
    out.reports.insert(out.reports.end(), cal.aborts.begin(), cal.aborts.end());
    return out;
}

SuiteResult run_suite(const RunConfig& c) { return verify(c, calibrate(c)); }

nlohmann::json to_json(const RunRecord& r) {
    nlohmann::json j = {{"label", r.label},
                        {"config_hash", hex(r.config_hash)},
                        {"status", r.status},
                        {"steps", r.steps},
                        {"rejected", r.rejected},
                        {"contamination", r.contamination},
                        {"contaminated", r.contaminated},
                        {"extinct", r.extinct},
                        {"clipped_mass", r.clipped_mass},
                        {"snapshots", r.snapshots},
                        {"diagnostic", r.diagnostic}};
    if (r.extinct) j["extinction_time"] = r.extinction_time;
    return j;
}

nlohmann::json to_json(const SuiteResult& r) {
    nlohmann::json j;
    j["suite"] = r.config.suite;
    j["name"] = r.config.name;
    j["config_hash"] = hex(r.config_hash);
    j["config"] = r.config.to_json();
    j["pass"] = r.passed();
    j["ledger"] = nlohmann::json::array();
    for (const auto& c : r.ledger) j["ledger"].push_back(to_json(c));
    j["runs"] = nlohmann::json::array();
    for (const auto& x : r.runs) j["runs"].push_back(to_json(x));
    j["reports"] = nlohmann::json::array();
    j["flagged"] = nlohmann::json::array();
    for (const auto& x : r.reports) (x.flagged ? j["flagged"] : j["reports"]).push_back(to_json(x));
    j["data"] = r.data;
    return j;
}

}  // namespace fracdiff
