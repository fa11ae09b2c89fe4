#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace fracdiff {

using Point = std::array<double, 2>;

/// Uniform periodic grid on [-L, L)^d with n points per axis.
struct Grid {
    int d = 1;
    double L = 1.0;
    int n = 64;
    double h = 2.0 / 64;

    std::size_t size() const { return d == 1 ? std::size_t(n) : std::size_t(n) * std::size_t(n); }
    double coord(int i) const { return -L + i * h; }
    double cell_volume() const { return d == 1 ? h : h * h; }
    double box_volume() const { return std::pow(2.0 * L, d); }

    Point point(std::size_t idx) const {
        if (d == 1) return {coord(int(idx)), 0.0};
        return {coord(int(idx / std::size_t(n))), coord(int(idx % std::size_t(n)))};
    }

    bool operator==(const Grid& o) const { return d == o.d && n == o.n && L == o.L; }
};

inline bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

inline Grid make_grid(int d, double L, int n) {
    if (d != 1 && d != 2) throw std::invalid_argument("make_grid: dimension must be 1 or 2");
    if (!is_power_of_two(n)) throw std::invalid_argument("make_grid: n must be a power of two");
    if (n < 64) throw std::invalid_argument("make_grid: n must be at least 64");
    if (!(L > 0.0)) throw std::invalid_argument("make_grid: L must be positive");
    return Grid{d, L, n, 2.0 * L / n};
}

inline double norm(const Point& p, int d) {
    return d == 1 ? std::abs(p[0]) : std::hypot(p[0], p[1]);
}

inline double distance(const Point& a, const Point& b, int d) {
    return d == 1 ? std::abs(a[0] - b[0]) : std::hypot(a[0] - b[0], a[1] - b[1]);
}

/// Samples of a real function on a grid, row-major (axis 0 slowest).
struct Field {
    Grid grid;
    std::vector<double> values;

    Field() = default;
    explicit Field(const Grid& g) : grid(g), values(g.size(), 0.0) {}
    Field(const Grid& g, std::vector<double> v) : grid(g), values(std::move(v)) {
        if (values.size() != g.size()) throw std::invalid_argument("Field: value count does not match grid");
    }

    std::size_t size() const { return values.size(); }
    double& operator[](std::size_t i) { return values[i]; }
    double operator[](std::size_t i) const { return values[i]; }
    std::span<const double> span() const { return values; }
};

inline Field sample(const Grid& g, const std::function<double(const Point&)>& fn) {
    Field f(g);
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = fn(g.point(i));
    return f;
}

inline void require_same_grid(const Field& a, const Field& b, const char* who) {
    if (!(a.grid == b.grid)) throw std::invalid_argument(std::string(who) + ": grid mismatch");
}

inline bool all_finite(const Field& f) {
    return std::all_of(f.values.begin(), f.values.end(), [](double v) { return std::isfinite(v); });
}

/// Neumaier-compensated sum in index order; deterministic.
class CompensatedSum {
public:
    void add(double x) {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x)) c_ += (sum_ - t) + x;
        else c_ += (x - t) + sum_;
        sum_ = t;
    }
    double value() const { return sum_ + c_; }

private:
    double sum_ = 0.0;
    double c_ = 0.0;
};

/// Rectangle rule h^d Σ f.
inline double integrate(const Field& f) {
    CompensatedSum acc;
    for (double v : f.values) acc.add(v);
    return acc.value() * f.grid.cell_volume();
}

inline double weighted_integral(const Field& f, const Field& w) {
    require_same_grid(f, w, "weighted_integral");
    CompensatedSum acc;
    for (std::size_t i = 0; i < f.size(); ++i) acc.add(f[i] * w[i]);
    return acc.value() * f.grid.cell_volume();
}

/// (h^d Σ|f|^p)^{1/p}, or max|f| for p = +inf. Only p >= 1 is accepted.
inline double lp_norm(const Field& f, double p) {
    if (std::isinf(p)) {
        double m = 0.0;
        for (double v : f.values) m = std::max(m, std::abs(v));
        return m;
    }
    if (!(p >= 1.0)) throw std::invalid_argument("lp_norm: p must be >= 1");
    CompensatedSum acc;
    for (double v : f.values) acc.add(std::pow(std::abs(v), p));
    return std::pow(acc.value() * f.grid.cell_volume(), 1.0 / p);
}

/// ∫|f|^p without the 1/p root.
inline double lp_integral(const Field& f, double p) {
    CompensatedSum acc;
    for (double v : f.values) acc.add(std::pow(std::abs(v), p));
    return acc.value() * f.grid.cell_volume();
}

struct BallSpec {
    Point center{0.0, 0.0};
    double radius = 1.0;
};

/// The ball must sit inside the box with a margin of one radius.
inline void validate_ball(const BallSpec& b, const Grid& g) {
    if (!(b.radius > 0.0)) throw std::invalid_argument("BallSpec: radius must be positive");
    if (b.radius > 0.5 * g.L) throw std::invalid_argument("BallSpec: radius exceeds L/2");
    for (int k = 0; k < g.d; ++k)
        if (std::abs(b.center[k]) + 2.0 * b.radius > g.L)
            throw std::invalid_argument("BallSpec: ball does not fit in the box with margin");
}

inline bool in_ball(const Point& p, const BallSpec& b, int d) {
    return distance(p, b.center, d) <= b.radius;
}

inline double inf_over_ball(const Field& f, const BallSpec& b) {
    validate_ball(b, f.grid);
    double m = std::numeric_limits<double>::infinity();
    bool any = false;
    for (std::size_t i = 0; i < f.size(); ++i)
        if (in_ball(f.grid.point(i), b, f.grid.d)) { m = std::min(m, f[i]); any = true; }
    if (!any) throw std::invalid_argument("inf_over_ball: no nodes in ball");
    return m;
}

inline double sup_outside_ball(const Field& f, const BallSpec& b) {
    double m = -std::numeric_limits<double>::infinity();
    bool any = false;
    for (std::size_t i = 0; i < f.size(); ++i)
        if (!in_ball(f.grid.point(i), b, f.grid.d)) { m = std::max(m, f[i]); any = true; }
    if (!any) throw std::invalid_argument("sup_outside_ball: no nodes outside ball");
    return m;
}

/// Fraction of |f| mass at |x| > radius. Used as the domain-contamination metric.
inline double mass_fraction_outside(const Field& f, double radius) {
    CompensatedSum out, all;
    for (std::size_t i = 0; i < f.size(); ++i) {
        const double v = std::abs(f[i]);
        all.add(v);
        if (norm(f.grid.point(i), f.grid.d) > radius) out.add(v);
    }
    return all.value() > 0.0 ? out.value() / all.value() : 0.0;
}

struct TailFit {
    double slope = 0.0;
    double intercept = 0.0;
    double rms_residual = 0.0;
    int nodes = 0;
    bool degenerate = false;   ///< no decay detected (slope >= 0)
};

namespace detail {

inline std::vector<std::size_t> shell_nodes(const Field& f, double r_min, double r_max) {
    if (!(r_min < r_max)) throw std::invalid_argument("tail_slope: r_min must be below r_max");
    if (r_max > 0.8 * f.grid.L + 1e-12) throw std::invalid_argument("tail_slope: r_max exceeds 0.8 L");
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < f.size(); ++i) {
        const double r = norm(f.grid.point(i), f.grid.d);
        if (r >= r_min && r <= r_max) {
            if (!(f[i] > 0.0)) throw std::domain_error("tail_slope: nonpositive value in shell");
            idx.push_back(i);
        }
    }
    if (idx.size() < 8) throw std::invalid_argument("tail_slope: fewer than 8 nodes in shell");
    return idx;
}

struct LineFit { double slope, intercept, rms; };

inline LineFit fit_line(std::span<const double> x, std::span<const double> y) {
    const std::size_t n = x.size();
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < n; ++i) { mx += x[i]; my += y[i]; }
    mx /= n; my /= n;
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) { sxx += (x[i] - mx) * (x[i] - mx); sxy += (x[i] - mx) * (y[i] - my); }
    const double slope = sxx > 0 ? sxy / sxx : 0.0;
    const double icpt = my - slope * mx;
    double res = 0;
    for (std::size_t i = 0; i < n; ++i) { const double e = y[i] - icpt - slope * x[i]; res += e * e; }
    return {slope, icpt, std::sqrt(res / n)};
}

}  // namespace detail

/// Least-squares slope of log f against log|x| over the shell r_min <= |x| <= r_max.
inline TailFit tail_slope(const Field& f, double r_min, double r_max) {
    const auto idx = detail::shell_nodes(f, r_min, r_max);
    std::vector<double> lx, ly;
    for (auto i : idx) {
        lx.push_back(std::log(norm(f.grid.point(i), f.grid.d)));
        ly.push_back(std::log(f[i]));
    }
    const auto lf = detail::fit_line(lx, ly);
    TailFit t{lf.slope, lf.intercept, lf.rms, int(idx.size()), false};
    t.degenerate = !(t.slope < -1e-8);
    return t;
}

/// Σ over the nearest periodic images (|k|_∞ <= 1) of |x + 2Lk|^{-β}.
inline double nearest_image_power_sum(const Point& p, const Grid& g, double beta) {
    double sum = 0.0;
    if (g.d == 1) {
        for (int k = -1; k <= 1; ++k) sum += std::pow(std::abs(p[0] + 2.0 * g.L * k), -beta);
        return sum;
    }
    for (int a = -1; a <= 1; ++a)
        for (int b = -1; b <= 1; ++b)
            sum += std::pow(std::hypot(p[0] + 2.0 * g.L * a, p[1] + 2.0 * g.L * b), -beta);
    return sum;
}

/// Tail exponent fit that accounts for the nearest periodic images of the box:
/// f ≈ A Σ_k |x + 2Lk|^{-β}, β found by golden-section search on the log residual.
inline TailFit tail_slope_periodized(const Field& f, double r_min, double r_max) {
    const auto idx = detail::shell_nodes(f, r_min, r_max);
    std::vector<double> ly;
    for (auto i : idx) ly.push_back(std::log(f[i]));
    auto residual = [&](double beta, double* icpt) {
        // best log A is the mean misfit; residual is its spread
        std::vector<double> e(idx.size());
        double mean = 0.0;
        for (std::size_t k = 0; k < idx.size(); ++k) {
            e[k] = ly[k] - std::log(nearest_image_power_sum(f.grid.point(idx[k]), f.grid, beta));
            mean += e[k];
        }
        mean /= idx.size();
        double r = 0.0;
        for (double v : e) r += (v - mean) * (v - mean);
        if (icpt) *icpt = mean;
        return std::sqrt(r / idx.size());
    };
    double a = 0.01, b = 8.0;
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = b - gr * (b - a), dd = a + gr * (b - a);
    double fc = residual(c, nullptr), fd = residual(dd, nullptr);
    for (int it = 0; it < 80; ++it) {
        if (fc < fd) { b = dd; dd = c; fd = fc; c = b - gr * (b - a); fc = residual(c, nullptr); }
        else { a = c; c = dd; fc = fd; dd = a + gr * (b - a); fd = residual(dd, nullptr); }
    }
    const double beta = 0.5 * (a + b);
    double icpt = 0.0;
    const double rms = residual(beta, &icpt);
    TailFit t{-beta, icpt, rms, int(idx.size()), false};
    t.degenerate = beta < 0.02;
    return t;
}

/// Values along the positive x-axis through the origin (d=1: x >= 0; d=2: y = 0 row).
struct RadialProfile {
    std::vector<double> r;
    std::vector<double> value;
};

inline RadialProfile axis_profile(const Field& f) {
    RadialProfile p;
    const Grid& g = f.grid;
    const int i0 = g.n / 2;   // node at x = 0
    for (int i = i0; i < g.n; ++i) {
        p.r.push_back(g.coord(i));
        p.value.push_back(g.d == 1 ? f[std::size_t(i)] : f[std::size_t(i) * g.n + i0]);
    }
    return p;
}

/// Linear interpolation in r; beyond the last sample, power-law extrapolation with exponent `tail`.
inline double interpolate_profile(const RadialProfile& p, double r, double tail) {
    if (r <= p.r.front()) return p.value.front();
    if (r >= p.r.back()) return p.value.back() * std::pow(r / p.r.back(), tail);
    const auto it = std::upper_bound(p.r.begin(), p.r.end(), r);
    const std::size_t k = std::size_t(it - p.r.begin());
    const double w = (r - p.r[k - 1]) / (p.r[k] - p.r[k - 1]);
    return (1.0 - w) * p.value[k - 1] + w * p.value[k];
}

}  // namespace fracdiff
