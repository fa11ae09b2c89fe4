#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace fracdiff {

/// Diffusion regime selected by m relative to m_c and 1.
enum class Regime { very_fast, good_fast, heat, porous_medium };

inline const char* regime_name(Regime r) {
    switch (r) {
        case Regime::very_fast: return "vfde";
        case Regime::good_fast: return "gfde";
        case Regime::heat: return "linear";
        case Regime::porous_medium: return "pme";
    }
    return "?";
}

/// Nonlinearity exponent m, fractional order s and dimension d, plus the derived exponents.
struct Params {
    double m = 1.0;
    double s = 0.5;
    int d = 1;

    Params() = default;
    Params(double m_, double s_, int d_) : m(m_), s(s_), d(d_) { validate(); }

    void validate() const {
        if (!(m > 0.0)) throw std::invalid_argument("Params: m must be positive");
        if (!(s > 0.0 && s <= 1.0)) throw std::invalid_argument("Params: s must lie in (0,1]");
        if (d != 1 && d != 2) throw std::invalid_argument("Params: d must be 1 or 2");
    }

    double m_c() const { return (d - 2.0 * s) / d; }
    double m_1() const { return d / (d + 2.0 * s); }
    double p_c() const { return d * (1.0 - m) / (2.0 * s); }

    /// Smoothing exponent: 1/(2s - d(1-m)) below 1, 1/(2s + d(m-1)) above 1.
    /// Both are the same expression; it is positive iff m > m_c.
    double theta() const {
        const double den = 2.0 * s - d * (1.0 - m);
        if (den == 0.0) throw std::domain_error("Params::theta: critical exponent m = m_c");
        return 1.0 / den;
    }

    Regime regime() const {
        if (m == 1.0) return Regime::heat;
        if (m > 1.0) return Regime::porous_medium;
        if (m > m_c()) return Regime::good_fast;
        return Regime::very_fast;
    }
};

}  // namespace fracdiff
