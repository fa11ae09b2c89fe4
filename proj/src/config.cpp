#include "fracdiff/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>

#include "fracdiff/evolve.hpp"
#include "fracdiff/weights.hpp"

namespace fracdiff {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

bool is_bare(const std::string& k) {
    return !k.empty() && std::all_of(k.begin(), k.end(), [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; });
}

/// Drops a # comment that is not inside a string.
std::string strip_comment(const std::string& line) {
    bool in_str = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (in_str && c == '\\') { ++i; continue; }
        if (c == '"') in_str = !in_str;
        if (c == '#' && !in_str) return line.substr(0, i);
    }
    return line;
}

class ValueParser {
public:
    ValueParser(const std::string& text, const std::string& src, int line, const std::string& key)
        : s_(text), src_(src), line_(line), key_(key) {}

    ConfigValue parse() {
        ConfigValue out;
        out.line = line_;
        skip_ws();
        if (peek() == '[') {
            ++i_;
            std::vector<ConfigScalar> items;
            skip_ws();
            while (peek() != ']') {
                items.push_back(scalar());
                skip_ws();
                if (peek() == ',') { ++i_; skip_ws(); continue; }
                if (peek() != ']') fail("expected ',' or ']' in array");
            }
            ++i_;
            out.v = std::move(items);
        } else {
            std::visit([&](auto&& x) { out.v = x; }, scalar());
        }
        skip_ws();
        if (i_ != s_.size()) fail("unexpected trailing characters");
        return out;
    }

private:
    char peek() const { return i_ < s_.size() ? s_[i_] : '\0'; }
    void skip_ws() { while (i_ < s_.size() && (s_[i_] == ' ' || s_[i_] == '\t')) ++i_; }
    [[noreturn]] void fail(const std::string& why) const { throw ConfigError(src_, line_, key_, why); }

    ConfigScalar scalar() {
        const char c = peek();
        if (c == '"') return string_value();
        if (s_.compare(i_, 4, "true") == 0) { i_ += 4; return true; }
        if (s_.compare(i_, 5, "false") == 0) { i_ += 5; return false; }
        const char* b = s_.data() + i_;
        const char* e = s_.data() + s_.size();
        if (*b == '+') ++b;
        double v = 0.0;
        auto res = std::from_chars(b, e, v);
        if (res.ec != std::errc() || res.ptr == b) fail("malformed value");
        i_ = std::size_t(res.ptr - s_.data());
        if (!std::isfinite(v)) fail("non-finite number");
        return v;
    }

    std::string string_value() {
        ++i_;
        std::string out;
        while (true) {
            if (i_ >= s_.size()) fail("unterminated string");
            const char c = s_[i_++];
            if (c == '"') break;
            if (c == '\\') {
                if (i_ >= s_.size()) fail("unterminated string");
                const char e = s_[i_++];
                switch (e) {
                    case '"': out += '"'; break;
                    case '\\': out += '\\'; break;
                    case 'n': out += '\n'; break;
                    case 't': out += '\t'; break;
                    default: fail(std::string("unsupported escape \\") + e);
                }
            } else {
                out += c;
            }
        }
        return out;
    }

    const std::string& s_;
    std::string src_;
    int line_;
    std::string key_;
    std::size_t i_ = 0;
};

// ---------------------------------------------------------------------------
// Typed access
// ---------------------------------------------------------------------------

struct Reader {
    const RawConfig& raw;

    [[noreturn]] void fail(const std::string& key, const std::string& why) const {
        auto it = raw.entries.find(key);
        throw ConfigError(raw.source, it == raw.entries.end() ? 0 : it->second.line, key, why);
    }
    double number(const std::string& key) const {
        const auto& v = raw.entries.at(key).v;
        if (const auto* d = std::get_if<double>(&v)) return *d;
        fail(key, "expected a number");
    }
    int integer(const std::string& key) const {
        const double d = number(key);
        if (d != std::floor(d) || std::abs(d) > 2e9) fail(key, "expected an integer");
        return int(d);
    }
    std::uint64_t unsigned_integer(const std::string& key) const {
        const double d = number(key);
        if (d != std::floor(d) || d < 0.0 || d > 9e15) fail(key, "expected a nonnegative integer");
        return std::uint64_t(d);
    }
    std::string string(const std::string& key) const {
        const auto& v = raw.entries.at(key).v;
        if (const auto* s = std::get_if<std::string>(&v)) return *s;
        fail(key, "expected a string");
    }
    std::vector<double> numbers(const std::string& key) const {
        const auto& v = raw.entries.at(key).v;
        const auto* a = std::get_if<std::vector<ConfigScalar>>(&v);
        if (!a) fail(key, "expected an array of numbers");
        std::vector<double> out;
        for (const auto& x : *a) {
            const auto* d = std::get_if<double>(&x);
            if (!d) fail(key, "expected an array of numbers");
            out.push_back(*d);
        }
        return out;
    }
    std::vector<std::string> strings(const std::string& key) const {
        const auto& v = raw.entries.at(key).v;
        const auto* a = std::get_if<std::vector<ConfigScalar>>(&v);
        if (!a) fail(key, "expected an array of strings");
        std::vector<std::string> out;
        for (const auto& x : *a) {
            const auto* s = std::get_if<std::string>(&x);
            if (!s) fail(key, "expected an array of strings");
            out.push_back(*s);
        }
        return out;
    }
};

using Setter = std::function<void(RunConfig&, const Reader&, const std::string&)>;

const std::map<std::string, Setter>& schema() {
    static const std::map<std::string, Setter> s = [] {
        std::map<std::string, Setter> m;
        auto num = [&](const std::string& k, double RunConfig::*f) {
            m[k] = [f](RunConfig& c, const Reader& r, const std::string& key) { c.*f = r.number(key); };
        };
        auto tol = [&](const std::string& k, double Tolerances::*f) {
            m[k] = [f](RunConfig& c, const Reader& r, const std::string& key) { c.tol.*f = r.number(key); };
        };
        auto arr = [&](const std::string& k, std::vector<double> RunConfig::*f) {
            m[k] = [f](RunConfig& c, const Reader& r, const std::string& key) { c.*f = r.numbers(key); };
        };
        m["run.suite"] = [](RunConfig& c, const Reader& r, const std::string& k) { c.suite = r.string(k); };
        m["run.name"] = [](RunConfig& c, const Reader& r, const std::string& k) { c.name = r.string(k); };
        m["run.seed"] = [](RunConfig& c, const Reader& r, const std::string& k) { c.seed = r.unsigned_integer(k); };
        m["run.output"] = [](RunConfig& c, const Reader& r, const std::string& k) { c.output = r.string(k); };
        m["params.m"] = [](RunConfig& c, const Reader& r, const std::string& k) { c.params.m = r.number(k); };
        m["params.s"] = [](RunConfig& c, const Reader& r, const std::string& k) { c.params.s = r.number(k); };
        m["params.d"] = [](RunConfig& c, const Reader& r, const std::string& k) { c.params.d = r.integer(k); };
        arr("params.m_values", &RunConfig::m_values);
        arr("params.s_values", &RunConfig::s_values);
        m["grid.n"] = [](RunConfig& c, const Reader& r, const std::string& k) { c.n = r.integer(k); };
        num("grid.L", &RunConfig::L);
        m["solver.integrator"] = [](RunConfig& c, const Reader& r, const std::string& k) { c.integrator = r.string(k); };
        m["solver.exterior"] = [](RunConfig& c, const Reader& r, const std::string& k) { c.exterior = r.string(k); };
        num("solver.eps_t", &RunConfig::eps_t);
        num("solver.t_end", &RunConfig::t_end);
        num("solver.contamination_threshold", &RunConfig::contamination_threshold);
        m["snapshots.spacing"] = [](RunConfig& c, const Reader& r, const std::string& k) { c.snapshots.spacing = r.string(k); };
        m["snapshots.t_first"] = [](RunConfig& c, const Reader& r, const std::string& k) { c.snapshots.t_first = r.number(k); };
        m["snapshots.ratio"] = [](RunConfig& c, const Reader& r, const std::string& k) { c.snapshots.ratio = r.number(k); };
        m["snapshots.count"] = [](RunConfig& c, const Reader& r, const std::string& k) { c.snapshots.count = r.integer(k); };
        m["data.kind"] = [](RunConfig& c, const Reader& r, const std::string& k) { c.data.kind = r.string(k); };
        m["data.width"] = [](RunConfig& c, const Reader& r, const std::string& k) { c.data.width = r.number(k); };
        m["data.mass"] = [](RunConfig& c, const Reader& r, const std::string& k) { c.data.mass = r.number(k); };
        m["data.path"] = [](RunConfig& c, const Reader& r, const std::string& k) { c.data.path = r.string(k); };
        m["data.t0"] = [](RunConfig& c, const Reader& r, const std::string& k) { c.data.t0 = r.number(k); };
        num("check.ball_radius", &RunConfig::ball_radius);
        num("check.late_fit_from", &RunConfig::late_fit_from);
        num("check.fit_lo", &RunConfig::fit_lo);
        num("check.fit_hi", &RunConfig::fit_hi);
        num("check.alpha", &RunConfig::alpha);
        arr("check.weight_radii", &RunConfig::weight_radii);
        arr("check.radii", &RunConfig::radii);
        m["check.samples"] = [](RunConfig& c, const Reader& r, const std::string& k) { c.samples = r.integer(k); };
        arr("check.calibration_widths", &RunConfig::calibration_widths);
        arr("check.t_end_values", &RunConfig::t_end_values);
        arr("check.shell_min_values", &RunConfig::shell_min_values);
        arr("check.shell_max_values", &RunConfig::shell_max_values);
        arr("check.map_m_values", &RunConfig::map_m_values);
        m["check.extremal_n"] = [](RunConfig& c, const Reader& r, const std::string& k) { c.extremal_n = r.integer(k); };
        num("check.extremal_L", &RunConfig::extremal_L);
        num("check.extremal_b", &RunConfig::extremal_b);
        tol("tolerances.exponent", &Tolerances::exponent);
        tol("tolerances.linear_exponent", &Tolerances::linear_exponent);
        tol("tolerances.linear_gap", &Tolerances::linear_gap);
        tol("tolerances.tail", &Tolerances::tail);
        tol("tolerances.trace", &Tolerances::trace);
        tol("tolerances.mass", &Tolerances::mass);
        tol("tolerances.ordering", &Tolerances::ordering);
        num("tolerances.sv_equality", &RunConfig::sv_equality);
        num("tolerances.sobolev_extremal_min", &RunConfig::sobolev_extremal_min);
        num("tolerances.optimize_rel", &RunConfig::optimize_rel);
        num("tolerances.optimize_zero", &RunConfig::optimize_zero);
        num("tolerances.operator_rel", &RunConfig::operator_rel);
        num("tolerances.constant_rel", &RunConfig::constant_rel);
        num("tolerances.decay", &RunConfig::decay_tol);
        return m;
    }();
    return s;
}

/// Desk-scale defaults of each suite.
void apply_preset(RunConfig& c) {
    const std::string& s = c.suite;
    auto geometric = [&](double t_first, double ratio) {
        c.snapshots.spacing = "geometric";
        c.snapshots.t_first = t_first;
        c.snapshots.ratio = ratio;
    };
    if (s == "operator") {
        c.params = Params(1.0, 0.5, 1);
        c.s_values = {0.25, 0.5, 0.75};
        c.n = 1024;
        c.L = 8.0;
    } else if (s == "weights") {
        c.params = Params(1.0, 0.5, 1);
        c.s_values = {0.25, 0.5, 0.75};
        c.n = 4096;
        c.L = 64.0;
    } else if (s == "weighted_l1") {
        c.params = Params(0.5, 0.5, 1);
        c.m_values = {0.3, 0.5, 0.8};
        c.n = 1024;
        c.L = 32.0;
        c.integrator = "implicit_euler";
        c.eps_t = 1e-4;
        c.t_end = 2.0;
        c.snapshots.spacing = "linear";
        c.snapshots.count = 16;
        c.alpha = 2.0;
        c.weight_radii = {1.0, 4.0};
        c.samples = 20;
        c.contamination_threshold = 1.0;
    } else if (s == "gfde") {
        c.params = Params(0.5, 0.75, 1);
        c.n = 4096;
        c.L = 400.0;
        c.integrator = "implicit_euler";
        c.eps_t = 1e-4;
        c.t_end = 40.0;
        geometric(1e-3, 1.189207115002721);
        c.calibration_widths = {2.0};
        c.contamination_threshold = 0.05;
    } else if (s == "vfde") {
        c.params = Params(0.3, 0.5, 2);
        c.n = 64;
        c.L = 4.0;
        c.integrator = "implicit_euler";
        c.exterior = "absorbing";
        c.eps_t = 1e-3;
        c.t_end = 2.0;
        geometric(1e-4, 1.5);
        c.data.width = 1.5;
        c.alpha = 3.0;
        c.radii = {0.25, 0.5, 1.0, 2.0, 4.0, 8.0};
        c.contamination_threshold = 1.0;
    } else if (s == "pme") {
        c.params = Params(2.0, 0.5, 1);
        c.n = 2048;
        c.L = 100.0;
        c.integrator = "explicit_rk";
        c.eps_t = 1e-5;
        c.t_end = 100.0;
        geometric(1e-3, 1.189207115002721);
        c.calibration_widths = {2.0};
        c.contamination_threshold = 0.1;
    } else if (s == "linear") {
        c.params = Params(1.0, 0.5, 1);
        c.n = 4096;
        c.L = 1000.0;
        c.integrator = "explicit_rk";
        c.eps_t = 1e-6;
        c.t_end = 40.0;
        geometric(1e-3, 1.189207115002721);
        c.data.width = 2.0;
        c.late_fit_from = 10.0;
        c.contamination_threshold = 0.05;
    } else if (s == "tail") {
        c.params = Params(0.55, 0.25, 1);
        c.m_values = {0.55, 0.8};
        c.t_end_values = {1.0, 0.5};
        c.shell_min_values = {8.0, 16.0};
        c.shell_max_values = {64.0, 128.0};
        c.map_m_values = {0.55, 0.6, 0.65, 0.7, 0.75, 0.8, 0.85, 0.9};
        c.n = 4096;
        c.L = 1600.0;
        c.integrator = "explicit_rk";
        c.eps_t = 1e-5;
        c.data.width = 4.0;
        c.contamination_threshold = 0.1;
    } else if (s == "inequalities") {
        c.params = Params(1.0, 0.5, 1);
        c.s_values = {0.25, 0.5, 0.75};
        c.n = 1024;
        c.L = 10.0;
        c.samples = 100;
    } else if (s == "trace") {
        c.params = Params(0.5, 0.75, 1);
        c.m_values = {0.5, 1.0, 2.0};
        c.s_values = {0.75, 0.5, 0.5};
        c.n = 4096;
        c.L = 32.0;
        c.t_end = 1.0;
        geometric(1e-6, 2.0);
        c.data.width = 0.0625;
        c.fit_lo = 1e-2;
        c.fit_hi = 1.0;
        c.contamination_threshold = 1.0;
    }
}

bool in_open(double x, double lo, double hi) { return x > lo && x < hi; }

}  // namespace

RawConfig parse_toml_subset(const std::string& text, const std::string& source) {
    RawConfig raw;
    raw.source = source;
    std::istringstream in(text);
    std::string line, section;
    int ln = 0;
    while (std::getline(in, line)) {
        ++ln;
        const std::string t = trim(strip_comment(line));
        if (t.empty()) continue;
        if (t.front() == '[') {
            if (t.back() != ']') throw ConfigError(source, ln, t, "malformed section header");
            section = trim(t.substr(1, t.size() - 2));
            if (!is_bare(section)) throw ConfigError(source, ln, section, "malformed section name");
            continue;
        }
        const auto eq = t.find('=');
        if (eq == std::string::npos) throw ConfigError(source, ln, t, "expected key = value");
        const std::string key = trim(t.substr(0, eq));
        if (!is_bare(key)) throw ConfigError(source, ln, key, "malformed key");
        if (section.empty()) throw ConfigError(source, ln, key, "key outside a section");
        const std::string full = section + "." + key;
        const std::string value = trim(t.substr(eq + 1));
        if (value.empty()) throw ConfigError(source, ln, full, "missing value");
        if (raw.entries.count(full)) throw ConfigError(source, ln, full, "duplicate key");
        raw.entries[full] = ValueParser(value, source, ln, full).parse();
    }
    return raw;
}

const std::vector<std::string>& suite_names() {
    static const std::vector<std::string> names{"operator", "weights", "weighted_l1", "gfde", "vfde", "pme",
                                                "linear", "tail", "inequalities", "trace", "evolve"};
    return names;
}

void validate_regime(const RunConfig& c) {
    const std::string& src = c.source;
    auto fail = [&](const std::string& key, const std::string& why) { throw ConfigError(src, 0, key, why); };
    try {
        c.params.validate();
    } catch (const std::exception& e) {
        fail("params", e.what());
    }
    const Params& p = c.params;
    const std::string mc = "m_c = " + fmt(p.m_c());
    if (c.suite == "gfde" && !in_open(p.m, p.m_c(), 1.0))
        fail("params.m", "m outside (m_c, 1) for gfde suite (" + mc + ")");
    if (c.suite == "vfde") {
        if (!(p.m_c() > 0.0)) fail("params.m", "no very-fast-diffusion regime when 2s >= d (" + mc + ")");
        if (!(p.m < p.m_c())) fail("params.m", "m not below m_c for vfde suite (" + mc + ")");
        if (!(p.p_c() > 1.0)) fail("params.m", "p_c = " + fmt(p.p_c()) + " <= 1 for vfde suite");
    }
    if (c.suite == "pme" && !(p.m > 1.0)) fail("params.m", "m must exceed 1 for pme suite");
    if (c.suite == "linear" && p.m != 1.0) fail("params.m", "m must equal 1 for linear suite");
    if (c.suite == "tail") {
        auto check = [&](const std::vector<double>& ms, const std::string& key) {
            for (double m : ms)
                if (!in_open(m, p.m_c(), 1.0)) fail(key, "m = " + fmt(m) + " outside (m_c, 1) for tail suite (" + mc + ")");
        };
        check(c.m_values, "params.m_values");
        check(c.map_m_values, "check.map_m_values");
        if (c.t_end_values.size() != c.m_values.size() || c.shell_min_values.size() != c.m_values.size() ||
            c.shell_max_values.size() != c.m_values.size())
            fail("check.t_end_values", "t_end_values, shell_min_values and shell_max_values must match m_values");
        for (std::size_t i = 0; i < c.m_values.size(); ++i)
            if (!(c.shell_max_values[i] <= 0.8 * c.L && c.shell_min_values[i] > 0.0 && c.shell_min_values[i] < c.shell_max_values[i]))
                fail("check.shell_max_values", "shell must satisfy 0 < r_min < r_max <= 0.8 L");
    }
    if (c.suite == "weighted_l1") {
        for (double m : c.m_values) {
            if (!in_open(m, 0.0, 1.0)) fail("params.m_values", "m = " + fmt(m) + " outside (0, 1) for weighted_l1 suite");
            if (!alpha_window(p.d, p.s, m).contains(c.alpha))
                fail("check.alpha", "alpha = " + fmt(c.alpha) + " outside the admissible window for m = " + fmt(m));
        }
    }
    if (c.suite == "trace") {
        if (c.m_values.size() != c.s_values.size()) fail("params.s_values", "m_values and s_values must have equal length");
        for (std::size_t i = 0; i < c.m_values.size(); ++i) {
            const Params q(c.m_values[i], c.s_values[i], p.d);
            if (q.m < 1.0 && !(q.m > q.m_c())) fail("params.m_values", "trace suite needs m > m_c for m < 1");
        }
    }
    for (double s : c.s_values)
        if (!in_open(s, 0.0, 1.0)) fail("params.s_values", "s = " + fmt(s) + " outside (0, 1)");
    if (c.integrator != "auto" && c.integrator != "explicit_rk" && c.integrator != "implicit_euler")
        fail("solver.integrator", "expected auto, explicit_rk or implicit_euler");
    if (c.integrator == "implicit_euler" && (c.suite == "pme" || c.suite == "linear"))
        fail("solver.integrator", "the implicit integrator requires m < 1");
    if (c.exterior != "periodic" && c.exterior != "absorbing") fail("solver.exterior", "expected periodic or absorbing");
    if (!is_power_of_two(c.n) || c.n < 64) fail("grid.n", "n must be a power of two >= 64");
    if (!(c.L > 0.0)) fail("grid.L", "L must be positive");
    if (!(c.eps_t > 1e-8 && c.eps_t < 1e-2)) fail("solver.eps_t", "eps_t must lie in (1e-8, 1e-2)");
    if (!(c.t_end > 0.0)) fail("solver.t_end", "t_end must be positive");
    if (c.snapshots.spacing != "geometric" && c.snapshots.spacing != "linear")
        fail("snapshots.spacing", "expected geometric or linear");
    if (!(c.snapshots.t_first > 0.0)) fail("snapshots.t_first", "t_first must be positive");
    if (!(c.snapshots.ratio > 1.0)) fail("snapshots.ratio", "ratio must exceed 1");
    if (c.snapshots.count < 1) fail("snapshots.count", "count must be positive");
    if (c.data.kind != "bump" && c.data.kind != "gaussian" && c.data.kind != "file" && c.data.kind != "barenblatt")
        fail("data.kind", "expected bump, gaussian, file or barenblatt");
    if (c.data.kind != "bump" && c.suite != "evolve") fail("data.kind", "the " + c.suite + " suite needs bump data");
    if (c.data.kind == "file" && c.data.path.empty()) fail("data.path", "file data need a path");
    if (c.data.kind == "barenblatt") {
        if (!(p.m > p.m_c())) fail("data.kind", "barenblatt data need m > m_c (" + mc + ")");
        if (!(c.data.t0 > 0.0)) fail("data.t0", "t0 must be positive");
    }
    if (!(c.data.width > 0.0 && c.data.mass > 0.0)) fail("data.width", "width and mass must be positive");
    if (c.samples < 1) fail("check.samples", "samples must be positive");
}

RunConfig build_config(const RawConfig& raw) {
    const Reader r{raw};
    const auto& sch = schema();
    for (const auto& [k, v] : raw.entries)
        if (!sch.count(k)) throw ConfigError(raw.source, v.line, k, "unknown key");
    if (!raw.entries.count("run.suite")) throw ConfigError(raw.source, 0, "run.suite", "missing required key");
    RunConfig c;
    c.source = raw.source;
    c.suite = r.string("run.suite");
    const auto& names = suite_names();
    if (std::find(names.begin(), names.end(), c.suite) == names.end())
        r.fail("run.suite", "unknown suite '" + c.suite + "'");
    if (c.suite == "evolve")
        for (const char* k : {"params.m", "params.s", "params.d"})
            if (!raw.entries.count(k)) throw ConfigError(raw.source, 0, k, "missing required key");
    apply_preset(c);
    for (const auto& [k, v] : raw.entries) sch.at(k)(c, r, k);
    if (c.name.empty()) c.name = c.suite;
    validate_regime(c);
    return c;
}

RunConfig parse_config_text(const std::string& text, const std::string& source) {
    return build_config(parse_toml_subset(text, source));
}

RunConfig parse_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path, 0, "", "cannot open file");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str(), path);
}

nlohmann::json RunConfig::to_json() const {
    using nlohmann::json;
    json j;
    j["run"] = {{"suite", suite}, {"name", name}, {"seed", seed}, {"output", output}};
    j["params"] = {{"m", params.m}, {"s", params.s}, {"d", params.d}, {"m_values", m_values}, {"s_values", s_values}};
    j["grid"] = {{"n", n}, {"L", L}};
    j["solver"] = {{"integrator", integrator}, {"exterior", exterior}, {"eps_t", eps_t}, {"t_end", t_end},
                   {"contamination_threshold", contamination_threshold}};
    j["snapshots"] = {{"spacing", snapshots.spacing}, {"t_first", snapshots.t_first}, {"ratio", snapshots.ratio},
                      {"count", snapshots.count}};
    j["data"] = {{"kind", data.kind}, {"width", data.width}, {"mass", data.mass}, {"path", data.path}, {"t0", data.t0}};
    j["check"] = {{"ball_radius", ball_radius}, {"late_fit_from", late_fit_from}, {"fit_lo", fit_lo}, {"fit_hi", fit_hi},
                  {"alpha", alpha}, {"weight_radii", weight_radii}, {"radii", radii}, {"samples", samples},
                  {"calibration_widths", calibration_widths}, {"t_end_values", t_end_values},
                  {"shell_min_values", shell_min_values}, {"shell_max_values", shell_max_values},
                  {"map_m_values", map_m_values}, {"extremal_n", extremal_n}, {"extremal_L", extremal_L},
                  {"extremal_b", extremal_b}};
    j["tolerances"] = {{"exponent", tol.exponent}, {"linear_exponent", tol.linear_exponent}, {"linear_gap", tol.linear_gap},
                       {"tail", tol.tail}, {"trace", tol.trace}, {"mass", tol.mass}, {"ordering", tol.ordering},
                       {"sv_equality", sv_equality}, {"sobolev_extremal_min", sobolev_extremal_min},
                       {"optimize_rel", optimize_rel}, {"optimize_zero", optimize_zero}, {"operator_rel", operator_rel},
                       {"constant_rel", constant_rel}, {"decay", decay_tol}};
    return j;
}

std::uint64_t run_config_hash(const RunConfig& c) {
    const std::string s = c.to_json().dump();
    return fnv1a(s.data(), s.size());
}

CampaignManifest parse_manifest_text(const std::string& text, const std::string& base_dir, const std::string& source) {
    const RawConfig raw = parse_toml_subset(text, source);
    const Reader r{raw};
    CampaignManifest m;
    m.source = source;
    for (const auto& [k, v] : raw.entries)
        if (k != "campaign.name" && k != "campaign.output" && k != "campaign.seed" && k != "campaign.configs")
            throw ConfigError(source, v.line, k, "unknown key");
    if (raw.entries.count("campaign.name")) m.name = r.string("campaign.name");
    if (raw.entries.count("campaign.output")) m.output = r.string("campaign.output");
    if (raw.entries.count("campaign.seed")) {
        m.seed_override = true;
        m.seed = r.unsigned_integer("campaign.seed");
    }
    std::vector<std::string> files;
    if (raw.entries.count("campaign.configs")) {
        // an empty array parses as a list of no scalars; strings() rejects non-strings
        files = r.strings("campaign.configs");
    }
    std::vector<std::uint64_t> hashes;
    for (const auto& f : files) {
        const std::filesystem::path p = std::filesystem::path(f).is_absolute() ? std::filesystem::path(f)
                                                                               : std::filesystem::path(base_dir) / f;
        RunConfig c = parse_config(p.string());
        if (m.seed_override) c.seed = m.seed;
        const auto h = run_config_hash(c);
        if (std::find(hashes.begin(), hashes.end(), h) != hashes.end())
            r.fail("campaign.configs", "duplicate run configuration " + f);
        hashes.push_back(h);
        m.runs.push_back(std::move(c));
    }
    return m;
}

CampaignManifest parse_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path, 0, "", "cannot open file");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_manifest_text(ss.str(), std::filesystem::path(path).parent_path().string(), path);
}

}  // namespace fracdiff
