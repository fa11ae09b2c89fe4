#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "estimates.hpp"
#include "params.hpp"

namespace fracdiff {

/// Parse or validation failure pinned to a key and, when known, a line (0 when not tied to one line).
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string source, int line, std::string key, std::string reason)
        : std::runtime_error(compose(source, line, key, reason)),
          source_(std::move(source)), line_(line), key_(std::move(key)), reason_(std::move(reason)) {}

    const std::string& source() const { return source_; }
    int line() const { return line_; }
    const std::string& key() const { return key_; }
    const std::string& reason() const { return reason_; }

private:
    static std::string compose(const std::string& src, int line, const std::string& key, const std::string& reason) {
        std::string s = src.empty() ? "<config>" : src;
        if (line > 0) s += ":" + std::to_string(line);
        if (!key.empty()) s += ": " + key;
        return s + ": " + reason;
    }
    std::string source_;
    int line_;
    std::string key_, reason_;
};

/// One value of the TOML subset: number, boolean, string, or a flat array of numbers or strings.
using ConfigScalar = std::variant<double, bool, std::string>;
struct ConfigValue {
    std::variant<double, bool, std::string, std::vector<ConfigScalar>> v;
    int line = 0;
};

/// "section.key" -> value, in file order of first appearance.
struct RawConfig {
    std::string source;
    std::map<std::string, ConfigValue> entries;
};

/// Sections of [name] headers and key = value lines; # comments; no nested tables, inline tables or
/// multi-line values.
RawConfig parse_toml_subset(const std::string& text, const std::string& source = "");

/// Initial datum. bump: compactly supported bump at the origin; gaussian: exp(-|x|²/(2 width²));
/// file: a field written by write_field_binary on the run's grid; barenblatt: the self-similar
/// solution of mass `mass` at time t0. Only bump data are accepted by the estimate suites.
struct DataSpec {
    std::string kind = "bump";
    double width = 1.0;
    double mass = 1.0;
    std::string path;
    double t0 = 1.0;
};

struct SnapshotSpec {
    std::string spacing = "geometric";   ///< geometric: t_first·ratio^k; linear: count equal steps up to t_end
    double t_first = 1e-3;
    double ratio = 1.189207115002721;    ///< 2^{1/4}
    int count = 16;
};

struct RunConfig {
    std::string source;
    std::string suite;
    std::string name;
    std::uint64_t seed = 1;
    std::string output;

    Params params{0.5, 0.75, 1};
    std::vector<double> m_values;
    std::vector<double> s_values;

    int n = 1024;
    double L = 16.0;

    std::string integrator = "auto";     ///< auto picks implicit_euler for m < 1 runs with compact data
    std::string exterior = "periodic";
    double eps_t = 1e-5;
    double t_end = 1.0;
    double contamination_threshold = 1e-4;
    SnapshotSpec snapshots;

    DataSpec data;

    double ball_radius = 0.0;            ///< 0: data width
    double late_fit_from = -1.0;
    double fit_lo = 0.0, fit_hi = 0.0;
    double alpha = 0.0;                  ///< weight decay; 0: regime default
    std::vector<double> weight_radii;
    std::vector<double> radii;
    int samples = 20;
    std::vector<double> calibration_widths;
    std::vector<double> t_end_values;
    std::vector<double> shell_min_values;
    std::vector<double> shell_max_values;
    std::vector<double> map_m_values;
    int extremal_n = 256;
    double extremal_L = 40.0;
    double extremal_b = 1.0;

    Tolerances tol;
    double sv_equality = 1e-10;
    double sobolev_extremal_min = 0.95;
    double optimize_rel = 1e-6;
    double optimize_zero = 1e-12;
    double operator_rel = 1e-3;
    double constant_rel = 1e-10;
    double decay_tol = 0.2;

    /// Effective configuration, defaults included.
    nlohmann::json to_json() const;
};

/// Known suites.
const std::vector<std::string>& suite_names();

/// Raw entries to a validated RunConfig: suite presets first, then the file's values. Unknown keys,
/// missing required keys and regime inconsistencies raise ConfigError.
RunConfig build_config(const RawConfig& raw);
RunConfig parse_config_text(const std::string& text, const std::string& source = "");
RunConfig parse_config(const std::string& path);

/// Regime requirements of the suite, checked before any compute.
void validate_regime(const RunConfig& c);

struct CampaignManifest {
    std::string source;
    std::string name = "campaign";
    std::string output;
    bool seed_override = false;
    std::uint64_t seed = 1;
    std::vector<RunConfig> runs;
};

/// [campaign] name, output, seed, configs = ["a.toml", ...] (relative to the manifest's directory).
CampaignManifest parse_manifest(const std::string& path);
CampaignManifest parse_manifest_text(const std::string& text, const std::string& base_dir, const std::string& source = "");

/// FNV-1a over the canonical JSON echo, including the seed.
std::uint64_t run_config_hash(const RunConfig& c);

}  // namespace fracdiff
