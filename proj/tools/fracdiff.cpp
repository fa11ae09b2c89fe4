// Command-line front end: operator-check, weights-check, evolve, verify, campaign, report.

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "fracdiff/campaign.hpp"
#include "fracdiff/config.hpp"
#include "fracdiff/field_io.hpp"
#include "fracdiff/report.hpp"
#include "fracdiff/suites.hpp"

namespace fs = std::filesystem;
using namespace fracdiff;

namespace {

struct Common {
    std::string config;
    std::string out;
    std::optional<std::uint64_t> seed;
};

RunConfig load(const Common& c, const std::string& suite) {
    RunConfig rc;
    if (!c.config.empty()) {
        rc = parse_config(c.config);
        if (!suite.empty() && rc.suite != suite)
            throw ConfigError(c.config, 0, "run.suite", "config is for suite '" + rc.suite + "', not '" + suite + "'");
    } else {
        rc = parse_config_text("[run]\nsuite = \"" + suite + "\"\n", "<defaults>");
    }
    if (c.seed) rc.seed = *c.seed;
    return rc;
}

std::string out_dir(const Common& c, const RunConfig& rc) {
    if (!c.out.empty()) return c.out;
    if (!rc.output.empty()) return (fs::path(output_root_from_env()) / rc.output).string();
    return (fs::path(output_root_from_env()) / rc.name).string();
}

int run_and_write(const Common& c, const std::string& suite) {
    const RunConfig rc = load(c, suite);
    const SuiteResult r = run_suite(rc);
    const std::string dir = out_dir(c, rc);
    write_suite_outputs(r, dir);
    std::cout << csv_header();
    for (const auto& x : r.reports) std::cout << csv_row(rc.name, x);
    for (const auto* f : r.failures()) {
        std::cerr << "FAIL " << f->name;
        for (const auto& n : f->notes) std::cerr << " | " << n;
        std::cerr << "\n";
    }
    std::cerr << "reports written to " << dir << "\n";
    return r.passed() ? 0 : 1;
}

void add_common(CLI::App* app, Common& c, bool config_required) {
    auto* opt = app->add_option("--config", c.config, "run configuration (sectioned key = value)");
    if (config_required) opt->required();
    app->add_option("--out", c.out, "output directory (default: $FRACDIFF_OUTPUT_ROOT/<name>)");
    app->add_option("--seed", c.seed, "override the configuration seed");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Verification harness for nonlinear fractional diffusion estimates"};
    app.require_subcommand(1);

    Common op, wt, ev, vf;
    auto* cmd_op = app.add_subcommand("operator-check", "cross-validate (-Delta)^s and the kernel/Sobolev constants");
    add_common(cmd_op, op, false);
    auto* cmd_wt = app.add_subcommand("weights-check", "decay regimes of (-Delta)^s phi");
    add_common(cmd_wt, wt, false);
    auto* cmd_ev = app.add_subcommand("evolve", "one evolution; writes the series and the final field");
    add_common(cmd_ev, ev, true);
    auto* cmd_vf = app.add_subcommand("verify", "run one verification suite");
    std::string suite;
    cmd_vf->add_option("--suite", suite, "suite name")->required()->check(CLI::IsMember(suite_names()));
    add_common(cmd_vf, vf, false);

    std::string manifest, campaign_out;
    std::optional<std::uint64_t> campaign_seed;
    auto* cmd_cp = app.add_subcommand("campaign", "calibration runs, then every suite of a manifest");
    cmd_cp->add_option("--manifest", manifest, "campaign manifest")->required();
    cmd_cp->add_option("--out", campaign_out, "output root (default: $FRACDIFF_OUTPUT_ROOT)");
    cmd_cp->add_option("--seed", campaign_seed, "override every run's seed");

    std::string report_dir;
    auto* cmd_rp = app.add_subcommand("report", "summarize a campaign directory");
    cmd_rp->add_option("--dir", report_dir, "campaign output directory")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*cmd_op) return run_and_write(op, "operator");
        if (*cmd_wt) return run_and_write(wt, "weights");
        if (*cmd_vf) return run_and_write(vf, suite);
        if (*cmd_ev) {
            RunConfig rc = load(ev, "");
            const SolverConfig sc = solver_config(rc, rc.params, rc.t_end);
            const TimeSeries ts = run(sc, initial_data(rc, sc.grid, rc.data.width));
            const std::string dir = out_dir(ev, rc);
            nlohmann::json j;
            j["config"] = rc.to_json();
            j["extinct"] = ts.extinct;
            if (ts.extinct) j["extinction_time"] = ts.extinction_time;
            j["steps"] = ts.steps;
            j["rejected"] = ts.rejected;
            j["contamination"] = ts.contamination;
            j["diagnostic"] = ts.diagnostic;
            for (const auto& sn : ts.snapshots) j["snapshots"].push_back({{"t", sn.t}, {"mass", sn.mass}, {"linf", sn.linf}});
            write_text_file((fs::path(dir) / "series.json").string(), j.dump(2) + "\n");
            write_field_binary((fs::path(dir) / "final.bin").string(), ts.snapshots.back().u);
            const auto mass = check_mass(ts, rc.tol.mass);
            std::cout << csv_header() << csv_row(rc.name, mass);
            std::cerr << "series written to " << dir << "\n";
            return exit_status_of_reports({mass});
        }
        if (*cmd_cp) {
            CampaignManifest m = parse_manifest(manifest);
            if (campaign_seed) {
                m.seed_override = true;
                m.seed = *campaign_seed;
                for (auto& rc : m.runs) rc.seed = *campaign_seed;
            }
            const auto outcome = run_campaign(m, campaign_out.empty() ? output_root_from_env() : campaign_out, &std::cerr);
            std::cerr << "campaign written to " << outcome.directory << "\n";
            summarize_campaign(outcome.directory, std::cout);
            return outcome.exit_code;
        }
        if (*cmd_rp) return summarize_campaign(report_dir, std::cout);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
