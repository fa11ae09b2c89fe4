#include "fracdiff/campaign.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "fracdiff/report.hpp"

namespace fracdiff {

std::string output_root_from_env() {
    const char* v = std::getenv("FRACDIFF_OUTPUT_ROOT");
    return v && *v ? std::string(v) : std::string("fracdiff_out");
}

int exit_status_of_reports(const std::vector<EstimateReport>& reports) {
    for (const auto& r : reports)
        if (!r.flagged && !r.pass) return 1;
    return 0;
}

int exit_status(const std::vector<SuiteResult>& results) {
    for (const auto& r : results)
        if (!r.passed()) return 1;
    return 0;
}

void write_suite_outputs(const SuiteResult& r, const std::string& dir) {
    namespace fs = std::filesystem;
    write_text_file((fs::path(dir) / "report.json").string(), to_json(r).dump(2) + "\n");
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& x : r.reports) arr.push_back(to_json(x));
    write_text_file((fs::path(dir) / "reports.json").string(), arr.dump(2) + "\n");
    std::string csv = csv_header();
    for (const auto& x : r.reports) csv += csv_row(r.config.name, x);
    write_text_file((fs::path(dir) / "summary.csv").string(), csv);
    for (const auto& f : r.figures) write_text_file((fs::path(dir) / f.file).string(), f.svg);
}

CampaignOutcome run_campaign(const CampaignManifest& m, const std::string& output_root, std::ostream* log) {
    namespace fs = std::filesystem;
    CampaignOutcome out;
    out.directory = (fs::path(output_root) / (m.output.empty() ? m.name : m.output)).string();
    fs::create_directories(out.directory);

    // distinct directory per run, in manifest order
    std::vector<std::string> dirs;
    std::set<std::string> used;
    for (std::size_t i = 0; i < m.runs.size(); ++i) {
        std::string d = m.runs[i].name;
        if (used.count(d)) d += "_" + std::to_string(i);
        used.insert(d);
        dirs.push_back(d);
    }

    std::vector<Calibration> cals;
    for (const auto& rc : m.runs) {
        if (log) *log << "calibrate " << rc.name << "\n";
        cals.push_back(calibrate(rc));
    }
    for (std::size_t i = 0; i < m.runs.size(); ++i) {
        if (log) *log << "verify " << m.runs[i].name << "\n";
        out.results.push_back(verify(m.runs[i], std::move(cals[i])));
    }

    nlohmann::json index;
    index["campaign"] = m.name;
    index["runs"] = nlohmann::json::array();
    std::string csv = csv_header();
    for (std::size_t i = 0; i < out.results.size(); ++i) {
        const auto& r = out.results[i];
        write_suite_outputs(r, (fs::path(out.directory) / dirs[i]).string());
        int failed = 0, flagged = 0;
        for (const auto& x : r.reports) {
            if (x.flagged) ++flagged;
            else if (!x.pass) ++failed;
            csv += csv_row(r.config.name, x);
        }
        std::ostringstream h;
        h << std::hex;
        h.width(16);
        h.fill('0');
        h << r.config_hash;
        index["runs"].push_back({{"name", r.config.name},
                                 {"suite", r.config.suite},
                                 {"config_hash", h.str()},
                                 {"pass", r.passed()},
                                 {"failed", failed},
                                 {"flagged", flagged},
                                 {"report", dirs[i] + "/report.json"}});
    }
    out.exit_code = exit_status(out.results);
    index["pass"] = out.exit_code == 0;
    write_text_file((fs::path(out.directory) / "index.json").string(), index.dump(2) + "\n");
    write_text_file((fs::path(out.directory) / "campaign.csv").string(), csv);
    return out;
}

int summarize_campaign(const std::string& directory, std::ostream& out) {
    namespace fs = std::filesystem;
    std::ifstream in(fs::path(directory) / "index.json");
    if (!in) throw std::runtime_error("summarize_campaign: no index.json in " + directory);
    const auto index = nlohmann::json::parse(in);
    std::vector<EstimateReport> all;
    std::vector<std::pair<std::string, EstimateReport>> flagged;
    out << "campaign " << index.at("campaign").get<std::string>() << "\n";
    for (const auto& run : index.at("runs")) {
        std::ifstream rin(fs::path(directory) / run.at("report").get<std::string>());
        if (!rin) throw std::runtime_error("summarize_campaign: missing " + run.at("report").get<std::string>());
        const auto rep = nlohmann::json::parse(rin);
        const std::string name = run.at("name").get<std::string>();
        int n = 0, failed = 0;
        for (const auto& j : rep.at("reports")) {
            auto r = report_from_json(j);
            ++n;
            if (!r.pass) {
                ++failed;
                out << "  FAIL " << name << " " << r.name << " (m=" << fmt(r.params.m) << ", s=" << fmt(r.params.s)
                    << ", d=" << r.params.d << ")";
                for (const auto& note : r.notes) out << " | " << note;
                out << "\n";
            }
            all.push_back(std::move(r));
        }
        for (const auto& j : rep.at("flagged")) {
            auto r = report_from_json(j);
            flagged.emplace_back(name, r);
            all.push_back(std::move(r));
        }
        out << "run " << name << " [" << run.at("suite").get<std::string>() << "]: " << n - failed << "/" << n << " pass\n";
    }
    out << "flagged (domain-contaminated, not counted):\n";
    if (flagged.empty()) out << "  none\n";
    for (const auto& [name, r] : flagged)
        out << "  " << name << " " << r.name << (r.pass ? " pass" : " fail") << "\n";
    const int code = exit_status_of_reports(all);
    out << (code == 0 ? "PASS" : "FAIL") << "\n";
    return code;
}

}  // namespace fracdiff
