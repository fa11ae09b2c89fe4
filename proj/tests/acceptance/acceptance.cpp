// Acceptance criteria 1-12: one PASS/FAIL line each.
//
// Criteria listed in --known-failures are still evaluated and printed with their measured values;
// they only stop counting toward the exit status. A known failure that passes is reported too.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fracdiff/campaign.hpp"
#include "fracdiff/config.hpp"
#include "fracdiff/report.hpp"
#include "fracdiff/suites.hpp"

namespace fs = std::filesystem;
using namespace fracdiff;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

class SuiteCache {
public:
    const SuiteResult& get(const std::string& suite) {
        auto it = cache_.find(suite);
        if (it != cache_.end()) return it->second;
        const auto t0 = std::chrono::steady_clock::now();
        std::cerr << "running suite " << suite << "\n";
        SuiteResult r = run_suite(parse_config_text("[run]\nsuite = \"" + suite + "\"\n", "<" + suite + ">"));
        const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::cerr << "  " << suite << " done in " << format_double(std::round(sec * 10) / 10) << " s\n";
        return cache_.emplace(suite, std::move(r)).first->second;
    }

private:
    std::map<std::string, SuiteResult> cache_;
};

using Pred = std::function<bool(const EstimateReport&)>;

Pred named(std::set<std::string> names) {
    return [names = std::move(names)](const EstimateReport& r) { return names.count(r.name) > 0; };
}

Pred prefixed(std::vector<std::string> prefixes) {
    return [prefixes = std::move(prefixes)](const EstimateReport& r) {
        for (const auto& p : prefixes)
            if (r.name.rfind(p, 0) == 0) return true;
        return false;
    };
}

Pred any_report() {
    return [](const EstimateReport&) { return true; };
}

/// Every selected non-flagged report passes, and at least one was selected.
Outcome reports_pass(const std::vector<const SuiteResult*>& results, const Pred& select) {
    int n = 0, flagged = 0;
    std::vector<std::string> failed;
    for (const auto* res : results)
        for (const auto& r : res->reports) {
            if (!select(r)) continue;
            if (r.flagged) {
                ++flagged;
                continue;
            }
            ++n;
            if (!r.pass) {
                std::string f = res->config.suite + "/" + r.name + " lhs=" + format_double(r.lhs) +
                                " rhs=" + format_double(r.rhs);
                if (!r.notes.empty()) f += " (" + r.notes.front() + ")";
                failed.push_back(f);
            }
        }
    Outcome o;
    o.pass = n > 0 && failed.empty();
    std::ostringstream os;
    os << n - int(failed.size()) << "/" << n << " checks pass";
    if (flagged) os << ", " << flagged << " flagged";
    for (const auto& f : failed) os << "; " << f;
    if (n == 0) os << "; no checks ran";
    o.detail = os.str();
    return o;
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// Runs the same small campaign twice and compares every JSON/CSV byte.
Outcome determinism(const fs::path& root) {
    const fs::path cfg = root / "determinism_configs";
    fs::remove_all(root / "determinism_a");
    fs::remove_all(root / "determinism_b");
    fs::create_directories(cfg);
    std::ofstream(cfg / "ineq.toml") << "[run]\nsuite = \"inequalities\"\nname = \"ineq\"\nseed = 17\n[check]\nsamples = 5\n";
    std::ofstream(cfg / "w1.toml") << "[run]\nsuite = \"weighted_l1\"\nname = \"w1\"\nseed = 17\n"
                                      "[params]\nm_values = [0.5]\n[grid]\nn = 256\n[check]\nsamples = 2\n";
    std::ofstream(cfg / "pme.toml") << "[run]\nsuite = \"evolve\"\nname = \"pme\"\n[params]\nm = 2\ns = 0.5\nd = 1\n"
                                       "[grid]\nn = 256\nL = 16\n[solver]\nt_end = 0.5\n";
    std::ofstream(cfg / "manifest.toml") << "[campaign]\nname = \"determinism\"\nconfigs = [\"ineq.toml\", \"w1.toml\", \"pme.toml\"]\n";
    const auto m = parse_manifest((cfg / "manifest.toml").string());
    const auto a = run_campaign(m, (root / "determinism_a").string());
    const auto b = run_campaign(m, (root / "determinism_b").string());

    int files = 0;
    std::vector<std::string> diffs;
    const fs::path da(a.directory), db(b.directory);
    for (const auto& e : fs::recursive_directory_iterator(da)) {
        if (!e.is_regular_file()) continue;
        const auto ext = e.path().extension();
        if (ext != ".json" && ext != ".csv") continue;
        const fs::path rel = fs::relative(e.path(), da);
        ++files;
        if (!fs::exists(db / rel) || read_file(e.path()) != read_file(db / rel)) diffs.push_back(rel.string());
    }
    Outcome o;
    o.pass = files > 0 && diffs.empty();
    o.detail = std::to_string(files) + " JSON/CSV files compared";
    for (const auto& d : diffs) o.detail += "; differs: " + d;
    return o;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Acceptance criteria 1-12"};
    std::string out = "acceptance_out";
    std::vector<int> known, only;
    app.add_option("--out", out, "scratch directory for campaign outputs");
    app.add_option("--known-failures", known, "criteria whose failure is analysed and does not set the exit status")
        ->delimiter(',');
    app.add_option("--only", only, "evaluate only these criteria")->delimiter(',');
    CLI11_PARSE(app, argc, argv);

    const std::set<int> known_set(known.begin(), known.end()), only_set(only.begin(), only.end());
    const fs::path root(out);
    fs::create_directories(root);
    SuiteCache suites;
    auto s = [&](const std::string& name) { return &suites.get(name); };

    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"operator cross-validation and constants", [&] { return reports_pass({s("operator")}, any_report()); }},
        {"weight decay regimes", [&] { return reports_pass({s("weights")}, any_report()); }},
        {"weighted L1 estimate", [&] { return reports_pass({s("weighted_l1")}, any_report()); }},
        {"conservation and monotonicity",
         [&] {
             return reports_pass({s("gfde"), s("vfde"), s("pme"), s("linear"), s("trace")},
                                 named({"mass_conservation", "mass_nonincreasing", "benilan_crandall", "aleksandrov"}));
         }},
        {"GFDE lower bounds", [&] { return reports_pass({s("gfde")}, named({"lower_gfde", "smoothing"})); }},
        {"tail exponents", [&] { return reports_pass({s("tail")}, named({"tail"})); }},
        {"VFDE extinction sandwich",
         [&] {
             return reports_pass({s("vfde")}, prefixed({"extinction", "pc_energy", "lower_vfde", "non_extinction"}));
         }},
        {"PME lower bound", [&] { return reports_pass({s("pme")}, named({"lower_pme", "smoothing"})); }},
        {"functional inequalities",
         [&] { return reports_pass({s("inequalities")}, prefixed({"stroock_varopoulos", "sobolev"})); }},
        {"optimization lemma", [&] { return reports_pass({s("inequalities")}, prefixed({"optimization_"})); }},
        {"initial traces", [&] { return reports_pass({s("trace")}, prefixed({"initial_trace", "mass_"})); }},
        {"determinism", [&] { return determinism(root); }},
    };

    int unexpected = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const int id = int(i) + 1;
        if (!only_set.empty() && !only_set.count(id)) continue;
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const bool is_known = known_set.count(id) > 0;
        std::string tag = o.pass ? "PASS" : "FAIL";
        if (is_known) tag += o.pass ? " (listed as known failure)" : " (known failure)";
        if (o.pass == is_known) ++unexpected;
        std::cout << "criterion " << id << " " << tag << ": " << criteria[i].first << " | " << o.detail << std::endl;
    }
    return unexpected == 0 ? 0 : 1;
}
