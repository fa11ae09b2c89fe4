#pragma once

#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "config.hpp"
#include "suites.hpp"

namespace fracdiff {

/// Output root: $FRACDIFF_OUTPUT_ROOT, else ./fracdiff_out.
std::string output_root_from_env();

/// Nonzero iff some non-flagged report failed.
int exit_status(const std::vector<SuiteResult>& results);
int exit_status_of_reports(const std::vector<EstimateReport>& reports);

/// report.json (full), reports.json (array of reports), summary.csv and figures under dir.
void write_suite_outputs(const SuiteResult& r, const std::string& dir);

struct CampaignOutcome {
    int exit_code = 0;
    std::string directory;
    std::vector<SuiteResult> results;
};

/// Calibration for every run first, then verification; a failing run never stops the campaign.
CampaignOutcome run_campaign(const CampaignManifest& m, const std::string& output_root, std::ostream* log = nullptr);

/// Re-reads a campaign directory, prints a summary with flagged checks in their own section, and
/// returns the exit status the report set implies.
int summarize_campaign(const std::string& directory, std::ostream& out);

}  // namespace fracdiff
