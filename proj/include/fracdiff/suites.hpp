#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "config.hpp"
#include "estimates.hpp"
#include "evolve.hpp"

namespace fracdiff {

/// Bookkeeping of one evolution. status is ok, stiffness_abort or error.
struct RunRecord {
    std::string label;
    std::uint64_t config_hash = 0;
    std::string status = "ok";
    long steps = 0, rejected = 0;
    double contamination = 0.0;
    bool contaminated = false;
    bool extinct = false;
    double extinction_time = 0.0;
    double clipped_mass = 0.0;
    std::size_t snapshots = 0;
    std::string diagnostic;
};

struct Figure {
    std::string file;
    std::string svg;
};

/// Evolutions and constants the verification phase depends on.
struct Calibration {
    std::map<std::string, TimeSeries> series;
    std::vector<RunRecord> runs;
    std::vector<EstimateReport> aborts;
    std::map<std::string, ConstantLedger> ledgers;   ///< keyed by run label
};

struct SuiteResult {
    RunConfig config;
    std::uint64_t config_hash = 0;
    std::vector<EstimateReport> reports;
    std::vector<ConstantUse> ledger;
    std::vector<RunRecord> runs;
    std::vector<Figure> figures;
    nlohmann::json data = nlohmann::json::object();

    /// True iff every non-flagged report passes.
    bool passed() const;
    std::vector<const EstimateReport*> failures() const;
};

/// Uniform doubles in [0,1) from the top 53 bits of std::mt19937_64, so draws do not depend on the
/// standard library's distribution implementation.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}
    double uniform() { return double(gen_() >> 11) * 0x1.0p-53; }
    double uniform(double a, double b) { return a + (b - a) * uniform(); }

private:
    std::mt19937_64 gen_;
};

SolverConfig solver_config(const RunConfig& c, const Params& p, double t_end);
std::vector<double> snapshot_times(const SnapshotSpec& s, double t_end);
Field initial_data(const RunConfig& c, const Grid& g, double width);

Calibration calibrate(const RunConfig& c);
SuiteResult verify(const RunConfig& c, Calibration cal);
SuiteResult run_suite(const RunConfig& c);

nlohmann::json to_json(const RunRecord& r);
nlohmann::json to_json(const SuiteResult& r);

}  // namespace fracdiff
