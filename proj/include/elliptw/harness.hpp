#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "elliptw/ensemble.hpp"

namespace elliptw {

struct ExperimentSpec {
    ModelConfig model;
    int trials = 100;
    int k_top = 3;
    std::uint64_t seed_base = 1;
    bool elliptical = true;
    bool gaussian = true;
    std::string outputs;
    std::set<std::string> checks = {"edge", "tw"}; ///< edge, tw, locallaw, omega, comparison
    int threads = 0;  ///< 0 = hardware concurrency
    double tol = 1e-12;
    bool force = false;
    bool omega_per_trial = true;
};

struct CampaignSummary {
    int n_trials = 0;
    int n_excluded = 0;
    double ks_elliptical = 0.0;
    double ks_gaussian = 0.0;
    double ks_two_sample = 0.0;
    double mean_stat = 0.0;
    double var_stat = 0.0;
    double gamma0 = 0.0;
    double lambda_plus_limiting = 0.0;
    double omega_pass_rate = 0.0;
    bool flagged = false; ///< > 5% exclusions

    std::string to_json() const;
};

/// Thrown when the regularity precheck fails; carries the report.
class CampaignRefused : public std::runtime_error {
public:
    CampaignRefused(const std::string& what, RegularityReport report)
        : std::runtime_error(what), report(std::move(report)) {}
    RegularityReport report;
};

/// Builds the limiting edge report once (refusing on a failed regularity
/// check), runs seed-split trials across threads, aggregates the rescaled
/// statistics against the TW1 table and writes ledger.csv + summary.json
/// when `outputs` is set. Bit-for-bit reproducible for a fixed seed_base
/// regardless of thread count.
CampaignSummary run_campaign(const ExperimentSpec& spec, std::vector<TrialRecord>* records_out = nullptr);

/// Appends trial rows to a ledger CSV (header written when the file is new).
void write_ledger(const std::string& path, const std::vector<TrialRecord>& records, double gamma0);

/// Key-value config file (dotted sections, '#' comments). Unknown keys are
/// an error listing every offender; round-trips through serialize_config.
struct ParsedConfig {
    ModelConfig model;
    ExperimentSpec spec; ///< spec.model mirrors `model`
    std::map<std::string, std::string> raw;
};

ParsedConfig parse_config_text(const std::string& text);
ParsedConfig parse_config_file(const std::string& path);
std::string serialize_config(const ParsedConfig& config);

} // namespace elliptw
