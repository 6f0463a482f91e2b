#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sr/evolution.hpp"
#include "sr/physics.hpp"

namespace sr {

struct RunOptions {
    Config cfg;
    FitnessSpec spec;
    std::optional<std::string> reference;  // registry name for success classification
    double tol_exact = 1e-3;
    double tol_const = 1e-2;
    std::size_t probe_rows = 256;
    std::string out_dir;  // empty: keep results in memory only
    bool jitter = false;  // per-run operator-probability sampling
};

struct RunOutcome {
    RunReport report;
    bool success = false;
    EquivVerdict verdict;
    bool failed = false;
    std::string error;
};

struct CampaignReport {
    std::vector<RunOutcome> runs;
    int successes = 0;
    double success_fraction = 0.0;
};

// Fresh probe rows for equivalence checks: regenerated from the
// dataset's generator when known, otherwise subsampled from the data.
Dataset make_probes(const Dataset& ds, std::size_t n, std::uint64_t seed);

// Per-run operator-probability variation: arithmetic
// operators uniform in [0.05, 0.25], the rest sharing what remains
// above the terminal probability equally.
Config jitter_config(const Config& cfg, std::uint64_t run_seed);

RunOutcome run_single(const RunOptions& opt, const Dataset& ds);

// n_runs independent runs with seeds base..base+n_runs-1, up to `jobs`
// in flight. Per-run outputs are identical regardless of `jobs`.
CampaignReport run_campaign(const RunOptions& opt, const Dataset& ds, int n_runs,
                            std::uint64_t base_seed, int jobs);

// Same campaign with DCSR off, then on, under matched seeds.
std::pair<CampaignReport, CampaignReport> compare_modes(const RunOptions& opt,
                                                        const Dataset& ds, int n_runs,
                                                        std::uint64_t base_seed, int jobs);

double two_proportion_z(int s1, int n1, int s2, int n2);

std::string run_csv(const RunReport& report);
void write_run_files(const RunOutcome& outcome, const std::string& out_dir);
void write_campaign_summary(const CampaignReport& report, const std::string& out_dir,
                            const std::string& label);

}  // namespace sr
