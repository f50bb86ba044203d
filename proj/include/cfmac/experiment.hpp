#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "cfmac/sim_engine.hpp"

namespace cfmac {

enum class OutputFormat { Csv, Json };

/// A sweep over protocol x rate x N x seed; every other field comes from
/// `base`.
struct ExperimentPlan {
    SimConfig base;
    std::vector<ProtocolKind> protocols{ProtocolKind::CfMac};
    std::vector<int> rates{6};
    std::vector<int> stations{12};
    std::vector<std::uint64_t> seeds{1};
    std::filesystem::path out_dir{"results"};
    OutputFormat format = OutputFormat::Csv;
    bool write_traces = true;
    bool force = false;
    int jobs = 1;

    /// Cartesian product in (protocol, rate, n, seed) order. Throws
    /// Error(InvalidConfig) on an empty axis or duplicate tuples.
    std::vector<SimConfig> expand() const;
};

/// Parses a YAML document (JSON is accepted, being the same schema in the
/// other encoding). Unknown keys and out-of-range values throw
/// Error(InvalidConfig / UnsupportedRate) with a message naming the key.
ExperimentPlan parse_config(const std::string& text);
ExperimentPlan parse_config_file(const std::filesystem::path& path);

/// Command-line values that take precedence over the config file.
struct PlanOverrides {
    std::optional<std::string> protocol;
    std::optional<int> stations;
    std::optional<int> rate;
    std::optional<double> duration;
    std::optional<std::uint64_t> seed;
    std::optional<double> cca_error;
    std::optional<std::filesystem::path> out_dir;
    std::optional<std::string> format;
    std::optional<int> jobs;
    bool force = false;
};

void apply_overrides(ExperimentPlan& plan, const PlanOverrides& overrides);

struct RunOutcome {
    SimConfig config;
    std::optional<ExperimentResult> result;
    std::string error;
};

struct PlanReport {
    std::vector<RunOutcome> runs;
    int exit_code = 0;  // 0 all ok, 2 some runs failed
};

/// Executes every run (up to `plan.jobs` at a time) and collects results in
/// plan order.
std::vector<RunOutcome> execute_runs(const ExperimentPlan& plan);

/// execute_runs plus all artifacts under plan.out_dir. Refuses to touch a
/// directory holding a previous summary unless plan.force is set
/// (Error(InvalidConfig)).
PlanReport run_plan(const ExperimentPlan& plan, std::ostream& log);

std::string run_tag(const SimConfig& config);

/// One row per station plus one aggregate row (station = "all") per run.
void write_summary_csv(std::ostream& out, const std::vector<RunOutcome>& runs);
void write_summary_json(std::ostream& out, const std::vector<RunOutcome>& runs);
void write_run_metrics_csv(std::ostream& out, const RunOutcome& run);
void write_run_metrics_json(std::ostream& out, const RunOutcome& run);
void write_metrics_report_json(std::ostream& out, const MetricsReport& report);

/// Per-station throughput sorted high to low (stacked bars).
void write_throughput_stacks_csv(std::ostream& out, const std::vector<RunOutcome>& runs);
/// Min/max ratio and JFI per run.
void write_fairness_csv(std::ostream& out, const std::vector<RunOutcome>& runs);
/// Inter-arrival stats normalized to the CF-MAC run with the same rate, N
/// and seed (blank when the plan has no such run).
void write_interarrival_csv(std::ostream& out, const std::vector<RunOutcome>& runs);
/// Loss fraction per run with the model's collision probability alongside.
void write_losses_csv(std::ostream& out, const std::vector<RunOutcome>& runs);

/// Mean/std over the pooled gaps of all stations.
std::optional<InterarrivalStats> pooled_interarrival(const std::vector<std::optional<InterarrivalStats>>& per_station);

}  // namespace cfmac
