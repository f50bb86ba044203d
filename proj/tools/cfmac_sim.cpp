// Experiment runner for the CSMA/CA, CSMA/ECA and CF-MAC simulator.
//
//   cfmac_sim run     [--config FILE] [flags...]   sweep and write data files
//   cfmac_sim model   [--n-min A --n-max B]        DCF fixed point (N, tau, p)
//   cfmac_sim analyze --trace FILE --duration S    metrics of an exported trace
//
// Exit status: 0 all runs ok, 1 configuration error, 2 some runs failed.

#include <cstdio>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"

#include "cfmac/analytic_model.hpp"
#include "cfmac/error.hpp"
#include "cfmac/experiment.hpp"
#include "cfmac/metrics.hpp"
#include "cfmac/trace.hpp"

namespace {

int cmd_run(const std::string& config_path, const cfmac::PlanOverrides& overrides) {
    cfmac::ExperimentPlan plan;
    try {
        plan = config_path.empty() ? cfmac::parse_config("") : cfmac::parse_config_file(config_path);
        cfmac::apply_overrides(plan, overrides);
    } catch (const cfmac::Error& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 1;
    }
    try {
        const auto report = cfmac::run_plan(plan, std::cout);
        if (report.exit_code != 0) {
            std::cerr << "some runs failed\n";
        }
        return report.exit_code;
    } catch (const cfmac::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return e.code() == cfmac::ErrorCode::InvalidConfig ? 1 : 2;
    }
}

int cmd_model(int n_min, int n_max, int w, int m) {
    try {
        std::cout << "n,tau,p\n";
        for (const auto& row : cfmac::reference_curve(n_min, n_max, w, m)) {
            std::printf("%d,%.10f,%.10f\n", row.n, row.tau, row.p);
        }
    } catch (const cfmac::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}

int cmd_analyze(const std::string& trace_path, int n_stations, double duration_s, double warmup_s,
                std::int64_t payload) {
    try {
        std::ifstream in(trace_path);
        if (!in) throw cfmac::Error(cfmac::ErrorCode::Io, "cannot open " + trace_path);
        const auto trace = cfmac::read_trace(in, n_stations);
        const cfmac::MeasurementWindow window{static_cast<cfmac::Micros>(warmup_s * 1e6),
                                              static_cast<cfmac::Micros>(duration_s * 1e6)};
        cfmac::write_metrics_report_json(std::cout, cfmac::compute_metrics(trace, window, payload));
    } catch (const cfmac::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"WLAN contention simulator: CSMA/CA, CSMA/ECA and CF-MAC"};
    app.require_subcommand(0, 1);

    std::string config_path;
    cfmac::PlanOverrides o;
    auto* run = app.add_subcommand("run", "Run an experiment plan (default)");
    for (auto* target : {static_cast<CLI::App*>(&app), run}) {
        target->add_option("--config", config_path, "YAML or JSON plan file");
        target->add_option("--protocol", o.protocol, "CsmaCa, CsmaEca or CfMac");
        target->add_option("--stations", o.stations, "Number of contenders");
        target->add_option("--rate", o.rate, "PHY rate in Mb/s (6, 11, 12, 24, 48)");
        target->add_option("--duration", o.duration, "Simulated seconds per run");
        target->add_option("--seed", o.seed, "RNG seed");
        target->add_option("--cca-error", o.cca_error, "Probability that carrier sense misreads the channel");
        target->add_option("--out", o.out_dir, "Output directory");
        target->add_option("--format", o.format, "Per-run metrics format: csv or json");
        target->add_option("--jobs", o.jobs, "Concurrent runs");
        target->add_flag("--force", o.force, "Overwrite previous results");
    }

    int n_min = 1;
    int n_max = 50;
    int w = 16;
    int m = 6;
    auto* model = app.add_subcommand("model", "Print the DCF fixed-point reference curve");
    model->add_option("--n-min", n_min, "Smallest N")->check(CLI::PositiveNumber);
    model->add_option("--n-max", n_max, "Largest N")->check(CLI::PositiveNumber);
    model->add_option("--cw-min", w, "Minimum contention window");
    model->add_option("--max-stage", m, "Maximum backoff stage");

    std::string trace_path;
    int n_stations = 0;
    double duration = 90.0;
    double warmup = 5.0;
    std::int64_t payload = cfmac::kDefaultPayloadBytes;
    auto* analyze = app.add_subcommand("analyze", "Compute metrics from an exported trace");
    analyze->add_option("--trace", trace_path, "Trace CSV")->required();
    analyze->add_option("--stations", n_stations, "Station count (default: inferred)");
    analyze->add_option("--duration", duration, "End of the measurement window, seconds");
    analyze->add_option("--warmup", warmup, "Start of the measurement window, seconds");
    analyze->add_option("--payload", payload, "Payload bytes per frame");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    if (*model) return cmd_model(n_min, n_max, w, m);
    if (*analyze) return cmd_analyze(trace_path, n_stations, duration, warmup, payload);
    return cmd_run(config_path, o);
}
