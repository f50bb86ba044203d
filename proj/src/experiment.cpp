#include "cfmac/experiment.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <thread>
#include <tuple>

#include "json.hpp"

#include "cfmac/analytic_model.hpp"
#include "cfmac/error.hpp"

namespace cfmac {

namespace {

[[noreturn]] void config_error(const std::string& key, const std::string& what) {
    throw Error(ErrorCode::InvalidConfig, key + ": " + what);
}

template <typename T>
T scalar_as(const YAML::Node& node, const std::string& key) {
    if (!node.IsScalar()) config_error(key, "expected a scalar value");
    try {
        return node.as<T>();
    } catch (const YAML::Exception&) {
        config_error(key, "cannot parse '" + node.Scalar() + "'");
    }
}

template <typename T>
std::vector<T> list_as(const YAML::Node& node, const std::string& key) {
    std::vector<T> out;
    if (node.IsSequence()) {
        for (const auto& item : node) out.push_back(scalar_as<T>(item, key));
        if (out.empty()) config_error(key, "empty list");
    } else {
        out.push_back(scalar_as<T>(node, key));
    }
    return out;
}

void check_rate(int rate) {
    if (!is_supported_rate(rate)) {
        throw Error(ErrorCode::UnsupportedRate, "rate: unsupported");
    }
}

OutputFormat parse_format(const std::string& s) {
    if (s == "csv") return OutputFormat::Csv;
    if (s == "json") return OutputFormat::Json;
    config_error("format", "expected csv or json, got '" + s + "'");
}

void parse_output(const YAML::Node& node, ExperimentPlan& plan) {
    if (!node.IsMap()) config_error("output", "expected a section");
    for (const auto& kv : node) {
        const auto key = kv.first.as<std::string>();
        if (key == "dir") {
            plan.out_dir = scalar_as<std::string>(kv.second, "output.dir");
        } else if (key == "format") {
            plan.format = parse_format(scalar_as<std::string>(kv.second, "output.format"));
        } else if (key == "traces") {
            plan.write_traces = scalar_as<bool>(kv.second, "output.traces");
        } else {
            config_error("output." + key, "unknown key");
        }
    }
}

void parse_mac(const YAML::Node& node, MacParams& mac) {
    if (!node.IsMap()) config_error("mac", "expected a section");
    for (const auto& kv : node) {
        const auto key = kv.first.as<std::string>();
        const std::string full = "mac." + key;
        int* field = nullptr;
        if (key == "cw_min") field = &mac.cw_min;
        else if (key == "max_stage") field = &mac.max_stage;
        else if (key == "max_retries") field = &mac.max_retries;
        else if (key == "eca_backoff") field = &mac.eca_backoff;
        else if (key == "reduced_window") field = &mac.reduced_window;
        else if (key == "probe_slots") field = &mac.probe_slots;
        else config_error(full, "unknown key");
        *field = scalar_as<int>(kv.second, full);
    }
}

void parse_schedule(const YAML::Node& node, ScheduleTable& table) {
    if (!node.IsMap()) config_error("schedule", "expected a section keyed by rate");
    for (const auto& kv : node) {
        const std::string rate_key = kv.first.as<std::string>();
        const int rate = scalar_as<int>(kv.first, "schedule." + rate_key);
        check_rate(rate);
        const CycleShare current = table.per_station_cycle(rate);
        ScheduleRow row{current.share_us, current.epsilon_us};
        if (!kv.second.IsMap()) config_error("schedule." + rate_key, "expected {share, epsilon}");
        for (const auto& field : kv.second) {
            const auto name = field.first.as<std::string>();
            const std::string full = "schedule." + rate_key + "." + name;
            if (name == "share") row.share_us = scalar_as<double>(field.second, full);
            else if (name == "epsilon") row.epsilon_us = scalar_as<double>(field.second, full);
            else config_error(full, "unknown key");
        }
        table.set_row(rate, row);
    }
}

void check_plan(const ExperimentPlan& plan) {
    for (int r : plan.rates) check_rate(r);
    for (int n : plan.stations) {
        if (n < 1) config_error("stations", "must be >= 1");
    }
    if (plan.jobs < 1) config_error("jobs", "must be >= 1");
    for (const auto& c : plan.expand()) validate(c);
}

std::string num(double v, int precision = 6) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", precision, v);
    return buf;
}

std::string opt_num(const std::optional<double>& v, int precision = 6) {
    return v ? num(*v, precision) : std::string{};
}

std::string opt_micros(const std::optional<Micros>& v) {
    return v ? std::to_string(*v) : std::string{};
}

void write_run_prefix(std::ostream& out, const SimConfig& c) {
    out << to_string(c.protocol) << ',' << c.rate_mbps << ',' << c.n_stations << ',' << c.seed;
}

template <typename F>
void write_file(const std::filesystem::path& path, F&& body) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
    body(out);
    if (!out) throw Error(ErrorCode::Io, "write failed for " + path.string());
}

nlohmann::ordered_json report_json(const MetricsReport& m) {
    using nlohmann::ordered_json;
    ordered_json j;
    auto opt = [](const auto& v) { return v ? ordered_json(*v) : ordered_json(nullptr); };
    j["window_us"] = {m.window.begin, m.window.end};
    j["aggregate_throughput_mbps"] = m.aggregate_throughput;
    j["jfi"] = opt(m.jfi);
    j["min_max_ratio"] = opt(m.min_max_ratio);
    j["aggregate_loss_fraction"] = opt(m.aggregate_loss_fraction);
    j["convergence_us"] = opt(m.convergence_time);
    ordered_json stations = ordered_json::array();
    for (std::size_t i = 0; i < m.per_station_throughput.size(); ++i) {
        ordered_json s;
        s["station"] = i;
        s["throughput_mbps"] = m.per_station_throughput[i];
        s["successes"] = m.successes[i];
        s["failures"] = m.failures[i];
        s["loss_fraction"] = opt(m.loss_fraction[i]);
        if (m.interarrival[i]) {
            const auto& ia = *m.interarrival[i];
            s["iat_us"] = {{"mean", ia.mean}, {"std", ia.std}, {"min", ia.min}, {"max", ia.max}};
        } else {
            s["iat_us"] = nullptr;
        }
        stations.push_back(std::move(s));
    }
    j["stations"] = std::move(stations);
    return j;
}

nlohmann::ordered_json metrics_json(const RunOutcome& run) {
    using nlohmann::ordered_json;
    const auto& c = run.config;
    ordered_json j;
    j["protocol"] = to_string(c.protocol);
    j["rate_mbps"] = c.rate_mbps;
    j["n"] = c.n_stations;
    j["seed"] = c.seed;
    if (!run.result) {
        j["error"] = run.error;
        return j;
    }
    j.update(report_json(run.result->metrics));
    return j;
}

}  // namespace

void write_metrics_report_json(std::ostream& out, const MetricsReport& report) {
    out << report_json(report).dump(2) << '\n';
}

std::vector<SimConfig> ExperimentPlan::expand() const {
    if (protocols.empty() || rates.empty() || stations.empty() || seeds.empty()) {
        config_error("sweep", "every axis needs at least one value");
    }
    std::vector<SimConfig> out;
    std::set<std::tuple<int, int, int, std::uint64_t>> seen;
    for (auto p : protocols) {
        for (int r : rates) {
            for (int n : stations) {
                for (auto s : seeds) {
                    if (!seen.emplace(static_cast<int>(p), r, n, s).second) {
                        config_error("sweep", "duplicate run (" + std::string(to_string(p)) + ", rate " +
                                                  std::to_string(r) + ", n " + std::to_string(n) + ", seed " +
                                                  std::to_string(s) + ")");
                    }
                    SimConfig c = base;
                    c.protocol = p;
                    c.rate_mbps = r;
                    c.n_stations = n;
                    c.seed = s;
                    out.push_back(std::move(c));
                }
            }
        }
    }
    return out;
}

ExperimentPlan parse_config(const std::string& text) {
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::Exception& e) {
        throw Error(ErrorCode::InvalidConfig, std::string("config: parse error: ") + e.what());
    }
    ExperimentPlan plan;
    if (root.IsNull()) {
        check_plan(plan);
        return plan;
    }
    if (!root.IsMap()) config_error("config", "top level must be a mapping");

    std::set<std::string> given;
    auto once = [&](const std::string& canonical, const std::string& key) {
        if (!given.insert(canonical).second) config_error(key, "given more than once");
    };

    for (const auto& kv : root) {
        const auto key = kv.first.as<std::string>();
        const YAML::Node& v = kv.second;
        if (key == "protocol" || key == "protocols") {
            once("protocol", key);
            plan.protocols.clear();
            for (const auto& name : list_as<std::string>(v, key)) plan.protocols.push_back(parse_protocol(name));
        } else if (key == "rate" || key == "rates") {
            once("rate", key);
            plan.rates = list_as<int>(v, key);
            for (int r : plan.rates) check_rate(r);
        } else if (key == "stations" || key == "n") {
            once("stations", key);
            plan.stations = list_as<int>(v, key);
        } else if (key == "seed" || key == "seeds") {
            once("seed", key);
            plan.seeds = list_as<std::uint64_t>(v, key);
        } else if (key == "duration") {
            plan.base.duration_s = scalar_as<double>(v, key);
            if (!(plan.base.duration_s > 0.0)) config_error(key, "must be > 0");
        } else if (key == "warmup") {
            plan.base.warmup_s = scalar_as<double>(v, key);
        } else if (key == "payload_bytes") {
            plan.base.payload_bytes = scalar_as<std::int64_t>(v, key);
        } else if (key == "cca_error") {
            plan.base.cca_error_prob = scalar_as<double>(v, key);
        } else if (key == "jobs") {
            plan.jobs = scalar_as<int>(v, key);
        } else if (key == "output") {
            parse_output(v, plan);
        } else if (key == "mac") {
            parse_mac(v, plan.base.mac);
        } else if (key == "schedule") {
            parse_schedule(v, plan.base.schedule);
        } else {
            config_error(key, "unknown key");
        }
    }
    check_plan(plan);
    return plan;
}

ExperimentPlan parse_config_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::InvalidConfig, "config: cannot open " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

void apply_overrides(ExperimentPlan& plan, const PlanOverrides& o) {
    if (o.protocol) plan.protocols = {parse_protocol(*o.protocol)};
    if (o.stations) plan.stations = {*o.stations};
    if (o.rate) {
        check_rate(*o.rate);
        plan.rates = {*o.rate};
    }
    if (o.duration) plan.base.duration_s = *o.duration;
    if (o.seed) plan.seeds = {*o.seed};
    if (o.cca_error) plan.base.cca_error_prob = *o.cca_error;
    if (o.out_dir) plan.out_dir = *o.out_dir;
    if (o.format) plan.format = parse_format(*o.format);
    if (o.jobs) plan.jobs = *o.jobs;
    if (o.force) plan.force = true;
    check_plan(plan);
}

std::vector<RunOutcome> execute_runs(const ExperimentPlan& plan) {
    const auto configs = plan.expand();
    std::vector<RunOutcome> runs(configs.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < configs.size(); i = next++) {
            runs[i].config = configs[i];
            try {
                runs[i].result = run_experiment(configs[i]);
            } catch (const std::exception& e) {
                runs[i].error = e.what();
            }
        }
    };
    const auto n_threads = static_cast<std::size_t>(std::max(1, plan.jobs));
    if (n_threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t t = 0; t < std::min(n_threads, configs.size()); ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    return runs;
}

std::string run_tag(const SimConfig& c) {
    return std::string(to_string(c.protocol)) + "_r" + std::to_string(c.rate_mbps) + "_n" +
           std::to_string(c.n_stations) + "_s" + std::to_string(c.seed);
}

std::optional<InterarrivalStats> pooled_interarrival(
    const std::vector<std::optional<InterarrivalStats>>& per_station) {
    std::int64_t count = 0;
    double sum = 0.0;
    double sum_sq = 0.0;
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (const auto& s : per_station) {
        if (!s) continue;
        const auto n = static_cast<double>(s->samples);
        count += s->samples;
        sum += n * s->mean;
        sum_sq += n * (s->std * s->std + s->mean * s->mean);
        lo = std::min(lo, s->min);
        hi = std::max(hi, s->max);
    }
    if (count == 0) return std::nullopt;
    InterarrivalStats out;
    out.samples = count;
    out.mean = sum / static_cast<double>(count);
    out.std = std::sqrt(std::max(0.0, sum_sq / static_cast<double>(count) - out.mean * out.mean));
    if (lo == hi) out.std = 0.0;
    out.min = lo;
    out.max = hi;
    return out;
}

void write_summary_csv(std::ostream& out, const std::vector<RunOutcome>& runs) {
    out << "protocol,rate_mbps,n,seed,station,throughput_mbps,jfi,min_max_ratio,iat_mean_us,iat_std_us,"
           "loss_fraction,convergence_us\n";
    for (const auto& run : runs) {
        if (!run.result) continue;
        const MetricsReport& m = run.result->metrics;
        const std::string jfi_s = opt_num(m.jfi);
        const std::string mm_s = opt_num(m.min_max_ratio);
        const std::string conv_s = opt_micros(m.convergence_time);
        for (std::size_t i = 0; i < m.per_station_throughput.size(); ++i) {
            write_run_prefix(out, run.config);
            const auto& ia = m.interarrival[i];
            out << ',' << i << ',' << num(m.per_station_throughput[i]) << ',' << jfi_s << ',' << mm_s << ','
                << (ia ? num(ia->mean, 3) : "") << ',' << (ia ? num(ia->std, 3) : "") << ','
                << opt_num(m.loss_fraction[i]) << ',' << conv_s << '\n';
        }
        const auto pooled = pooled_interarrival(m.interarrival);
        write_run_prefix(out, run.config);
        out << ",all," << num(m.aggregate_throughput) << ',' << jfi_s << ',' << mm_s << ','
            << (pooled ? num(pooled->mean, 3) : "") << ',' << (pooled ? num(pooled->std, 3) : "") << ','
            << opt_num(m.aggregate_loss_fraction) << ',' << conv_s << '\n';
    }
}

void write_summary_json(std::ostream& out, const std::vector<RunOutcome>& runs) {
    nlohmann::ordered_json all = nlohmann::ordered_json::array();
    for (const auto& run : runs) all.push_back(metrics_json(run));
    out << all.dump(2) << '\n';
}

void write_run_metrics_csv(std::ostream& out, const RunOutcome& run) {
    write_summary_csv(out, {run});
}

void write_run_metrics_json(std::ostream& out, const RunOutcome& run) {
    out << metrics_json(run).dump(2) << '\n';
}

void write_throughput_stacks_csv(std::ostream& out, const std::vector<RunOutcome>& runs) {
    out << "protocol,rate_mbps,n,seed,rank,station,throughput_mbps\n";
    for (const auto& run : runs) {
        if (!run.result) continue;
        const auto& tp = run.result->metrics.per_station_throughput;
        std::vector<std::size_t> order(tp.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return tp[a] > tp[b]; });
        for (std::size_t rank = 0; rank < order.size(); ++rank) {
            write_run_prefix(out, run.config);
            out << ',' << rank << ',' << order[rank] << ',' << num(tp[order[rank]]) << '\n';
        }
    }
}

void write_fairness_csv(std::ostream& out, const std::vector<RunOutcome>& runs) {
    out << "protocol,rate_mbps,n,seed,min_max_ratio,jfi,aggregate_throughput_mbps\n";
    for (const auto& run : runs) {
        if (!run.result) continue;
        const auto& m = run.result->metrics;
        write_run_prefix(out, run.config);
        out << ',' << opt_num(m.min_max_ratio) << ',' << opt_num(m.jfi) << ',' << num(m.aggregate_throughput)
            << '\n';
    }
}

void write_interarrival_csv(std::ostream& out, const std::vector<RunOutcome>& runs) {
    // reference: pooled CF-MAC mean of the run sharing (rate, n, seed)
    std::map<std::tuple<int, int, std::uint64_t>, double> reference;
    for (const auto& run : runs) {
        if (!run.result || run.config.protocol != ProtocolKind::CfMac) continue;
        if (auto pooled = pooled_interarrival(run.result->metrics.interarrival)) {
            reference[{run.config.rate_mbps, run.config.n_stations, run.config.seed}] = pooled->mean;
        }
    }
    out << "protocol,rate_mbps,n,seed,station,iat_mean_us,iat_std_us,iat_min_us,iat_max_us,cfmac_reference_mean_us,"
           "normalized_mean,normalized_min,normalized_max\n";
    for (const auto& run : runs) {
        if (!run.result) continue;
        const auto& m = run.result->metrics;
        const auto ref = reference.find({run.config.rate_mbps, run.config.n_stations, run.config.seed});
        for (std::size_t i = 0; i < m.interarrival.size(); ++i) {
            const auto& ia = m.interarrival[i];
            if (!ia) continue;
            write_run_prefix(out, run.config);
            out << ',' << i << ',' << num(ia->mean, 3) << ',' << num(ia->std, 3) << ',' << num(ia->min, 0) << ','
                << num(ia->max, 0) << ',';
            if (ref != reference.end()) {
                const auto norm = normalize_interarrival(*ia, ref->second);
                out << num(ref->second, 3) << ',' << num(norm.mean) << ',' << num(norm.min) << ','
                    << num(norm.max);
            } else {
                out << ",,,";
            }
            out << '\n';
        }
    }
}

void write_losses_csv(std::ostream& out, const std::vector<RunOutcome>& runs) {
    out << "protocol,rate_mbps,n,seed,loss_fraction,bianchi_p\n";
    std::map<int, double> model;
    for (const auto& run : runs) {
        if (!run.result) continue;
        const int n = run.config.n_stations;
        if (!model.count(n)) {
            model[n] = solve_fixed_point(DcfModelParams{n, run.config.mac.cw_min, run.config.mac.max_stage}).p;
        }
        write_run_prefix(out, run.config);
        out << ',' << opt_num(run.result->metrics.aggregate_loss_fraction) << ',' << num(model[n], 8) << '\n';
    }
}

PlanReport run_plan(const ExperimentPlan& plan, std::ostream& log) {
    namespace fs = std::filesystem;
    const fs::path summary = plan.out_dir / "experiment_summary.csv";
    if (fs::exists(summary) && !plan.force) {
        throw Error(ErrorCode::InvalidConfig,
                    "out: " + plan.out_dir.string() + " already holds results (use --force to overwrite)");
    }
    std::error_code ec;
    fs::create_directories(plan.out_dir / "runs", ec);
    if (ec) throw Error(ErrorCode::Io, "cannot create " + plan.out_dir.string() + ": " + ec.message());

    PlanReport report;
    report.runs = execute_runs(plan);

    for (const auto& run : report.runs) {
        const std::string tag = run_tag(run.config);
        if (!run.result) {
            log << "run " << tag << " failed: " << run.error << '\n';
            report.exit_code = 2;
            continue;
        }
        if (plan.write_traces) {
            write_file(plan.out_dir / "runs" / (tag + ".trace.csv"),
                       [&](std::ostream& o) { write_trace(o, run.result->trace); });
        }
        if (plan.format == OutputFormat::Json) {
            write_file(plan.out_dir / "runs" / (tag + ".metrics.json"),
                       [&](std::ostream& o) { write_run_metrics_json(o, run); });
        } else {
            write_file(plan.out_dir / "runs" / (tag + ".metrics.csv"),
                       [&](std::ostream& o) { write_run_metrics_csv(o, run); });
        }
        const auto& m = run.result->metrics;
        log << tag << ": aggregate " << num(m.aggregate_throughput, 3) << " Mb/s, JFI " << opt_num(m.jfi, 4)
            << ", loss " << opt_num(m.aggregate_loss_fraction, 4) << '\n';
    }

    write_file(summary, [&](std::ostream& o) { write_summary_csv(o, report.runs); });
    if (plan.format == OutputFormat::Json) {
        write_file(plan.out_dir / "experiment_summary.json", [&](std::ostream& o) { write_summary_json(o, report.runs); });
    }
    write_file(plan.out_dir / "throughput_stacks.csv", [&](std::ostream& o) { write_throughput_stacks_csv(o, report.runs); });
    write_file(plan.out_dir / "fairness.csv", [&](std::ostream& o) { write_fairness_csv(o, report.runs); });
    write_file(plan.out_dir / "interarrival.csv", [&](std::ostream& o) { write_interarrival_csv(o, report.runs); });
    write_file(plan.out_dir / "losses.csv", [&](std::ostream& o) { write_losses_csv(o, report.runs); });
    return report;
}

}  // namespace cfmac
