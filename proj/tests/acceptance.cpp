// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
// failure. Every simulation uses the default 90 s duration and 5 s warmup.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <limits>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "cfmac/analytic_model.hpp"
#include "cfmac/experiment.hpp"
#include "cfmac/metrics.hpp"
#include "cfmac/phy_timing.hpp"
#include "cfmac/schedule_timer.hpp"
#include "cfmac/sim_engine.hpp"
#include "fuzz_support.hpp"
#include "oracles.hpp"

using namespace cfmac;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

constexpr int kSeeds = 10;

struct Run {
    ExperimentResult result;
    double wall_s = 0.0;
};

using Key = std::tuple<ProtocolKind, int, int, std::uint64_t>;

class RunCache {
public:
    const Run& get(ProtocolKind p, int rate, int n, std::uint64_t seed) {
        const Key key{p, rate, n, seed};
        auto it = runs_.find(key);
        if (it != runs_.end()) return it->second;
        SimConfig c;
        c.protocol = p;
        c.rate_mbps = rate;
        c.n_stations = n;
        c.seed = seed;
        const auto t0 = Clock::now();
        Run r{run_experiment(c), 0.0};
        r.wall_s = std::chrono::duration<double>(Clock::now() - t0).count();
        return runs_.emplace(key, std::move(r)).first->second;
    }

private:
    std::map<Key, Run> runs_;
};

struct Verdict {
    bool pass = true;
    std::ostringstream detail;
    std::ostringstream problems;

    void fail(const std::string& why) {
        if (!pass) problems << "; ";
        pass = false;
        problems << why;
    }

    std::string text() const {
        std::string out = detail.str();
        if (!pass) out += "| failed: " + problems.str();
        return out;
    }
};

std::string fmt(double v, int prec = 4) {
    std::ostringstream o;
    o.precision(prec);
    o << std::fixed << v;
    return o.str();
}

// Per-station start times of the records that begin at or after `from`.
std::vector<std::vector<Micros>> starts_after(const TraceLog& trace, Micros from) {
    std::vector<std::vector<Micros>> out(static_cast<std::size_t>(trace.n_stations()));
    for (const auto& r : trace.records) {
        if (r.start >= from) out[static_cast<std::size_t>(r.station)].push_back(r.start);
    }
    return out;
}

Verdict criterion_1(RunCache& cache) {
    Verdict v;
    const SimConfig defaults;
    // (rate, per-station share, epsilon) from the testbed schedule table.
    const std::vector<std::tuple<int, double, double>> table{{6, 2233.5, 91.5}, {48, 421.5, 103.5}};
    for (const auto& [rate, share, epsilon] : table) {
        const Run& run = cache.get(ProtocolKind::CfMac, rate, 12, 1);
        const auto settled = schedule_settled_time(run.result.trace);
        if (!settled) {
            v.fail("rate " + std::to_string(rate) + " never settled");
            continue;
        }
        const double expected = testing::settled_aggregate_mbps(1470, share, epsilon);
        const MeasurementWindow window{std::max(defaults.warmup_us(), *settled), defaults.duration_us()};
        const auto tp = throughput_per_station(run.result.trace, window, defaults.payload_bytes);
        double aggregate = 0.0;
        for (double x : tp) aggregate += x;
        const double rel = std::abs(aggregate - expected) / expected;
        v.detail << "rate " << rate << ": " << fmt(aggregate) << " vs " << fmt(expected) << " Mb/s ("
                 << fmt(100 * rel, 3) << "%), " << fmt(run.wall_s, 3) << " s wall; ";
        if (rel > 0.02) v.fail("rate " + std::to_string(rate) + " off by " + fmt(100 * rel, 3) + "%");
        if (run.wall_s >= 10.0) v.fail("rate " + std::to_string(rate) + " took " + fmt(run.wall_s, 2) + " s");
    }
    return v;
}

Verdict criterion_2(RunCache& cache) {
    Verdict v;
    const SimConfig defaults;
    Micros worst = 0;
    for (int rate : kSupportedRates) {
        for (int seed = 1; seed <= kSeeds; ++seed) {
            const auto& trace = cache.get(ProtocolKind::CfMac, rate, 12, seed).result.trace;
            const auto conv = convergence_time(trace);
            const std::string tag = "rate " + std::to_string(rate) + " seed " + std::to_string(seed);
            if (!conv || *conv >= defaults.duration_us()) {
                v.fail(tag + ": no convergence");
                continue;
            }
            worst = std::max(worst, *conv);
            // Independent scan: every record from the convergence point on
            // that involves a deterministic station must be a success.
            for (const auto& r : trace.records) {
                if (r.end > *conv && r.mode_at_tx == AccessMode::Deterministic && r.outcome != Outcome::Success) {
                    v.fail(tag + ": deterministic failure at " + std::to_string(r.start) + " us");
                    break;
                }
            }
        }
    }
    v.detail << "50 runs, latest convergence " << fmt(worst / 1e6, 3) << " s; ";
    return v;
}

Verdict criterion_3(RunCache& cache) {
    Verdict v;
    double worst_jfi = 1.0;
    double worst_ratio = 1.0;
    for (int rate : kSupportedRates) {
        int lower = 0;
        for (int seed = 1; seed <= kSeeds; ++seed) {
            const auto& cf = cache.get(ProtocolKind::CfMac, rate, 12, seed).result.metrics;
            const auto& ca = cache.get(ProtocolKind::CsmaCa, rate, 12, seed).result.metrics;
            const double j = cf.jfi.value_or(0.0);
            const double r = cf.min_max_ratio.value_or(0.0);
            worst_jfi = std::min(worst_jfi, j);
            worst_ratio = std::min(worst_ratio, r);
            if (j < 0.99 || r < 0.95) {
                v.fail("CF-MAC rate " + std::to_string(rate) + " seed " + std::to_string(seed) + " JFI " + fmt(j) +
                       " min/max " + fmt(r));
            }
            if (ca.min_max_ratio.value_or(1.0) < r) ++lower;
        }
        v.detail << "rate " << rate << ": CSMA/CA lower in " << lower << "/10; ";
        if (lower < 9) v.fail("rate " + std::to_string(rate) + ": CSMA/CA lower in only " + std::to_string(lower));
    }
    v.detail << "CF-MAC worst JFI " << fmt(worst_jfi) << ", worst min/max " << fmt(worst_ratio) << "; ";
    return v;
}

Verdict criterion_4(RunCache& cache) {
    Verdict v;
    for (int n : {2, 4, 8, 12}) {
        double sum = 0.0;
        for (int seed = 1; seed <= kSeeds; ++seed) {
            sum += cache.get(ProtocolKind::CsmaCa, 6, n, seed).result.metrics.aggregate_loss_fraction.value_or(0.0);
        }
        const double measured = sum / kSeeds;
        const double model = solve_fixed_point({n, 16, 6}).p;
        const double rel = std::abs(measured - model) / model;
        v.detail << "N=" << n << ": " << fmt(measured) << " vs " << fmt(model) << " (" << fmt(100 * rel, 2)
                 << "%); ";
        if (rel > 0.15) v.fail("N=" + std::to_string(n) + " off by " + fmt(100 * rel, 2) + "%");
    }
    return v;
}

Verdict criterion_5(RunCache& cache) {
    Verdict v;
    double max_std = 0.0;
    double min_cv = std::numeric_limits<double>::infinity();
    for (int rate : kSupportedRates) {
        for (int seed = 1; seed <= kSeeds; ++seed) {
            const std::string tag = "rate " + std::to_string(rate) + " seed " + std::to_string(seed);
            const auto& cf = cache.get(ProtocolKind::CfMac, rate, 12, seed).result.trace;
            const auto settled = schedule_settled_time(cf);
            if (!settled) {
                v.fail(tag + ": CF-MAC never settled");
                continue;
            }
            for (const auto& starts : starts_after(cf, *settled)) {
                const auto st = interarrival_from_starts(starts);
                if (!st) {
                    v.fail(tag + ": too few post-settle transmissions");
                    continue;
                }
                Micros lo = kNever;
                Micros hi = 0;
                for (std::size_t i = 1; i < starts.size(); ++i) {
                    lo = std::min(lo, starts[i] - starts[i - 1]);
                    hi = std::max(hi, starts[i] - starts[i - 1]);
                }
                max_std = std::max(max_std, st->std);
                if (st->std != 0.0 || lo != hi) v.fail(tag + ": CF-MAC gap jitter " + std::to_string(hi - lo) + " us");
            }
            for (const auto& ia : cache.get(ProtocolKind::CsmaCa, rate, 12, seed).result.metrics.interarrival) {
                const double cv = ia ? ia->coefficient_of_variation() : 0.0;
                min_cv = std::min(min_cv, cv);
                if (cv <= 0.25) v.fail(tag + ": CSMA/CA CV " + fmt(cv));
            }
        }
    }
    v.detail << "CF-MAC max std " << fmt(max_std, 3) << " us, CSMA/CA min per-station CV " << fmt(min_cv) << "; ";
    return v;
}

Verdict criterion_6(RunCache& cache) {
    Verdict v;
    for (int rate : kSupportedRates) {
        double min_margin = std::numeric_limits<double>::infinity();
        for (int seed = 1; seed <= kSeeds; ++seed) {
            const double cf = cache.get(ProtocolKind::CfMac, rate, 12, seed).result.metrics.aggregate_throughput;
            const double ca = cache.get(ProtocolKind::CsmaCa, rate, 12, seed).result.metrics.aggregate_throughput;
            min_margin = std::min(min_margin, cf - ca);
            if (!(cf > ca)) {
                v.fail("rate " + std::to_string(rate) + " seed " + std::to_string(seed) + ": " + fmt(cf) +
                       " <= " + fmt(ca));
            }
        }
        v.detail << "rate " << rate << " min margin " << fmt(min_margin, 3) << " Mb/s; ";
    }
    return v;
}

Verdict criterion_7() {
    Verdict v;
    double slowest_ms = 0.0;
    for (int n : {2, 4, 8, 12, 24}) {
        const auto t0 = Clock::now();
        const auto fp = solve_fixed_point({n, 16, 6});
        const double ms = std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
        slowest_ms = std::max(slowest_ms, ms);
        const double oracle = testing::grid_search_p(n, 16, 6);
        const std::string tag = "N=" + std::to_string(n);
        if (!(std::abs(fp.residual) < 1e-10)) v.fail(tag + " residual " + std::to_string(fp.residual));
        if (!(std::abs(fp.p - oracle) <= 1e-6)) v.fail(tag + " p " + fmt(fp.p, 8) + " vs oracle " + fmt(oracle, 8));
        if (ms >= 1.0) v.fail(tag + " took " + fmt(ms, 3) + " ms");
        v.detail << tag << " p=" << fmt(fp.p, 6) << "; ";
    }
    v.detail << "slowest solve " << fmt(slowest_ms * 1000, 1) << " us; ";
    return v;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Verdict criterion_8() {
    Verdict v;
    const fs::path root = fs::temp_directory_path() / "cfmac_acceptance_determinism";
    fs::remove_all(root);
    ExperimentPlan plan;
    plan.protocols = {ProtocolKind::CsmaCa, ProtocolKind::CsmaEca, ProtocolKind::CfMac};
    plan.rates = {6, 11};
    plan.base.cca_error_prob = 0.01;
    std::ostringstream log;
    for (const char* sub : {"a", "b"}) {
        plan.out_dir = root / sub;
        if (run_plan(plan, log).exit_code != 0) v.fail(std::string("run ") + sub + " had failures");
    }
    int compared = 0;
    for (const auto& entry : fs::recursive_directory_iterator(root / "a")) {
        if (!entry.is_regular_file()) continue;
        const fs::path rel = fs::relative(entry.path(), root / "a");
        ++compared;
        if (slurp(entry.path()) != slurp(root / "b" / rel)) v.fail(rel.string() + " differs");
    }
    if (compared < 7) v.fail("only " + std::to_string(compared) + " files written");
    v.detail << compared << " files compared byte for byte; ";
    fs::remove_all(root);
    return v;
}

Verdict criterion_9() {
    Verdict v;
    for (auto kind : {ProtocolKind::CsmaCa, ProtocolKind::CsmaEca, ProtocolKind::CfMac}) {
        const auto report = testing::fuzz_state_machine(kind, 100'000, 60, 2024);
        v.detail << to_string(kind) << ": " << report.sequences << " sequences, " << report.transitions
                 << " transitions; ";
        if (!report.violation.empty()) v.fail(std::string(to_string(kind)) + ": " + report.violation);
        if (report.sequences < 100'000) v.fail(std::string(to_string(kind)) + ": too few sequences");
    }
    return v;
}

}  // namespace

int main() {
    RunCache cache;
    struct Criterion {
        int id;
        const char* name;
        std::function<Verdict()> check;
    };
    const std::vector<Criterion> criteria{
        {1, "CF-MAC settled aggregate throughput", [&] { return criterion_1(cache); }},
        {2, "collision-free convergence", [&] { return criterion_2(cache); }},
        {3, "fairness", [&] { return criterion_3(cache); }},
        {4, "CSMA/CA loss vs analytic model", [&] { return criterion_4(cache); }},
        {5, "inter-arrival regularity", [&] { return criterion_5(cache); }},
        {6, "CF-MAC beats CSMA/CA", [&] { return criterion_6(cache); }},
        {7, "analytic solver", [] { return criterion_7(); }},
        {8, "determinism", [] { return criterion_8(); }},
        {9, "state-machine fuzz", [] { return criterion_9(); }},
    };
    int failures = 0;
    for (const auto& c : criteria) {
        Verdict v;
        try {
            v = c.check();
        } catch (const std::exception& e) {
            v.fail(std::string("exception: ") + e.what());
        }
        failures += !v.pass;
        std::cout << (v.pass ? "PASS" : "FAIL") << " criterion " << c.id << " (" << c.name << "): " << v.text()
                  << std::endl;
    }
    std::cout << (criteria.size() - static_cast<std::size_t>(failures)) << "/" << criteria.size()
              << " criteria passed" << std::endl;
    return failures == 0 ? 0 : 1;
}
