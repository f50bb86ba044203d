#include <algorithm>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "cfmac/error.hpp"
#include "cfmac/trace.hpp"

namespace cfmac {

const char* to_string(Outcome outcome) {
    switch (outcome) {
        case Outcome::Success: return "Success";
        case Outcome::Collision: return "Collision";
        case Outcome::CcaError: return "CcaError";
    }
    return "?";
}

void TraceLog::append(const TransmissionRecord& rec) {
    const auto idx = static_cast<std::size_t>(rec.station);
    if (idx >= successes.size()) {
        successes.resize(idx + 1, 0);
        failures.resize(idx + 1, 0);
    }
    if (rec.outcome == Outcome::Success) {
        ++successes[idx];
    } else {
        ++failures[idx];
    }
    records.push_back(rec);
}

void write_trace(std::ostream& out, const TraceLog& trace) {
    out << "station,start_us,end_us,outcome,mode\n";
    for (const auto& r : trace.records) {
        out << r.station << ',' << r.start << ',' << r.end << ',' << to_string(r.outcome) << ','
            << to_string(r.mode_at_tx) << '\n';
    }
}

namespace {

Outcome parse_outcome(const std::string& s, std::size_t line) {
    if (s == "Success") return Outcome::Success;
    if (s == "Collision") return Outcome::Collision;
    if (s == "CcaError") return Outcome::CcaError;
    throw Error(ErrorCode::Io, "trace line " + std::to_string(line) + ": bad outcome '" + s + "'");
}

AccessMode parse_mode(const std::string& s, std::size_t line) {
    if (s == "Legacy") return AccessMode::Legacy;
    if (s == "Deterministic") return AccessMode::Deterministic;
    throw Error(ErrorCode::Io, "trace line " + std::to_string(line) + ": bad mode '" + s + "'");
}

}  // namespace

TraceLog read_trace(std::istream& in, int n_stations) {
    TraceLog trace(n_stations);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (lineno == 1 && line.rfind("station,", 0) == 0) continue;

        std::stringstream ss(line);
        std::string f[5];
        for (auto& field : f) {
            if (!std::getline(ss, field, ',')) {
                throw Error(ErrorCode::Io, "trace line " + std::to_string(lineno) + ": expected 5 fields");
            }
        }
        TransmissionRecord r;
        try {
            r.station = std::stoi(f[0]);
            r.start = std::stoll(f[1]);
            r.end = std::stoll(f[2]);
        } catch (const std::exception&) {
            throw Error(ErrorCode::Io, "trace line " + std::to_string(lineno) + ": bad number");
        }
        if (r.station < 0 || r.end <= r.start) {
            throw Error(ErrorCode::Io, "trace line " + std::to_string(lineno) + ": invalid station or interval");
        }
        r.outcome = parse_outcome(f[3], lineno);
        r.mode_at_tx = parse_mode(f[4], lineno);
        trace.append(r);
    }
    return trace;
}

}  // namespace cfmac
