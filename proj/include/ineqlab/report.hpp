#pragma once

#include <chrono>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "ineqlab/core.hpp"

namespace ineqlab {

// One verification record. The pass flag is derived, never set by hand:
// pass if and only if margin >= -budget.

struct DeficitReport {
    std::string suite;
    std::string check;
    std::uint64_t config_hash = 0;
    std::uint64_t inputs_digest = 0;
    std::vector<double> measured;
    double bound = 0.0;
    double margin = 0.0;
    double budget = 0.0;
    bool pass = false;
    double wall_seconds = 0.0;
    std::string note;  // empty unless informational or errored

    static DeficitReport make(std::string suite, std::string check,
                              std::uint64_t config_hash, std::uint64_t digest,
                              std::vector<double> measured, double bound,
                              double margin, double budget,
                              std::string note = {}) {
        DeficitReport r;
        r.suite = std::move(suite);
        r.check = std::move(check);
        r.config_hash = config_hash;
        r.inputs_digest = digest;
        r.measured = std::move(measured);
        r.bound = bound;
        r.margin = margin;
        r.budget = budget;
        r.pass = margin >= -budget;
        r.note = std::move(note);
        return r;
    }
};

inline std::string hex64(std::uint64_t v) {
    char buf[19];
    std::snprintf(buf, sizeof(buf), "%016llx", (unsigned long long)v);
    return buf;
}

/// JSON array of records (no wall times: those go to the metadata file so
/// report bodies are byte-stable for fixed config and seed).
inline void write_report_json(const std::vector<DeficitReport>& reports,
                              const std::string& path) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& r : reports) {
        nlohmann::ordered_json o;
        o["suite"] = r.suite;
        o["check"] = r.check;
        o["config_hash"] = hex64(r.config_hash);
        o["inputs_digest"] = hex64(r.inputs_digest);
        o["measured"] = r.measured;
        o["bound"] = r.bound;
        o["margin"] = r.margin;
        o["budget"] = r.budget;
        o["pass"] = r.pass;
        if (!r.note.empty()) o["note"] = r.note;
        arr.push_back(std::move(o));
    }
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path);
    out << arr.dump(2) << "\n";
}

/// CSV summary: config hash, check name, min margin, budget, pass.
inline void write_summary_csv(const std::vector<DeficitReport>& reports,
                              const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path);
    out << "config_hash,check,min_margin,budget,pass\n";
    char buf[256];
    for (const auto& r : reports) {
        std::snprintf(buf, sizeof(buf), "%s,%s/%s,%.17g,%.17g,%d\n",
                      hex64(r.config_hash).c_str(), r.suite.c_str(),
                      r.check.c_str(), r.margin, r.budget, int(r.pass));
        out << buf;
    }
}

/// Wall-clock metadata, kept out of the deterministic artifacts.
inline void write_meta_json(const std::vector<DeficitReport>& reports,
                            const std::string& path) {
    nlohmann::ordered_json o;
    const auto now = std::chrono::system_clock::now().time_since_epoch();
    o["unix_time"] =
        std::chrono::duration_cast<std::chrono::seconds>(now).count();
    nlohmann::ordered_json times;
    for (const auto& r : reports) times[r.suite + "/" + r.check] = r.wall_seconds;
    o["wall_seconds"] = std::move(times);
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path);
    out << o.dump(2) << "\n";
}

}  // namespace ineqlab
