#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "nicmap/mapping.hpp"
#include "nicmap/metrics.hpp"
#include "nicmap/simengine.hpp"

namespace nicmap::cli {

struct RunConfig {
    std::string cluster_path;  // empty: default platform
    std::string workload_path;
    std::string placement_path;  // simulate only
    std::vector<Strategy> strategies;
    std::optional<std::uint64_t> seed;
    std::string out_path;  // map: directory; otherwise report file, empty = stdout
    ReportFormat format = ReportFormat::Csv;
    SimOptions sim;
    WaitingScope waiting = WaitingScope::All;
    std::string trace_path;
    bool table = false;

    /// Throws std::invalid_argument when the invariants do not hold.
    void validate(bool needs_strategies) const;
};

/// Parses a comma-separated strategy list; sorted by name, duplicates dropped.
std::vector<Strategy> parse_strategies(const std::string& list);

int cmd_map(const RunConfig& cfg, std::ostream& out);
int cmd_simulate(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_compare(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_validate(const RunConfig& cfg, std::ostream& out);

/// Entry point; returns the process exit code. Runtime failures print a
/// diagnostic to `err` and return 1, usage errors return 2.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace nicmap::cli
