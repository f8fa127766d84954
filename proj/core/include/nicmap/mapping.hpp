#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "nicmap/topology.hpp"
#include "nicmap/workload.hpp"

namespace nicmap {

struct ProcessRef {
    std::uint32_t job = 0;
    std::uint32_t process = 0;

    auto operator<=>(const ProcessRef&) const = default;
};

/// Assignment of (job, process) to cores, ordered by (job, process).
class Placement {
public:
    using Map = std::map<ProcessRef, CoreId>;

    void assign(ProcessRef p, CoreId c) { map_[p] = c; }
    const CoreId& at(ProcessRef p) const;
    std::optional<CoreId> find(ProcessRef p) const;
    std::size_t size() const noexcept { return map_.size(); }
    Map::const_iterator begin() const noexcept { return map_.begin(); }
    Map::const_iterator end() const noexcept { return map_.end(); }

    /// Processes per node, all jobs.
    std::vector<std::uint32_t> per_node_counts(const ClusterSpec& spec) const;
    /// Processes of one job per node.
    std::vector<std::uint32_t> per_node_counts(const ClusterSpec& spec, std::uint32_t job) const;

    bool operator==(const Placement&) const = default;

private:
    Map map_;
};

/// Throws std::invalid_argument describing the first violation of
/// injectivity, totality over the workload, or core range.
void check_placement(const Placement& pl, const Workload& w, const ClusterSpec& spec);

enum class Strategy { Blocked, Cyclic, Drb, New };

std::string_view to_string(Strategy s) noexcept;
/// Throws std::invalid_argument on an unknown name.
Strategy strategy_from_string(std::string_view s);

/// Per-node cap on one job's processes; empty means unlimited.
struct Threshold {
    std::optional<std::uint32_t> cap;

    bool unlimited() const noexcept { return !cap.has_value(); }
    bool operator==(const Threshold&) const = default;
};

Threshold compute_threshold(const AdjacencyStats& stats, const Occupancy& occ);

// All strategies map jobs onto `occ` in place, starting from whatever it
// already holds, and throw ClusterFull when capacity runs out.
Placement map_blocked(const Workload& w, Occupancy& occ);
Placement map_cyclic(const Workload& w, Occupancy& occ);
Placement map_drb(const Workload& w, Occupancy& occ);
Placement map_new(const Workload& w, Occupancy& occ);

/// Convenience entry point on an empty cluster.
Placement map_workload(Strategy s, const Workload& w, const ClusterSpec& spec);

/// Job order used by the contention-aware strategy: size class (large first),
/// then mean adjacency descending, then job id.
std::vector<std::size_t> new_strategy_job_order(const Workload& w);

}  // namespace nicmap
