#pragma once

#include <compare>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace nicmap {

using Bytes = std::uint64_t;
using Nanoseconds = std::int64_t;

inline constexpr Bytes KiB = Bytes{1} << 10;
inline constexpr Bytes MiB = Bytes{1} << 20;
inline constexpr double GiB_per_s = static_cast<double>(Bytes{1} << 30);

/// Exact non-negative ratio used for averages that are compared against each
/// other (free cores per node, mean adjacency). Never normalised; comparisons
/// cross-multiply.
struct Rational {
    std::int64_t num = 0;
    std::int64_t den = 1;

    double value() const noexcept { return static_cast<double>(num) / static_cast<double>(den); }

    friend bool operator==(const Rational& a, const Rational& b) noexcept {
        return a.num * b.den == b.num * a.den;
    }
    friend std::strong_ordering operator<=>(const Rational& a, const Rational& b) noexcept {
        return a.num * b.den <=> b.num * a.den;
    }
};

/// Homogeneous cluster: identical nodes behind a single switch.
struct ClusterSpec {
    std::uint32_t num_nodes = 16;
    std::uint32_t sockets_per_node = 4;
    std::uint32_t cores_per_socket = 4;
    double mem_bandwidth = 4.0 * GiB_per_s;
    double remote_mem_penalty = 1.10;
    // Not given numerically for the reference platform; 8 GiB/s is an assumption.
    double cache_bandwidth = 8.0 * GiB_per_s;
    Bytes cache_msg_cap = 1 * MiB;
    double nic_bandwidth = 1.0 * GiB_per_s;
    Nanoseconds switch_latency = 100;

    std::uint32_t cores_per_node() const noexcept { return sockets_per_node * cores_per_socket; }
    std::uint32_t total_cores() const noexcept { return num_nodes * cores_per_node(); }

    /// Throws SchemaError naming the first violated constraint.
    void validate() const;

    bool operator==(const ClusterSpec&) const = default;
};

struct CoreId {
    std::uint32_t node = 0;
    std::uint32_t socket = 0;
    std::uint32_t core = 0;

    auto operator<=>(const CoreId&) const = default;
};

bool valid_core(const ClusterSpec& spec, const CoreId& id) noexcept;
std::string to_string(const CoreId& id);

/// Free-core bookkeeping for one mapping run.
class Occupancy {
public:
    explicit Occupancy(ClusterSpec spec);

    const ClusterSpec& spec() const noexcept { return spec_; }

    /// Throws CoreAlreadyUsed, or std::out_of_range for a core outside the cluster.
    void claim(const CoreId& id);

    bool is_used(const CoreId& id) const;
    std::uint32_t node_free(std::uint32_t node) const { return node_free_.at(node); }
    std::uint32_t socket_free(std::uint32_t node, std::uint32_t socket) const;
    std::uint32_t total_free() const noexcept { return total_free_; }
    std::uint32_t used_count() const noexcept { return spec_.total_cores() - total_free_; }

    /// Lowest-index free core of the socket, if any.
    std::optional<CoreId> lowest_free_core(std::uint32_t node, std::uint32_t socket) const;
    /// Lowest free core of the node in (socket, core) order, if any.
    std::optional<CoreId> lowest_free_core(std::uint32_t node) const;

    /// Every free core in (node, socket, core) order.
    std::vector<CoreId> free_cores() const;

private:
    std::size_t flat(const CoreId& id) const;

    ClusterSpec spec_;
    std::vector<bool> used_;
    std::vector<std::uint32_t> node_free_;
    std::vector<std::uint32_t> socket_free_;
    std::uint32_t total_free_;
};

/// Total free cores divided by the node count, unreduced.
Rational free_cores_avg(const Occupancy& occ);

/// Node with the most free cores (lowest index on ties) and, inside it, the
/// socket with the most free cores (lowest index on ties). Nodes rejected by
/// `eligible` are skipped. Throws ClusterFull when no eligible node has a
/// free core.
std::pair<std::uint32_t, std::uint32_t> select_node_socket(
    const Occupancy& occ, const std::function<bool(std::uint32_t)>& eligible = {});

/// Socket of `node` with the most free cores, lowest index on ties.
std::optional<std::uint32_t> select_socket(const Occupancy& occ, std::uint32_t node);

ClusterSpec cluster_from_json(const nlohmann::json& doc);
nlohmann::json to_json(const ClusterSpec& spec);
/// Reads a cluster document; an empty path yields the default platform.
ClusterSpec load_cluster(const std::filesystem::path& path);

}  // namespace nicmap
