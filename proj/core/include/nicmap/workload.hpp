#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "nicmap/topology.hpp"

namespace nicmap {

enum class Pattern { AllToAll, BcastScatter, GatherReduce, Linear, Explicit };

std::string_view to_string(Pattern p) noexcept;
/// Accepts the workload-file spelling ("all_to_all", ...). Throws SchemaError.
Pattern pattern_from_string(std::string_view s);

/// One directed message stream i -> j.
struct CommEdge {
    std::uint32_t src = 0;
    std::uint32_t dst = 0;
    Bytes length = 0;
    double rate = 0;          // messages per second
    std::uint64_t count = 0;  // messages sent over this stream

    bool operator==(const CommEdge&) const = default;
};

/// Sparse P x P communication demand, stored CSR-style by source. A pair may
/// carry several streams (explicit traces with mixed message sizes).
class CommMatrix {
public:
    CommMatrix() = default;
    /// Throws SchemaError on out-of-range, self, or non-positive entries.
    CommMatrix(std::uint32_t processes, std::vector<CommEdge> edges);

    std::uint32_t processes() const noexcept { return processes_; }
    std::span<const CommEdge> edges() const noexcept { return edges_; }
    std::span<const CommEdge> out_edges(std::uint32_t src) const;

    /// Distinct destinations of `src`, ascending.
    std::vector<std::uint32_t> out_neighbors(std::uint32_t src) const;
    /// L_ij * lambda_ij for i -> j: largest length on the pair times its total rate.
    double pair_demand(std::uint32_t src, std::uint32_t dst) const;
    Bytes max_length() const noexcept;

    bool operator==(const CommMatrix&) const = default;

private:
    std::uint32_t processes_ = 0;
    std::vector<CommEdge> edges_;
    std::vector<std::size_t> offsets_;
};

struct JobSpec {
    std::uint32_t job_id = 0;
    std::uint32_t num_processes = 0;
    Pattern pattern = Pattern::AllToAll;
    Bytes msg_length = 0;
    double msg_rate = 0;
    std::uint64_t msg_count = 0;
    std::optional<CommMatrix> explicit_matrix;

    bool operator==(const JobSpec&) const = default;
};

struct Workload {
    std::string name;
    std::vector<JobSpec> jobs;

    std::uint64_t total_processes() const noexcept;
};

enum class SizeClass { Large, Medium, Small };

std::string_view to_string(SizeClass c) noexcept;

struct AdjacencyStats {
    std::vector<std::uint32_t> adj;
    Rational adj_avg;
    std::uint32_t adj_max = 0;
};

/// Point-to-point expansion of a patterned job. Senders with several
/// destinations rotate over them starting just after their own index, so the
/// total message count is split round-robin in that order. Throws
/// PatternUndefined for Explicit jobs.
CommMatrix expand_pattern(const JobSpec& job);

/// Explicit matrix if present, otherwise the expanded pattern.
CommMatrix matrix_of(const JobSpec& job);

/// Small < 2 KiB <= Medium < 1 MiB <= Large, judged on the largest message.
SizeClass classify(const JobSpec& job);
SizeClass classify_length(Bytes max_length) noexcept;

/// Neighbour counts over the symmetrised edge set.
AdjacencyStats adjacency_stats(const CommMatrix& m);

/// Outgoing demand of process i in bytes per second.
double comm_demand(const CommMatrix& m, std::uint32_t i);

Workload workload_from_json(const nlohmann::json& doc, std::string name = {});
nlohmann::json to_json(const Workload& w);
/// The workload name is the file stem.
Workload load_workload(const std::filesystem::path& path);

}  // namespace nicmap
