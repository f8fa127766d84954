#pragma once

#include <filesystem>
#include <string>

#include <nlohmann/json_fwd.hpp>

#include "nicmap/mapping.hpp"

namespace nicmap {

/// `[{"job":..,"process":..,"node":..,"socket":..,"core":..}, ...]` in (job, process) order.
nlohmann::json to_json(const Placement& pl);
Placement placement_from_json(const nlohmann::json& doc);
Placement load_placement(const std::filesystem::path& path);

/// Fixed-width table, one row per process.
std::string render_table(const Placement& pl);
/// One line per node: "node  3: 16 processes (job 0: 4, job 2: 12)".
std::string render_node_counts(const Placement& pl, const ClusterSpec& spec);

}  // namespace nicmap
