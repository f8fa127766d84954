#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "nicmap/simengine.hpp"

namespace nicmap {

/// Which servers contribute to total waiting. `NicMem` drops cache waits.
enum class WaitingScope { All, NicMem };

struct JobFinish {
    std::uint32_t job_id = 0;
    Nanoseconds finish = 0;

    bool operator==(const JobFinish&) const = default;
};

struct ServerUtilization {
    std::string server;
    double utilization = 0;

    bool operator==(const ServerUtilization&) const = default;
};

struct MetricsReport {
    std::string workload;
    std::string strategy;
    Nanoseconds total_waiting = 0;
    std::vector<JobFinish> per_job_finish;
    Nanoseconds workload_finish = 0;
    Nanoseconds total_job_finish = 0;
    std::vector<ServerUtilization> per_server_utilization;

    bool operator==(const MetricsReport&) const = default;
};

MetricsReport aggregate(const RawResults& raw, WaitingScope scope = WaitingScope::All);

enum class Metric { TotalWaiting, WorkloadFinish, TotalJobFinish };

std::string_view to_string(Metric m) noexcept;
Nanoseconds metric_value(const MetricsReport& r, Metric m) noexcept;

/// 100 * (baseline - candidate) / baseline; empty when the baseline is zero.
std::optional<double> improvement(const MetricsReport& candidate, const MetricsReport& baseline, Metric m);

/// Exact decimal rendering of a nanosecond count in milliseconds / seconds.
std::string ns_to_ms(Nanoseconds ns);
std::string ns_to_s(Nanoseconds ns);

enum class ReportFormat { Csv, Json };

/// Columns: workload,strategy,total_waiting_ms,workload_finish_s,total_job_finish_s.
void emit_csv(std::ostream& out, const std::vector<MetricsReport>& reports);
nlohmann::json to_json(const MetricsReport& r);
MetricsReport report_from_json(const nlohmann::json& doc);

}  // namespace nicmap
