#include "nicmap/metrics.hpp"

#include <algorithm>
#include <cinttypes>
#include <cstdio>
#include <ostream>

#include <nlohmann/json.hpp>

#include "nicmap/errors.hpp"

namespace nicmap {

MetricsReport aggregate(const RawResults& raw, WaitingScope scope) {
    MetricsReport r;
    for (const auto& m : raw.messages)
        for (const auto& h : m.hop_view()) {
            if (!h.queued()) continue;
            if (scope == WaitingScope::NicMem && h.hop.kind == HopKind::Cache) continue;
            r.total_waiting += h.waiting();
        }
    for (const auto& job : raw.jobs) {
        Nanoseconds f = 0;
        for (auto t : job.process_finish) f = std::max(f, t);
        r.per_job_finish.push_back({job.job_id, f});
        r.workload_finish = std::max(r.workload_finish, f);
        r.total_job_finish += f;
    }
    for (const auto& s : raw.servers) {
        const double u = raw.horizon > 0 ? static_cast<double>(s.busy) / static_cast<double>(raw.horizon) : 0.0;
        r.per_server_utilization.push_back({s.name(), u});
    }
    return r;
}

std::string_view to_string(Metric m) noexcept {
    switch (m) {
        case Metric::TotalWaiting: return "total_waiting";
        case Metric::WorkloadFinish: return "workload_finish";
        case Metric::TotalJobFinish: return "total_job_finish";
    }
    return "unknown";
}

Nanoseconds metric_value(const MetricsReport& r, Metric m) noexcept {
    switch (m) {
        case Metric::TotalWaiting: return r.total_waiting;
        case Metric::WorkloadFinish: return r.workload_finish;
        case Metric::TotalJobFinish: return r.total_job_finish;
    }
    return 0;
}

std::optional<double> improvement(const MetricsReport& candidate, const MetricsReport& baseline, Metric m) {
    const auto base = metric_value(baseline, m);
    if (base == 0) return std::nullopt;
    return 100.0 * static_cast<double>(base - metric_value(candidate, m)) / static_cast<double>(base);
}

namespace {

std::string fixed_decimal(Nanoseconds ns, std::int64_t unit, int digits) {
    const bool neg = ns < 0;
    const auto mag = neg ? -ns : ns;
    char buf[48];
    std::snprintf(buf, sizeof buf, "%s%" PRId64 ".%0*" PRId64, neg ? "-" : "", mag / unit, digits, mag % unit);
    return buf;
}

}  // namespace

std::string ns_to_ms(Nanoseconds ns) { return fixed_decimal(ns, 1'000'000, 6); }
std::string ns_to_s(Nanoseconds ns) { return fixed_decimal(ns, 1'000'000'000, 9); }

void emit_csv(std::ostream& out, const std::vector<MetricsReport>& reports) {
    out << "workload,strategy,total_waiting_ms,workload_finish_s,total_job_finish_s\n";
    for (const auto& r : reports)
        out << r.workload << ',' << r.strategy << ',' << ns_to_ms(r.total_waiting) << ','
            << ns_to_s(r.workload_finish) << ',' << ns_to_s(r.total_job_finish) << '\n';
    if (!out) throw IoError("failed writing CSV report");
}

nlohmann::json to_json(const MetricsReport& r) {
    nlohmann::json jobs = nlohmann::json::array();
    for (const auto& j : r.per_job_finish) jobs.push_back({{"job", j.job_id}, {"finish_ns", j.finish}});
    nlohmann::json util = nlohmann::json::array();
    for (const auto& u : r.per_server_utilization)
        util.push_back({{"server", u.server}, {"utilization", u.utilization}});
    return {
        {"workload", r.workload},
        {"strategy", r.strategy},
        {"total_waiting_ns", r.total_waiting},
        {"total_waiting_ms", ns_to_ms(r.total_waiting)},
        {"per_job_finish", std::move(jobs)},
        {"workload_finish_ns", r.workload_finish},
        {"workload_finish_s", ns_to_s(r.workload_finish)},
        {"total_job_finish_ns", r.total_job_finish},
        {"total_job_finish_s", ns_to_s(r.total_job_finish)},
        {"per_server_utilization", std::move(util)},
    };
}

MetricsReport report_from_json(const nlohmann::json& doc) {
    try {
        MetricsReport r;
        r.workload = doc.at("workload").get<std::string>();
        r.strategy = doc.at("strategy").get<std::string>();
        r.total_waiting = doc.at("total_waiting_ns").get<Nanoseconds>();
        for (const auto& j : doc.at("per_job_finish"))
            r.per_job_finish.push_back({j.at("job").get<std::uint32_t>(), j.at("finish_ns").get<Nanoseconds>()});
        r.workload_finish = doc.at("workload_finish_ns").get<Nanoseconds>();
        r.total_job_finish = doc.at("total_job_finish_ns").get<Nanoseconds>();
        for (const auto& u : doc.at("per_server_utilization"))
            r.per_server_utilization.push_back({u.at("server").get<std::string>(), u.at("utilization").get<double>()});
        return r;
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError("report", e.what());
    }
}

}  // namespace nicmap
