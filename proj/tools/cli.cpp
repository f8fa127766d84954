#include "cli.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "nicmap/errors.hpp"
#include "nicmap/placement_io.hpp"
#include "nicmap/topology.hpp"
#include "nicmap/workload.hpp"

namespace nicmap::cli {

namespace fs = std::filesystem;

void RunConfig::validate(bool needs_strategies) const {
    if (needs_strategies && strategies.empty()) throw std::invalid_argument("at least one strategy is required");
    const bool jittered = sim.arrivals == ArrivalMode::Poisson;
    if (jittered && !seed) throw std::invalid_argument("--seed is required with --arrivals poisson");
    if (!jittered && seed) throw std::invalid_argument("--seed only applies to --arrivals poisson");
}

std::vector<Strategy> parse_strategies(const std::string& list) {
    std::vector<Strategy> out;
    std::stringstream ss(list);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        out.push_back(strategy_from_string(item));
    }
    std::sort(out.begin(), out.end(), [](Strategy a, Strategy b) { return to_string(a) < to_string(b); });
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

namespace {

struct StrategyRun {
    Strategy strategy;
    MetricsReport report;
};

SimOptions sim_options(const RunConfig& cfg) {
    auto o = cfg.sim;
    o.seed = cfg.seed.value_or(0);
    return o;
}

// Writes to the named file or, when the path is empty, to `fallback`.
template <typename Fn>
void write_output(const std::string& path, std::ostream& fallback, Fn&& fn) {
    if (path.empty()) {
        fn(fallback);
        return;
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open output file " + path);
    fn(f);
    f.flush();
    if (!f) throw IoError("failed writing " + path);
}

std::string percent(const std::optional<double>& v) {
    if (!v) return "n/a";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f%%", *v);
    return buf;
}

constexpr Metric kMetrics[] = {Metric::TotalWaiting, Metric::WorkloadFinish, Metric::TotalJobFinish};

nlohmann::json improvements_json(const std::vector<StrategyRun>& runs) {
    const auto it = std::find_if(runs.begin(), runs.end(), [](const auto& r) { return r.strategy == Strategy::New; });
    nlohmann::json doc = nlohmann::json::object();
    if (it == runs.end() || runs.size() < 2) return doc;
    for (const auto& base : runs) {
        if (base.strategy == Strategy::New) continue;
        nlohmann::json per;
        for (auto m : kMetrics) {
            const auto v = improvement(it->report, base.report, m);
            per[std::string(to_string(m))] = v ? nlohmann::json(*v) : nlohmann::json("n/a");
        }
        doc[std::string(to_string(base.strategy))] = std::move(per);
    }
    return doc;
}

void print_improvements(std::ostream& os, const std::vector<StrategyRun>& runs) {
    const auto it = std::find_if(runs.begin(), runs.end(), [](const auto& r) { return r.strategy == Strategy::New; });
    if (it == runs.end() || runs.size() < 2) return;
    os << "improvement of new over:\n";
    for (const auto& base : runs) {
        if (base.strategy == Strategy::New) continue;
        os << "  " << to_string(base.strategy) << ':';
        for (auto m : kMetrics) os << ' ' << to_string(m) << '=' << percent(improvement(it->report, base.report, m));
        os << '\n';
    }
    // Against the best baseline on the primary metric.
    const StrategyRun* best = nullptr;
    for (const auto& r : runs)
        if (r.strategy != Strategy::New && (!best || r.report.total_waiting < best->report.total_waiting)) best = &r;
    os << "  best baseline (" << to_string(best->strategy)
       << "): total_waiting=" << percent(improvement(it->report, best->report, Metric::TotalWaiting)) << '\n';
}

void emit_reports(std::ostream& os, const std::vector<StrategyRun>& runs, ReportFormat fmt) {
    std::vector<MetricsReport> reports;
    for (const auto& r : runs) reports.push_back(r.report);
    if (fmt == ReportFormat::Csv) {
        emit_csv(os, reports);
        return;
    }
    nlohmann::json doc;
    doc["reports"] = nlohmann::json::array();
    for (const auto& r : reports) doc["reports"].push_back(to_json(r));
    const auto imp = improvements_json(runs);
    if (!imp.empty()) doc["improvements"] = imp;
    os << doc.dump(2) << '\n';
}

void print_summary(std::ostream& os, const std::vector<StrategyRun>& runs) {
    char line[160];
    std::snprintf(line, sizeof line, "%-10s %20s %20s %20s\n", "strategy", "total_waiting_ms", "workload_finish_s",
                  "total_job_finish_s");
    os << line;
    for (const auto& r : runs) {
        std::snprintf(line, sizeof line, "%-10s %20s %20s %20s\n", r.report.strategy.c_str(),
                      ns_to_ms(r.report.total_waiting).c_str(), ns_to_s(r.report.workload_finish).c_str(),
                      ns_to_s(r.report.total_job_finish).c_str());
        os << line;
    }
    print_improvements(os, runs);
}

std::string trace_path_for(const std::string& base, std::string_view tag, bool multiple) {
    if (!multiple) return base;
    fs::path p(base);
    return (p.parent_path() / (p.stem().string() + "_" + std::string(tag) + p.extension().string())).string();
}

}  // namespace

int cmd_map(const RunConfig& cfg, std::ostream& out) {
    cfg.validate(true);
    const auto spec = load_cluster(cfg.cluster_path);
    const auto w = load_workload(cfg.workload_path);
    const fs::path dir = cfg.out_path.empty() ? fs::path(".") : fs::path(cfg.out_path);
    fs::create_directories(dir);

    std::vector<std::pair<Strategy, Placement>> placements;
    for (auto s : cfg.strategies) placements.emplace_back(s, map_workload(s, w, spec));

    for (const auto& [s, pl] : placements) {
        const auto file = dir / (w.name + "_" + std::string(to_string(s)) + ".placement.json");
        write_output(file.string(), out, [&](std::ostream& os) { os << to_json(pl).dump(1) << '\n'; });
        out << "strategy " << to_string(s) << " -> " << file.string() << '\n';
        out << render_node_counts(pl, spec);
        if (cfg.table) out << render_table(pl);
    }
    return 0;
}

int cmd_simulate(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    cfg.validate(false);
    const auto spec = load_cluster(cfg.cluster_path);
    const auto w = load_workload(cfg.workload_path);
    const auto pl = load_placement(cfg.placement_path);
    try {
        check_placement(pl, w, spec);
    } catch (const std::invalid_argument& e) {
        throw SchemaError(cfg.placement_path, e.what());
    }
    const auto raw = run(w, pl, spec, sim_options(cfg));
    auto report = aggregate(raw, cfg.waiting);
    report.workload = w.name;
    // "<workload>_<strategy>.placement.json" reports as "<workload>_<strategy>".
    report.strategy = fs::path(cfg.placement_path).stem().string();
    if (const auto dot = report.strategy.rfind(".placement"); dot != std::string::npos) report.strategy.resize(dot);
    if (!cfg.trace_path.empty())
        write_output(cfg.trace_path, err, [&](std::ostream& os) { write_trace(os, raw); });

    std::vector<StrategyRun> runs{{Strategy::New, report}};
    write_output(cfg.out_path, out, [&](std::ostream& os) { emit_reports(os, runs, cfg.format); });
    return 0;
}

int cmd_compare(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    cfg.validate(true);
    const auto spec = load_cluster(cfg.cluster_path);
    const auto w = load_workload(cfg.workload_path);
    const auto opts = sim_options(cfg);

    struct Outcome {
        MetricsReport report;
        std::string trace;
    };
    const bool want_trace = !cfg.trace_path.empty();
    std::vector<std::future<Outcome>> pending;
    for (auto s : cfg.strategies)
        pending.push_back(std::async(std::launch::async, [&, s] {
            const auto pl = map_workload(s, w, spec);
            const auto raw = run(w, pl, spec, opts);
            Outcome o{aggregate(raw, cfg.waiting), {}};
            o.report.workload = w.name;
            o.report.strategy = std::string(to_string(s));
            if (want_trace) {
                std::ostringstream ss;
                write_trace(ss, raw);
                o.trace = ss.str();
            }
            return o;
        }));

    // Collect everything before writing so a failure leaves no partial report.
    std::vector<StrategyRun> runs;
    std::vector<std::string> traces;
    for (std::size_t k = 0; k < pending.size(); ++k) {
        auto o = pending[k].get();
        runs.push_back({cfg.strategies[k], std::move(o.report)});
        traces.push_back(std::move(o.trace));
    }

    if (want_trace)
        for (std::size_t k = 0; k < runs.size(); ++k)
            write_output(trace_path_for(cfg.trace_path, to_string(runs[k].strategy), runs.size() > 1), err,
                         [&](std::ostream& os) { os << traces[k]; });

    write_output(cfg.out_path, out, [&](std::ostream& os) { emit_reports(os, runs, cfg.format); });
    print_summary(cfg.out_path.empty() ? err : out, runs);
    return 0;
}

int cmd_validate(const RunConfig& cfg, std::ostream& out) {
    const auto spec = load_cluster(cfg.cluster_path);
    out << "cluster ok: " << spec.num_nodes << " nodes, " << spec.total_cores() << " cores\n";
    if (!cfg.workload_path.empty()) {
        const auto w = load_workload(cfg.workload_path);
        out << "workload ok: " << w.name << ", " << w.jobs.size() << " jobs, " << w.total_processes()
            << " processes\n";
        if (!cfg.placement_path.empty()) {
            const auto pl = load_placement(cfg.placement_path);
            try {
                check_placement(pl, w, spec);
            } catch (const std::invalid_argument& e) {
                throw SchemaError(cfg.placement_path, e.what());
            }
            out << "placement ok: " << pl.size() << " processes\n";
        }
    } else if (!cfg.placement_path.empty()) {
        throw std::invalid_argument("--placement needs --workload");
    }
    return 0;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"nicmap: contention-aware process mapping and cluster queueing simulation"};
    app.require_subcommand(1);
    app.footer("Run 'nicmap <subcommand> --help' for the options of each subcommand.");

    RunConfig cfg;
    std::string strategies = "blocked,cyclic,drb,new";
    std::string format = "csv", arrivals = "periodic", duplex = "full", queueing = "sender", scope = "edge",
                waiting = "all";
    std::uint64_t seed = 0;

    const std::map<std::string, ReportFormat> formats{{"csv", ReportFormat::Csv}, {"json", ReportFormat::Json}};

    auto add_common = [&](CLI::App* sub, bool workload_required) {
        auto* w = sub->add_option("-w,--workload", cfg.workload_path, "Workload JSON file");
        if (workload_required) w->required();
        w->check(CLI::ExistingFile);
        sub->add_option("-c,--cluster", cfg.cluster_path, "Cluster JSON file (default: reference platform)")
            ->check(CLI::ExistingFile);
    };
    auto add_sim = [&](CLI::App* sub) {
        sub->add_option("-o,--out", cfg.out_path, "Report output file (default: stdout)");
        sub->add_option("--format", format, "Report format")->check(CLI::IsMember({"csv", "json"}));
        sub->add_option("--seed", seed, "Random seed, required with --arrivals poisson");
        sub->add_option("--arrivals", arrivals, "Send spacing: periodic (1/rate) or poisson")
            ->check(CLI::IsMember({"periodic", "poisson"}));
        sub->add_option("--nic-duplex", duplex, "full: separate send/receive NIC servers; half: one shared server")
            ->check(CLI::IsMember({"full", "half"}));
        sub->add_option("--nic-queueing", queueing, "sender: only the egress NIC queues; both: ingress queues too")
            ->check(CLI::IsMember({"sender", "both"}));
        sub->add_option("--rate-scope", scope,
                        "edge: each destination stream sends at the job rate; process: rate is per process")
            ->check(CLI::IsMember({"edge", "process"}));
        sub->add_option("--waiting-servers", waiting, "Servers counted in total waiting: all or nic,mem")
            ->check(CLI::IsMember({"all", "nic,mem"}));
        sub->add_option("--trace", cfg.trace_path, "Per-message CSV trace (one file per strategy)");
    };

    auto* map = app.add_subcommand("map", "Map a workload with each strategy and write placement JSON files");
    add_common(map, true);
    map->add_option("-s,--strategies", strategies, "Comma-separated subset of blocked,cyclic,drb,new");
    map->add_option("-o,--out", cfg.out_path, "Output directory for placement files (default: .)");
    map->add_flag("--table", cfg.table, "Also print the full placement table");

    auto* sim = app.add_subcommand("simulate", "Simulate an existing placement");
    add_common(sim, true);
    sim->add_option("-p,--placement", cfg.placement_path, "Placement JSON file")->required()->check(CLI::ExistingFile);
    add_sim(sim);

    auto* cmp = app.add_subcommand("compare", "Map, simulate, and report every requested strategy");
    add_common(cmp, true);
    cmp->add_option("-s,--strategies", strategies, "Comma-separated subset of blocked,cyclic,drb,new");
    add_sim(cmp);

    auto* val = app.add_subcommand("validate", "Check cluster, workload, and placement documents");
    add_common(val, false);
    val->add_option("-p,--placement", cfg.placement_path, "Placement JSON file")->check(CLI::ExistingFile);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err);
    }

    try {
        cfg.strategies = parse_strategies(strategies);
        cfg.format = formats.at(format);
        cfg.sim.arrivals = arrivals == "poisson" ? ArrivalMode::Poisson : ArrivalMode::Periodic;
        cfg.sim.duplex = duplex == "half" ? NicDuplex::Half : NicDuplex::Full;
        cfg.sim.nic_queueing = queueing == "both" ? NicQueueing::Both : NicQueueing::Sender;
        cfg.sim.rate_scope = scope == "process" ? RateScope::Process : RateScope::Edge;
        cfg.waiting = waiting == "all" ? WaitingScope::All : WaitingScope::NicMem;
        for (auto* sub : {sim, cmp})
            if (sub->parsed() && sub->count("--seed") > 0) cfg.seed = seed;

        if (map->parsed()) return cmd_map(cfg, out);
        if (sim->parsed()) return cmd_simulate(cfg, out, err);
        if (cmp->parsed()) return cmd_compare(cfg, out, err);
        return cmd_validate(cfg, out);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
}

}  // namespace nicmap::cli
