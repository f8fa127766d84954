#include "nicmap/mapping.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <stdexcept>

#include "nicmap/bipartition.hpp"
#include "nicmap/errors.hpp"

namespace nicmap {

const CoreId& Placement::at(ProcessRef p) const {
    auto it = map_.find(p);
    if (it == map_.end())
        throw UnplacedProcess("job " + std::to_string(p.job) + " process " + std::to_string(p.process) +
                              " is not placed");
    return it->second;
}

std::optional<CoreId> Placement::find(ProcessRef p) const {
    auto it = map_.find(p);
    if (it == map_.end()) return std::nullopt;
    return it->second;
}

std::vector<std::uint32_t> Placement::per_node_counts(const ClusterSpec& spec) const {
    std::vector<std::uint32_t> counts(spec.num_nodes, 0);
    for (const auto& [_, c] : map_) ++counts.at(c.node);
    return counts;
}

std::vector<std::uint32_t> Placement::per_node_counts(const ClusterSpec& spec, std::uint32_t job) const {
    std::vector<std::uint32_t> counts(spec.num_nodes, 0);
    for (const auto& [p, c] : map_)
        if (p.job == job) ++counts.at(c.node);
    return counts;
}

void check_placement(const Placement& pl, const Workload& w, const ClusterSpec& spec) {
    std::set<CoreId> seen;
    for (const auto& [p, c] : pl) {
        if (!valid_core(spec, c))
            throw std::invalid_argument("core " + to_string(c) + " outside cluster");
        if (!seen.insert(c).second)
            throw std::invalid_argument("core " + to_string(c) + " holds two processes");
    }
    std::size_t expected = 0;
    for (const auto& job : w.jobs) {
        for (std::uint32_t i = 0; i < job.num_processes; ++i)
            if (!pl.find({job.job_id, i}))
                throw std::invalid_argument("job " + std::to_string(job.job_id) + " process " +
                                            std::to_string(i) + " unplaced");
        expected += job.num_processes;
    }
    if (pl.size() != expected) throw std::invalid_argument("placement holds processes outside the workload");
}

std::string_view to_string(Strategy s) noexcept {
    switch (s) {
        case Strategy::Blocked: return "blocked";
        case Strategy::Cyclic: return "cyclic";
        case Strategy::Drb: return "drb";
        case Strategy::New: return "new";
    }
    return "unknown";
}

Strategy strategy_from_string(std::string_view s) {
    for (auto st : {Strategy::Blocked, Strategy::Cyclic, Strategy::Drb, Strategy::New})
        if (to_string(st) == s) return st;
    throw std::invalid_argument("unknown strategy '" + std::string(s) + "'");
}

Threshold compute_threshold(const AdjacencyStats& stats, const Occupancy& occ) {
    if (stats.adj_max == 0) return {};
    const std::int64_t nodes = occ.spec().num_nodes;
    // adj_avg <= free/nodes - 1  <=>  adj_avg <= (free - nodes)/nodes
    const Rational room{static_cast<std::int64_t>(occ.total_free()) - nodes, nodes};
    if (stats.adj_avg <= room) return {};
    const std::int64_t weighted = std::accumulate(stats.adj.begin(), stats.adj.end(), std::int64_t{0});
    const auto cap = weighted / (static_cast<std::int64_t>(stats.adj_max) * nodes);
    return {static_cast<std::uint32_t>(std::max<std::int64_t>(cap, 1))};
}

namespace {

void require_capacity(const Workload& w, const Occupancy& occ) {
    if (w.total_processes() > occ.total_free())
        throw ClusterFull("workload needs " + std::to_string(w.total_processes()) + " cores, " +
                          std::to_string(occ.total_free()) + " free");
}

void place(Placement& pl, Occupancy& occ, ProcessRef p, CoreId c) {
    occ.claim(c);
    pl.assign(p, c);
}

// --- DRB -------------------------------------------------------------------

// Split a core domain at the outermost hierarchy level where it varies.
std::vector<std::vector<CoreId>> split_domain(const std::vector<CoreId>& domain) {
    auto key_node = [](const CoreId& c) { return std::uint64_t{c.node}; };
    auto key_socket = [](const CoreId& c) { return (std::uint64_t{c.node} << 32) | c.socket; };
    auto varies = [&](auto key) {
        return std::any_of(domain.begin(), domain.end(),
                           [&](const CoreId& c) { return key(c) != key(domain.front()); });
    };
    std::vector<std::vector<CoreId>> groups;
    auto group_by = [&](auto key) {
        for (const auto& c : domain) {
            if (groups.empty() || key(groups.back().front()) != key(c)) groups.emplace_back();
            groups.back().push_back(c);
        }
    };
    if (varies(key_node))
        group_by(key_node);
    else if (varies(key_socket))
        group_by(key_socket);
    else
        for (const auto& c : domain) groups.push_back({c});
    return groups;
}

void drb_assign(const WeightedGraph& g, const std::vector<std::uint32_t>& procs,
                const std::vector<CoreId>& domain, std::uint32_t job, Placement& pl, Occupancy& occ) {
    if (procs.empty()) return;
    if (procs.size() == 1) {
        place(pl, occ, {job, procs.front()}, domain.front());
        return;
    }
    const auto groups = split_domain(domain);
    for (const auto& grp : groups)
        if (grp.size() >= procs.size()) return drb_assign(g, procs, grp, job, pl, occ);

    // Smallest leading run of groups that holds the processes, halved by capacity.
    std::size_t m = 0, cap = 0;
    while (cap < procs.size()) cap += groups[m++].size();
    std::size_t h = 0, cap_left = 0;
    while (h + 1 < m && 2 * cap_left < cap) cap_left += groups[h++].size();
    if (h == 0) cap_left += groups[h++].size();
    const std::size_t cap_right = cap - cap_left;

    std::vector<CoreId> left, right;
    for (std::size_t k = 0; k < m; ++k)
        (k < h ? left : right).insert((k < h ? left : right).end(), groups[k].begin(), groups[k].end());

    const std::size_t P = procs.size();
    std::size_t a = (P + 1) / 2;
    a = std::min(a, cap_left);
    a = std::max(a, P > cap_right ? P - cap_right : std::size_t{0});

    const auto sub = g.subgraph(procs);
    const auto bis = bisect(sub, a);
    std::vector<std::uint32_t> pa, pb;
    for (auto v : bis.part_a) pa.push_back(procs[v]);
    for (auto v : bis.part_b) pb.push_back(procs[v]);
    drb_assign(g, pa, left, job, pl, occ);
    drb_assign(g, pb, right, job, pl, occ);
}

}  // namespace

Placement map_blocked(const Workload& w, Occupancy& occ) {
    require_capacity(w, occ);
    Placement pl;
    for (const auto& job : w.jobs) {
        for (std::uint32_t i = 0; i < job.num_processes; ++i) {
            std::uint32_t node = 0;
            while (occ.node_free(node) == 0) ++node;
            place(pl, occ, {job.job_id, i}, *occ.lowest_free_core(node));
        }
    }
    return pl;
}

Placement map_cyclic(const Workload& w, Occupancy& occ) {
    require_capacity(w, occ);
    Placement pl;
    const auto& spec = occ.spec();
    for (const auto& job : w.jobs) {
        std::vector<std::uint32_t> avail;
        for (std::uint32_t n = 0; n < spec.num_nodes; ++n)
            if (occ.node_free(n) > 0) avail.push_back(n);
        for (std::uint32_t k = 0; k < job.num_processes; ++k) {
            auto slot = k % avail.size();
            // A node that filled up mid-job passes its turn to the next one.
            while (occ.node_free(avail[slot]) == 0) slot = (slot + 1) % avail.size();
            place(pl, occ, {job.job_id, k}, *occ.lowest_free_core(avail[slot]));
        }
    }
    return pl;
}

Placement map_drb(const Workload& w, Occupancy& occ) {
    require_capacity(w, occ);
    Placement pl;
    for (const auto& job : w.jobs) {
        const auto g = process_graph(matrix_of(job));
        std::vector<std::uint32_t> procs(job.num_processes);
        std::iota(procs.begin(), procs.end(), 0u);
        drb_assign(g, procs, occ.free_cores(), job.job_id, pl, occ);
    }
    return pl;
}

std::vector<std::size_t> new_strategy_job_order(const Workload& w) {
    struct Key {
        SizeClass cls;
        Rational adj_avg;
        std::uint32_t id;
    };
    std::vector<Key> keys;
    for (const auto& job : w.jobs)
        keys.push_back({classify(job), adjacency_stats(matrix_of(job)).adj_avg, job.job_id});
    std::vector<std::size_t> order(w.jobs.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const auto& ka = keys[a];
        const auto& kb = keys[b];
        if (ka.cls != kb.cls) return ka.cls < kb.cls;  // Large < Medium < Small in enum order
        if (ka.adj_avg != kb.adj_avg) return ka.adj_avg > kb.adj_avg;
        return ka.id < kb.id;
    });
    return order;
}

Placement map_new(const Workload& w, Occupancy& occ) {
    require_capacity(w, occ);
    Placement pl;
    const auto& spec = occ.spec();

    for (auto idx : new_strategy_job_order(w)) {
        const auto& job = w.jobs[idx];
        const auto m = matrix_of(job);
        const auto stats = adjacency_stats(m);
        const auto threshold = compute_threshold(stats, occ);
        const auto g = process_graph(m);
        const auto P = job.num_processes;

        std::vector<double> cd(P);
        for (std::uint32_t i = 0; i < P; ++i) cd[i] = comm_demand(m, i);
        std::vector<std::uint32_t> by_demand(P);
        std::iota(by_demand.begin(), by_demand.end(), 0u);
        std::stable_sort(by_demand.begin(), by_demand.end(),
                         [&](std::uint32_t a, std::uint32_t b) { return cd[a] > cd[b]; });

        std::vector<std::uint32_t> job_on_node(spec.num_nodes, 0);
        auto under_cap = [&](std::uint32_t n) {
            return occ.node_free(n) > 0 && (threshold.unlimited() || job_on_node[n] < *threshold.cap);
        };
        std::optional<std::pair<std::uint32_t, std::uint32_t>> cursor;

        auto place_process = [&](std::uint32_t proc, std::optional<CoreId> anchor) {
            if (!cursor || !under_cap(cursor->first)) {
                try {
                    cursor = select_node_socket(occ, under_cap);
                } catch (const ClusterFull&) {
                    // Every node is at the cap but cores remain: lift the cap.
                    cursor = select_node_socket(occ);
                }
            }
            const auto node = cursor->first;
            std::optional<std::uint32_t> socket;
            if (anchor && anchor->node == node && occ.socket_free(node, anchor->socket) > 0)
                socket = anchor->socket;
            else if (occ.socket_free(node, cursor->second) > 0)
                socket = cursor->second;
            else
                socket = select_socket(occ, node);
            const auto core = *occ.lowest_free_core(node, *socket);
            place(pl, occ, {job.job_id, proc}, core);
            ++job_on_node[node];
            cursor->second = *socket;
            return core;
        };

        std::vector<bool> mapped(P, false);
        for (auto a : by_demand) {
            if (mapped[a]) continue;
            const auto core_a = place_process(a, std::nullopt);
            mapped[a] = true;

            std::vector<std::uint32_t> nbrs;
            for (std::uint32_t j = 0; j < P; ++j)
                if (!mapped[j] && g.weight(a, j) > 0) nbrs.push_back(j);
            std::stable_sort(nbrs.begin(), nbrs.end(), [&](std::uint32_t x, std::uint32_t y) {
                return g.weight(a, x) > g.weight(a, y);
            });
            for (auto j : nbrs) {
                place_process(j, core_a);
                mapped[j] = true;
            }
        }
    }
    return pl;
}

Placement map_workload(Strategy s, const Workload& w, const ClusterSpec& spec) {
    Occupancy occ(spec);
    switch (s) {
        case Strategy::Blocked: return map_blocked(w, occ);
        case Strategy::Cyclic: return map_cyclic(w, occ);
        case Strategy::Drb: return map_drb(w, occ);
        case Strategy::New: return map_new(w, occ);
    }
    throw std::invalid_argument("unknown strategy");
}

}  // namespace nicmap
