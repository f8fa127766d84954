#include "nicmap/simengine.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <queue>
#include <random>
#include <tuple>

#include "nicmap/errors.hpp"

namespace nicmap {

std::string_view to_string(NicDuplex d) noexcept { return d == NicDuplex::Full ? "full" : "half"; }
std::string_view to_string(NicQueueing q) noexcept { return q == NicQueueing::Sender ? "sender" : "both"; }
std::string_view to_string(RateScope r) noexcept { return r == RateScope::Edge ? "edge" : "process"; }
std::string_view to_string(ArrivalMode a) noexcept { return a == ArrivalMode::Periodic ? "periodic" : "poisson"; }

std::string hop_name(const Hop& h) {
    switch (h.kind) {
        case HopKind::Cache: return "cache:" + std::to_string(h.node) + ":" + std::to_string(h.socket);
        case HopKind::Memory: return "memory:" + std::to_string(h.node);
        case HopKind::NicEgress: return "nic_egress:" + std::to_string(h.node);
        case HopKind::NicIngress: return "nic_ingress:" + std::to_string(h.node);
    }
    return "unknown";
}

Route route(const CoreId& src, const CoreId& dst, Bytes length, const ClusterSpec& spec) {
    Route r;
    if (src.node == dst.node) {
        if (src.socket == dst.socket && length <= spec.cache_msg_cap)
            r.hops[0] = {HopKind::Cache, src.node, src.socket, false};
        else
            r.hops[0] = {HopKind::Memory, src.node, 0, src.socket != dst.socket};
        r.size = 1;
    } else {
        r.hops[0] = {HopKind::NicEgress, src.node, 0, false};
        r.hops[1] = {HopKind::NicIngress, dst.node, 0, false};
        r.size = 2;
        r.via_switch = true;
    }
    return r;
}

Route route(ProcessRef src, ProcessRef dst, Bytes length, const Placement& pl, const ClusterSpec& spec) {
    return route(pl.at(src), pl.at(dst), length, spec);
}

Nanoseconds service_time(Bytes length, const Hop& hop, const ClusterSpec& spec) {
    long double seconds = 0;
    switch (hop.kind) {
        case HopKind::Cache: seconds = static_cast<long double>(length) / spec.cache_bandwidth; break;
        case HopKind::Memory:
            seconds = static_cast<long double>(length) / spec.mem_bandwidth;
            if (hop.cross_socket) seconds *= spec.remote_mem_penalty;
            break;
        case HopKind::NicEgress:
        case HopKind::NicIngress: seconds = static_cast<long double>(length) / spec.nic_bandwidth; break;
    }
    return std::llround(seconds * 1e9L);
}

namespace {

class GapSource {
public:
    GapSource(ArrivalMode mode, double rate, std::uint64_t seed, std::uint32_t job, std::uint32_t proc,
              std::uint32_t stream)
        : mode_(mode), rate_(rate) {
        if (mode_ == ArrivalMode::Poisson) {
            std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), job, proc,
                              stream};
            rng_.seed(seq);
        }
    }

    /// Release time of the k-th emission; call with k = 0, 1, 2, ...
    Nanoseconds next(std::uint64_t k) {
        if (mode_ == ArrivalMode::Periodic)
            return std::llround(static_cast<long double>(k) * 1e9L / static_cast<long double>(rate_));
        if (k > 0) clock_ += std::exponential_distribution<long double>(rate_)(rng_) * 1e9L;
        return std::llround(clock_);
    }

private:
    ArrivalMode mode_;
    double rate_;
    std::mt19937_64 rng_;
    long double clock_ = 0;
};

}  // namespace

std::vector<std::vector<Send>> schedule(const JobSpec& job, const CommMatrix& m, RateScope scope, ArrivalMode mode,
                                        std::uint64_t seed) {
    const auto P = m.processes();
    std::vector<std::vector<Send>> out(P);
    for (std::uint32_t i = 0; i < P; ++i) {
        const auto edges = m.out_edges(i);
        if (edges.empty()) continue;
        auto& line = out[i];

        // Edges in rotation order: destinations above i first, then wrap.
        std::vector<const CommEdge*> rot;
        for (const auto& e : edges)
            if (e.dst > i) rot.push_back(&e);
        for (const auto& e : edges)
            if (e.dst < i) rot.push_back(&e);

        if (scope == RateScope::Process && job.pattern != Pattern::Explicit) {
            std::vector<std::uint32_t> dsts;
            std::uint64_t total = 0;
            for (const auto* e : rot) {
                dsts.push_back(e->dst);
                total += e->count;
            }
            GapSource gaps(mode, job.msg_rate, seed, job.job_id, i, 0);
            line.reserve(total);
            for (std::uint64_t k = 0; k < total; ++k)
                line.push_back({gaps.next(k), dsts[k % dsts.size()], job.msg_length, k});
            continue;
        }

        std::vector<std::pair<std::size_t, Send>> tagged;  // (rotation position, send)
        for (std::size_t r = 0; r < rot.size(); ++r) {
            const auto& e = *rot[r];
            GapSource gaps(mode, e.rate, seed, job.job_id, i, static_cast<std::uint32_t>(r));
            for (std::uint64_t k = 0; k < e.count; ++k) tagged.push_back({r, {gaps.next(k), e.dst, e.length, 0}});
        }
        std::stable_sort(tagged.begin(), tagged.end(), [](const auto& a, const auto& b) {
            return std::tie(a.second.release, a.first) < std::tie(b.second.release, b.first);
        });
        line.reserve(tagged.size());
        for (std::uint64_t k = 0; k < tagged.size(); ++k) {
            line.push_back(tagged[k].second);
            line.back().seq = k;
        }
    }
    return out;
}

namespace {

class ServerTable {
public:
    ServerTable(const ClusterSpec& spec, const SimOptions& opts)
        : spec_(spec), shared_nic_(opts.duplex == NicDuplex::Half),
          queue_ingress_(shared_nic_ || opts.nic_queueing == NicQueueing::Both) {
        const auto N = spec.num_nodes, S = spec.sockets_per_node;
        for (std::uint32_t n = 0; n < N; ++n)
            for (std::uint32_t s = 0; s < S; ++s) servers_.push_back({{HopKind::Cache, n, s, false}, 0, 0});
        for (std::uint32_t n = 0; n < N; ++n) servers_.push_back({{HopKind::Memory, n, 0, false}, 0, 0});
        for (std::uint32_t n = 0; n < N; ++n) servers_.push_back({{HopKind::NicEgress, n, 0, false}, 0, 0});
        if (queue_ingress_ && !shared_nic_)
            for (std::uint32_t n = 0; n < N; ++n) servers_.push_back({{HopKind::NicIngress, n, 0, false}, 0, 0});
        busy_until_.assign(servers_.size(), 0);
    }

    /// Server for a hop, or kNoServer when the hop is a pure transfer delay.
    std::uint32_t index(const Hop& h) const {
        const auto N = spec_.num_nodes, S = spec_.sockets_per_node;
        switch (h.kind) {
            case HopKind::Cache: return h.node * S + h.socket;
            case HopKind::Memory: return N * S + h.node;
            case HopKind::NicEgress: return N * S + N + h.node;
            case HopKind::NicIngress:
                if (!queue_ingress_) return kNoServer;
                return shared_nic_ ? N * S + N + h.node : N * S + 2 * N + h.node;
        }
        return kNoServer;
    }

    /// FIFO single server (Lindley recursion); arrivals must be offered in
    /// non-decreasing time order.
    HopRecord serve(const Hop& hop, Nanoseconds arrival, Nanoseconds service) {
        HopRecord r;
        r.hop = hop;
        r.server = index(hop);
        r.arrival = arrival;
        if (!r.queued()) {
            r.start = arrival;
            r.end = arrival + service;
            return r;
        }
        r.start = std::max(arrival, busy_until_[r.server]);
        r.end = r.start + service;
        busy_until_[r.server] = r.end;
        servers_[r.server].busy += service;
        ++servers_[r.server].served;
        return r;
    }

    std::vector<ServerStats> release() && { return std::move(servers_); }

private:
    const ClusterSpec& spec_;
    bool shared_nic_;
    bool queue_ingress_;
    std::vector<ServerStats> servers_;
    std::vector<Nanoseconds> busy_until_;
};

constexpr std::size_t kRelease = static_cast<std::size_t>(-1);

struct Event {
    Nanoseconds time;
    std::uint32_t job;
    std::uint32_t src;
    std::uint64_t seq;
    std::size_t stream;   // sending process, index into the run's streams
    std::size_t message;  // record index, or kRelease
    std::uint8_t hop;

    // Simultaneous arrivals are served in (job, src, seq) order.
    bool operator>(const Event& o) const {
        return std::tie(time, job, src, seq) > std::tie(o.time, o.job, o.src, o.seq);
    }
};

struct Stream {
    std::size_t job_index;
    std::uint32_t job_id;
    std::uint32_t process;
    std::vector<Send> sends;
    std::size_t next = 0;
};

}  // namespace

RawResults run(const Workload& w, const Placement& pl, const ClusterSpec& spec, const SimOptions& opts) {
    RawResults res;
    ServerTable table(spec, opts);

    std::vector<Stream> streams;
    std::uint64_t expected = 0;
    for (std::size_t ji = 0; ji < w.jobs.size(); ++ji) {
        const auto& job = w.jobs[ji];
        res.jobs.push_back({job.job_id, std::vector<Nanoseconds>(job.num_processes, 0)});
        const auto m = matrix_of(job);
        auto lines = schedule(job, m, opts.rate_scope, opts.arrivals, opts.seed);
        for (std::uint32_t i = 0; i < lines.size(); ++i) {
            if (lines[i].empty()) continue;
            pl.at({job.job_id, i});
            for (auto d : m.out_neighbors(i)) pl.at({job.job_id, d});
            expected += lines[i].size();
            streams.push_back({ji, job.job_id, i, std::move(lines[i]), 0});
        }
    }
    res.messages.reserve(expected);
    std::vector<Route> routes;
    routes.reserve(expected);

    std::priority_queue<Event, std::vector<Event>, std::greater<>> events;
    auto push_release = [&](std::size_t si) {
        const auto& st = streams[si];
        if (st.next >= st.sends.size()) return;
        const auto& s = st.sends[st.next];
        events.push({s.release, st.job_id, st.process, s.seq, si, kRelease, 0});
    };
    for (std::size_t si = 0; si < streams.size(); ++si) push_release(si);

    while (!events.empty()) {
        const Event ev = events.top();
        events.pop();
        auto& st = streams[ev.stream];

        std::size_t mi = ev.message;
        if (mi == kRelease) {
            const auto& s = st.sends[st.next++];
            push_release(ev.stream);
            MessageRecord rec;
            rec.job = st.job_id;
            rec.src = st.process;
            rec.dst = s.dst;
            rec.seq = s.seq;
            rec.length = s.length;
            rec.created = s.release;
            mi = res.messages.size();
            res.messages.push_back(rec);
            routes.push_back(route(pl.at({st.job_id, st.process}), pl.at({st.job_id, s.dst}), s.length, spec));
            ++res.sent;
        }

        auto& rec = res.messages[mi];
        const auto& rt = routes[mi];
        const auto& hop = rt.hops[ev.hop];
        const auto& hr = rec.hops[ev.hop] = table.serve(hop, ev.time, service_time(rec.length, hop, spec));
        rec.hop_count = static_cast<std::uint8_t>(ev.hop + 1);
        res.horizon = std::max(res.horizon, hr.end);

        auto& finish = res.jobs[st.job_index].process_finish;
        if (ev.hop == 0 && rec.seq + 1 == st.sends.size()) finish[rec.src] = std::max(finish[rec.src], hr.end);

        if (ev.hop + 1 < rt.size) {
            const auto next_arrival = hr.end + (rt.via_switch ? spec.switch_latency : 0);
            events.push({next_arrival, rec.job, rec.src, rec.seq, ev.stream, mi,
                         static_cast<std::uint8_t>(ev.hop + 1)});
        } else {
            rec.delivered = hr.end;
            finish[rec.dst] = std::max(finish[rec.dst], hr.end);
            ++res.delivered;
        }
    }

    res.servers = std::move(table).release();
    return res;
}

void write_trace(std::ostream& out, const RawResults& raw) {
    out << "job,src,dst,seq,length,created_ns,hop,arrival_ns,start_ns,end_ns\n";
    for (const auto& m : raw.messages)
        for (const auto& h : m.hop_view())
            out << m.job << ',' << m.src << ',' << m.dst << ',' << m.seq << ',' << m.length << ',' << m.created
                << ',' << hop_name(h.hop) << ',' << h.arrival << ',' << h.start << ',' << h.end << '\n';
    if (!out) throw IoError("failed writing trace");
}

}  // namespace nicmap
