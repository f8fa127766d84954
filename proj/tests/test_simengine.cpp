#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "nicmap/errors.hpp"
#include "nicmap/metrics.hpp"
#include "nicmap/simengine.hpp"
#include "test_support.hpp"

namespace nicmap {
namespace {

const ClusterSpec kSpec{};

JobSpec job(std::uint32_t id, Pattern p, std::uint32_t procs, Bytes len, double rate, std::uint64_t count) {
    JobSpec j;
    j.job_id = id;
    j.num_processes = procs;
    j.pattern = p;
    j.msg_length = len;
    j.msg_rate = rate;
    j.msg_count = count;
    return j;
}

std::string trace_of(const RawResults& raw) {
    std::ostringstream os;
    write_trace(os, raw);
    return os.str();
}

TEST(Route, Shapes) {
    auto cache = route(CoreId{0, 1, 0}, CoreId{0, 1, 3}, 512 * KiB, kSpec);
    ASSERT_EQ(cache.size, 1);
    EXPECT_EQ(cache.hops[0].kind, HopKind::Cache);
    EXPECT_EQ(cache.hops[0].socket, 1u);
    EXPECT_FALSE(cache.via_switch);

    auto big = route(CoreId{0, 1, 0}, CoreId{0, 1, 3}, 2 * MiB, kSpec);
    ASSERT_EQ(big.size, 1);
    EXPECT_EQ(big.hops[0].kind, HopKind::Memory);
    EXPECT_FALSE(big.hops[0].cross_socket);

    auto cross = route(CoreId{2, 0, 0}, CoreId{2, 3, 0}, 64, kSpec);
    ASSERT_EQ(cross.size, 1);
    EXPECT_EQ(cross.hops[0].kind, HopKind::Memory);
    EXPECT_EQ(cross.hops[0].node, 2u);
    EXPECT_TRUE(cross.hops[0].cross_socket);

    auto net = route(CoreId{0, 0, 0}, CoreId{5, 0, 0}, 64 * KiB, kSpec);
    ASSERT_EQ(net.size, 2);
    EXPECT_TRUE(net.via_switch);
    EXPECT_EQ(net.hops[0].kind, HopKind::NicEgress);
    EXPECT_EQ(net.hops[0].node, 0u);
    EXPECT_EQ(net.hops[1].kind, HopKind::NicIngress);
    EXPECT_EQ(net.hops[1].node, 5u);
}

TEST(Route, UnplacedProcess) {
    Placement pl;
    pl.assign({0, 0}, {0, 0, 0});
    EXPECT_THROW(route(ProcessRef{0, 0}, ProcessRef{0, 1}, 64, pl, kSpec), UnplacedProcess);
}

TEST(ServiceTime, Examples) {
    // 65536 / 2^30 s = 61035.15625 ns.
    EXPECT_EQ(service_time(64 * KiB, Hop{HopKind::NicEgress, 0, 0, false}, kSpec), 61035);
    EXPECT_EQ(service_time(64 * KiB, Hop{HopKind::NicIngress, 3, 0, false}, kSpec), 61035);
    // 2^20 / 2^32 s * 1.1 = 268554.6875 ns.
    EXPECT_EQ(service_time(1 * MiB, Hop{HopKind::Memory, 0, 0, true}, kSpec), 268555);
    // 2^20 / 2^32 s = 244140.625 ns.
    EXPECT_EQ(service_time(1 * MiB, Hop{HopKind::Memory, 0, 0, false}, kSpec), 244141);
    // 2^19 / 2^33 s = 61035.15625 ns.
    EXPECT_EQ(service_time(512 * KiB, Hop{HopKind::Cache, 0, 0, false}, kSpec), 61035);
    EXPECT_EQ(kSpec.switch_latency, 100);
}

TEST(Schedule, PeriodicReleases) {
    const auto j = job(0, Pattern::Linear, 2, 64, 100, 3);
    const auto lines = schedule(j, expand_pattern(j));
    ASSERT_EQ(lines.size(), 2u);
    ASSERT_EQ(lines[0].size(), 3u);
    EXPECT_EQ(lines[0][0].release, 0);
    EXPECT_EQ(lines[0][1].release, 10'000'000);
    EXPECT_EQ(lines[0][2].release, 20'000'000);
    EXPECT_TRUE(lines[1].empty());
}

TEST(Schedule, GatherSenders) {
    const auto j = job(0, Pattern::GatherReduce, 4, 64, 100, 2000);
    const auto lines = schedule(j, expand_pattern(j));
    EXPECT_TRUE(lines[0].empty());
    for (std::uint32_t p = 1; p < 4; ++p) {
        ASSERT_EQ(lines[p].size(), 2000u);
        for (const auto& s : lines[p]) EXPECT_EQ(s.dst, 0u);
    }
}

TEST(Schedule, EdgeScopeRunsStreamsInParallel) {
    const auto j = job(0, Pattern::AllToAll, 4, 64, 100, 6);
    const auto lines = schedule(j, expand_pattern(j), RateScope::Edge);
    const auto& p2 = lines[2];
    ASSERT_EQ(p2.size(), 6u);
    const std::vector<std::uint32_t> dsts{3, 0, 1, 3, 0, 1};
    for (std::size_t k = 0; k < 6; ++k) {
        EXPECT_EQ(p2[k].dst, dsts[k]);
        EXPECT_EQ(p2[k].release, k < 3 ? 0 : 10'000'000);
        EXPECT_EQ(p2[k].seq, k);
    }
}

TEST(Schedule, ProcessScopeRotates) {
    const auto j = job(0, Pattern::AllToAll, 4, 64, 100, 6);
    const auto lines = schedule(j, expand_pattern(j), RateScope::Process);
    const auto& p2 = lines[2];
    ASSERT_EQ(p2.size(), 6u);
    const std::vector<std::uint32_t> dsts{3, 0, 1, 3, 0, 1};
    for (std::size_t k = 0; k < 6; ++k) {
        EXPECT_EQ(p2[k].dst, dsts[k]);
        EXPECT_EQ(p2[k].release, static_cast<Nanoseconds>(k) * 10'000'000);
    }
}

TEST(Schedule, PoissonIsSeededAndHasTheRightMean) {
    const auto j = job(0, Pattern::Linear, 2, 64, 1000, 20000);
    const auto m = expand_pattern(j);
    const auto a = schedule(j, m, RateScope::Edge, ArrivalMode::Poisson, 7);
    const auto b = schedule(j, m, RateScope::Edge, ArrivalMode::Poisson, 7);
    const auto c = schedule(j, m, RateScope::Edge, ArrivalMode::Poisson, 8);
    ASSERT_EQ(a[0].size(), 20000u);
    bool same_ab = true, same_ac = true;
    for (std::size_t k = 0; k < a[0].size(); ++k) {
        same_ab &= a[0][k].release == b[0][k].release;
        same_ac &= a[0][k].release == c[0][k].release;
        if (k) EXPECT_GE(a[0][k].release, a[0][k - 1].release);
    }
    EXPECT_TRUE(same_ab);
    EXPECT_FALSE(same_ac);
    // Mean gap 1 ms; the sample mean over 2e4 gaps has ~0.7% standard error.
    const double mean_gap = static_cast<double>(a[0].back().release) / (a[0].size() - 1);
    EXPECT_NEAR(mean_gap, 1e6, 3e4);
}

Placement two_nodes() {
    Placement pl;
    pl.assign({0, 0}, {0, 0, 0});
    pl.assign({0, 1}, {1, 0, 0});
    return pl;
}

TEST(Run, SingleMessageIdleSystem) {
    const Workload w{"w", {job(0, Pattern::Linear, 2, 64 * KiB, 100, 1)}};
    for (auto q : {NicQueueing::Sender, NicQueueing::Both}) {
        SimOptions opts;
        opts.nic_queueing = q;
        const auto raw = run(w, two_nodes(), kSpec, opts);
        ASSERT_EQ(raw.messages.size(), 1u);
        const auto& m = raw.messages[0];
        EXPECT_EQ(m.hop_count, 2);
        EXPECT_EQ(m.delivered, 61035 + 100 + 61035);
        EXPECT_EQ(m.hops[0].waiting(), 0);
        EXPECT_EQ(m.hops[1].waiting(), 0);
        EXPECT_EQ(m.hops[1].queued(), q == NicQueueing::Both);
        EXPECT_EQ(aggregate(raw).total_waiting, 0);
        EXPECT_EQ(raw.jobs[0].process_finish[0], 61035);
        EXPECT_EQ(raw.jobs[0].process_finish[1], 122170);
    }
}

TEST(Run, SimultaneousSendsSerialiseOnTheEgressNic) {
    // Process 0 broadcasts one message to each of two other nodes at t = 0.
    const Workload w{"w", {job(0, Pattern::BcastScatter, 3, 64 * KiB, 100, 2)}};
    Placement pl;
    pl.assign({0, 0}, {0, 0, 0});
    pl.assign({0, 1}, {1, 0, 0});
    pl.assign({0, 2}, {2, 0, 0});
    const auto raw = run(w, pl, kSpec);
    ASSERT_EQ(raw.messages.size(), 2u);
    EXPECT_EQ(raw.messages[0].hops[0].waiting(), 0);
    EXPECT_EQ(raw.messages[1].hops[0].waiting(), 61035);
    EXPECT_EQ(aggregate(raw).total_waiting, 61035);
}

TEST(Run, IngressContentionOnlyWithBothEndQueueing) {
    // Two senders on different nodes hit one receiver at t = 0.
    const Workload w{"w", {job(0, Pattern::GatherReduce, 3, 64 * KiB, 100, 1)}};
    Placement pl;
    pl.assign({0, 0}, {0, 0, 0});
    pl.assign({0, 1}, {1, 0, 0});
    pl.assign({0, 2}, {2, 0, 0});
    EXPECT_EQ(aggregate(run(w, pl, kSpec)).total_waiting, 0);
    SimOptions both;
    both.nic_queueing = NicQueueing::Both;
    EXPECT_EQ(aggregate(run(w, pl, kSpec, both)).total_waiting, 61035);
}

TEST(Run, HalfDuplexSharesTheNic) {
    // Node 1 forwards while it receives: in half duplex both use one server.
    const Workload w{"w", {job(0, Pattern::Linear, 3, 64 * KiB, 100, 1)}};
    Placement pl;
    pl.assign({0, 0}, {0, 0, 0});
    pl.assign({0, 1}, {1, 0, 0});
    pl.assign({0, 2}, {2, 0, 0});
    SimOptions half;
    half.duplex = NicDuplex::Half;
    half.nic_queueing = NicQueueing::Both;
    const auto raw = run(w, pl, kSpec, half);
    // 1 -> 2 holds node 1's NIC until 61035; 0 -> 1 arrives there at 61135.
    EXPECT_EQ(aggregate(raw).total_waiting, 0);
    const auto full = run(w, pl, kSpec);
    EXPECT_EQ(raw.messages.size(), full.messages.size());
    EXPECT_EQ(raw.servers.size(), full.servers.size());
}

TEST(Run, UnplacedProcessThrows) {
    const Workload w{"w", {job(0, Pattern::Linear, 3, 64, 100, 1)}};
    EXPECT_THROW(run(w, two_nodes(), kSpec), UnplacedProcess);
}

void check_invariants(const Workload& w, const RawResults& raw, const ClusterSpec& spec) {
    std::uint64_t expected = 0;
    for (const auto& j : w.jobs)
        {
            const auto m = matrix_of(j);
            for (const auto& e : m.edges()) expected += e.count;
        }
    EXPECT_EQ(raw.sent, expected);
    EXPECT_EQ(raw.delivered, expected);
    EXPECT_EQ(raw.messages.size(), expected);

    std::vector<Nanoseconds> busy(raw.servers.size(), 0);
    std::vector<std::uint64_t> served(raw.servers.size(), 0);
    for (const auto& m : raw.messages) {
        Nanoseconds floor = m.created;
        for (const auto& h : m.hop_view()) {
            const auto s = service_time(m.length, h.hop, spec);
            EXPECT_EQ(h.end - h.start, s);
            EXPECT_GE(h.start, h.arrival);
            floor += s;
            if (h.queued()) {
                busy[h.server] += s;
                ++served[h.server];
            } else {
                EXPECT_EQ(h.start, h.arrival);
            }
        }
        if (m.hop_count == 2) floor += spec.switch_latency;
        EXPECT_GE(m.delivered, floor);
        EXPECT_EQ(m.delivered, m.hop_view().back().end);
        EXPECT_LE(m.delivered, raw.horizon);
    }
    for (std::size_t s = 0; s < raw.servers.size(); ++s) {
        EXPECT_EQ(raw.servers[s].busy, busy[s]);
        EXPECT_EQ(raw.servers[s].served, served[s]);
        EXPECT_LE(raw.servers[s].busy, raw.horizon);
    }
    // Work conservation: an independent FIFO replay gives the same schedule.
    const auto replay = testing::lindley_rewalk(raw);
    for (std::size_t m = 0; m < raw.messages.size(); ++m)
        for (std::size_t h = 0; h < raw.messages[m].hop_count; ++h) {
            ASSERT_EQ(replay[m][h].first, raw.messages[m].hops[h].start);
            ASSERT_EQ(replay[m][h].second, raw.messages[m].hops[h].end);
        }
}

TEST(RunProperty, InvariantsOnBundledWorkloads) {
    for (int k = 1; k <= 4; ++k) {
        const auto w = testing::bundled(k);
        for (auto s : {Strategy::Blocked, Strategy::New}) {
            const auto pl = map_workload(s, w, kSpec);
            check_invariants(w, run(w, pl, kSpec), kSpec);
        }
    }
}

Workload random_workload(std::mt19937& rng, std::uint32_t jobs) {
    Workload w{"rnd", {}};
    const Bytes lengths[] = {512, 64 * KiB, 2 * MiB};
    for (std::uint32_t id = 0; id < jobs; ++id) {
        const std::uint32_t p = 2 + rng() % 5;
        std::vector<CommEdge> edges;
        for (std::uint32_t i = 0; i < p; ++i)
            for (std::uint32_t k = 0; k < p; ++k)
                if (i != k && rng() % 3 == 0)
                    edges.push_back({i, k, lengths[rng() % 3], 200.0 + rng() % 2000, 1 + rng() % 6});
        if (edges.empty()) edges.push_back({0, 1, 64 * KiB, 500, 3});
        JobSpec j;
        j.job_id = id;
        j.num_processes = p;
        j.pattern = Pattern::Explicit;
        j.explicit_matrix = CommMatrix(p, edges);
        w.jobs.push_back(j);
    }
    return w;
}

Placement random_placement(std::mt19937& rng, const Workload& w, const ClusterSpec& spec) {
    Occupancy occ(spec);
    auto cores = occ.free_cores();
    std::shuffle(cores.begin(), cores.end(), rng);
    Placement pl;
    std::size_t next = 0;
    for (const auto& j : w.jobs)
        for (std::uint32_t p = 0; p < j.num_processes; ++p) pl.assign({j.job_id, p}, cores[next++]);
    return pl;
}

TEST(RunProperty, InvariantsOnRandomInstances) {
    std::mt19937 rng(2024);
    ClusterSpec spec;
    spec.num_nodes = 3;
    spec.sockets_per_node = 2;
    spec.cores_per_socket = 4;
    for (int trial = 0; trial < 40; ++trial) {
        const auto w = random_workload(rng, 1 + rng() % 3);
        const auto pl = random_placement(rng, w, spec);
        for (auto q : {NicQueueing::Sender, NicQueueing::Both})
            for (auto d : {NicDuplex::Full, NicDuplex::Half}) {
                SimOptions opts;
                opts.nic_queueing = q;
                opts.duplex = d;
                check_invariants(w, run(w, pl, spec, opts), spec);
            }
    }
}

// With sender-side queueing every queued hop is a first hop whose arrival is
// the fixed release time, so extra traffic can only push other messages back.
TEST(RunProperty, AddingTrafficNeverReducesWaiting) {
    std::mt19937 rng(77);
    ClusterSpec spec;
    spec.num_nodes = 2;
    spec.sockets_per_node = 2;
    spec.cores_per_socket = 4;
    for (int trial = 0; trial < 40; ++trial) {
        auto w = random_workload(rng, 1 + rng() % 2);
        auto pl = random_placement(rng, w, spec);
        const auto base = run(w, pl, spec);

        Occupancy occ(spec);
        for (const auto& [ref, core] : pl) occ.claim(core);
        auto spare = occ.free_cores();
        std::shuffle(spare.begin(), spare.end(), rng);
        JobSpec extra;
        extra.job_id = 99;
        extra.num_processes = 2;
        extra.pattern = Pattern::Explicit;
        extra.explicit_matrix = CommMatrix(2, {{0, 1, 64 * KiB, 1000.0 + rng() % 3000, 1 + rng() % 4}});
        w.jobs.push_back(extra);
        pl.assign({99, 0}, spare[0]);
        pl.assign({99, 1}, spare[1]);
        const auto more = run(w, pl, spec);

        std::map<std::tuple<std::uint32_t, std::uint32_t, std::uint64_t>, Nanoseconds> after;
        for (const auto& m : more.messages) after[{m.job, m.src, m.seq}] = m.hops[0].waiting();
        for (const auto& m : base.messages) EXPECT_GE(after.at({m.job, m.src, m.seq}), m.hops[0].waiting());
    }
}

TEST(RunProperty, Determinism) {
    const auto w = testing::bundled(3);
    const auto pl = map_workload(Strategy::Cyclic, w, kSpec);
    EXPECT_EQ(trace_of(run(w, pl, kSpec)), trace_of(run(w, pl, kSpec)));
    SimOptions poisson;
    poisson.arrivals = ArrivalMode::Poisson;
    poisson.seed = 11;
    const auto small = Workload{"w", {w.jobs[0]}};
    EXPECT_EQ(trace_of(run(small, pl, kSpec, poisson)), trace_of(run(small, pl, kSpec, poisson)));
}

TEST(Trace, Header) {
    const Workload w{"w", {job(0, Pattern::Linear, 2, 64 * KiB, 100, 1)}};
    const auto t = trace_of(run(w, two_nodes(), kSpec));
    EXPECT_EQ(t.substr(0, t.find('\n')), "job,src,dst,seq,length,created_ns,hop,arrival_ns,start_ns,end_ns");
    EXPECT_EQ(std::count(t.begin(), t.end(), '\n'), 3);
}

}  // namespace
}  // namespace nicmap
