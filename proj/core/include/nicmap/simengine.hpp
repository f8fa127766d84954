#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "nicmap/mapping.hpp"
#include "nicmap/topology.hpp"
#include "nicmap/workload.hpp"

namespace nicmap {

enum class NicDuplex { Full, Half };
/// Sender: only the egress NIC queues; the receive side is a contention-free
/// transfer stage. Both: the ingress NIC is a FIFO server as well.
enum class NicQueueing { Sender, Both };
/// Edge: every destination stream of a process emits at the job rate.
/// Process: the job rate is the process total, rotated over destinations.
enum class RateScope { Edge, Process };
enum class ArrivalMode { Periodic, Poisson };

struct SimOptions {
    NicDuplex duplex = NicDuplex::Full;
    NicQueueing nic_queueing = NicQueueing::Sender;
    RateScope rate_scope = RateScope::Edge;
    ArrivalMode arrivals = ArrivalMode::Periodic;
    std::uint64_t seed = 0;  // Poisson mode only
};

std::string_view to_string(NicDuplex d) noexcept;
std::string_view to_string(NicQueueing q) noexcept;
std::string_view to_string(RateScope r) noexcept;
std::string_view to_string(ArrivalMode a) noexcept;

enum class HopKind : std::uint8_t { Cache, Memory, NicEgress, NicIngress };

/// One queueing stage of a route. `cross_socket` scales memory service by the
/// remote-access penalty.
struct Hop {
    HopKind kind = HopKind::Cache;
    std::uint32_t node = 0;
    std::uint32_t socket = 0;  // cache hops only
    bool cross_socket = false;

    bool operator==(const Hop&) const = default;
};

/// [Cache] | [Memory] | [NicEgress, switch delay, NicIngress].
struct Route {
    std::array<Hop, 2> hops{};
    std::uint8_t size = 0;
    bool via_switch = false;

    std::span<const Hop> view() const noexcept { return {hops.data(), size}; }
};

Route route(const CoreId& src, const CoreId& dst, Bytes length, const ClusterSpec& spec);
/// Throws UnplacedProcess when either end is missing from the placement.
Route route(ProcessRef src, ProcessRef dst, Bytes length, const Placement& pl, const ClusterSpec& spec);

/// Transfer time of `length` bytes on a hop, rounded to the nearest nanosecond.
Nanoseconds service_time(Bytes length, const Hop& hop, const ClusterSpec& spec);

struct Send {
    Nanoseconds release = 0;
    std::uint32_t dst = 0;
    Bytes length = 0;
    std::uint64_t seq = 0;
};

/// Send timeline of every process of a job, first send at t = 0.
///
/// With RateScope::Edge each matrix edge is a stream emitting its count at
/// k/lambda; streams of one process are merged by time, simultaneous sends
/// ordered by destination starting just above the sender's index. With
/// RateScope::Process a patterned job's process emits its total count at
/// k/lambda, rotating over destinations in that same order; explicit
/// matrices always run per edge. In Poisson mode the gaps are exponential
/// with the same mean, drawn from generators seeded by (seed, job, process,
/// stream).
std::vector<std::vector<Send>> schedule(const JobSpec& job, const CommMatrix& m,
                                        RateScope scope = RateScope::Edge,
                                        ArrivalMode mode = ArrivalMode::Periodic, std::uint64_t seed = 0);

inline constexpr std::uint32_t kNoServer = static_cast<std::uint32_t>(-1);

struct HopRecord {
    Hop hop;
    std::uint32_t server = kNoServer;  // index into RawResults::servers; kNoServer for a delay stage
    Nanoseconds arrival = 0;
    Nanoseconds start = 0;
    Nanoseconds end = 0;

    Nanoseconds waiting() const noexcept { return start - arrival; }
    bool queued() const noexcept { return server != kNoServer; }
};

std::string hop_name(const Hop& h);

struct MessageRecord {
    std::uint32_t job = 0;
    std::uint32_t src = 0;
    std::uint32_t dst = 0;
    std::uint64_t seq = 0;
    Bytes length = 0;
    Nanoseconds created = 0;
    std::array<HopRecord, 2> hops{};
    std::uint8_t hop_count = 0;
    Nanoseconds delivered = 0;

    std::span<const HopRecord> hop_view() const noexcept { return {hops.data(), hop_count}; }
};

struct ServerStats {
    Hop id;  // in half duplex the shared NIC server reports NicEgress
    Nanoseconds busy = 0;
    std::uint64_t served = 0;

    std::string name() const { return hop_name(id); }
};

struct JobCompletion {
    std::uint32_t job_id = 0;
    std::vector<Nanoseconds> process_finish;
};

struct RawResults {
    std::vector<MessageRecord> messages;  // in release order
    std::vector<ServerStats> servers;
    std::vector<JobCompletion> jobs;      // workload order
    std::uint64_t sent = 0;
    std::uint64_t delivered = 0;
    Nanoseconds horizon = 0;              // last service end anywhere
};

/// Single-threaded discrete-event run of the whole workload on FIFO servers.
RawResults run(const Workload& w, const Placement& pl, const ClusterSpec& spec, const SimOptions& opts = {});

/// Per-hop CSV: job,src,dst,seq,length,created_ns,hop,arrival_ns,start_ns,end_ns.
void write_trace(std::ostream& out, const RawResults& raw);

}  // namespace nicmap
