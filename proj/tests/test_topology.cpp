#include <algorithm>
#include <random>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "nicmap/errors.hpp"
#include "nicmap/topology.hpp"
#include "test_support.hpp"

namespace nicmap {
namespace {

TEST(ClusterSpec, DefaultIsReferencePlatform) {
    ClusterSpec s;
    EXPECT_EQ(s.num_nodes, 16u);
    EXPECT_EQ(s.sockets_per_node, 4u);
    EXPECT_EQ(s.cores_per_socket, 4u);
    EXPECT_EQ(s.mem_bandwidth, 4294967296.0);
    EXPECT_DOUBLE_EQ(s.remote_mem_penalty, 1.10);
    EXPECT_EQ(s.cache_msg_cap, 1048576u);
    EXPECT_EQ(s.nic_bandwidth, 1073741824.0);
    EXPECT_EQ(s.switch_latency, 100);
    EXPECT_EQ(s.total_cores(), 256u);
}

TEST(ClusterSpec, BundledDefaultFileMatchesDefaults) {
    EXPECT_EQ(load_cluster(testing::data_file("cluster_default.json")), ClusterSpec{});
    EXPECT_EQ(load_cluster(""), ClusterSpec{});
}

TEST(ClusterSpec, JsonRejectsBadFields) {
    EXPECT_THROW(cluster_from_json({{"num_nodes", 0}}), SchemaError);
    EXPECT_THROW(cluster_from_json({{"remote_mem_penalty", 0.9}}), SchemaError);
    EXPECT_THROW(cluster_from_json({{"nic_bandwith", 1.0}}), SchemaError);
    EXPECT_THROW(cluster_from_json({{"num_nodes", "16"}}), SchemaError);
    try {
        cluster_from_json({{"cache_bandwidth", -1.0}});
        FAIL();
    } catch (const SchemaError& e) {
        EXPECT_EQ(e.path(), "cache_bandwidth");
    }
}

TEST(ClusterSpec, JsonRoundTrip) {
    ClusterSpec s;
    s.num_nodes = 3;
    s.cache_bandwidth = 1.5e9;
    EXPECT_EQ(cluster_from_json(to_json(s)), s);
}

TEST(Occupancy, FreeCoresAvg) {
    Occupancy occ{ClusterSpec{}};
    EXPECT_EQ(free_cores_avg(occ), (Rational{16, 1}));
    for (std::uint32_t k = 0; k < 8; ++k) occ.claim({0, k / 4, k % 4});
    EXPECT_EQ(free_cores_avg(occ), (Rational{31, 2}));
    EXPECT_DOUBLE_EQ(free_cores_avg(occ).value(), 15.5);

    Occupancy full{ClusterSpec{}};
    for (const auto& c : full.free_cores()) full.claim(c);
    EXPECT_EQ(free_cores_avg(full), (Rational{0, 1}));
}

TEST(Occupancy, Claim) {
    Occupancy occ{ClusterSpec{}};
    occ.claim({0, 0, 0});
    EXPECT_EQ(occ.node_free(0), 15u);
    EXPECT_EQ(occ.socket_free(0, 0), 3u);
    EXPECT_THROW(occ.claim({0, 0, 0}), CoreAlreadyUsed);
    EXPECT_THROW(occ.claim({16, 0, 0}), std::out_of_range);

    for (std::uint32_t s = 0; s < 4; ++s)
        for (std::uint32_t c = 0; c < 4; ++c) occ.claim({3, s, c});
    EXPECT_EQ(occ.node_free(3), 0u);
}

TEST(Occupancy, SelectNodeSocket) {
    Occupancy occ{ClusterSpec{}};
    EXPECT_EQ(select_node_socket(occ), std::make_pair(0u, 0u));

    for (std::uint32_t k = 0; k < 6; ++k) occ.claim({0, k / 4, k % 4});
    EXPECT_EQ(occ.node_free(0), 10u);
    EXPECT_EQ(select_node_socket(occ).first, 1u);

    Occupancy occ2{ClusterSpec{}};
    for (std::uint32_t n = 0; n < 16; ++n)
        if (n != 2)
            for (std::uint32_t k = 0; k < 16; ++k) occ2.claim({n, k / 4, k % 4});
    for (std::uint32_t c = 0; c < 4; ++c) occ2.claim({2, 0, c});  // socket 0 full
    occ2.claim({2, 2, 0});
    occ2.claim({2, 3, 0});
    EXPECT_EQ(select_node_socket(occ2), std::make_pair(2u, 1u));

    Occupancy full{ClusterSpec{}};
    for (const auto& c : full.free_cores()) full.claim(c);
    EXPECT_THROW(select_node_socket(full), ClusterFull);
}

TEST(Occupancy, SelectNodeSocketHonoursEligibility) {
    Occupancy occ{ClusterSpec{}};
    auto pick = select_node_socket(occ, [](std::uint32_t n) { return n >= 5; });
    EXPECT_EQ(pick.first, 5u);
    EXPECT_THROW(select_node_socket(occ, [](std::uint32_t) { return false; }), ClusterFull);
}

// Random claim sequences keep the books balanced and never make
// select_node_socket point at a full node or socket.
TEST(OccupancyProperty, RandomClaimSequences) {
    std::mt19937 rng(1234);
    for (int trial = 0; trial < 50; ++trial) {
        ClusterSpec spec;
        spec.num_nodes = 1 + rng() % 6;
        spec.sockets_per_node = 1 + rng() % 4;
        spec.cores_per_socket = 1 + rng() % 4;
        Occupancy occ(spec);
        auto cores = occ.free_cores();
        std::shuffle(cores.begin(), cores.end(), rng);
        const auto claims = rng() % (cores.size() + 1);
        for (std::size_t k = 0; k < claims; ++k) {
            occ.claim(cores[k]);
            std::uint32_t sum_free = 0;
            for (std::uint32_t n = 0; n < spec.num_nodes; ++n) sum_free += occ.node_free(n);
            ASSERT_EQ(sum_free + k + 1, spec.total_cores());
            if (occ.total_free() == 0) {
                EXPECT_THROW(select_node_socket(occ), ClusterFull);
                continue;
            }
            const auto a = select_node_socket(occ);
            const auto b = select_node_socket(occ);
            ASSERT_EQ(a, b);
            ASSERT_GT(occ.node_free(a.first), 0u);
            ASSERT_GT(occ.socket_free(a.first, a.second), 0u);
            for (std::uint32_t n = 0; n < spec.num_nodes; ++n) ASSERT_LE(occ.node_free(n), occ.node_free(a.first));
        }
    }
}

}  // namespace
}  // namespace nicmap
