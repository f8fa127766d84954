#include "nicmap/topology.hpp"

#include <fstream>
#include <set>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "nicmap/errors.hpp"

namespace nicmap {

void ClusterSpec::validate() const {
    if (num_nodes < 1) throw SchemaError("num_nodes", "must be >= 1");
    if (sockets_per_node < 1) throw SchemaError("sockets_per_node", "must be >= 1");
    if (cores_per_socket < 1) throw SchemaError("cores_per_socket", "must be >= 1");
    if (!(mem_bandwidth > 0)) throw SchemaError("mem_bandwidth", "must be > 0");
    if (!(remote_mem_penalty >= 1)) throw SchemaError("remote_mem_penalty", "must be >= 1");
    if (!(cache_bandwidth > 0)) throw SchemaError("cache_bandwidth", "must be > 0");
    if (cache_msg_cap == 0) throw SchemaError("cache_msg_cap", "must be > 0");
    if (!(nic_bandwidth > 0)) throw SchemaError("nic_bandwidth", "must be > 0");
    if (switch_latency < 0) throw SchemaError("switch_latency", "must be >= 0");
}

bool valid_core(const ClusterSpec& spec, const CoreId& id) noexcept {
    return id.node < spec.num_nodes && id.socket < spec.sockets_per_node &&
           id.core < spec.cores_per_socket;
}

std::string to_string(const CoreId& id) {
    return "(" + std::to_string(id.node) + "," + std::to_string(id.socket) + "," +
           std::to_string(id.core) + ")";
}

Occupancy::Occupancy(ClusterSpec spec)
    : spec_(spec),
      used_(spec.total_cores(), false),
      node_free_(spec.num_nodes, spec.cores_per_node()),
      socket_free_(static_cast<std::size_t>(spec.num_nodes) * spec.sockets_per_node,
                   spec.cores_per_socket),
      total_free_(spec.total_cores()) {}

std::size_t Occupancy::flat(const CoreId& id) const {
    if (!valid_core(spec_, id)) throw std::out_of_range("core " + to_string(id) + " outside cluster");
    return (static_cast<std::size_t>(id.node) * spec_.sockets_per_node + id.socket) *
               spec_.cores_per_socket +
           id.core;
}

void Occupancy::claim(const CoreId& id) {
    const auto i = flat(id);
    if (used_[i]) throw CoreAlreadyUsed("core " + to_string(id) + " already used");
    used_[i] = true;
    --node_free_[id.node];
    --socket_free_[static_cast<std::size_t>(id.node) * spec_.sockets_per_node + id.socket];
    --total_free_;
}

bool Occupancy::is_used(const CoreId& id) const { return used_[flat(id)]; }

std::uint32_t Occupancy::socket_free(std::uint32_t node, std::uint32_t socket) const {
    if (node >= spec_.num_nodes || socket >= spec_.sockets_per_node)
        throw std::out_of_range("socket outside cluster");
    return socket_free_[static_cast<std::size_t>(node) * spec_.sockets_per_node + socket];
}

std::optional<CoreId> Occupancy::lowest_free_core(std::uint32_t node, std::uint32_t socket) const {
    if (socket_free(node, socket) == 0) return std::nullopt;
    for (std::uint32_t c = 0; c < spec_.cores_per_socket; ++c) {
        CoreId id{node, socket, c};
        if (!used_[flat(id)]) return id;
    }
    return std::nullopt;
}

std::optional<CoreId> Occupancy::lowest_free_core(std::uint32_t node) const {
    for (std::uint32_t s = 0; s < spec_.sockets_per_node; ++s)
        if (auto id = lowest_free_core(node, s)) return id;
    return std::nullopt;
}

std::vector<CoreId> Occupancy::free_cores() const {
    std::vector<CoreId> out;
    out.reserve(total_free_);
    for (std::uint32_t n = 0; n < spec_.num_nodes; ++n)
        for (std::uint32_t s = 0; s < spec_.sockets_per_node; ++s)
            for (std::uint32_t c = 0; c < spec_.cores_per_socket; ++c)
                if (!used_[flat({n, s, c})]) out.push_back({n, s, c});
    return out;
}

Rational free_cores_avg(const Occupancy& occ) {
    return {occ.total_free(), occ.spec().num_nodes};
}

std::optional<std::uint32_t> select_socket(const Occupancy& occ, std::uint32_t node) {
    std::optional<std::uint32_t> best;
    std::uint32_t best_free = 0;
    for (std::uint32_t s = 0; s < occ.spec().sockets_per_node; ++s) {
        const auto f = occ.socket_free(node, s);
        if (f > best_free) {
            best = s;
            best_free = f;
        }
    }
    return best;
}

std::pair<std::uint32_t, std::uint32_t> select_node_socket(
    const Occupancy& occ, const std::function<bool(std::uint32_t)>& eligible) {
    std::optional<std::uint32_t> best;
    std::uint32_t best_free = 0;
    for (std::uint32_t n = 0; n < occ.spec().num_nodes; ++n) {
        if (eligible && !eligible(n)) continue;
        const auto f = occ.node_free(n);
        if (f > best_free) {
            best = n;
            best_free = f;
        }
    }
    if (!best) throw ClusterFull("no eligible node has a free core");
    return {*best, *select_socket(occ, *best)};
}

namespace {

const std::set<std::string>& cluster_fields() {
    static const std::set<std::string> fields{
        "num_nodes",      "sockets_per_node", "cores_per_socket",
        "mem_bandwidth",  "remote_mem_penalty", "cache_bandwidth",
        "cache_msg_cap",  "nic_bandwidth",    "switch_latency"};
    return fields;
}

template <typename T>
void read_field(const nlohmann::json& doc, const char* key, T& out) {
    auto it = doc.find(key);
    if (it == doc.end()) return;
    if constexpr (std::is_floating_point_v<T>) {
        if (!it->is_number()) throw SchemaError(key, "expected a number");
        out = it->template get<T>();
    } else {
        if (!it->is_number_integer()) throw SchemaError(key, "expected an integer");
        if (it->is_number_integer() && !it->is_number_unsigned() && it->template get<std::int64_t>() < 0)
            throw SchemaError(key, "must be non-negative");
        out = it->template get<T>();
    }
}

}  // namespace

ClusterSpec cluster_from_json(const nlohmann::json& doc) {
    if (!doc.is_object()) throw SchemaError("", "cluster document must be a JSON object");
    for (const auto& [key, _] : doc.items())
        if (!cluster_fields().contains(key)) throw SchemaError(key, "unknown field");

    ClusterSpec spec;
    read_field(doc, "num_nodes", spec.num_nodes);
    read_field(doc, "sockets_per_node", spec.sockets_per_node);
    read_field(doc, "cores_per_socket", spec.cores_per_socket);
    read_field(doc, "mem_bandwidth", spec.mem_bandwidth);
    read_field(doc, "remote_mem_penalty", spec.remote_mem_penalty);
    read_field(doc, "cache_bandwidth", spec.cache_bandwidth);
    read_field(doc, "cache_msg_cap", spec.cache_msg_cap);
    read_field(doc, "nic_bandwidth", spec.nic_bandwidth);
    read_field(doc, "switch_latency", spec.switch_latency);
    spec.validate();
    return spec;
}

nlohmann::json to_json(const ClusterSpec& spec) {
    return {
        {"num_nodes", spec.num_nodes},
        {"sockets_per_node", spec.sockets_per_node},
        {"cores_per_socket", spec.cores_per_socket},
        {"mem_bandwidth", spec.mem_bandwidth},
        {"remote_mem_penalty", spec.remote_mem_penalty},
        {"cache_bandwidth", spec.cache_bandwidth},
        {"cache_msg_cap", spec.cache_msg_cap},
        {"nic_bandwidth", spec.nic_bandwidth},
        {"switch_latency", spec.switch_latency},
    };
}

ClusterSpec load_cluster(const std::filesystem::path& path) {
    if (path.empty()) return ClusterSpec{};
    std::ifstream in(path);
    if (!in) throw IoError("cannot open cluster file " + path.string());
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::parse_error& e) {
        throw SchemaError("", path.string() + ": " + e.what());
    }
    return cluster_from_json(doc);
}

}  // namespace nicmap
