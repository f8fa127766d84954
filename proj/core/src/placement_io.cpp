#include "nicmap/placement_io.hpp"

#include <cstdio>
#include <fstream>
#include <map>

#include <nlohmann/json.hpp>

#include "nicmap/errors.hpp"

namespace nicmap {

nlohmann::json to_json(const Placement& pl) {
    auto arr = nlohmann::json::array();
    for (const auto& [p, c] : pl)
        arr.push_back({{"job", p.job}, {"process", p.process}, {"node", c.node}, {"socket", c.socket},
                       {"core", c.core}});
    return arr;
}

Placement placement_from_json(const nlohmann::json& doc) {
    if (!doc.is_array()) throw SchemaError("", "placement document must be a JSON array");
    Placement pl;
    for (std::size_t k = 0; k < doc.size(); ++k) {
        const auto path = "[" + std::to_string(k) + "]";
        const auto& rec = doc[k];
        if (!rec.is_object()) throw SchemaError(path, "expected an object");
        auto field = [&](const char* key) -> std::uint32_t {
            auto it = rec.find(key);
            if (it == rec.end()) throw SchemaError(path + "." + key, "missing");
            if (!it->is_number_unsigned()) throw SchemaError(path + "." + key, "expected a non-negative integer");
            return it->get<std::uint32_t>();
        };
        const ProcessRef p{field("job"), field("process")};
        if (pl.find(p)) throw SchemaError(path, "process listed twice");
        pl.assign(p, {field("node"), field("socket"), field("core")});
    }
    return pl;
}

Placement load_placement(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open placement file " + path.string());
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::parse_error& e) {
        throw SchemaError("", path.string() + ": " + e.what());
    }
    return placement_from_json(doc);
}

std::string render_table(const Placement& pl) {
    std::string out = "  job  process   node  socket  core\n";
    char line[80];
    for (const auto& [p, c] : pl) {
        std::snprintf(line, sizeof line, "%5u  %7u  %5u  %6u  %4u\n", p.job, p.process, c.node, c.socket, c.core);
        out += line;
    }
    return out;
}

std::string render_node_counts(const Placement& pl, const ClusterSpec& spec) {
    std::vector<std::map<std::uint32_t, std::uint32_t>> per_node(spec.num_nodes);
    for (const auto& [p, c] : pl) ++per_node.at(c.node)[p.job];
    std::string out;
    char buf[64];
    for (std::uint32_t n = 0; n < spec.num_nodes; ++n) {
        std::uint32_t total = 0;
        for (const auto& [_, k] : per_node[n]) total += k;
        std::snprintf(buf, sizeof buf, "node %3u: %3u processes", n, total);
        out += buf;
        if (!per_node[n].empty()) {
            out += " (";
            bool first = true;
            for (const auto& [job, k] : per_node[n]) {
                if (!first) out += ", ";
                first = false;
                out += "job " + std::to_string(job) + ": " + std::to_string(k);
            }
            out += ")";
        }
        out += "\n";
    }
    return out;
}

}  // namespace nicmap
