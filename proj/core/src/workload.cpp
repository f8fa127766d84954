#include "nicmap/workload.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <set>

#include <nlohmann/json.hpp>

#include "nicmap/errors.hpp"

namespace nicmap {

namespace {

constexpr Bytes kSmallLimit = 2 * KiB;
constexpr Bytes kLargeLimit = 1 * MiB;

std::string at(std::string_view base, std::size_t i) {
    return std::string(base) + "[" + std::to_string(i) + "]";
}

}  // namespace

std::string_view to_string(Pattern p) noexcept {
    switch (p) {
        case Pattern::AllToAll: return "all_to_all";
        case Pattern::BcastScatter: return "bcast_scatter";
        case Pattern::GatherReduce: return "gather_reduce";
        case Pattern::Linear: return "linear";
        case Pattern::Explicit: return "explicit";
    }
    return "unknown";
}

Pattern pattern_from_string(std::string_view s) {
    for (auto p : {Pattern::AllToAll, Pattern::BcastScatter, Pattern::GatherReduce,
                   Pattern::Linear, Pattern::Explicit})
        if (to_string(p) == s) return p;
    throw SchemaError("pattern", "unknown pattern '" + std::string(s) + "'");
}

std::string_view to_string(SizeClass c) noexcept {
    switch (c) {
        case SizeClass::Large: return "large";
        case SizeClass::Medium: return "medium";
        case SizeClass::Small: return "small";
    }
    return "unknown";
}

CommMatrix::CommMatrix(std::uint32_t processes, std::vector<CommEdge> edges)
    : processes_(processes), edges_(std::move(edges)) {
    for (std::size_t k = 0; k < edges_.size(); ++k) {
        const auto& e = edges_[k];
        const auto path = at("matrix", k);
        if (e.src >= processes_) throw SchemaError(path + ".src", "out of range");
        if (e.dst >= processes_) throw SchemaError(path + ".dst", "out of range");
        if (e.src == e.dst) throw SchemaError(path, "self edge");
        if (e.length == 0) throw SchemaError(path + ".length_bytes", "must be > 0");
        if (!(e.rate > 0)) throw SchemaError(path + ".rate_per_sec", "must be > 0");
        if (e.count == 0) throw SchemaError(path + ".count", "must be >= 1");
    }
    std::stable_sort(edges_.begin(), edges_.end(), [](const CommEdge& a, const CommEdge& b) {
        return std::tie(a.src, a.dst) < std::tie(b.src, b.dst);
    });
    offsets_.assign(processes_ + 1, 0);
    for (const auto& e : edges_) ++offsets_[e.src + 1];
    std::partial_sum(offsets_.begin(), offsets_.end(), offsets_.begin());
}

std::span<const CommEdge> CommMatrix::out_edges(std::uint32_t src) const {
    if (src >= processes_) return {};
    return std::span<const CommEdge>(edges_).subspan(offsets_[src], offsets_[src + 1] - offsets_[src]);
}

std::vector<std::uint32_t> CommMatrix::out_neighbors(std::uint32_t src) const {
    std::vector<std::uint32_t> out;
    for (const auto& e : out_edges(src))
        if (out.empty() || out.back() != e.dst) out.push_back(e.dst);
    return out;
}

double CommMatrix::pair_demand(std::uint32_t src, std::uint32_t dst) const {
    Bytes len = 0;
    double rate = 0;
    for (const auto& e : out_edges(src)) {
        if (e.dst != dst) continue;
        len = std::max(len, e.length);
        rate += e.rate;
    }
    return static_cast<double>(len) * rate;
}

Bytes CommMatrix::max_length() const noexcept {
    Bytes m = 0;
    for (const auto& e : edges_) m = std::max(m, e.length);
    return m;
}

std::uint64_t Workload::total_processes() const noexcept {
    std::uint64_t n = 0;
    for (const auto& j : jobs) n += j.num_processes;
    return n;
}

CommMatrix expand_pattern(const JobSpec& job) {
    if (job.pattern == Pattern::Explicit)
        throw PatternUndefined("job " + std::to_string(job.job_id) + " has an explicit matrix");
    const auto P = job.num_processes;
    std::vector<CommEdge> edges;
    auto fan_out = [&](std::uint32_t src, const std::vector<std::uint32_t>& ascending) {
        // Rotation starts at the first destination above src.
        const auto d = ascending.size();
        const auto first = static_cast<std::size_t>(
            std::upper_bound(ascending.begin(), ascending.end(), src) - ascending.begin());
        for (std::size_t r = 0; r < d; ++r) {
            const auto dst = ascending[(first + r) % d];
            const std::uint64_t count = job.msg_count / d + (r < job.msg_count % d ? 1 : 0);
            if (count == 0) continue;
            edges.push_back({src, dst, job.msg_length, job.msg_rate, count});
        }
    };
    switch (job.pattern) {
        case Pattern::AllToAll:
            for (std::uint32_t i = 0; i < P; ++i) {
                std::vector<std::uint32_t> dsts;
                for (std::uint32_t j = 0; j < P; ++j)
                    if (j != i) dsts.push_back(j);
                fan_out(i, dsts);
            }
            break;
        case Pattern::BcastScatter: {
            std::vector<std::uint32_t> dsts;
            for (std::uint32_t j = 1; j < P; ++j) dsts.push_back(j);
            fan_out(0, dsts);
            break;
        }
        case Pattern::GatherReduce:
            for (std::uint32_t i = 1; i < P; ++i)
                edges.push_back({i, 0, job.msg_length, job.msg_rate, job.msg_count});
            break;
        case Pattern::Linear:
            for (std::uint32_t i = 0; i + 1 < P; ++i)
                edges.push_back({i, i + 1, job.msg_length, job.msg_rate, job.msg_count});
            break;
        case Pattern::Explicit: break;
    }
    return CommMatrix(P, std::move(edges));
}

CommMatrix matrix_of(const JobSpec& job) {
    if (job.pattern == Pattern::Explicit) return job.explicit_matrix.value_or(CommMatrix(job.num_processes, {}));
    return expand_pattern(job);
}

SizeClass classify_length(Bytes max_length) noexcept {
    if (max_length >= kLargeLimit) return SizeClass::Large;
    if (max_length < kSmallLimit) return SizeClass::Small;
    return SizeClass::Medium;
}

SizeClass classify(const JobSpec& job) {
    Bytes len = job.msg_length;
    if (job.pattern == Pattern::Explicit && job.explicit_matrix)
        len = job.explicit_matrix->max_length();
    return classify_length(len);
}

AdjacencyStats adjacency_stats(const CommMatrix& m) {
    const auto P = m.processes();
    std::vector<std::set<std::uint32_t>> nbrs(P);
    for (const auto& e : m.edges()) {
        nbrs[e.src].insert(e.dst);
        nbrs[e.dst].insert(e.src);
    }
    AdjacencyStats s;
    s.adj.resize(P);
    std::int64_t total = 0;
    for (std::uint32_t i = 0; i < P; ++i) {
        s.adj[i] = static_cast<std::uint32_t>(nbrs[i].size());
        total += s.adj[i];
        s.adj_max = std::max(s.adj_max, s.adj[i]);
    }
    s.adj_avg = {total, std::max<std::int64_t>(P, 1)};
    return s;
}

double comm_demand(const CommMatrix& m, std::uint32_t i) {
    double cd = 0;
    for (auto j : m.out_neighbors(i)) cd += m.pair_demand(i, j);
    return cd;
}

namespace {

std::uint64_t read_uint(const nlohmann::json& obj, const std::string& key, const std::string& path) {
    auto it = obj.find(key);
    if (it == obj.end()) throw SchemaError(path + "." + key, "missing");
    if (!it->is_number_integer()) throw SchemaError(path + "." + key, "expected an integer");
    if (!it->is_number_unsigned() && it->get<std::int64_t>() < 0)
        throw SchemaError(path + "." + key, "must be non-negative");
    return it->get<std::uint64_t>();
}

double read_number(const nlohmann::json& obj, const std::string& key, const std::string& path) {
    auto it = obj.find(key);
    if (it == obj.end()) throw SchemaError(path + "." + key, "missing");
    if (!it->is_number()) throw SchemaError(path + "." + key, "expected a number");
    return it->get<double>();
}

std::uint32_t narrow32(std::uint64_t v, const std::string& path) {
    if (v > UINT32_MAX) throw SchemaError(path, "too large");
    return static_cast<std::uint32_t>(v);
}

CommMatrix matrix_from_json(const nlohmann::json& arr, std::uint32_t P, const std::string& path) {
    if (!arr.is_array()) throw SchemaError(path, "expected an array");
    std::vector<CommEdge> edges;
    for (std::size_t k = 0; k < arr.size(); ++k) {
        const auto& rec = arr[k];
        const auto p = at(path, k);
        if (!rec.is_object()) throw SchemaError(p, "expected an object");
        CommEdge e;
        e.src = narrow32(read_uint(rec, "src", p), p + ".src");
        e.dst = narrow32(read_uint(rec, "dst", p), p + ".dst");
        e.length = read_uint(rec, "length_bytes", p);
        e.rate = read_number(rec, "rate_per_sec", p);
        e.count = read_uint(rec, "count", p);
        if (e.src >= P) throw SchemaError(p + ".src", "out of range");
        if (e.dst >= P) throw SchemaError(p + ".dst", "out of range");
        if (e.src == e.dst) throw SchemaError(p, "self edge");
        if (e.length == 0) throw SchemaError(p + ".length_bytes", "must be > 0");
        if (!(e.rate > 0)) throw SchemaError(p + ".rate_per_sec", "must be > 0");
        if (e.count == 0) throw SchemaError(p + ".count", "must be >= 1");
        edges.push_back(e);
    }
    return CommMatrix(P, std::move(edges));
}

JobSpec job_from_json(const nlohmann::json& obj, const std::string& path) {
    static const std::set<std::string> known{"id",           "processes",     "pattern",
                                             "length_bytes", "rate_per_sec", "message_count",
                                             "matrix"};
    if (!obj.is_object()) throw SchemaError(path, "expected an object");
    for (const auto& [key, _] : obj.items())
        if (!known.contains(key)) throw SchemaError(path + "." + key, "unknown field");

    JobSpec job;
    job.job_id = narrow32(read_uint(obj, "id", path), path + ".id");
    job.num_processes = narrow32(read_uint(obj, "processes", path), path + ".processes");
    if (job.num_processes < 2) throw SchemaError(path + ".processes", "must be >= 2");

    auto pit = obj.find("pattern");
    if (pit == obj.end()) throw SchemaError(path + ".pattern", "missing");
    if (!pit->is_string()) throw SchemaError(path + ".pattern", "expected a string");
    try {
        job.pattern = pattern_from_string(pit->get<std::string>());
    } catch (const SchemaError& e) {
        throw SchemaError(path + ".pattern", e.what());
    }

    const bool is_explicit = job.pattern == Pattern::Explicit;
    if (obj.contains("matrix") && !is_explicit)
        throw SchemaError(path + ".matrix", "only allowed for the explicit pattern");
    if (is_explicit) {
        if (!obj.contains("matrix")) throw SchemaError(path + ".matrix", "required for the explicit pattern");
        job.explicit_matrix = matrix_from_json(obj.at("matrix"), job.num_processes, path + ".matrix");
    }

    // Job-level message parameters summarise an explicit matrix when omitted.
    if (!is_explicit || obj.contains("length_bytes")) {
        job.msg_length = read_uint(obj, "length_bytes", path);
    } else {
        job.msg_length = job.explicit_matrix->max_length();
    }
    if (!is_explicit || obj.contains("rate_per_sec")) {
        job.msg_rate = read_number(obj, "rate_per_sec", path);
    } else {
        for (const auto& e : job.explicit_matrix->edges()) job.msg_rate = std::max(job.msg_rate, e.rate);
    }
    if (!is_explicit || obj.contains("message_count")) {
        job.msg_count = read_uint(obj, "message_count", path);
    } else {
        for (const auto& e : job.explicit_matrix->edges()) job.msg_count = std::max(job.msg_count, e.count);
    }
    if (is_explicit && job.explicit_matrix->edges().empty()) {
        // An edgeless trace carries no parameters; keep the invariants satisfiable.
        job.msg_length = std::max<Bytes>(job.msg_length, 1);
        job.msg_rate = job.msg_rate > 0 ? job.msg_rate : 1.0;
        job.msg_count = std::max<std::uint64_t>(job.msg_count, 1);
    }
    if (job.msg_length == 0) throw SchemaError(path + ".length_bytes", "must be > 0");
    if (!(job.msg_rate > 0)) throw SchemaError(path + ".rate_per_sec", "must be > 0");
    if (job.msg_count == 0) throw SchemaError(path + ".message_count", "must be >= 1");
    return job;
}

}  // namespace

Workload workload_from_json(const nlohmann::json& doc, std::string name) {
    if (!doc.is_object()) throw SchemaError("", "workload document must be a JSON object");
    for (const auto& [key, _] : doc.items())
        if (key != "jobs") throw SchemaError(key, "unknown field");
    auto it = doc.find("jobs");
    if (it == doc.end()) throw SchemaError("jobs", "missing");
    if (!it->is_array()) throw SchemaError("jobs", "expected an array");

    Workload w;
    w.name = std::move(name);
    std::set<std::uint32_t> ids;
    for (std::size_t k = 0; k < it->size(); ++k) {
        auto job = job_from_json((*it)[k], at("jobs", k));
        if (!ids.insert(job.job_id).second) throw SchemaError(at("jobs", k) + ".id", "duplicate job id");
        w.jobs.push_back(std::move(job));
    }
    return w;
}

nlohmann::json to_json(const Workload& w) {
    nlohmann::json jobs = nlohmann::json::array();
    for (const auto& j : w.jobs) {
        nlohmann::json o{
            {"id", j.job_id},
            {"processes", j.num_processes},
            {"pattern", std::string(to_string(j.pattern))},
        };
        // Explicit jobs derive unset job-level fields from their matrix on load.
        const bool expl = j.explicit_matrix.has_value();
        if (!expl || j.msg_length > 0) o["length_bytes"] = j.msg_length;
        if (!expl || j.msg_rate > 0) o["rate_per_sec"] = j.msg_rate;
        if (!expl || j.msg_count > 0) o["message_count"] = j.msg_count;
        if (expl) {
            nlohmann::json m = nlohmann::json::array();
            for (const auto& e : j.explicit_matrix->edges())
                m.push_back({{"src", e.src},
                             {"dst", e.dst},
                             {"length_bytes", e.length},
                             {"rate_per_sec", e.rate},
                             {"count", e.count}});
            o["matrix"] = std::move(m);
        }
        jobs.push_back(std::move(o));
    }
    return {{"jobs", std::move(jobs)}};
}

Workload load_workload(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open workload file " + path.string());
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::parse_error& e) {
        throw SchemaError("", path.string() + ": " + e.what());
    }
    return workload_from_json(doc, path.stem().string());
}

}  // namespace nicmap
