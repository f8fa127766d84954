#include "nicmap/bipartition.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace nicmap {

WeightedGraph::WeightedGraph(std::size_t vertices) : n_(vertices), w_(vertices * vertices, 0.0) {}

void WeightedGraph::add_edge(std::size_t u, std::size_t v, double w) {
    if (u >= n_ || v >= n_) throw std::out_of_range("edge endpoint outside graph");
    if (u == v) return;
    w_[u * n_ + v] += w;
    w_[v * n_ + u] += w;
}

double WeightedGraph::total_weight() const noexcept {
    double t = 0;
    for (std::size_t u = 0; u < n_; ++u)
        for (std::size_t v = u + 1; v < n_; ++v) t += w_[u * n_ + v];
    return t;
}

WeightedGraph WeightedGraph::subgraph(std::span<const std::uint32_t> vertices) const {
    WeightedGraph sub(vertices.size());
    for (std::size_t a = 0; a < vertices.size(); ++a)
        for (std::size_t b = 0; b < vertices.size(); ++b)
            sub.w_[a * sub.n_ + b] = a == b ? 0.0 : weight(vertices[a], vertices[b]);
    return sub;
}

WeightedGraph process_graph(const CommMatrix& m) {
    WeightedGraph g(m.processes());
    for (std::uint32_t i = 0; i < m.processes(); ++i)
        for (auto j : m.out_neighbors(i)) g.add_edge(i, j, m.pair_demand(i, j));
    return g;
}

double cut_weight(const WeightedGraph& g, const std::vector<bool>& in_a) {
    double cut = 0;
    for (std::size_t u = 0; u < g.size(); ++u)
        for (std::size_t v = u + 1; v < g.size(); ++v)
            if (in_a[u] != in_a[v]) cut += g.weight(u, v);
    return cut;
}

namespace {

constexpr std::size_t kMaxSeeds = 16;

// Greedy graph growing: absorb the outside vertex with the strongest pull
// towards the grown set until it reaches the target size.
std::vector<bool> grow_from(const WeightedGraph& g, std::size_t seed, std::size_t size_a) {
    const auto n = g.size();
    std::vector<bool> in_a(n, false);
    std::vector<double> pull(n, 0.0);  // weight to A minus weight to the rest
    for (std::size_t v = 0; v < n; ++v)
        for (std::size_t u = 0; u < n; ++u) pull[v] -= g.weight(v, u);
    auto absorb = [&](std::size_t v) {
        in_a[v] = true;
        for (std::size_t u = 0; u < n; ++u) pull[u] += 2 * g.weight(u, v);
    };
    absorb(seed);
    for (std::size_t k = 1; k < size_a; ++k) {
        std::size_t best = n;
        for (std::size_t v = 0; v < n; ++v)
            if (!in_a[v] && (best == n || pull[v] > pull[best])) best = v;
        absorb(best);
    }
    return in_a;
}

// Kernighan-Lin refinement with size-preserving pair swaps.
void refine(const WeightedGraph& g, std::vector<bool>& in_a, double eps) {
    const auto n = g.size();
    std::vector<double> d(n);  // external minus internal weight
    for (;;) {
        for (std::size_t v = 0; v < n; ++v) {
            d[v] = 0;
            for (std::size_t u = 0; u < n; ++u)
                d[v] += (in_a[u] != in_a[v] ? 1.0 : -1.0) * g.weight(v, u);
        }
        std::vector<bool> locked(n, false);
        std::vector<std::pair<std::size_t, std::size_t>> swaps;
        std::vector<double> gains;
        auto side = in_a;
        const auto a_size = static_cast<std::size_t>(std::count(in_a.begin(), in_a.end(), true));
        const auto steps = std::min(a_size, n - a_size);
        for (std::size_t step = 0; step < steps; ++step) {
            double best_gain = -std::numeric_limits<double>::infinity();
            std::size_t bu = n, bv = n;
            for (std::size_t u = 0; u < n; ++u) {
                if (locked[u] || !side[u]) continue;
                for (std::size_t v = 0; v < n; ++v) {
                    if (locked[v] || side[v]) continue;
                    const double gain = d[u] + d[v] - 2 * g.weight(u, v);
                    if (gain > best_gain + eps) {
                        best_gain = gain;
                        bu = u;
                        bv = v;
                    }
                }
            }
            if (bu == n) break;
            locked[bu] = locked[bv] = true;
            swaps.emplace_back(bu, bv);
            gains.push_back(best_gain);
            // u moves A->B, v moves B->A.
            for (std::size_t x = 0; x < n; ++x) {
                if (locked[x]) continue;
                const double sx = side[x] ? 1.0 : -1.0;
                d[x] += sx * 2 * g.weight(x, bu) - sx * 2 * g.weight(x, bv);
            }
            side[bu] = false;
            side[bv] = true;
        }
        double run = 0, best_run = 0;
        std::size_t best_k = 0;
        for (std::size_t k = 0; k < gains.size(); ++k) {
            run += gains[k];
            if (run > best_run + eps) {
                best_run = run;
                best_k = k + 1;
            }
        }
        if (best_k == 0) return;
        for (std::size_t k = 0; k < best_k; ++k) {
            in_a[swaps[k].first] = false;
            in_a[swaps[k].second] = true;
        }
    }
}

Bisection to_bisection(const WeightedGraph& g, const std::vector<bool>& in_a) {
    Bisection b;
    for (std::uint32_t v = 0; v < g.size(); ++v) (in_a[v] ? b.part_a : b.part_b).push_back(v);
    b.cut = cut_weight(g, in_a);
    return b;
}

}  // namespace

Bisection bisect(const WeightedGraph& g, std::size_t size_a) {
    const auto n = g.size();
    if (size_a > n) throw std::invalid_argument("bisect: part larger than graph");
    if (size_a == 0 || size_a == n) return to_bisection(g, std::vector<bool>(n, size_a == n));

    const double eps = 1e-12 * std::max(1.0, g.total_weight());

    std::vector<std::vector<bool>> starts;
    {
        std::vector<bool> index_split(n, false);
        std::fill_n(index_split.begin(), size_a, true);
        starts.push_back(std::move(index_split));
    }
    const auto seeds = std::min(n, kMaxSeeds);
    for (std::size_t k = 0; k < seeds; ++k) starts.push_back(grow_from(g, k * n / seeds, size_a));

    std::vector<bool> best;
    double best_cut = std::numeric_limits<double>::infinity();
    for (auto& s : starts) {
        refine(g, s, eps);
        const double c = cut_weight(g, s);
        if (c < best_cut - eps) {
            best_cut = c;
            best = s;
        }
    }
    return to_bisection(g, best);
}

Bisection bipartition(const WeightedGraph& g) { return bisect(g, (g.size() + 1) / 2); }

}  // namespace nicmap
