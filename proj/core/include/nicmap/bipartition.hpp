#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "nicmap/workload.hpp"

namespace nicmap {

/// Dense undirected weighted graph. Self loops are ignored.
class WeightedGraph {
public:
    explicit WeightedGraph(std::size_t vertices = 0);

    std::size_t size() const noexcept { return n_; }
    void add_edge(std::size_t u, std::size_t v, double w);
    double weight(std::size_t u, std::size_t v) const { return w_[u * n_ + v]; }
    double total_weight() const noexcept;

    /// Induced subgraph; vertex k of the result is `vertices[k]` here.
    WeightedGraph subgraph(std::span<const std::uint32_t> vertices) const;

private:
    std::size_t n_;
    std::vector<double> w_;
};

/// Process graph of a job: w_ij = L_ij*lambda_ij + L_ji*lambda_ji.
WeightedGraph process_graph(const CommMatrix& m);

struct Bisection {
    std::vector<std::uint32_t> part_a;  // ascending
    std::vector<std::uint32_t> part_b;  // ascending
    double cut = 0;
};

/// Sum of weights crossing the split; `in_a[v]` selects the side.
double cut_weight(const WeightedGraph& g, const std::vector<bool>& in_a);

/// Min-cut split with |A| = size_a exactly. Several deterministic starts
/// (index split plus greedy growth from spread seeds) are each refined with
/// Kernighan-Lin passes; the best result is kept, earliest start on ties.
/// The result admits no improving single-vertex swap.
Bisection bisect(const WeightedGraph& g, std::size_t size_a);

/// Balanced split, |A| = ceil(n/2).
Bisection bipartition(const WeightedGraph& g);

}  // namespace nicmap
