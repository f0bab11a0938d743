#pragma once

// Dyadic partitions induced by structured pairings, Haar wavelets on those
// partitions, and diagnostics against a reference graph.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "haarscat/scatter.hpp"

namespace haarscat {

/// levels[j][n] lists V_{j,n}. Vertices are in depth-first order of the
/// partition tree: V_{j+1,n} = V_{j,pi_j(2n)} followed by V_{j,pi_j(2n+1)}.
class DyadicPartition {
public:
    DyadicPartition() = default;
    explicit DyadicPartition(std::vector<std::vector<std::vector<std::size_t>>> levels);

    std::size_t dim() const noexcept { return levels_.empty() ? 0 : levels_.front().size(); }
    std::size_t depth() const noexcept { return levels_.empty() ? 0 : levels_.size() - 1; }
    const std::vector<std::vector<std::size_t>>& level(std::size_t j) const { return levels_.at(j); }
    /// Row n at level j whose set contains vertex v.
    std::size_t row_of(std::size_t j, std::size_t v) const { return row_of_.at(j).at(v); }

private:
    std::vector<std::vector<std::vector<std::size_t>>> levels_;
    std::vector<std::vector<std::size_t>> row_of_;
};

DyadicPartition build_partition(const HaarNetwork& network);

struct HaarWaveletBasis {
    /// 1_{V_{J,n}}
    std::vector<std::vector<double>> scaling;
    /// wavelets[s-1][n] = psi_{s,n} = 1_{V_{s-1,pi(2n)}} - 1_{V_{s-1,pi(2n+1)}}, s = 1..J
    std::vector<std::vector<std::vector<double>>> wavelets;

    /// Scaling vectors followed by wavelets from the coarsest scale down.
    std::vector<std::vector<double>> vectors() const;
};

HaarWaveletBasis wavelet_basis(const DyadicPartition& partition, const HaarNetwork& network);

/// Largest |lhs - rhs| over rows n of the order-(m+1) wavelet identity
///   S_j x(n, q + 2^{j - next_scale}) =
///     sum_{p : V_{next_scale,p} in V_{j,n}} |<S_{j_m} x(., q >> (j - j_m)), psi_{next_scale,p}>|
/// where j_m is the finest scale present in q (0 when q = 0) and the inner
/// product sums the order-m row coefficients over each half of psi.
double verify_wavelet_identity(const HaarNetwork& network, std::span<const double> x, std::size_t j,
                               std::uint64_t q, std::size_t next_scale);

struct HadamardBlock {
    /// V_{J,n} in partition order.
    std::vector<std::size_t> vertices;
    /// 2^J x 2^J row-major, entries +-1; S_J x(n, .) = entries * x|_vertices.
    std::vector<int> entries;
    std::size_t size = 0;
};

HadamardBlock hadamard_of_output(const HaarNetwork& network, std::span<const double> x, std::size_t n);

class ReferenceGraph {
public:
    explicit ReferenceGraph(std::size_t vertices) : adjacency_(vertices) {}

    void add_edge(std::size_t u, std::size_t v);
    std::size_t size() const noexcept { return adjacency_.size(); }
    const std::vector<std::size_t>& neighbors(std::size_t v) const { return adjacency_.at(v); }
    bool adjacent(std::size_t u, std::size_t v) const;

private:
    std::vector<std::vector<std::size_t>> adjacency_;
};

ReferenceGraph ring_graph(std::size_t d);
/// 8-neighbour grid, vertex index = row * width + col.
ReferenceGraph grid_graph(std::size_t height, std::size_t width);

enum class Connectivity {
    induced,    // the set induces a connected subgraph
    mergewise,  // an edge joins the two halves merged into the set
};

/// Fraction of level-j sets that are connected in `graph`. With a mask the
/// sets are first restricted to masked vertices and empty restrictions are
/// skipped. Returns 1 when no set is counted.
double connectivity_fraction(const DyadicPartition& partition, const ReferenceGraph& graph, std::size_t j,
                             const std::optional<std::vector<bool>>& mask = std::nullopt,
                             Connectivity mode = Connectivity::induced);

/// Whether `vertices` induce a connected subgraph (BFS).
bool induces_connected(const ReferenceGraph& graph, std::span<const std::size_t> vertices);

}  // namespace haarscat
