#include "haarscat/graph_haar.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <deque>
#include <string>

#include "haarscat/error.hpp"

namespace haarscat {

DyadicPartition::DyadicPartition(std::vector<std::vector<std::vector<std::size_t>>> levels)
    : levels_(std::move(levels)) {
    require(!levels_.empty(), ErrorKind::InconsistentPartition, "partition has no levels");
    const std::size_t d = levels_.front().size();
    row_of_.assign(levels_.size(), std::vector<std::size_t>(d, d));
    for (std::size_t j = 0; j < levels_.size(); ++j) {
        const std::size_t size = std::size_t{1} << j;
        require(levels_[j].size() * size == d, ErrorKind::InconsistentPartition,
                "level " + std::to_string(j) + " does not split " + std::to_string(d) + " vertices into sets of " +
                    std::to_string(size));
        for (std::size_t n = 0; n < levels_[j].size(); ++n) {
            require(levels_[j][n].size() == size, ErrorKind::InconsistentPartition, "set size != 2^j");
            for (std::size_t v : levels_[j][n]) {
                require(v < d && row_of_[j][v] == d, ErrorKind::InconsistentPartition,
                        "vertex repeated or out of range at level " + std::to_string(j));
                row_of_[j][v] = n;
            }
        }
    }
}

DyadicPartition build_partition(const HaarNetwork& network) {
    require(network.mode() == Mode::structured, ErrorKind::WrongMode, "partitions need a structured network");
    const std::size_t d = network.dim();
    std::vector<std::vector<std::vector<std::size_t>>> levels(network.depth() + 1);
    levels[0].resize(d);
    for (std::size_t v = 0; v < d; ++v) levels[0][v] = {v};
    for (std::size_t j = 0; j < network.depth(); ++j) {
        for (const auto& pr : network.layer(j).pairs()) {
            auto merged = levels[j][pr.first];
            const auto& right = levels[j][pr.second];
            merged.insert(merged.end(), right.begin(), right.end());
            levels[j + 1].push_back(std::move(merged));
        }
    }
    return DyadicPartition(std::move(levels));
}

std::vector<std::vector<double>> HaarWaveletBasis::vectors() const {
    std::vector<std::vector<double>> all = scaling;
    for (auto s = wavelets.rbegin(); s != wavelets.rend(); ++s) all.insert(all.end(), s->begin(), s->end());
    return all;
}

namespace {

void check_consistent(const DyadicPartition& partition, const HaarNetwork& network) {
    require(network.mode() == Mode::structured, ErrorKind::WrongMode, "wavelets need a structured network");
    require(partition.dim() == network.dim() && partition.depth() == network.depth(),
            ErrorKind::InconsistentPartition, "partition shape does not match the network");
    for (std::size_t j = 0; j < network.depth(); ++j) {
        const auto pairs = network.layer(j).pairs();
        for (std::size_t n = 0; n < pairs.size(); ++n) {
            const auto& parent = partition.level(j + 1)[n];
            const auto& a = partition.level(j)[pairs[n].first];
            const auto& b = partition.level(j)[pairs[n].second];
            const bool ok = std::equal(a.begin(), a.end(), parent.begin()) &&
                            std::equal(b.begin(), b.end(), parent.begin() + static_cast<std::ptrdiff_t>(a.size()));
            require(ok, ErrorKind::InconsistentPartition,
                    "level " + std::to_string(j + 1) + " set " + std::to_string(n) + " is not the merge of its pair");
        }
    }
}

std::vector<double> indicator(std::size_t d, std::span<const std::size_t> set, double value = 1.0) {
    std::vector<double> v(d, 0.0);
    for (std::size_t u : set) v[u] = value;
    return v;
}

}  // namespace

HaarWaveletBasis wavelet_basis(const DyadicPartition& partition, const HaarNetwork& network) {
    check_consistent(partition, network);
    const std::size_t d = network.dim();
    HaarWaveletBasis basis;
    for (const auto& set : partition.level(network.depth())) basis.scaling.push_back(indicator(d, set));
    for (std::size_t j = 0; j < network.depth(); ++j) {
        std::vector<std::vector<double>> scale;
        for (const auto& pr : network.layer(j).pairs()) {
            auto psi = indicator(d, partition.level(j)[pr.first]);
            for (std::size_t u : partition.level(j)[pr.second]) psi[u] = -1.0;
            scale.push_back(std::move(psi));
        }
        basis.wavelets.push_back(std::move(scale));
    }
    return basis;
}

double verify_wavelet_identity(const HaarNetwork& network, std::span<const double> x, std::size_t j,
                               std::uint64_t q, std::size_t next_scale) {
    require(network.mode() == Mode::structured, ErrorKind::WrongMode, "wavelet identity needs a structured network");
    require(j <= network.depth(), ErrorKind::InadmissibleIndex, "depth j exceeds the network");
    require(j < 64 && q < (std::uint64_t{1} << j), ErrorKind::InadmissibleIndex, "q must be below 2^j");
    const std::size_t finest = q == 0 ? 0 : j - static_cast<std::size_t>(std::countr_zero(q));
    require(next_scale > finest && next_scale <= j, ErrorKind::InadmissibleIndex,
            "next scale " + std::to_string(next_scale) + " must lie in (" + std::to_string(finest) + ", " +
                std::to_string(j) + "]");

    const auto layers = forward(network, x, InputPolicy::permissive);
    const auto partition = build_partition(network);
    const std::uint64_t lhs_q = q + (std::uint64_t{1} << (j - next_scale));
    const std::uint64_t low_q = q >> (j - finest);
    const std::size_t low_cols = std::size_t{1} << finest;
    const std::size_t cols = std::size_t{1} << j;
    const auto& low = layers[finest];

    // Order-m mass carried by each row at the level just below next_scale.
    const std::size_t half_level = next_scale - 1;
    std::vector<double> mass(partition.level(half_level).size(), 0.0);
    for (std::size_t r = 0; r < partition.level(finest).size(); ++r) {
        const std::size_t v = partition.level(finest)[r].front();
        mass[partition.row_of(half_level, v)] += low[r * low_cols + low_q];
    }
    std::vector<double> rhs(partition.level(j).size(), 0.0);
    const auto pairs = network.layer(half_level).pairs();
    for (std::size_t p = 0; p < pairs.size(); ++p) {
        const double inner = mass[pairs[p].first] - mass[pairs[p].second];
        const std::size_t v = partition.level(next_scale)[p].front();
        rhs[partition.row_of(j, v)] += std::abs(inner);
    }
    double worst = 0.0;
    for (std::size_t n = 0; n < rhs.size(); ++n)
        worst = std::max(worst, std::abs(layers[j][n * cols + lhs_q] - rhs[n]));
    return worst;
}

HadamardBlock hadamard_of_output(const HaarNetwork& network, std::span<const double> x, std::size_t n) {
    require(network.mode() == Mode::structured, ErrorKind::WrongMode, "Hadamard blocks need a structured network");
    const std::size_t depth = network.depth();
    const std::size_t rows = network.dim() >> depth;
    require(n < rows, ErrorKind::IndexOutOfRange, "row " + std::to_string(n) + " outside the output layer");
    const auto layers = forward(network, x, InputPolicy::permissive);
    const auto partition = build_partition(network);

    // Matrix of row r at level j, built from its two children at level j-1.
    auto build = [&](auto&& self, std::size_t j, std::size_t r) -> std::vector<int> {
        if (j == 0) return {1};
        const std::size_t half = std::size_t{1} << (j - 1);
        const std::size_t size = 2 * half;
        const auto& pr = network.layer(j - 1)[r];
        const auto ma = self(self, j - 1, pr.first);
        const auto mb = self(self, j - 1, pr.second);
        const auto& prev = layers[j - 1];
        std::vector<int> m(size * size);
        for (std::size_t q = 0; q < half; ++q) {
            const int sign = prev[pr.first * half + q] < prev[pr.second * half + q] ? -1 : 1;
            for (std::size_t c = 0; c < half; ++c) {
                m[(2 * q) * size + c] = ma[q * half + c];
                m[(2 * q) * size + half + c] = mb[q * half + c];
                m[(2 * q + 1) * size + c] = sign * ma[q * half + c];
                m[(2 * q + 1) * size + half + c] = -sign * mb[q * half + c];
            }
        }
        return m;
    };
    HadamardBlock block;
    block.size = std::size_t{1} << depth;
    block.vertices = partition.level(depth)[n];
    block.entries = build(build, depth, n);
    return block;
}

void ReferenceGraph::add_edge(std::size_t u, std::size_t v) {
    require(u < size() && v < size(), ErrorKind::IndexOutOfRange, "edge endpoint outside the graph");
    require(u != v, ErrorKind::InvalidArgument, "self loops are not allowed");
    if (adjacent(u, v)) return;
    adjacency_[u].push_back(v);
    adjacency_[v].push_back(u);
}

bool ReferenceGraph::adjacent(std::size_t u, std::size_t v) const {
    const auto& nu = adjacency_.at(u);
    return std::find(nu.begin(), nu.end(), v) != nu.end();
}

ReferenceGraph ring_graph(std::size_t d) {
    require(d >= 3, ErrorKind::TooSmall, "a ring needs at least 3 vertices");
    ReferenceGraph g(d);
    for (std::size_t v = 0; v < d; ++v) g.add_edge(v, (v + 1) % d);
    return g;
}

ReferenceGraph grid_graph(std::size_t height, std::size_t width) {
    ReferenceGraph g(height * width);
    for (std::size_t r = 0; r < height; ++r)
        for (std::size_t c = 0; c < width; ++c) {
            const std::size_t v = r * width + c;
            if (c + 1 < width) g.add_edge(v, v + 1);
            if (r + 1 < height) {
                g.add_edge(v, v + width);
                if (c + 1 < width) g.add_edge(v, v + width + 1);
                if (c > 0) g.add_edge(v, v + width - 1);
            }
        }
    return g;
}

bool induces_connected(const ReferenceGraph& graph, std::span<const std::size_t> vertices) {
    if (vertices.size() <= 1) return true;
    std::vector<char> inside(graph.size(), 0), seen(graph.size(), 0);
    for (std::size_t v : vertices) inside[v] = 1;
    std::deque<std::size_t> frontier{vertices.front()};
    seen[vertices.front()] = 1;
    std::size_t reached = 1;
    while (!frontier.empty()) {
        const std::size_t v = frontier.front();
        frontier.pop_front();
        for (std::size_t w : graph.neighbors(v)) {
            if (inside[w] && !seen[w]) {
                seen[w] = 1;
                ++reached;
                frontier.push_back(w);
            }
        }
    }
    return reached == vertices.size();
}

double connectivity_fraction(const DyadicPartition& partition, const ReferenceGraph& graph, std::size_t j,
                             const std::optional<std::vector<bool>>& mask, Connectivity mode) {
    require(j <= partition.depth(), ErrorKind::IndexOutOfRange, "level " + std::to_string(j) + " does not exist");
    require(graph.size() == partition.dim(), ErrorKind::DimensionMismatch, "graph and partition sizes differ");
    require(!mask || mask->size() == partition.dim(), ErrorKind::DimensionMismatch, "mask size differs");
    auto restrict = [&](std::span<const std::size_t> set) {
        std::vector<std::size_t> kept;
        for (std::size_t v : set)
            if (!mask || (*mask)[v]) kept.push_back(v);
        return kept;
    };
    std::size_t counted = 0;
    std::size_t connected = 0;
    for (const auto& set : partition.level(j)) {
        const auto kept = restrict(set);
        if (kept.empty()) continue;
        ++counted;
        bool ok = true;
        if (mode == Connectivity::induced) {
            ok = induces_connected(graph, kept);
        } else if (j > 0) {
            const std::size_t half = set.size() / 2;
            const auto a = restrict(std::span(set).first(half));
            const auto b = restrict(std::span(set).subspan(half));
            if (!a.empty() && !b.empty()) {
                ok = false;
                for (std::size_t u : a)
                    for (std::size_t v : b)
                        if (graph.adjacent(u, v)) ok = true;
            }
        }
        if (ok) ++connected;
    }
    return counted == 0 ? 1.0 : static_cast<double>(connected) / static_cast<double>(counted);
}

}  // namespace haarscat
