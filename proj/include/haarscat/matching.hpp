#pragma once

// Minimum-weight perfect matching on complete graphs with symmetric costs.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "haarscat/scatter.hpp"

namespace haarscat {

/// Symmetric nonnegative u x u costs, row-major. The diagonal is ignored.
class CostMatrix {
public:
    CostMatrix() = default;
    CostMatrix(std::size_t size, std::vector<double> costs);

    std::size_t size() const noexcept { return size_; }
    double operator()(std::size_t a, std::size_t b) const { return costs_[a * size_ + b]; }
    const std::vector<double>& values() const noexcept { return costs_; }

private:
    std::size_t size_ = 0;
    std::vector<double> costs_;
};

double total_cost(const CostMatrix& c, const Pairing& p);

/// Optimal perfect matching (primal-dual blossom algorithm, O(u^3)).
/// Costs are quantized to a 2^40 grid relative to the largest cost so the
/// solver runs in exact integer arithmetic.
Pairing match_exact(const CostMatrix& c);

/// Ascending-cost edge scan; ties go to the lexicographically smaller edge.
Pairing match_greedy(const CostMatrix& c);

/// Maximum-weight matching on an arbitrary graph with integer weights.
/// Returns mate[v] (or -1). With `max_cardinality` only maximum-cardinality
/// matchings are considered.
struct WeightedEdge {
    std::size_t u = 0;
    std::size_t v = 0;
    std::int64_t weight = 0;
};

std::vector<std::ptrdiff_t> max_weight_matching(std::size_t vertices,
                                                std::span<const WeightedEdge> edges,
                                                bool max_cardinality);

}  // namespace haarscat
