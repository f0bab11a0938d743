#pragma once

// Unsupervised layerwise pairing learning and bagging of T transforms.

#include <cstddef>
#include <cstdint>
#include <vector>

#include "haarscat/batch.hpp"
#include "haarscat/matching.hpp"
#include "haarscat/scatter.hpp"

namespace haarscat {

enum class Norm {
    l1,     // sum over samples of |differences| within pairs
    mixed,  // per output coefficient, (sum over samples of |H S x|)^2
};

enum class Matcher { exact, greedy };

struct TrainConfig {
    std::size_t depth = 1;
    Mode mode = Mode::structured;
    Norm norm = Norm::l1;
    Matcher matcher = Matcher::exact;
    std::uint64_t seed = 0;

    friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

struct BaggedModel {
    std::vector<HaarNetwork> transforms;
    /// subset_of_sample[i] is the transform trained on sample i.
    std::vector<std::size_t> subset_of_sample;
    TrainConfig config;

    friend bool operator==(const BaggedModel&, const BaggedModel&) = default;
};

/// Columns per matchable unit at depth j: 1 in free mode, 2^j in structured mode.
std::size_t unit_columns(Mode mode, std::size_t j);

CostMatrix cost_l1(const SignalBatch& layer, Mode mode, std::size_t j);
CostMatrix cost_mixed(const SignalBatch& layer, Mode mode, std::size_t j);
CostMatrix layer_cost(const SignalBatch& layer, Mode mode, std::size_t j, Norm norm);

Pairing solve_matching(const CostMatrix& c, Matcher matcher);

/// Greedy layerwise training; no backtracking over earlier layers.
HaarNetwork train_layerwise(const SignalBatch& batch, const TrainConfig& cfg);

/// Seeded Fisher-Yates shuffle, contiguous chunks of floor(N / T), remainder
/// assigned round-robin from subset 0.
std::vector<std::vector<std::size_t>> split_subsets(std::size_t count, std::size_t parts, std::uint64_t seed);

BaggedModel train_bagged(const SignalBatch& training, std::size_t transforms, const TrainConfig& cfg);

/// sum_i |s_i|^2 - |sum_i s_i|^2 (non-normalized).
double empirical_variance(const SignalBatch& layer);

}  // namespace haarscat
