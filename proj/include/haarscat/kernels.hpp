#pragma once

// Batch kernels behind training, feature extraction and classification.
// `parallel` is the OpenMP path used by the library; `serial` is a plain
// reference kept for tests and the benchmark. Both are deterministic: the
// parallel kernels split work over output entries, never over a reduction.

#include <cstddef>
#include <span>
#include <vector>

#include "haarscat/batch.hpp"
#include "haarscat/scatter.hpp"

namespace haarscat::kernels {

namespace serial {

SignalBatch apply_layer(const HaarNetwork& network, std::size_t j, const SignalBatch& layer);
SignalBatch transform(const HaarNetwork& network, const SignalBatch& batch);

/// u x u row-major, u = layer.dim() / cols; diagonal is zero.
std::vector<double> cost_l1(const SignalBatch& layer, std::size_t cols);
std::vector<double> cost_mixed(const SignalBatch& layer, std::size_t cols);

/// exp(-|a_r - b_c|^2 / (2 sigma^2)), rows of `a` against rows of `b`.
std::vector<double> gaussian_gram(const SignalBatch& a, const SignalBatch& b, double sigma);

}  // namespace serial

namespace parallel {

SignalBatch apply_layer(const HaarNetwork& network, std::size_t j, const SignalBatch& layer);
SignalBatch transform(const HaarNetwork& network, const SignalBatch& batch);
std::vector<double> cost_l1(const SignalBatch& layer, std::size_t cols);
std::vector<double> cost_mixed(const SignalBatch& layer, std::size_t cols);
std::vector<double> gaussian_gram(const SignalBatch& a, const SignalBatch& b, double sigma);

}  // namespace parallel

int max_threads();

}  // namespace haarscat::kernels
