#include "haarscat/learn.hpp"

#include <algorithm>
#include <exception>
#include <optional>
#include <random>
#include <string>

#include "haarscat/error.hpp"
#include "haarscat/kernels.hpp"
#include "haarscat/random.hpp"

namespace haarscat {

std::size_t unit_columns(Mode mode, std::size_t j) { return mode == Mode::free ? 1 : std::size_t{1} << j; }

CostMatrix cost_l1(const SignalBatch& layer, Mode mode, std::size_t j) {
    const std::size_t cols = unit_columns(mode, j);
    auto c = kernels::parallel::cost_l1(layer, cols);
    return CostMatrix(layer.dim() / cols, std::move(c));
}

CostMatrix cost_mixed(const SignalBatch& layer, Mode mode, std::size_t j) {
    const std::size_t cols = unit_columns(mode, j);
    auto c = kernels::parallel::cost_mixed(layer, cols);
    return CostMatrix(layer.dim() / cols, std::move(c));
}

CostMatrix layer_cost(const SignalBatch& layer, Mode mode, std::size_t j, Norm norm) {
    return norm == Norm::l1 ? cost_l1(layer, mode, j) : cost_mixed(layer, mode, j);
}

Pairing solve_matching(const CostMatrix& c, Matcher matcher) {
    return matcher == Matcher::exact ? match_exact(c) : match_greedy(c);
}

HaarNetwork train_layerwise(const SignalBatch& batch, const TrainConfig& cfg) {
    require(!batch.empty(), ErrorKind::EmptyBatch, "training batch is empty");
    const std::size_t d = batch.dim();
    require(d >= 2 && is_power_of_two(d), ErrorKind::NotPowerOfTwo, "signal length must be a power of 2");
    require(cfg.depth <= log2_exact(d), ErrorKind::InvalidArgument,
            "depth " + std::to_string(cfg.depth) + " exceeds log2(d)");

    std::vector<Pairing> layers;
    SignalBatch current = batch;
    for (std::size_t j = 0; j < cfg.depth; ++j) {
        const CostMatrix c = layer_cost(current, cfg.mode, j, cfg.norm);
        layers.push_back(solve_matching(c, cfg.matcher));
        if (j + 1 < cfg.depth) {
            const HaarNetwork partial(cfg.mode, d, layers);
            current = kernels::parallel::apply_layer(partial, j, current);
        }
    }
    return HaarNetwork(cfg.mode, d, std::move(layers));
}

std::vector<std::vector<std::size_t>> split_subsets(std::size_t count, std::size_t parts, std::uint64_t seed) {
    require(parts >= 1, ErrorKind::InvalidArgument, "need at least one subset");
    require(count >= parts, ErrorKind::TooFewSamples,
            std::to_string(count) + " samples cannot fill " + std::to_string(parts) + " subsets");
    std::vector<std::size_t> order(count);
    for (std::size_t i = 0; i < count; ++i) order[i] = i;
    auto rng = make_rng(seed, {0x5b});
    for (std::size_t i = count - 1; i > 0; --i) {
        std::uniform_int_distribution<std::size_t> pick(0, i);
        std::swap(order[i], order[pick(rng)]);
    }
    const std::size_t chunk = count / parts;
    std::vector<std::vector<std::size_t>> subsets(parts);
    for (std::size_t t = 0; t < parts; ++t)
        subsets[t].assign(order.begin() + static_cast<std::ptrdiff_t>(t * chunk),
                          order.begin() + static_cast<std::ptrdiff_t>((t + 1) * chunk));
    for (std::size_t r = parts * chunk; r < count; ++r) subsets[(r - parts * chunk) % parts].push_back(order[r]);
    return subsets;
}

BaggedModel train_bagged(const SignalBatch& training, std::size_t transforms, const TrainConfig& cfg) {
    require(transforms >= 1, ErrorKind::InvalidArgument, "need at least one transform");
    require(training.count() >= transforms, ErrorKind::TooFewSamples,
            std::to_string(training.count()) + " samples for " + std::to_string(transforms) + " transforms");
    BaggedModel model;
    model.config = cfg;
    model.subset_of_sample.assign(training.count(), 0);
    std::vector<std::vector<std::size_t>> subsets;
    if (transforms == 1) {
        subsets.emplace_back(training.count());
        for (std::size_t i = 0; i < training.count(); ++i) subsets[0][i] = i;
    } else {
        subsets = split_subsets(training.count(), transforms, cfg.seed);
    }
    for (std::size_t t = 0; t < transforms; ++t)
        for (std::size_t i : subsets[t]) model.subset_of_sample[i] = t;

    std::vector<std::optional<HaarNetwork>> trained(transforms);
    std::vector<std::exception_ptr> errors(transforms);
    const auto tcount = static_cast<std::ptrdiff_t>(transforms);
#pragma omp parallel for schedule(dynamic, 1)
    for (std::ptrdiff_t st = 0; st < tcount; ++st) {
        const auto t = static_cast<std::size_t>(st);
        try {
            // Subsets keep shuffled order; sort so training is independent of it.
            auto rows = subsets[t];
            std::sort(rows.begin(), rows.end());
            trained[t].emplace(train_layerwise(training.select(rows), cfg));
        } catch (...) {
            errors[t] = std::current_exception();
        }
    }
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);
    for (auto& net : trained) model.transforms.push_back(std::move(*net));
    return model;
}

double empirical_variance(const SignalBatch& layer) {
    require(!layer.empty(), ErrorKind::EmptyBatch, "variance of an empty batch");
    double energy = 0.0;
    std::vector<double> total(layer.dim(), 0.0);
    for (std::size_t i = 0; i < layer.count(); ++i) {
        const auto r = layer.row(i);
        for (std::size_t k = 0; k < r.size(); ++k) {
            energy += r[k] * r[k];
            total[k] += r[k];
        }
    }
    double mean_energy = 0.0;
    for (double v : total) mean_energy += v * v;
    return energy - mean_energy;
}

}  // namespace haarscat
