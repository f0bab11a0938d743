#include "haarscat/experiments.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "haarscat/error.hpp"
#include "haarscat/features.hpp"
#include "haarscat/graph_haar.hpp"
#include "haarscat/inverse.hpp"
#include "haarscat/kernels.hpp"
#include "haarscat/random.hpp"

namespace haarscat {

std::string format_number(double v) {
    char buf[64];
    const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return ec == std::errc{} ? std::string(buf, end) : std::string("nan");
}

std::string Report::csv() const {
    std::ostringstream out;
    for (const auto& [k, v] : config) out << "# " << k << '=' << v << '\n';
    for (std::size_t c = 0; c < columns.size(); ++c) out << (c ? "," : "") << columns[c];
    out << '\n';
    for (const auto& row : rows) {
        for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << row[c];
        out << '\n';
    }
    return out.str();
}

namespace {

SignalBatch white_noise(std::size_t count, std::size_t dim, std::uint64_t seed) {
    SignalBatch batch(count, dim);
    const auto n = static_cast<std::ptrdiff_t>(count);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t si = 0; si < n; ++si) {
        auto rng = make_rng(seed, {0x71, static_cast<std::uint64_t>(si)});
        std::normal_distribution<double> normal;
        for (double& v : batch.row(static_cast<std::size_t>(si))) v = normal(rng);
    }
    return batch;
}

double binomial(std::size_t n, std::size_t k) {
    double b = 1.0;
    for (std::size_t i = 1; i <= k; ++i) b = b * static_cast<double>(n - k + i) / static_cast<double>(i);
    return b;
}

}  // namespace

double variance_model_value(std::size_t depth, int order) {
    return std::pow(1.0 - 2.0 / std::numbers::pi, order) * binomial(depth, static_cast<std::size_t>(order));
}

std::vector<VarianceRow> variance_table(std::size_t depth, std::size_t dim, std::size_t count, std::uint64_t seed) {
    require(is_power_of_two(dim) && (std::size_t{1} << depth) <= dim, ErrorKind::InvalidArgument,
            "need 2^J <= d with d a power of 2");
    require(count >= 2, ErrorKind::TooFewSamples, "variance needs at least two samples");
    auto rng = make_rng(seed, {0x70});
    const auto network = random_network(Mode::structured, dim, depth, rng);
    const auto coeffs = kernels::parallel::transform(network, white_noise(count, dim, seed));

    std::vector<double> mean(dim, 0.0), var(dim, 0.0);
    for (std::size_t i = 0; i < count; ++i) {
        const auto r = coeffs.row(i);
        for (std::size_t k = 0; k < dim; ++k) mean[k] += r[k];
    }
    for (double& m : mean) m /= static_cast<double>(count);
    for (std::size_t i = 0; i < count; ++i) {
        const auto r = coeffs.row(i);
        for (std::size_t k = 0; k < dim; ++k) var[k] += (r[k] - mean[k]) * (r[k] - mean[k]);
    }
    std::vector<VarianceRow> rows(depth + 1);
    const std::size_t cols = std::size_t{1} << depth;
    for (int m = 0; m <= static_cast<int>(depth); ++m) rows[m] = {m, 0.0, variance_model_value(depth, m)};
    for (std::size_t k = 0; k < dim; ++k)
        rows[order_of(static_cast<int>(depth), k % cols)].sigma2 +=
            var[k] / static_cast<double>(count) / static_cast<double>(dim);
    return rows;
}

Report run_variance_table(std::size_t depth, std::size_t dim, std::size_t count, std::uint64_t seed) {
    const auto rows = variance_table(depth, dim, count, seed);
    Report report;
    report.config = {{"experiment", "variance-table"},
                     {"J", std::to_string(depth)},
                     {"d", std::to_string(dim)},
                     {"N", std::to_string(count)},
                     {"seed", std::to_string(seed)},
                     {"mode", "structured"},
                     {"sigma2_order0", format_number(rows[0].sigma2)}};
    report.columns = {"m", "sigma2", "model_value"};
    for (std::size_t m = 1; m < rows.size(); ++m)
        report.rows.push_back({std::to_string(m), format_number(rows[m].sigma2), format_number(rows[m].model_value)});
    return report;
}

std::vector<double> layer_variances(const HaarNetwork& network, const SignalBatch& batch) {
    std::vector<double> out;
    SignalBatch layer = batch;
    for (std::size_t j = 0;; ++j) {
        out.push_back(empirical_variance(layer) / std::pow(2.0, static_cast<double>(j)));
        if (j == network.depth()) break;
        layer = kernels::parallel::apply_layer(network, j, layer);
    }
    return out;
}

std::vector<std::size_t> geometric_sizes(std::size_t first, std::size_t last) {
    require(first >= 1 && first <= last, ErrorKind::InvalidArgument, "need 1 <= first <= last");
    std::vector<std::size_t> sizes;
    for (double n = static_cast<double>(first); n <= static_cast<double>(last) + 0.5; n *= std::numbers::sqrt2) {
        const auto v = static_cast<std::size_t>(std::llround(n));
        if (sizes.empty() || v != sizes.back()) sizes.push_back(v);
    }
    return sizes;
}

RecoveryGrid ring_recovery(const RingRecoveryConfig& config) {
    require(!config.sample_sizes.empty(), ErrorKind::InvalidArgument, "no sample sizes given");
    const double near = config.neighbour_ratio;
    const double far = config.far_ratio;
    return recovery_grid([near, far](std::size_t d) { return default_ring_model(d, near, far); }, config.dims,
                         config.sample_sizes, config.trials, config.seed);
}

std::vector<std::optional<std::size_t>> success_frontier(const RecoveryGrid& grid, double level) {
    std::vector<std::optional<std::size_t>> frontier(grid.dims.size());
    for (std::size_t a = 0; a < grid.dims.size(); ++a)
        for (std::size_t b = 0; b < grid.sample_sizes.size(); ++b)
            if (grid.rate(a, b) >= level) {
                frontier[a] = grid.sample_sizes[b];
                break;
            }
    return frontier;
}

Report ring_recovery_report(const RingRecoveryConfig& config, const RecoveryGrid& grid) {
    Report report;
    report.config = {{"experiment", "ring-recovery"},
                     {"neighbour_ratio", format_number(config.neighbour_ratio)},
                     {"far_ratio", format_number(config.far_ratio)},
                     {"trials", std::to_string(config.trials)},
                     {"seed", std::to_string(config.seed)},
                     {"epsilon", format_number(config.epsilon)}};
    const auto frontier = success_frontier(grid, 0.8);
    for (std::size_t a = 0; a < grid.dims.size(); ++a) {
        const auto model = default_ring_model(grid.dims[a], config.neighbour_ratio, config.far_ratio);
        const std::string d = std::to_string(grid.dims[a]);
        report.config.emplace_back("gap_d" + d, format_number(correlation_gap(model)));
        report.config.emplace_back("bound_d" + d, format_number(sample_size_bound(model, config.epsilon)));
        report.config.emplace_back("frontier_0.8_d" + d, frontier[a] ? std::to_string(*frontier[a]) : "none");
    }
    report.columns = {"d", "N", "trials", "success_rate"};
    for (std::size_t a = 0; a < grid.dims.size(); ++a)
        for (std::size_t b = 0; b < grid.sample_sizes.size(); ++b)
            report.rows.push_back({std::to_string(grid.dims[a]), std::to_string(grid.sample_sizes[b]),
                                   std::to_string(grid.trials), format_number(grid.rate(a, b))});
    return report;
}

std::vector<bool> active_pixels(const SignalBatch& images, double min_fraction) {
    std::vector<std::size_t> hits(images.dim(), 0);
    for (std::size_t i = 0; i < images.count(); ++i) {
        const auto r = images.row(i);
        for (std::size_t k = 0; k < r.size(); ++k) hits[k] += r[k] != 0.0;
    }
    const double needed = min_fraction * static_cast<double>(images.count());
    std::vector<bool> active(images.dim());
    for (std::size_t k = 0; k < hits.size(); ++k) active[k] = hits[k] > 0 && static_cast<double>(hits[k]) > needed;
    return active;
}

namespace {

Dataset head(const Dataset& ds, std::size_t count) {
    require(count <= ds.images.count(), ErrorKind::TooFewSamples,
            "requested " + std::to_string(count) + " samples, file has " + std::to_string(ds.images.count()));
    std::vector<std::size_t> rows(count);
    for (std::size_t i = 0; i < count; ++i) rows[i] = i;
    Dataset out = ds;
    out.images = ds.images.select(rows);
    out.labels.resize(count);
    return out;
}

double error_rate(const std::vector<std::size_t>& predicted, const std::vector<std::size_t>& truth) {
    std::size_t wrong = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) wrong += predicted[i] != truth[i];
    return truth.empty() ? 0.0 : static_cast<double>(wrong) / static_cast<double>(truth.size());
}

// Partition of a network trained on scrambled pixels, in original pixel indices.
DyadicPartition unscrambled_partition(const HaarNetwork& network, const std::vector<std::size_t>& permutation) {
    const auto p = build_partition(network);
    std::vector<std::vector<std::vector<std::size_t>>> levels;
    for (std::size_t j = 0; j <= p.depth(); ++j) {
        auto level = p.level(j);
        for (auto& set : level)
            for (auto& v : set) v = permutation[v];
        levels.push_back(std::move(level));
    }
    return DyadicPartition(std::move(levels));
}

}  // namespace

MnistResult run_mnist(const MnistConfig& config) {
    require(config.transforms >= 1, ErrorKind::InvalidArgument, "need at least one transform");
    Dataset train = head(load_idx_dataset(config.train_images, config.train_labels), config.train_count);
    const std::size_t d = train.images.dim();
    require(train.geometry.has_value(), ErrorKind::InvalidArgument, "training images carry no grid geometry");
    const GridGeometry grid = *train.geometry;
    const std::vector<bool> mask = active_pixels(train.images, config.active_fraction);

    MnistResult result;
    result.active_pixels = static_cast<std::size_t>(std::count(mask.begin(), mask.end(), true));
    ModelFile& file = result.model;
    file.max_order = config.max_order;
    file.model.config = config.training;

    std::vector<std::size_t> permutation;
    if (config.geometry == Geometry::known) {
        require(config.training.mode == Mode::structured, ErrorKind::WrongMode, "known geometry uses structured grids");
        for (std::size_t t = 0; t < config.transforms; ++t)
            file.model.transforms.push_back(grid_variant(grid.height, grid.width, config.training.depth, t));
        file.model.subset_of_sample.assign(train.images.count(), 0);
    } else {
        permutation = scramble_permutation(d, derive_seed(config.training.seed, {0x5d}));
        train.images = permute(train.images, permutation);
        file.model = train_bagged(train.images, config.transforms, config.training);
        if (config.training.mode == Mode::structured) {
            const auto graph = grid_graph(grid.height, grid.width);
            const double weight = 1.0 / static_cast<double>(file.model.transforms.size());
            result.connectivity.assign(config.training.depth + 1, 0.0);
            result.merge_connectivity.assign(config.training.depth + 1, 0.0);
            for (const auto& net : file.model.transforms) {
                const auto partition = unscrambled_partition(net, permutation);
                for (std::size_t j = 0; j <= net.depth(); ++j) {
                    result.connectivity[j] += weight * connectivity_fraction(partition, graph, j, mask);
                    result.merge_connectivity[j] +=
                        weight * connectivity_fraction(partition, graph, j, mask, Connectivity::mergewise);
                }
            }
        }
    }
    if (!config.classify) return result;

    Dataset test = head(load_idx_dataset(config.test_images, config.test_labels), config.test_count);
    if (!permutation.empty()) test.images = permute(test.images, permutation);
    const std::size_t classes = std::max(train.classes, test.classes);

    const auto train_features = build_features(file.model, train.images, config.max_order);
    result.features = train_features.dim();
    const std::size_t per_class =
        config.per_class ? config.per_class : default_per_class(classes, std::min(train_features.dim(), train.images.count() - 1));
    file.selection = ols_select(train_features, train.labels, classes, per_class);
    result.selected = file.selection->dimension();

    auto train_embedded = project(*file.selection, train_features);
    normalize_rows(train_embedded);
    file.classifier = fit(config.kernel, train_embedded, train.labels, classes);
    result.train_error = error_rate(predict(*file.classifier, train_embedded), train.labels);

    auto test_embedded = project(*file.selection, build_features(file.model, test.images, config.max_order));
    normalize_rows(test_embedded);
    result.test_error = error_rate(predict(*file.classifier, test_embedded), test.labels);
    return result;
}

Report mnist_report(const MnistConfig& config, const MnistResult& result) {
    Report report;
    report.config = {{"experiment", "mnist"},
                     {"geometry", config.geometry == Geometry::known ? "known" : "scrambled"},
                     {"train_count", std::to_string(config.train_count)},
                     {"test_count", std::to_string(config.test_count)},
                     {"T", std::to_string(config.transforms)},
                     {"J", std::to_string(config.training.depth)},
                     {"mode", to_string(config.training.mode)},
                     {"norm", to_string(config.training.norm)},
                     {"matcher", to_string(config.training.matcher)},
                     {"max_order", std::to_string(config.max_order)},
                     {"per_class", std::to_string(config.per_class)},
                     {"sigma", format_number(config.kernel.sigma)},
                     {"lambda", format_number(config.kernel.lambda)},
                     {"seed", std::to_string(config.training.seed)},
                     {"active_fraction", format_number(config.active_fraction)}};
    report.columns = {"metric", "value"};
    if (result.test_error) {
        report.rows.push_back({"features", std::to_string(result.features)});
        report.rows.push_back({"selected", std::to_string(result.selected)});
        report.rows.push_back({"train_error", format_number(*result.train_error)});
        report.rows.push_back({"test_error", format_number(*result.test_error)});
    }
    if (!result.connectivity.empty()) {
        report.rows.push_back({"active_pixels", std::to_string(result.active_pixels)});
        for (std::size_t j = 0; j < result.connectivity.size(); ++j)
            report.rows.push_back({"connectivity_level_" + std::to_string(j), format_number(result.connectivity[j])});
        for (std::size_t j = 0; j < result.merge_connectivity.size(); ++j)
            report.rows.push_back(
                {"merge_connectivity_level_" + std::to_string(j), format_number(result.merge_connectivity[j])});
    }
    return report;
}

Report run_reconstruct(const ReconstructConfig& config) {
    Report report;
    report.config = {{"experiment", "reconstruct"},
                     {"trials", std::to_string(config.trials)},
                     {"max_depth", std::to_string(config.max_depth)},
                     {"seed", std::to_string(config.seed)}};
    report.columns = {"d", "J", "trials", "max_error", "failures"};
    for (std::size_t d : config.dims) {
        const std::size_t depth_limit = std::min(config.max_depth, log2_exact(d));
        for (std::size_t depth = 1; depth <= depth_limit; ++depth) {
            double worst = 0.0;
            std::size_t failures = 0;
            for (std::size_t t = 0; t < config.trials; ++t) {
                auto rng = make_rng(config.seed, {0x7e, d, depth, t});
                std::uniform_real_distribution<double> positive(0.1, 1.0);
                std::vector<double> x(d);
                for (double& v : x) v = positive(rng);
                std::vector<InterlacedPairingSet> layers;
                for (std::size_t j = 0; j < depth; ++j) layers.push_back(random_interlaced(d, rng));
                try {
                    const auto back = reconstruct(forward_bag(x, layers), layers);
                    for (std::size_t k = 0; k < d; ++k) worst = std::max(worst, std::abs(back[k] - x[k]));
                } catch (const Error&) {
                    ++failures;
                }
            }
            report.rows.push_back({std::to_string(d), std::to_string(depth), std::to_string(config.trials),
                                   format_number(worst), std::to_string(failures)});
        }
    }
    return report;
}

}  // namespace haarscat
