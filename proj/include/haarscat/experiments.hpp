#pragma once

// Experiment drivers. Reports are CSV with "# key=value" configuration lines
// and never contain timings, so repeated runs with one seed are byte-identical.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "haarscat/gaussian_ring.hpp"
#include "haarscat/io.hpp"
#include "haarscat/learn.hpp"

namespace haarscat {

struct Report {
    std::vector<std::pair<std::string, std::string>> config;
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    std::string csv() const;
};

/// Shortest round-trip decimal form.
std::string format_number(double v);

struct VarianceRow {
    int order = 0;
    double sigma2 = 0.0;
    double model_value = 0.0;
};

/// Normalized variance of the order-m coefficients of S_J x for white noise:
/// sum over those coefficients of Var(S_J x(n, q)) / d.
std::vector<VarianceRow> variance_table(std::size_t depth, std::size_t dim, std::size_t count, std::uint64_t seed);
Report run_variance_table(std::size_t depth, std::size_t dim, std::size_t count, std::uint64_t seed);

/// (1 - 2/pi)^m binom(J, m)
double variance_model_value(std::size_t depth, int order);

/// sigma^2(2^{-j/2} S_j x) over the batch for j = 0..J, non-normalized.
std::vector<double> layer_variances(const HaarNetwork& network, const SignalBatch& batch);

struct RingRecoveryConfig {
    std::vector<std::size_t> dims{8, 16, 32, 64};
    std::vector<std::size_t> sample_sizes;
    std::size_t trials = 100;
    double neighbour_ratio = 0.44;
    double far_ratio = 0.06;
    double epsilon = 0.2;
    std::uint64_t seed = 0;
};

/// N values from `first` growing by sqrt(2) per step (rounded, deduplicated) up to `last`.
std::vector<std::size_t> geometric_sizes(std::size_t first, std::size_t last);

RecoveryGrid ring_recovery(const RingRecoveryConfig& config);
/// Smallest sample size whose success rate reaches `level`, per dimension.
std::vector<std::optional<std::size_t>> success_frontier(const RecoveryGrid& grid, double level);
Report ring_recovery_report(const RingRecoveryConfig& config, const RecoveryGrid& grid);

enum class Geometry { known, scrambled };

struct MnistConfig {
    std::filesystem::path train_images;
    std::filesystem::path train_labels;
    std::filesystem::path test_images;
    std::filesystem::path test_labels;
    std::size_t train_count = 2000;
    std::size_t test_count = 1000;
    Geometry geometry = Geometry::known;
    std::size_t transforms = 4;
    TrainConfig training{6, Mode::structured, Norm::l1, Matcher::exact, 0};
    int max_order = 4;
    /// 0 selects 1000 / C per class.
    std::size_t per_class = 0;
    KernelConfig kernel;
    /// Connectivity is measured on pixels active in more than this fraction of training images.
    double active_fraction = 0.0;
    /// Skip the supervised stage (pairings and connectivity only).
    bool classify = true;
};

struct MnistResult {
    ModelFile model;
    std::size_t features = 0;
    std::size_t selected = 0;
    std::optional<double> train_error;
    std::optional<double> test_error;
    /// connectivity[j] for levels 0..J, averaged over transforms; scrambled runs only.
    std::vector<double> connectivity;
    /// Same with the weaker test that some edge joins the two merged halves.
    std::vector<double> merge_connectivity;
    std::size_t active_pixels = 0;
};

/// Pixels that are nonzero in more than `min_fraction` of the images
/// (at least one image when min_fraction is 0).
std::vector<bool> active_pixels(const SignalBatch& images, double min_fraction = 0.0);

MnistResult run_mnist(const MnistConfig& config);
Report mnist_report(const MnistConfig& config, const MnistResult& result);

struct ReconstructConfig {
    std::vector<std::size_t> dims{4, 8, 16, 32};
    std::size_t max_depth = 3;
    std::size_t trials = 50;
    std::uint64_t seed = 0;
};

Report run_reconstruct(const ReconstructConfig& config);

}  // namespace haarscat
