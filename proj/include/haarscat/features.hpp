#pragma once

// Supervised stage: bagged scattering dictionaries, per-class orthogonal least
// squares forward selection, and a Gaussian kernel classifier.

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "haarscat/batch.hpp"
#include "haarscat/learn.hpp"
#include "haarscat/scatter.hpp"

namespace haarscat {

/// samples x features
using FeatureMatrix = SignalBatch;

/// Indices of the S_J coefficients kept as features. Structured networks drop
/// coefficients of order above `max_order`; free networks keep everything.
std::vector<std::size_t> kept_coefficients(const HaarNetwork& network, std::optional<int> max_order);

/// S_J x of every transform (restricted to kept coefficients) followed by the
/// constant feature 1.
FeatureMatrix build_features(std::span<const HaarNetwork> transforms, const SignalBatch& batch,
                             std::optional<int> max_order = std::nullopt);
FeatureMatrix build_features(const BaggedModel& model, const SignalBatch& batch,
                             std::optional<int> max_order = std::nullopt);

struct ClassSelection {
    /// Selected dictionary columns, in selection order.
    std::vector<std::size_t> features;
    /// Coefficient of the class indicator on each orthonormalized feature.
    std::vector<double> alpha;
    /// Residual energy |f_c|^2 - sum alpha^2 after each step.
    std::vector<double> residual;
    /// K x K lower triangular: u_k = sum_i transform(k, i) phi_{features[i]} / |phi_{features[i]}|.
    std::vector<double> transform;
    /// Training norm of each selected column.
    std::vector<double> column_norms;

    friend bool operator==(const ClassSelection&, const ClassSelection&) = default;
};

struct SelectionState {
    std::size_t dictionary_size = 0;
    std::vector<ClassSelection> classes;

    /// M = total selected features over all classes.
    std::size_t dimension() const;

    friend bool operator==(const SelectionState&, const SelectionState&) = default;
};

/// K = 1000 / C, clipped to [1, available].
std::size_t default_per_class(std::size_t classes, std::size_t available);

SelectionState ols_select(const FeatureMatrix& features, std::span<const std::size_t> labels, std::size_t classes,
                          std::size_t per_class);

/// Orthonormalized selected features of each class, concatenated: samples x M.
SignalBatch project(const SelectionState& selection, const FeatureMatrix& features);

struct Normalized {
    std::vector<double> values;
    bool zero = false;
};

/// Scales to unit Euclidean norm; a zero vector stays zero and is flagged.
Normalized normalize(std::span<const double> v);

/// Normalizes every row in place; returns the number of zero rows.
std::size_t normalize_rows(SignalBatch& batch);

struct KernelConfig {
    double sigma = 1.0;
    double lambda = 1e-3;

    friend bool operator==(const KernelConfig&, const KernelConfig&) = default;
};

/// One-vs-all kernel ridge regression on {0,1} class indicators.
struct KernelClassifier {
    KernelConfig config;
    std::size_t classes = 0;
    SignalBatch training;
    /// samples x classes, row-major
    std::vector<double> dual;

    friend bool operator==(const KernelClassifier&, const KernelClassifier&) = default;
};

KernelClassifier fit(const KernelConfig& config, const SignalBatch& features, std::span<const std::size_t> labels,
                     std::size_t classes);

/// samples x classes, row-major
std::vector<double> decision_scores(const KernelClassifier& clf, const SignalBatch& features);

/// Argmax of the scores; ties go to the smallest class index.
std::vector<std::size_t> predict(const KernelClassifier& clf, const SignalBatch& features);

}  // namespace haarscat
