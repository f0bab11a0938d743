#include "haarscat/features.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "haarscat/error.hpp"
#include "haarscat/kernels.hpp"

namespace haarscat {

namespace {

constexpr double drop_threshold = 1e-10;

double dot(const double* a, const double* b, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
    return s;
}

}  // namespace

std::vector<std::size_t> kept_coefficients(const HaarNetwork& network, std::optional<int> max_order) {
    const std::size_t d = network.dim();
    std::vector<std::size_t> kept;
    if (network.mode() == Mode::free || !max_order) {
        kept.resize(d);
        for (std::size_t k = 0; k < d; ++k) kept[k] = k;
        return kept;
    }
    const int depth = static_cast<int>(network.depth());
    const std::size_t cols = std::size_t{1} << network.depth();
    for (std::size_t k = 0; k < d; ++k)
        if (order_of(depth, k % cols) <= *max_order) kept.push_back(k);
    return kept;
}

FeatureMatrix build_features(std::span<const HaarNetwork> transforms, const SignalBatch& batch,
                             std::optional<int> max_order) {
    require(!transforms.empty(), ErrorKind::InvalidArgument, "no transforms to build features from");
    std::vector<std::vector<std::size_t>> kept;
    std::size_t width = 1;
    for (const auto& net : transforms) {
        require(net.dim() == batch.dim(), ErrorKind::DimensionMismatch,
                "signals have " + std::to_string(batch.dim()) + " entries, transform expects " +
                    std::to_string(net.dim()));
        kept.push_back(kept_coefficients(net, max_order));
        width += kept.back().size();
    }
    FeatureMatrix features(batch.count(), width);
    std::size_t offset = 0;
    for (std::size_t t = 0; t < transforms.size(); ++t) {
        const auto coeffs = kernels::parallel::transform(transforms[t], batch);
        for (std::size_t i = 0; i < batch.count(); ++i) {
            const auto src = coeffs.row(i);
            auto dst = features.row(i);
            for (std::size_t k = 0; k < kept[t].size(); ++k) dst[offset + k] = src[kept[t][k]];
        }
        offset += kept[t].size();
    }
    for (std::size_t i = 0; i < batch.count(); ++i) features.row(i)[width - 1] = 1.0;
    return features;
}

FeatureMatrix build_features(const BaggedModel& model, const SignalBatch& batch, std::optional<int> max_order) {
    return build_features(std::span<const HaarNetwork>(model.transforms), batch, max_order);
}

std::size_t SelectionState::dimension() const {
    std::size_t m = 0;
    for (const auto& c : classes) m += c.features.size();
    return m;
}

std::size_t default_per_class(std::size_t classes, std::size_t available) {
    require(classes >= 1, ErrorKind::InvalidArgument, "need at least one class");
    return std::clamp<std::size_t>(1000 / classes, 1, std::max<std::size_t>(available, 1));
}

namespace {

// Column-major copy of the dictionary with unit-norm columns.
struct Dictionary {
    std::size_t samples = 0;
    std::size_t size = 0;
    std::vector<double> columns;
    std::vector<double> norms;

    const double* column(std::size_t p) const { return columns.data() + p * samples; }
    double* column(std::size_t p) { return columns.data() + p * samples; }
};

Dictionary unit_dictionary(const FeatureMatrix& f) {
    Dictionary dict{f.count(), f.dim(), std::vector<double>(f.count() * f.dim()), std::vector<double>(f.dim(), 0.0)};
    for (std::size_t i = 0; i < f.count(); ++i) {
        const auto r = f.row(i);
        for (std::size_t p = 0; p < f.dim(); ++p) dict.columns[p * f.count() + i] = r[p];
    }
    for (std::size_t p = 0; p < f.dim(); ++p) {
        double* c = dict.column(p);
        dict.norms[p] = std::sqrt(dot(c, c, f.count()));
        if (dict.norms[p] > 0.0)
            for (std::size_t i = 0; i < f.count(); ++i) c[i] /= dict.norms[p];
    }
    return dict;
}

ClassSelection select_class(Dictionary dict, const std::vector<double>& target, std::size_t per_class) {
    const std::size_t n = dict.samples;
    std::vector<char> active(dict.size, 0);
    for (std::size_t p = 0; p < dict.size; ++p) active[p] = dict.norms[p] > 0.0;

    ClassSelection sel;
    double residual = dot(target.data(), target.data(), n);
    std::vector<double> score(dict.size);
    const auto size = static_cast<std::ptrdiff_t>(dict.size);
    for (std::size_t k = 0; k < per_class; ++k) {
#pragma omp parallel for schedule(static)
        for (std::ptrdiff_t sp = 0; sp < size; ++sp) {
            const auto p = static_cast<std::size_t>(sp);
            score[p] = active[p] ? std::abs(dot(dict.column(p), target.data(), n)) : -1.0;
        }
        std::size_t best = dict.size;
        for (std::size_t p = 0; p < dict.size; ++p)
            if (active[p] && (best == dict.size || score[p] > score[best])) best = p;
        if (best == dict.size)
            fail(ErrorKind::DegenerateDictionary, "no linearly independent feature left after " + std::to_string(k) +
                                                      " selections (wanted " + std::to_string(per_class) + ")");
        active[best] = 0;
        const double* chosen = dict.column(best);
        const double alpha = dot(chosen, target.data(), n);
        residual -= alpha * alpha;
        sel.features.push_back(best);
        sel.alpha.push_back(alpha);
        sel.residual.push_back(residual);

        // Decorrelate the remaining dictionary from the chosen feature.
#pragma omp parallel for schedule(static)
        for (std::ptrdiff_t sp = 0; sp < size; ++sp) {
            const auto p = static_cast<std::size_t>(sp);
            if (!active[p]) continue;
            double* c = dict.column(p);
            const double g = dot(c, chosen, n);
            for (std::size_t i = 0; i < n; ++i) c[i] -= g * chosen[i];
            const double norm = std::sqrt(dot(c, c, n));
            if (norm < drop_threshold) {
                active[p] = 0;
                continue;
            }
            for (std::size_t i = 0; i < n; ++i) c[i] /= norm;
        }
    }
    return sel;
}

// Expresses the orthonormalized selected features through the unit-norm
// original columns (modified Gram-Schmidt in selection order).
void fill_transform(ClassSelection& sel, const Dictionary& original) {
    const std::size_t k = sel.features.size();
    const std::size_t n = original.samples;
    sel.transform.assign(k * k, 0.0);
    sel.column_norms.resize(k);
    std::vector<std::vector<double>> basis;
    for (std::size_t a = 0; a < k; ++a) {
        sel.column_norms[a] = original.norms[sel.features[a]];
        const double* psi = original.column(sel.features[a]);
        std::vector<double> u(psi, psi + n);
        std::vector<double> row(k, 0.0);
        row[a] = 1.0;
        for (std::size_t b = 0; b < a; ++b) {
            const double g = dot(u.data(), basis[b].data(), n);
            for (std::size_t i = 0; i < n; ++i) u[i] -= g * basis[b][i];
            for (std::size_t c = 0; c <= b; ++c) row[c] -= g * sel.transform[b * k + c];
        }
        const double norm = std::sqrt(dot(u.data(), u.data(), n));
        for (double& v : u) v /= norm;
        for (std::size_t c = 0; c <= a; ++c) sel.transform[a * k + c] = row[c] / norm;
        basis.push_back(std::move(u));
    }
}

}  // namespace

SelectionState ols_select(const FeatureMatrix& features, std::span<const std::size_t> labels, std::size_t classes,
                          std::size_t per_class) {
    require(per_class >= 1, ErrorKind::InvalidArgument, "select at least one feature per class");
    require(classes >= 2, ErrorKind::InvalidArgument, "need at least two classes");
    require(labels.size() == features.count(), ErrorKind::DimensionMismatch, "one label per sample required");
    require(features.count() > per_class, ErrorKind::TooFewSamples,
            "need more samples than selected features per class");
    for (std::size_t y : labels) require(y < classes, ErrorKind::IndexOutOfRange, "label outside class range");

    const Dictionary dict = unit_dictionary(features);
    SelectionState state;
    state.dictionary_size = features.dim();
    for (std::size_t c = 0; c < classes; ++c) {
        std::vector<double> target(features.count());
        for (std::size_t i = 0; i < labels.size(); ++i) target[i] = labels[i] == c ? 1.0 : 0.0;
        auto sel = select_class(dict, target, per_class);
        fill_transform(sel, dict);
        state.classes.push_back(std::move(sel));
    }
    return state;
}

SignalBatch project(const SelectionState& selection, const FeatureMatrix& features) {
    require(features.dim() == selection.dictionary_size, ErrorKind::DimensionMismatch,
            "features have " + std::to_string(features.dim()) + " columns, selection expects " +
                std::to_string(selection.dictionary_size));
    SignalBatch out(features.count(), selection.dimension());
    const auto count = static_cast<std::ptrdiff_t>(features.count());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t si = 0; si < count; ++si) {
        const auto i = static_cast<std::size_t>(si);
        const auto row = features.row(i);
        auto dst = out.row(i);
        std::size_t offset = 0;
        for (const auto& sel : selection.classes) {
            const std::size_t k = sel.features.size();
            std::vector<double> psi(k);
            for (std::size_t a = 0; a < k; ++a) psi[a] = row[sel.features[a]] / sel.column_norms[a];
            for (std::size_t a = 0; a < k; ++a) {
                double v = 0.0;
                for (std::size_t b = 0; b <= a; ++b) v += sel.transform[a * k + b] * psi[b];
                dst[offset + a] = v;
            }
            offset += k;
        }
    }
    return out;
}

Normalized normalize(std::span<const double> v) {
    double norm = 0.0;
    for (double x : v) norm += x * x;
    norm = std::sqrt(norm);
    Normalized out{std::vector<double>(v.begin(), v.end()), norm == 0.0};
    if (!out.zero)
        for (double& x : out.values) x /= norm;
    return out;
}

std::size_t normalize_rows(SignalBatch& batch) {
    std::size_t zero = 0;
    for (std::size_t i = 0; i < batch.count(); ++i) {
        auto r = batch.row(i);
        const auto n = normalize(r);
        zero += n.zero;
        std::copy(n.values.begin(), n.values.end(), r.begin());
    }
    return zero;
}

KernelClassifier fit(const KernelConfig& config, const SignalBatch& features, std::span<const std::size_t> labels,
                     std::size_t classes) {
    require(config.sigma > 0.0, ErrorKind::InvalidArgument, "kernel bandwidth must be positive");
    require(config.lambda >= 0.0, ErrorKind::InvalidArgument, "regularization must be nonnegative");
    require(labels.size() == features.count(), ErrorKind::DimensionMismatch, "one label per sample required");
    require(!features.empty(), ErrorKind::EmptyBatch, "no training samples");
    require(classes >= 1, ErrorKind::InvalidArgument, "need at least one class");
    for (std::size_t y : labels) require(y < classes, ErrorKind::IndexOutOfRange, "label outside class range");

    const std::size_t n = features.count();
    const auto gram_values = kernels::parallel::gaussian_gram(features, features, config.sigma);
    Eigen::MatrixXd gram = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
        gram_values.data(), static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    gram.diagonal().array() += config.lambda;
    Eigen::MatrixXd targets = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(classes));
    for (std::size_t i = 0; i < n; ++i) targets(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(labels[i])) = 1.0;

    Eigen::LLT<Eigen::MatrixXd> llt(gram);
    if (llt.info() != Eigen::Success)
        fail(ErrorKind::SingularSystem, "kernel system is not positive definite; increase the regularization");
    const Eigen::MatrixXd dual = llt.solve(targets);
    if (!dual.allFinite()) fail(ErrorKind::SingularSystem, "kernel system solve produced non-finite values");

    KernelClassifier clf{config, classes, features, std::vector<double>(n * classes)};
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t c = 0; c < classes; ++c)
            clf.dual[i * classes + c] = dual(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c));
    return clf;
}

std::vector<double> decision_scores(const KernelClassifier& clf, const SignalBatch& features) {
    require(features.dim() == clf.training.dim(), ErrorKind::DimensionMismatch,
            "features have " + std::to_string(features.dim()) + " entries, classifier expects " +
                std::to_string(clf.training.dim()));
    const std::size_t n = clf.training.count();
    const std::size_t classes = clf.classes;
    const auto gram = kernels::parallel::gaussian_gram(features, clf.training, clf.config.sigma);
    std::vector<double> scores(features.count() * classes, 0.0);
    const auto count = static_cast<std::ptrdiff_t>(features.count());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t si = 0; si < count; ++si) {
        const auto r = static_cast<std::size_t>(si);
        for (std::size_t i = 0; i < n; ++i) {
            const double k = gram[r * n + i];
            for (std::size_t c = 0; c < classes; ++c) scores[r * classes + c] += k * clf.dual[i * classes + c];
        }
    }
    return scores;
}

std::vector<std::size_t> predict(const KernelClassifier& clf, const SignalBatch& features) {
    const auto scores = decision_scores(clf, features);
    std::vector<std::size_t> labels(features.count(), 0);
    for (std::size_t r = 0; r < features.count(); ++r) {
        const double* s = scores.data() + r * clf.classes;
        for (std::size_t c = 1; c < clf.classes; ++c)
            if (s[c] > s[labels[r]]) labels[r] = c;
    }
    return labels;
}

}  // namespace haarscat
