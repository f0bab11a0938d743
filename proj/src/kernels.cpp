#include "haarscat/kernels.hpp"

#include <cmath>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "haarscat/error.hpp"

namespace haarscat::kernels {

namespace {

void check_cost_shape(const SignalBatch& layer, std::size_t cols) {
    require(!layer.empty(), ErrorKind::EmptyBatch, "cost matrix of an empty batch");
    require(cols > 0 && layer.dim() % cols == 0 && (layer.dim() / cols) % 2 == 0, ErrorKind::ShapeMismatch,
            "layer of width " + std::to_string(layer.dim()) + " has no even row count for " +
                std::to_string(cols) + " columns");
}

void check_gram_shape(const SignalBatch& a, const SignalBatch& b, double sigma) {
    require(a.dim() == b.dim(), ErrorKind::DimensionMismatch, "gram operands differ in width");
    require(sigma > 0.0, ErrorKind::InvalidArgument, "kernel bandwidth must be positive");
}

// units x cols x count: unit a, column q holds the count samples contiguously.
std::vector<double> unit_major(const SignalBatch& layer, std::size_t cols) {
    const std::size_t n = layer.count();
    const std::size_t units = layer.dim() / cols;
    std::vector<double> t(layer.values().size());
    for (std::size_t i = 0; i < n; ++i) {
        const auto r = layer.row(i);
        for (std::size_t a = 0; a < units; ++a)
            for (std::size_t q = 0; q < cols; ++q) t[(a * cols + q) * n + i] = r[a * cols + q];
    }
    return t;
}

inline double l1_distance(const double* x, const double* y, std::size_t n) {
    double acc = 0.0;
    for (std::size_t k = 0; k < n; ++k) acc += std::abs(x[k] - y[k]);
    return acc;
}

inline double abs_sum(const double* x, const double* y, std::size_t n) {
    double acc = 0.0;
    for (std::size_t k = 0; k < n; ++k) acc += std::abs(x[k] + y[k]);
    return acc;
}

inline double squared_distance(const double* x, const double* y, std::size_t n) {
    double acc = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double t = x[k] - y[k];
        acc += t * t;
    }
    return acc;
}

}  // namespace

int max_threads() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

namespace serial {

SignalBatch apply_layer(const HaarNetwork& network, std::size_t j, const SignalBatch& layer) {
    require(layer.dim() == network.dim(), ErrorKind::DimensionMismatch, "batch width != network dimension");
    SignalBatch out(layer.count(), layer.dim());
    for (std::size_t i = 0; i < layer.count(); ++i) haarscat::apply_layer(network, j, layer.row(i), out.row(i));
    return out;
}

SignalBatch transform(const HaarNetwork& network, const SignalBatch& batch) {
    require(batch.dim() == network.dim(), ErrorKind::DimensionMismatch, "batch width != network dimension");
    SignalBatch out(batch.count(), batch.dim());
    for (std::size_t i = 0; i < batch.count(); ++i) {
        const auto s = haarscat::transform(network, batch.row(i), InputPolicy::permissive);
        std::copy(s.begin(), s.end(), out.row(i).begin());
    }
    return out;
}

std::vector<double> cost_l1(const SignalBatch& layer, std::size_t cols) {
    check_cost_shape(layer, cols);
    const std::size_t units = layer.dim() / cols;
    std::vector<double> c(units * units, 0.0);
    for (std::size_t i = 0; i < layer.count(); ++i) {
        const auto r = layer.row(i);
        for (std::size_t a = 0; a < units; ++a)
            for (std::size_t b = a + 1; b < units; ++b)
                for (std::size_t q = 0; q < cols; ++q) c[a * units + b] += std::abs(r[a * cols + q] - r[b * cols + q]);
    }
    for (std::size_t a = 0; a < units; ++a)
        for (std::size_t b = a + 1; b < units; ++b) c[b * units + a] = c[a * units + b];
    return c;
}

std::vector<double> cost_mixed(const SignalBatch& layer, std::size_t cols) {
    check_cost_shape(layer, cols);
    const std::size_t units = layer.dim() / cols;
    std::vector<double> c(units * units, 0.0);
    std::vector<double> sums(cols), diffs(cols);
    for (std::size_t a = 0; a < units; ++a) {
        for (std::size_t b = a + 1; b < units; ++b) {
            std::fill(sums.begin(), sums.end(), 0.0);
            std::fill(diffs.begin(), diffs.end(), 0.0);
            for (std::size_t i = 0; i < layer.count(); ++i) {
                const auto r = layer.row(i);
                for (std::size_t q = 0; q < cols; ++q) {
                    sums[q] += std::abs(r[a * cols + q] + r[b * cols + q]);
                    diffs[q] += std::abs(r[a * cols + q] - r[b * cols + q]);
                }
            }
            double total = 0.0;
            for (std::size_t q = 0; q < cols; ++q) total += sums[q] * sums[q] + diffs[q] * diffs[q];
            c[a * units + b] = c[b * units + a] = total;
        }
    }
    return c;
}

std::vector<double> gaussian_gram(const SignalBatch& a, const SignalBatch& b, double sigma) {
    check_gram_shape(a, b, sigma);
    const double scale = -1.0 / (2.0 * sigma * sigma);
    std::vector<double> g(a.count() * b.count());
    for (std::size_t r = 0; r < a.count(); ++r)
        for (std::size_t c = 0; c < b.count(); ++c) {
            double acc = 0.0;
            for (std::size_t k = 0; k < a.dim(); ++k) {
                const double t = a.row(r)[k] - b.row(c)[k];
                acc += t * t;
            }
            g[r * b.count() + c] = std::exp(scale * acc);
        }
    return g;
}

}  // namespace serial

namespace parallel {

SignalBatch apply_layer(const HaarNetwork& network, std::size_t j, const SignalBatch& layer) {
    require(layer.dim() == network.dim(), ErrorKind::DimensionMismatch, "batch width != network dimension");
    SignalBatch out(layer.count(), layer.dim());
    const auto n = static_cast<std::ptrdiff_t>(layer.count());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        const auto k = static_cast<std::size_t>(i);
        haarscat::apply_layer(network, j, layer.row(k), out.row(k));
    }
    return out;
}

SignalBatch transform(const HaarNetwork& network, const SignalBatch& batch) {
    require(batch.dim() == network.dim(), ErrorKind::DimensionMismatch, "batch width != network dimension");
    SignalBatch out(batch.count(), batch.dim());
    const auto n = static_cast<std::ptrdiff_t>(batch.count());
    const std::size_t d = batch.dim();
#pragma omp parallel
    {
        std::vector<double> cur(d), next(d);
#pragma omp for schedule(static)
        for (std::ptrdiff_t i = 0; i < n; ++i) {
            const auto k = static_cast<std::size_t>(i);
            const auto src = batch.row(k);
            std::copy(src.begin(), src.end(), cur.begin());
            for (std::size_t j = 0; j < network.depth(); ++j) {
                haarscat::apply_layer(network, j, cur, next);
                cur.swap(next);
            }
            std::copy(cur.begin(), cur.end(), out.row(k).begin());
        }
    }
    return out;
}

std::vector<double> cost_l1(const SignalBatch& layer, std::size_t cols) {
    check_cost_shape(layer, cols);
    const std::size_t units = layer.dim() / cols;
    const std::size_t width = cols * layer.count();
    const auto t = unit_major(layer, cols);
    std::vector<double> c(units * units, 0.0);
#pragma omp parallel for schedule(dynamic, 4)
    for (std::ptrdiff_t sa = 0; sa < static_cast<std::ptrdiff_t>(units); ++sa) {
        const auto a = static_cast<std::size_t>(sa);
        for (std::size_t b = a + 1; b < units; ++b) {
            const double v = l1_distance(t.data() + a * width, t.data() + b * width, width);
            c[a * units + b] = v;
            c[b * units + a] = v;
        }
    }
    return c;
}

std::vector<double> cost_mixed(const SignalBatch& layer, std::size_t cols) {
    check_cost_shape(layer, cols);
    const std::size_t units = layer.dim() / cols;
    const std::size_t n = layer.count();
    const std::size_t width = cols * n;
    const auto t = unit_major(layer, cols);
    std::vector<double> c(units * units, 0.0);
#pragma omp parallel for schedule(dynamic, 4)
    for (std::ptrdiff_t sa = 0; sa < static_cast<std::ptrdiff_t>(units); ++sa) {
        const auto a = static_cast<std::size_t>(sa);
        for (std::size_t b = a + 1; b < units; ++b) {
            double total = 0.0;
            for (std::size_t q = 0; q < cols; ++q) {
                const double* x = t.data() + a * width + q * n;
                const double* y = t.data() + b * width + q * n;
                const double s = abs_sum(x, y, n);
                const double dl = l1_distance(x, y, n);
                total += s * s + dl * dl;
            }
            c[a * units + b] = total;
            c[b * units + a] = total;
        }
    }
    return c;
}

std::vector<double> gaussian_gram(const SignalBatch& a, const SignalBatch& b, double sigma) {
    check_gram_shape(a, b, sigma);
    const double scale = -1.0 / (2.0 * sigma * sigma);
    const std::size_t nb = b.count();
    std::vector<double> g(a.count() * nb);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t sr = 0; sr < static_cast<std::ptrdiff_t>(a.count()); ++sr) {
        const auto r = static_cast<std::size_t>(sr);
        const double* x = a.row(r).data();
        for (std::size_t c = 0; c < nb; ++c)
            g[r * nb + c] = std::exp(scale * squared_distance(x, b.row(c).data(), a.dim()));
    }
    return g;
}

}  // namespace parallel

}  // namespace haarscat::kernels
