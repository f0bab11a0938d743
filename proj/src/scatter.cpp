#include "haarscat/scatter.hpp"

#include <algorithm>
#include <bit>
#include <numeric>
#include <string>

#include "haarscat/error.hpp"

namespace haarscat {

Pairing::Pairing(std::vector<IndexPair> pairs) : pairs_(std::move(pairs)) {
    const std::size_t units = 2 * pairs_.size();
    std::vector<char> seen(units, 0);
    for (auto& pr : pairs_) {
        if (pr.first > pr.second) std::swap(pr.first, pr.second);
        require(pr.second < units, ErrorKind::IndexOutOfRange,
                "pair index " + std::to_string(pr.second) + " outside 0.." +
                    std::to_string(units - 1));
        require(pr.first != pr.second, ErrorKind::InvalidArgument, "self pair");
        require(!seen[pr.first] && !seen[pr.second], ErrorKind::InvalidArgument,
                "index paired twice");
        seen[pr.first] = seen[pr.second] = 1;
    }
    std::sort(pairs_.begin(), pairs_.end());
}

std::vector<std::size_t> Pairing::partners() const {
    std::vector<std::size_t> partner(units());
    for (const auto& pr : pairs_) {
        partner[pr.first] = pr.second;
        partner[pr.second] = pr.first;
    }
    return partner;
}

Pairing adjacent_pairing(std::size_t units) {
    require(units % 2 == 0, ErrorKind::OddSize, "adjacent_pairing needs an even size");
    std::vector<IndexPair> pairs;
    pairs.reserve(units / 2);
    for (std::size_t i = 0; i < units; i += 2) pairs.push_back({i, i + 1});
    return Pairing(std::move(pairs));
}

Pairing random_pairing(std::size_t units, std::mt19937_64& rng) {
    require(units % 2 == 0, ErrorKind::OddSize, "random_pairing needs an even size");
    std::vector<std::size_t> order(units);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<IndexPair> pairs;
    pairs.reserve(units / 2);
    for (std::size_t i = 0; i < units; i += 2) pairs.push_back({order[i], order[i + 1]});
    return Pairing(std::move(pairs));
}

Pairing pairing_from_partners(std::span<const std::size_t> partner) {
    std::vector<IndexPair> pairs;
    for (std::size_t i = 0; i < partner.size(); ++i) {
        require(partner[i] < partner.size() && partner[partner[i]] == i, ErrorKind::InvalidArgument,
                "partner table is not an involution");
        if (i < partner[i]) pairs.push_back({i, partner[i]});
    }
    require(2 * pairs.size() == partner.size(), ErrorKind::InvalidArgument,
            "partner table has fixed points");
    return Pairing(std::move(pairs));
}

bool is_power_of_two(std::size_t n) noexcept { return std::has_single_bit(n); }

std::size_t log2_exact(std::size_t n) {
    require(is_power_of_two(n), ErrorKind::NotPowerOfTwo, std::to_string(n) + " is not a power of 2");
    return static_cast<std::size_t>(std::countr_zero(n));
}

std::size_t layer_units(Mode mode, std::size_t dim, std::size_t j) {
    return mode == Mode::free ? dim : dim >> j;
}

HaarNetwork::HaarNetwork(Mode mode, std::size_t dim, std::vector<Pairing> layers)
    : mode_(mode), dim_(dim), layers_(std::move(layers)) {
    require(dim >= 2 && is_power_of_two(dim), ErrorKind::NotPowerOfTwo,
            "network dimension must be a power of 2, got " + std::to_string(dim));
    require(layers_.size() <= log2_exact(dim), ErrorKind::InvalidArgument,
            "depth exceeds log2(dim)");
    for (std::size_t j = 0; j < layers_.size(); ++j) {
        require(layers_[j].units() == layer_units(mode, dim, j), ErrorKind::DimensionMismatch,
                "layer " + std::to_string(j) + " pairs " + std::to_string(layers_[j].units()) +
                    " units, expected " + std::to_string(layer_units(mode, dim, j)));
    }
}

HaarNetwork random_network(Mode mode, std::size_t dim, std::size_t depth, std::mt19937_64& rng) {
    std::vector<Pairing> layers;
    for (std::size_t j = 0; j < depth; ++j) layers.push_back(random_pairing(layer_units(mode, dim, j), rng));
    return HaarNetwork(mode, dim, std::move(layers));
}

namespace {

void free_layer_into(std::span<const double> s, const Pairing& p, std::span<double> out) {
    const auto pairs = p.pairs();
    for (std::size_t n = 0; n < pairs.size(); ++n) {
        const double a = s[pairs[n].first];
        const double b = s[pairs[n].second];
        out[2 * n] = a + b;
        out[2 * n + 1] = a > b ? a - b : b - a;
    }
}

void structured_layer_into(std::span<const double> s, std::size_t cols, const Pairing& p,
                           std::span<double> out) {
    const auto pairs = p.pairs();
    for (std::size_t n = 0; n < pairs.size(); ++n) {
        const double* ra = s.data() + pairs[n].first * cols;
        const double* rb = s.data() + pairs[n].second * cols;
        double* o = out.data() + n * 2 * cols;
        for (std::size_t q = 0; q < cols; ++q) {
            const double a = ra[q];
            const double b = rb[q];
            o[2 * q] = a + b;
            o[2 * q + 1] = a > b ? a - b : b - a;
        }
    }
}

void check_input(const HaarNetwork& network, std::span<const double> x, InputPolicy policy) {
    require(x.size() == network.dim(), ErrorKind::DimensionMismatch,
            "signal length " + std::to_string(x.size()) + " != network dimension " +
                std::to_string(network.dim()));
    if (policy == InputPolicy::strict) {
        for (double v : x) require(v >= 0.0, ErrorKind::NegativeInput, "negative sample in strict mode");
    }
}

}  // namespace

std::vector<double> forward_free_layer(std::span<const double> s, const Pairing& p) {
    require(p.units() == s.size(), ErrorKind::DimensionMismatch,
            "pairing covers " + std::to_string(p.units()) + " units, layer has " +
                std::to_string(s.size()));
    std::vector<double> out(s.size());
    free_layer_into(s, p, out);
    return out;
}

std::vector<double> forward_structured_layer(std::span<const double> s, std::size_t j,
                                             const Pairing& p) {
    const std::size_t cols = std::size_t{1} << j;
    require(s.size() % cols == 0 && p.units() == s.size() / cols, ErrorKind::DimensionMismatch,
            "row pairing does not match a layer of " + std::to_string(s.size() / cols) + " rows");
    std::vector<double> out(s.size());
    structured_layer_into(s, cols, p, out);
    return out;
}

void apply_layer(const HaarNetwork& network, std::size_t j, std::span<const double> in,
                 std::span<double> out) {
    if (network.mode() == Mode::free)
        free_layer_into(in, network.layer(j), out);
    else
        structured_layer_into(in, std::size_t{1} << j, network.layer(j), out);
}

Pairing expand_row_pairing(const Pairing& rows, std::size_t cols) {
    std::vector<IndexPair> pairs;
    pairs.reserve(rows.pairs().size() * cols);
    for (const auto& pr : rows.pairs())
        for (std::size_t q = 0; q < cols; ++q) pairs.push_back({pr.first * cols + q, pr.second * cols + q});
    return Pairing(std::move(pairs));
}

std::vector<std::vector<double>> forward(const HaarNetwork& network, std::span<const double> x,
                                         InputPolicy policy) {
    check_input(network, x, policy);
    std::vector<std::vector<double>> layers;
    layers.reserve(network.depth() + 1);
    layers.emplace_back(x.begin(), x.end());
    for (std::size_t j = 0; j < network.depth(); ++j) {
        std::vector<double> next(network.dim());
        apply_layer(network, j, layers.back(), next);
        layers.push_back(std::move(next));
    }
    return layers;
}

std::vector<double> transform(const HaarNetwork& network, std::span<const double> x,
                              InputPolicy policy) {
    check_input(network, x, policy);
    std::vector<double> cur(x.begin(), x.end());
    std::vector<double> next(network.dim());
    for (std::size_t j = 0; j < network.depth(); ++j) {
        apply_layer(network, j, cur, next);
        cur.swap(next);
    }
    return cur;
}

int order_of(int j, std::uint64_t q) {
    require(j >= 0 && j < 64 && q < (std::uint64_t{1} << j), ErrorKind::IndexOutOfRange,
            "q=" + std::to_string(q) + " outside [0, 2^" + std::to_string(j) + ")");
    return std::popcount(q);
}

std::uint64_t count_of_order(int j, int m, std::uint64_t d) {
    require(j >= 0 && m >= 0 && m <= j, ErrorKind::IndexOutOfRange, "order outside [0, j]");
    require(is_power_of_two(d) && (std::uint64_t{1} << j) <= d, ErrorKind::IndexOutOfRange,
            "2^j must not exceed a power-of-2 dimension");
    std::uint64_t binom = 1;
    for (int i = 1; i <= m; ++i) binom = binom * static_cast<std::uint64_t>(j - m + i) / i;
    return binom * (d >> j);
}

SignPattern sign_decomposition(const HaarNetwork& network, std::span<const double> x) {
    const auto layers = forward(network, x, InputPolicy::permissive);
    const std::size_t d = network.dim();
    SignPattern signs(network.depth(), std::vector<std::int8_t>(d, 1));
    for (std::size_t j = 0; j < network.depth(); ++j) {
        const Pairing flat = network.mode() == Mode::free
                                 ? network.layer(j)
                                 : expand_row_pairing(network.layer(j), std::size_t{1} << j);
        const auto pairs = flat.pairs();
        for (std::size_t k = 0; k < pairs.size(); ++k) {
            if (layers[j][pairs[k].first] < layers[j][pairs[k].second]) signs[j][2 * k + 1] = -1;
        }
    }
    return signs;
}

std::vector<std::vector<double>> linear_replay(const HaarNetwork& network,
                                               std::span<const double> x,
                                               const SignPattern& signs) {
    require(x.size() == network.dim(), ErrorKind::DimensionMismatch, "signal length mismatch");
    require(signs.size() == network.depth(), ErrorKind::DimensionMismatch, "sign pattern depth mismatch");
    std::vector<std::vector<double>> layers;
    layers.emplace_back(x.begin(), x.end());
    for (std::size_t j = 0; j < network.depth(); ++j) {
        const Pairing flat = network.mode() == Mode::free
                                 ? network.layer(j)
                                 : expand_row_pairing(network.layer(j), std::size_t{1} << j);
        const auto& s = layers.back();
        std::vector<double> next(network.dim());
        const auto pairs = flat.pairs();
        for (std::size_t k = 0; k < pairs.size(); ++k) {
            next[2 * k] = s[pairs[k].first] + s[pairs[k].second];
            next[2 * k + 1] = signs[j][2 * k + 1] * (s[pairs[k].first] - s[pairs[k].second]);
        }
        layers.push_back(std::move(next));
    }
    return layers;
}

std::vector<double> cascade_matrix(const HaarNetwork& network, const SignPattern& signs) {
    const std::size_t d = network.dim();
    std::vector<double> m(d * d);
    std::vector<double> basis(d, 0.0);
    for (std::size_t c = 0; c < d; ++c) {
        basis[c] = 1.0;
        const auto out = linear_replay(network, basis, signs).back();
        for (std::size_t r = 0; r < d; ++r) m[r * d + c] = out[r];
        basis[c] = 0.0;
    }
    return m;
}

}  // namespace haarscat
