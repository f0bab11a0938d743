#pragma once

// Forward orthogonal Haar scattering: pairings, networks, layer cascades and
// the per-input sign decomposition of the cascade.

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <utility>
#include <vector>

namespace haarscat {

struct IndexPair {
    std::size_t first = 0;
    std::size_t second = 0;

    friend bool operator==(const IndexPair&, const IndexPair&) = default;
    friend auto operator<=>(const IndexPair&, const IndexPair&) = default;
};

/// Perfect matching of {0..units-1}. Always held in canonical form: the
/// smaller index first inside each pair, pairs sorted by their first index.
/// The position of a pair in pairs() is the output slot it writes to.
class Pairing {
public:
    Pairing() = default;
    explicit Pairing(std::vector<IndexPair> pairs);

    std::size_t units() const noexcept { return 2 * pairs_.size(); }
    std::span<const IndexPair> pairs() const noexcept { return pairs_; }
    const IndexPair& operator[](std::size_t n) const { return pairs_[n]; }

    /// partner()[i] is the index matched with i.
    std::vector<std::size_t> partners() const;

    friend bool operator==(const Pairing&, const Pairing&) = default;
    friend auto operator<=>(const Pairing&, const Pairing&) = default;

private:
    std::vector<IndexPair> pairs_;
};

/// {(0,1), (2,3), ...}
Pairing adjacent_pairing(std::size_t units);
Pairing random_pairing(std::size_t units, std::mt19937_64& rng);
/// Builds a pairing from a partner table (partner[partner[i]] == i).
Pairing pairing_from_partners(std::span<const std::size_t> partner);

enum class Mode { free, structured };

/// A depth-J cascade. Free layers pair d coefficients; structured layer j
/// pairs the d / 2^j rows of the (d / 2^j) x 2^j layer array.
class HaarNetwork {
public:
    HaarNetwork(Mode mode, std::size_t dim, std::vector<Pairing> layers);

    Mode mode() const noexcept { return mode_; }
    std::size_t dim() const noexcept { return dim_; }
    std::size_t depth() const noexcept { return layers_.size(); }
    const std::vector<Pairing>& layers() const noexcept { return layers_; }
    const Pairing& layer(std::size_t j) const { return layers_.at(j); }

    friend bool operator==(const HaarNetwork&, const HaarNetwork&) = default;

private:
    Mode mode_;
    std::size_t dim_;
    std::vector<Pairing> layers_;
};

/// Number of units the layer-j pairing of a network must match.
std::size_t layer_units(Mode mode, std::size_t dim, std::size_t j);

HaarNetwork random_network(Mode mode, std::size_t dim, std::size_t depth, std::mt19937_64& rng);

bool is_power_of_two(std::size_t n) noexcept;
std::size_t log2_exact(std::size_t n);

enum class InputPolicy {
    strict,      // rejects negative inputs
    permissive,  // any real input
};

/// (a + b, |a - b|)
inline std::pair<double, double> haar_pair(double a, double b) noexcept {
    return {a + b, a > b ? a - b : b - a};
}

/// Recovers {max, min} from (sum, |difference|).
inline std::pair<double, double> unpair(double sum, double absdiff) noexcept {
    return {0.5 * (sum + absdiff), 0.5 * (sum - absdiff)};
}

std::vector<double> forward_free_layer(std::span<const double> s, const Pairing& p);

/// `s` is the depth-j layer, shaped (d / 2^j) x 2^j row-major; `p` pairs its rows.
std::vector<double> forward_structured_layer(std::span<const double> s, std::size_t j,
                                             const Pairing& p);

/// Writes layer j+1 of `network` computed from layer j into `out`.
void apply_layer(const HaarNetwork& network, std::size_t j, std::span<const double> in,
                 std::span<double> out);

/// The flat-index pairing equivalent to pairing rows with `cols` columns each.
Pairing expand_row_pairing(const Pairing& rows, std::size_t cols);

/// All layers S_0 x .. S_J x.
std::vector<std::vector<double>> forward(const HaarNetwork& network, std::span<const double> x,
                                         InputPolicy policy = InputPolicy::strict);

/// Only S_J x; keeps two buffers regardless of depth.
std::vector<double> transform(const HaarNetwork& network, std::span<const double> x,
                              InputPolicy policy = InputPolicy::strict);

/// Number of absolute values behind coefficient (j, q): popcount(q).
int order_of(int j, std::uint64_t q);

/// binom(j, m) * d / 2^j
std::uint64_t count_of_order(int j, int m, std::uint64_t d);

/// signs[j][k] is the sign applied at output slot k of layer j+1 so that
/// S_{j+1} x = E_j H_j S_j x without absolute values. Sum slots and zero
/// differences carry +1.
using SignPattern = std::vector<std::vector<std::int8_t>>;

SignPattern sign_decomposition(const HaarNetwork& network, std::span<const double> x);

/// Linear cascade with frozen signs. Reproduces forward() for the input the
/// signs were recorded from.
std::vector<std::vector<double>> linear_replay(const HaarNetwork& network,
                                               std::span<const double> x,
                                               const SignPattern& signs);

/// d x d row-major matrix M with S_J x = M x for the recorded signs.
std::vector<double> cascade_matrix(const HaarNetwork& network, const SignPattern& signs);

}  // namespace haarscat
