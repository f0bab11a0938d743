#pragma once

// Inversion of free Haar layers from two interlaced pairings, and signal
// reconstruction from the 2^J transforms built from one such pair per layer.

#include <cstddef>
#include <random>
#include <span>
#include <vector>

#include "haarscat/scatter.hpp"

namespace haarscat {

struct InterlacedPairingSet {
    Pairing p0;
    Pairing p1;

    friend bool operator==(const InterlacedPairingSet&, const InterlacedPairingSet&) = default;
};

/// p0 = {(2n, 2n+1)}, p1 = {(2n+1, 2n+2 mod d)}.
InterlacedPairingSet make_interlaced(std::size_t d);

/// make_interlaced(d) relabeled by a random permutation.
InterlacedPairingSet random_interlaced(std::size_t d, std::mt19937_64& rng);

/// True iff the union of both pairings' edges connects {0..d-1}.
bool check_interlaced(const Pairing& p0, const Pairing& p1);

/// Recovers x from forward_free_layer(x, p0) and forward_free_layer(x, p1).
std::vector<double> invert_layer(std::span<const double> s0, std::span<const double> s1,
                                 const InterlacedPairingSet& pairings);

/// outputs[e] is S_J x computed with layer j pairing p1 if bit j of e is set,
/// p0 otherwise.
struct TransformBag {
    std::size_t dim = 0;
    std::vector<std::vector<double>> outputs;
};

TransformBag forward_bag(std::span<const double> x, std::span<const InterlacedPairingSet> layers);

std::vector<double> reconstruct(const TransformBag& bag, std::span<const InterlacedPairingSet> layers);

}  // namespace haarscat
