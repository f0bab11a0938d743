#include <doctest.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <set>

#include "haarscat/graph_haar.hpp"
#include "support.hpp"

using namespace haarscat;
using testing::error_kind;

namespace {

HaarNetwork small_network() {
    return HaarNetwork(Mode::structured, 4, {Pairing({{0, 1}, {2, 3}}), Pairing({{0, 1}})});
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

// Union-find connectivity of a vertex set using only edges inside it.
bool connected_by_union_find(const ReferenceGraph& g, const std::vector<std::size_t>& set) {
    std::vector<std::size_t> parent(set.size());
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](std::size_t a) {
        while (parent[a] != a) a = parent[a] = parent[parent[a]];
        return a;
    };
    for (std::size_t a = 0; a < set.size(); ++a)
        for (std::size_t b = a + 1; b < set.size(); ++b)
            if (g.adjacent(set[a], set[b])) parent[find(a)] = find(b);
    std::set<std::size_t> roots;
    for (std::size_t a = 0; a < set.size(); ++a) roots.insert(find(a));
    return roots.size() <= 1;
}

// Natural-ordered Walsh-Hadamard matrix of size n (Sylvester construction).
std::vector<int> sylvester(std::size_t n) {
    std::vector<int> h{1};
    for (std::size_t s = 1; s < n; s *= 2) {
        std::vector<int> next(4 * s * s);
        for (std::size_t r = 0; r < s; ++r)
            for (std::size_t c = 0; c < s; ++c) {
                const int v = h[r * s + c];
                next[r * 2 * s + c] = v;
                next[r * 2 * s + s + c] = v;
                next[(r + s) * 2 * s + c] = v;
                next[(r + s) * 2 * s + s + c] = -v;
            }
        h = std::move(next);
    }
    return h;
}

}  // namespace

TEST_CASE("partition examples") {
    const auto p = build_partition(small_network());
    CHECK(p.depth() == 2);
    CHECK(p.level(1) == std::vector<std::vector<std::size_t>>{{0, 1}, {2, 3}});
    CHECK(p.level(2) == std::vector<std::vector<std::size_t>>{{0, 1, 2, 3}});
    const auto flat = build_partition(HaarNetwork(Mode::structured, 4, {}));
    CHECK(flat.depth() == 0);
    CHECK(flat.level(0) == std::vector<std::vector<std::size_t>>{{0}, {1}, {2}, {3}});
    CHECK(error_kind([] { build_partition(HaarNetwork(Mode::free, 4, {adjacent_pairing(4)})); }) ==
          ErrorKind::WrongMode);
}

TEST_CASE("partitions of random networks are valid at every level") {
    std::mt19937_64 rng(2);
    for (int trial = 0; trial < 20; ++trial) {
        const auto net = random_network(Mode::structured, 32, 5, rng);
        const auto p = build_partition(net);
        for (std::size_t j = 0; j <= 5; ++j) {
            std::vector<int> seen(32, 0);
            for (const auto& set : p.level(j)) {
                CHECK(set.size() == (std::size_t{1} << j));
                for (std::size_t v : set) ++seen[v];
            }
            CHECK(std::all_of(seen.begin(), seen.end(), [](int c) { return c == 1; }));
        }
    }
}

TEST_CASE("wavelet basis examples") {
    const HaarNetwork two(Mode::structured, 2, {Pairing({{0, 1}})});
    const auto b2 = wavelet_basis(build_partition(two), two);
    CHECK(b2.vectors() == std::vector<std::vector<double>>{{1, 1}, {1, -1}});

    const auto net = small_network();
    const auto b = wavelet_basis(build_partition(net), net);
    CHECK(b.scaling == std::vector<std::vector<double>>{{1, 1, 1, 1}});
    CHECK(b.wavelets[0] == std::vector<std::vector<double>>{{1, -1, 0, 0}, {0, 0, 1, -1}});
    CHECK(b.wavelets[1] == std::vector<std::vector<double>>{{1, 1, -1, -1}});

    const HaarNetwork other(Mode::structured, 4, {Pairing({{0, 2}, {1, 3}}), Pairing({{0, 1}})});
    CHECK(error_kind([&] { wavelet_basis(build_partition(other), net); }) == ErrorKind::InconsistentPartition);
}

TEST_CASE("wavelet bases are orthogonal and complete") {
    std::mt19937_64 rng(3);
    for (std::size_t d : {8, 16, 64}) {
        const auto depth = static_cast<std::size_t>(std::countr_zero(d));
        for (std::size_t j = 0; j <= std::min<std::size_t>(depth, 5); ++j) {
            const auto net = random_network(Mode::structured, d, j, rng);
            const auto vectors = wavelet_basis(build_partition(net), net).vectors();
            REQUIRE(vectors.size() == d);
            for (std::size_t a = 0; a < d; ++a)
                for (std::size_t b = a + 1; b < d; ++b) CHECK(dot(vectors[a], vectors[b]) == 0.0);
            const auto x = testing::uniform_signal(d, rng, -1, 1);
            std::vector<double> rebuilt(d, 0.0);
            for (const auto& v : vectors) {
                const double c = dot(x, v) / dot(v, v);
                for (std::size_t k = 0; k < d; ++k) rebuilt[k] += c * v[k];
            }
            CHECK(testing::max_abs_diff(rebuilt, x) <= 1e-10);
        }
    }
}

TEST_CASE("wavelet identity holds for all admissible indices") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 10; ++trial) {
        const std::size_t d = trial % 2 ? 32 : 64;
        const std::size_t depth = trial % 2 ? 4 : 5;
        const auto net = random_network(Mode::structured, d, depth, rng);
        const auto x = testing::uniform_signal(d, rng);
        for (std::size_t j = 1; j <= depth; ++j)
            for (std::uint64_t q = 0; q < (std::uint64_t{1} << j); ++q) {
                const std::size_t finest = q == 0 ? 0 : j - static_cast<std::size_t>(std::countr_zero(q));
                for (std::size_t next = finest + 1; next <= j; ++next)
                    CHECK(verify_wavelet_identity(net, x, j, q, next) <= 1e-10);
            }
    }
}

TEST_CASE("wavelet identity special cases and errors") {
    const auto net = small_network();
    // Order one: S_1 x(n, 1) is the absolute wavelet coefficient.
    const std::vector<double> x{4, 1, 2, 6};
    CHECK(verify_wavelet_identity(net, x, 1, 0, 1) == 0.0);
    const auto layers = forward(net, x);
    CHECK(layers[1][1] == 3);
    CHECK(layers[1][3] == 4);
    CHECK(layers[2][1] == std::abs((4 + 1) - (2 + 6.0)));

    std::mt19937_64 rng(7);
    const auto deep = random_network(Mode::structured, 16, 4, rng);
    const auto layers_c = forward(deep, std::vector<double>(16, 3.0));
    for (std::size_t j = 1; j <= 4; ++j)
        for (std::size_t k = 0; k < 16; ++k)
            if (k % (std::size_t{1} << j) != 0) CHECK(layers_c[j][k] == 0.0);
    CHECK(verify_wavelet_identity(deep, std::vector<double>(16, 3.0), 3, 2, 3) == 0.0);

    CHECK(error_kind([&] { verify_wavelet_identity(net, x, 2, 2, 1); }) == ErrorKind::InadmissibleIndex);
    CHECK(error_kind([&] { verify_wavelet_identity(net, x, 2, 0, 3); }) == ErrorKind::InadmissibleIndex);
    CHECK(error_kind([&] { verify_wavelet_identity(net, x, 2, 4, 2); }) == ErrorKind::InadmissibleIndex);
    CHECK(error_kind([&] { verify_wavelet_identity(net, x, 3, 0, 1); }) == ErrorKind::InadmissibleIndex);
}

TEST_CASE("Hadamard blocks") {
    const HaarNetwork one(Mode::structured, 2, {Pairing({{0, 1}})});
    CHECK(hadamard_of_output(one, std::vector<double>{3, 1}, 0).entries == std::vector<int>{1, 1, 1, -1});
    CHECK(hadamard_of_output(one, std::vector<double>{1, 3}, 0).entries == std::vector<int>{1, 1, -1, 1});
    CHECK(error_kind([&] { hadamard_of_output(one, std::vector<double>{1, 3}, 1); }) == ErrorKind::IndexOutOfRange);

    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 30; ++trial) {
        const auto net = random_network(Mode::structured, 32, 3, rng);
        const auto x = testing::uniform_signal(32, rng);
        const auto out = forward(net, x).back();
        for (std::size_t n = 0; n < 4; ++n) {
            const auto block = hadamard_of_output(net, x, n);
            const std::size_t s = block.size;
            REQUIRE(s == 8);
            for (std::size_t r = 0; r < s; ++r) {
                double replay = 0.0;
                for (std::size_t c = 0; c < s; ++c) {
                    CHECK(std::abs(block.entries[r * s + c]) == 1);
                    replay += block.entries[r * s + c] * x[block.vertices[c]];
                }
                CHECK(replay == doctest::Approx(out[n * s + r]).epsilon(1e-12));
                for (std::size_t r2 = 0; r2 < s; ++r2) {
                    int g = 0;
                    for (std::size_t c = 0; c < s; ++c) g += block.entries[r * s + c] * block.entries[r2 * s + c];
                    CHECK(g == (r == r2 ? static_cast<int>(s) : 0));
                }
            }
        }
    }
}

TEST_CASE("without absolute values a row is a Walsh transform") {
    // Strictly decreasing values along partition order keep every difference positive,
    // so the absolute value acts as the identity.
    std::mt19937_64 rng(13);
    for (std::size_t depth : {1, 2, 3, 4}) {
        const std::size_t size = std::size_t{1} << depth;
        const HaarNetwork net(Mode::structured, size, [&] {
            std::vector<Pairing> layers;
            for (std::size_t j = 0; j < depth; ++j) layers.push_back(adjacent_pairing(size >> j));
            return layers;
        }());
        std::vector<double> x(size);
        for (std::size_t k = 0; k < size; ++k) x[k] = std::ldexp(1.0, static_cast<int>(2 * (size - k)));
        const auto block = hadamard_of_output(net, x, 0);
        // Rows of the block are Walsh rows in some order; compare as sets.
        const auto walsh = sylvester(size);
        std::multiset<std::vector<int>> a, b;
        for (std::size_t r = 0; r < size; ++r) {
            a.insert(std::vector<int>(block.entries.begin() + static_cast<std::ptrdiff_t>(r * size),
                                      block.entries.begin() + static_cast<std::ptrdiff_t>((r + 1) * size)));
            b.insert(std::vector<int>(walsh.begin() + static_cast<std::ptrdiff_t>(r * size),
                                      walsh.begin() + static_cast<std::ptrdiff_t>((r + 1) * size)));
        }
        CHECK(a == b);
    }
}

TEST_CASE("graphs and connectivity") {
    CHECK(error_kind([] { ring_graph(2); }) == ErrorKind::TooSmall);
    const auto ring = ring_graph(8);
    CHECK(ring.adjacent(0, 7));
    CHECK_FALSE(ring.adjacent(0, 2));
    const auto grid = grid_graph(3, 3);
    CHECK(grid.neighbors(4).size() == 8);
    CHECK(grid.neighbors(0).size() == 3);

    const HaarNetwork neighbours(Mode::structured, 8,
                                 {adjacent_pairing(8), adjacent_pairing(4), adjacent_pairing(2)});
    const auto p = build_partition(neighbours);
    for (std::size_t j = 0; j <= 3; ++j) CHECK(connectivity_fraction(p, ring, j) == 1.0);

    const HaarNetwork far(Mode::structured, 8, {Pairing({{0, 4}, {1, 5}, {2, 6}, {3, 7}})});
    CHECK(connectivity_fraction(build_partition(far), ring, 1) == 0.0);
    CHECK(connectivity_fraction(build_partition(far), ring, 1, std::nullopt, Connectivity::mergewise) == 0.0);

    std::vector<bool> mask(8, false);
    mask[0] = true;
    CHECK(connectivity_fraction(build_partition(far), ring, 1, mask) == 1.0);
    CHECK(connectivity_fraction(build_partition(far), ring, 1, std::vector<bool>(8, false)) == 1.0);
    CHECK(error_kind([&] { connectivity_fraction(p, ring, 4); }) == ErrorKind::IndexOutOfRange);
}

TEST_CASE("connectivity matches an independent oracle on grids") {
    std::mt19937_64 rng(17);
    const auto g = grid_graph(8, 8);
    for (int trial = 0; trial < 20; ++trial) {
        const auto net = random_network(Mode::structured, 64, 4, rng);
        const auto p = build_partition(net);
        for (std::size_t j = 0; j <= 4; ++j) {
            std::size_t good = 0;
            for (const auto& set : p.level(j)) good += connected_by_union_find(g, set);
            CHECK(connectivity_fraction(p, g, j) ==
                  doctest::Approx(static_cast<double>(good) / static_cast<double>(p.level(j).size())));
        }
    }
}
