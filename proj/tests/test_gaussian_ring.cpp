#include <doctest.h>

#include <cmath>
#include <numbers>

#include "haarscat/gaussian_ring.hpp"
#include "haarscat/random.hpp"
#include "support.hpp"

using namespace haarscat;
using testing::error_kind;

namespace {

RingModel white(std::size_t d) {
    RingModel m{d, std::vector<double>(d, 0.0)};
    m.rho[0] = 1.0;
    return m;
}

RingModel scaled(RingModel m, double c) {
    for (double& r : m.rho) r *= c;
    return m;
}

double lag_covariance(const SignalBatch& b, std::size_t a, std::size_t c) {
    double s = 0.0;
    for (std::size_t i = 0; i < b.count(); ++i) s += b.row(i)[a] * b.row(i)[c];
    return s / static_cast<double>(b.count());
}

}  // namespace

TEST_CASE("default model and validation") {
    const auto m = default_ring_model(16);
    REQUIRE(m.rho.size() == 16);
    CHECK(m.rho[0] == 1.0);
    CHECK(m.rho[1] == 0.44);
    CHECK(m.rho[15] == 0.44);
    CHECK(m.rho[8] == 0.06);
    // Direct DFT of the default family.
    for (std::size_t k = 0; k < 16; ++k) {
        double v = 0.0;
        for (std::size_t n = 0; n < 16; ++n) v += m.rho[n] * std::cos(2 * std::numbers::pi * double(k * n) / 16);
        CHECK(spectrum(m)[k] == doctest::Approx(v).epsilon(1e-12));
        CHECK(v >= 0.0);
    }
    CHECK(error_kind([] { validate(RingModel{4, {1, 0.5, 0.1}}); }) == ErrorKind::InvalidModel);
    CHECK(error_kind([] { validate(RingModel{4, {1, 0.5, 0.1, 0.4}}); }) == ErrorKind::InvalidModel);
    CHECK(error_kind([] { validate(RingModel{4, {0, 0, 0, 0}}); }) == ErrorKind::InvalidModel);
    CHECK(error_kind([] { sample(RingModel{4, {1, 0.9, 0.0, 0.9}}, 1, 0); }) == ErrorKind::InvalidModel);

    // A family that is not PSD is projected and stays a valid covariance.
    const auto projected = default_ring_model(8, 0.9, 0.0);
    CHECK(projected.rho[0] == doctest::Approx(1.0));
    for (double v : spectrum(projected)) CHECK(v >= -1e-12);
}

TEST_CASE("white noise sampling") {
    const std::size_t n = 20000;
    const auto b = sample(white(16), n, 3);
    CHECK(std::abs(lag_covariance(b, 0, 1)) <= 3.0 / std::sqrt(double(n)));
    CHECK(std::abs(lag_covariance(b, 5, 6)) <= 3.0 / std::sqrt(double(n)));
    CHECK(lag_covariance(b, 0, 0) == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("sampler reproduces the covariance") {
    const auto m = default_ring_model(8);
    const auto b = sample(m, 100000, 5);
    for (std::size_t a = 0; a < 8; ++a)
        for (std::size_t c = 0; c < 8; ++c) CHECK(std::abs(lag_covariance(b, a, c) - m.rho[(a + 8 - c) % 8]) <= 5e-2);
    const auto v = sample(scaled(default_ring_model(16), 2.5), 10000, 6);
    CHECK(lag_covariance(v, 0, 0) == doctest::Approx(2.5).epsilon(0.05));
}

TEST_CASE("sampling is deterministic per seed") {
    const auto m = default_ring_model(32);
    CHECK(sample(m, 50, 9) == sample(m, 50, 9));
    CHECK_FALSE(sample(m, 50, 9) == sample(m, 50, 10));
    // Prefixes agree: sample i depends only on (seed, i).
    const auto big = sample(m, 60, 9);
    const auto small = sample(m, 50, 9);
    CHECK(std::vector<double>(big.values().begin(), big.values().begin() + 50 * 32) == small.values());
}

TEST_CASE("correlation gap") {
    const auto m = default_ring_model(16);
    const double expect = std::pow(std::sqrt(1 - 0.06) - std::sqrt(1 - 0.44), 2);
    CHECK(correlation_gap(m) == doctest::Approx(expect).epsilon(1e-12));
    CHECK(correlation_gap(m) == doctest::Approx(0.04894).epsilon(1e-3));
    CHECK(correlation_gap(RingModel{8, {1, 0.2, 0.2, 0.2, 0.2, 0.2, 0.2, 0.2}}) == 0.0);
    CHECK(correlation_gap(white(8)) == 0.0);
    CHECK(error_kind([] { correlation_gap(RingModel{4, {1, 1.5, 0, 1.5}}); }) == ErrorKind::InvalidModel);
}

TEST_CASE("sample size bound") {
    const auto m = default_ring_model(16);
    double op = 0.0;
    for (std::size_t k = 0; k < 16; ++k) {
        double v = 0.0;
        for (std::size_t n = 0; n < 16; ++n) v += m.rho[n] * std::cos(2 * std::numbers::pi * double(k * n) / 16);
        op = std::max(op, v);
    }
    // rho_hat(0) = 1 + 2 * 0.44 + 13 * 0.06
    CHECK(op == doctest::Approx(2.66).epsilon(1e-12));
    CHECK(operator_norm(m) == doctest::Approx(op).epsilon(1e-12));
    const double gap = std::pow(std::sqrt(0.94) - std::sqrt(0.56), 2);
    const double pi3 = std::pow(std::numbers::pi, 3);
    const double expect = pi3 * op / (2 * gap) * 16 * (3 * std::log(16.0) - std::log(0.2));
    CHECK(sample_size_bound(m, 0.2) == doctest::Approx(expect).epsilon(1e-12));
    CHECK(sample_size_bound(m, 0.2) == doctest::Approx(133863).epsilon(1e-3));

    CHECK(sample_size_bound(m, 0.01) > sample_size_bound(m, 0.2));
    // With the spectrum held fixed, doubling d slightly more than doubles the bound.
    auto normalized = [](std::size_t d) {
        const auto model = default_ring_model(d);
        return sample_size_bound(model, 0.2) * correlation_gap(model) / operator_norm(model);
    };
    const double ratio = normalized(32) / normalized(16);
    CHECK(ratio > 2.0);
    CHECK(ratio < 2.6);
    CHECK(error_kind([] { sample_size_bound(white(8), 0.2); }) == ErrorKind::ZeroGap);
    CHECK(error_kind([&] { sample_size_bound(m, 1.5); }) == ErrorKind::InvalidArgument);
}

TEST_CASE("gap and bound scale with rho") {
    const auto m = default_ring_model(32);
    for (double c : {0.25, 3.0}) {
        const auto s = scaled(m, c);
        CHECK(correlation_gap(s) == doctest::Approx(correlation_gap(m)).epsilon(1e-12));
        CHECK(sample_size_bound(s, 0.2) == doctest::Approx(c * sample_size_bound(m, 0.2)).epsilon(1e-12));
    }
}

TEST_CASE("recovery trials") {
    CHECK(pairs_ring_neighbours(Pairing({{0, 1}, {2, 3}, {4, 5}, {6, 7}})));
    CHECK(pairs_ring_neighbours(Pairing({{0, 7}, {1, 2}, {3, 4}, {5, 6}})));
    CHECK_FALSE(pairs_ring_neighbours(Pairing({{0, 2}, {1, 3}, {4, 5}, {6, 7}})));

    const auto m = default_ring_model(16);
    const auto a = tv_recovery_trial(m, 40, 4);
    const auto b = tv_recovery_trial(m, 40, 4);
    CHECK(a.pairing == b.pairing);
    CHECK(a.connected == b.connected);
    CHECK(a.connected == pairs_ring_neighbours(a.pairing));

    RingModel strong{16, std::vector<double>(16, 0.0)};
    strong.rho[0] = 1.0;
    strong.rho[1] = strong.rho[15] = 0.49;
    int hits = 0;
    for (std::uint64_t t = 0; t < 40; ++t) hits += tv_recovery_trial(strong, 400, derive_seed(1, {t})).connected;
    CHECK(hits >= 38);

    // White noise: any of the (d-1)!! pairings is equally likely; 2 of them join ring
    // neighbours, so success is close to 2 / 2027025 at d = 16.
    int lucky = 0;
    for (std::uint64_t t = 0; t < 200; ++t) lucky += tv_recovery_trial(white(16), 2, derive_seed(2, {t})).connected;
    CHECK(lucky == 0);
}

TEST_CASE("recovery grid") {
    CHECK(error_kind([] { recovery_grid([](std::size_t d) { return default_ring_model(d); }, {8}, {4}, 0, 1); }) ==
          ErrorKind::InvalidArgument);
    const std::vector<std::size_t> sizes{4, 16, 64, 256};
    const auto grid = recovery_grid([](std::size_t d) { return default_ring_model(d); }, {8, 16}, sizes, 60, 3);
    REQUIRE(grid.successes.size() == 2);
    REQUIRE(grid.successes[0].size() == 4);
    const double noise = 2.0 / std::sqrt(60.0);
    for (std::size_t a = 0; a < 2; ++a)
        for (std::size_t b = 1; b < sizes.size(); ++b) CHECK(grid.rate(a, b) >= grid.rate(a, b - 1) - noise);
    CHECK(grid.rate(0, 3) >= 0.8);
    const auto again = recovery_grid([](std::size_t d) { return default_ring_model(d); }, {8, 16}, sizes, 60, 3);
    CHECK(again.successes == grid.successes);
    // Each cell is the count of its own seeded trials.
    std::size_t count = 0;
    for (std::uint64_t t = 0; t < 60; ++t)
        count += tv_recovery_trial(default_ring_model(16), 64, derive_seed(3, {16, 64, t})).connected;
    CHECK(grid.successes[1][2] == count);
}
