#pragma once

// Circular stationary Gaussian processes on a ring of d nodes, total
// variation pairing recovery, and the sample-size bound for recovering the
// ring neighbour pairing.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <numbers>
#include <vector>

#include "haarscat/batch.hpp"
#include "haarscat/scatter.hpp"

namespace haarscat {

/// Concentration constant of the Gaussian Lipschitz bound behind the sample-size estimate.
inline constexpr double concentration_constant = 2.0 / (std::numbers::pi * std::numbers::pi);

/// Covariance Sigma(n, m) = rho((n - m) mod d), with rho(u) = rho(d - u).
struct RingModel {
    std::size_t dim = 0;
    std::vector<double> rho;
};

/// rho(0) = 1, rho(+-1) = neighbour_ratio, rho(n) = far_ratio otherwise,
/// projected onto the PSD cone if needed (rho(0) renormalized to 1).
RingModel default_ring_model(std::size_t d, double neighbour_ratio = 0.44, double far_ratio = 0.06);

/// Throws InvalidModel unless rho has d entries, is symmetric and rho(0) > 0.
void validate(const RingModel& model);

/// DFT of rho: rho_hat(k) = sum_n rho(n) cos(2 pi k n / d).
std::vector<double> spectrum(const RingModel& model);

/// max_k rho_hat(k)
double operator_norm(const RingModel& model);

/// N draws x = F^-1(sqrt(rho_hat) . F z), z white. Sample i uses its own
/// stream derived from (seed, i).
SignalBatch sample(const RingModel& model, std::size_t count, std::uint64_t seed);

/// (sqrt(1 - max_{2<=n<=d/2} rho(n)/rho(0)) - sqrt(1 - rho(1)/rho(0)))^2, or 0
/// when no far correlation is below the neighbour correlation.
double correlation_gap(const RingModel& model);

/// pi^3 |Sigma|_op / (2 gap) * d * (3 ln d - ln epsilon)
double sample_size_bound(const RingModel& model, double epsilon);

struct RecoveryTrial {
    Pairing pairing;
    bool connected = false;
};

/// Every pair joins ring neighbours (|a - b| = 1 mod d).
bool pairs_ring_neighbours(const Pairing& p);

RecoveryTrial tv_recovery_trial(const RingModel& model, std::size_t count, std::uint64_t seed);

struct RecoveryGrid {
    std::vector<std::size_t> dims;
    std::vector<std::size_t> sample_sizes;
    std::size_t trials = 0;
    /// successes[a][b] for dims[a], sample_sizes[b]
    std::vector<std::vector<std::size_t>> successes;

    double rate(std::size_t a, std::size_t b) const {
        return static_cast<double>(successes[a][b]) / static_cast<double>(trials);
    }
};

RecoveryGrid recovery_grid(const std::function<RingModel(std::size_t)>& family, const std::vector<std::size_t>& dims,
                           const std::vector<std::size_t>& sample_sizes, std::size_t trials, std::uint64_t seed);

}  // namespace haarscat
