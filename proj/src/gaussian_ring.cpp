#include "haarscat/gaussian_ring.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <mutex>
#include <random>
#include <string>

#include "haarscat/error.hpp"
#include "haarscat/learn.hpp"
#include "haarscat/random.hpp"

namespace haarscat {

namespace {

// Planning is not thread safe in FFTW; execution on new arrays is.
std::mutex planner_mutex;

class RealFft {
public:
    explicit RealFft(std::size_t n) : n_(n) {
        std::lock_guard lock(planner_mutex);
        std::vector<double> real(n);
        std::vector<std::complex<double>> freq(n / 2 + 1);
        const int size = static_cast<int>(n);
        forward_ = fftw_plan_dft_r2c_1d(size, real.data(), reinterpret_cast<fftw_complex*>(freq.data()), FFTW_ESTIMATE | FFTW_UNALIGNED);
        backward_ = fftw_plan_dft_c2r_1d(size, reinterpret_cast<fftw_complex*>(freq.data()), real.data(), FFTW_ESTIMATE | FFTW_UNALIGNED);
    }
    ~RealFft() {
        std::lock_guard lock(planner_mutex);
        fftw_destroy_plan(forward_);
        fftw_destroy_plan(backward_);
    }
    RealFft(const RealFft&) = delete;
    RealFft& operator=(const RealFft&) = delete;

    void forward(double* in, std::complex<double>* out) const {
        fftw_execute_dft_r2c(forward_, in, reinterpret_cast<fftw_complex*>(out));
    }
    /// Unnormalized; destroys `in`.
    void backward(std::complex<double>* in, double* out) const {
        fftw_execute_dft_c2r(backward_, reinterpret_cast<fftw_complex*>(in), out);
    }
    std::size_t size() const { return n_; }

private:
    std::size_t n_;
    fftw_plan forward_;
    fftw_plan backward_;
};

std::vector<double> rho_from_spectrum(const std::vector<double>& rho_hat) {
    const std::size_t d = rho_hat.size();
    RealFft fft(d);
    std::vector<std::complex<double>> freq(d / 2 + 1);
    for (std::size_t k = 0; k < freq.size(); ++k) {
        freq[k] = rho_hat[k];
    }
    std::vector<double> rho(d);
    fft.backward(freq.data(), rho.data());
    for (double& r : rho) r /= static_cast<double>(d);
    return rho;
}

}  // namespace

void validate(const RingModel& model) {
    const std::size_t d = model.dim;
    require(d >= 2 && model.rho.size() == d, ErrorKind::InvalidModel,
            "rho must have d = " + std::to_string(d) + " entries");
    require(model.rho[0] > 0.0, ErrorKind::InvalidModel, "rho(0) must be positive");
    for (std::size_t u = 1; u < d; ++u)
        require(std::abs(model.rho[u] - model.rho[d - u]) <= 1e-12 * model.rho[0], ErrorKind::InvalidModel,
                "rho must satisfy rho(u) = rho(d - u)");
}

std::vector<double> spectrum(const RingModel& model) {
    validate(model);
    const std::size_t d = model.dim;
    RealFft fft(d);
    std::vector<double> in = model.rho;
    std::vector<std::complex<double>> freq(d / 2 + 1);
    fft.forward(in.data(), freq.data());
    std::vector<double> out(d);
    for (std::size_t k = 0; k < d; ++k) out[k] = freq[k <= d / 2 ? k : d - k].real();
    return out;
}

double operator_norm(const RingModel& model) {
    const auto s = spectrum(model);
    return *std::max_element(s.begin(), s.end());
}

RingModel default_ring_model(std::size_t d, double neighbour_ratio, double far_ratio) {
    require(d >= 4, ErrorKind::TooSmall, "ring models need d >= 4");
    RingModel model{d, std::vector<double>(d, far_ratio)};
    model.rho[0] = 1.0;
    model.rho[1] = model.rho[d - 1] = neighbour_ratio;
    auto rho_hat = spectrum(model);
    if (std::any_of(rho_hat.begin(), rho_hat.end(), [](double v) { return v < 0.0; })) {
        for (double& v : rho_hat) v = std::max(v, 0.0);
        model.rho = rho_from_spectrum(rho_hat);
        const double r0 = model.rho[0];
        for (double& r : model.rho) r /= r0;
        // Restore exact symmetry lost to rounding.
        for (std::size_t u = 1; u < d; ++u) model.rho[d - u] = model.rho[u];
    }
    return model;
}

SignalBatch sample(const RingModel& model, std::size_t count, std::uint64_t seed) {
    auto rho_hat = spectrum(model);
    const double tol = 1e-10 * std::abs(rho_hat[0]) + 1e-12;
    for (std::size_t k = 0; k < rho_hat.size(); ++k)
        require(rho_hat[k] >= -tol, ErrorKind::InvalidModel,
                "covariance is not positive semidefinite at frequency " + std::to_string(k));
    const std::size_t d = model.dim;
    std::vector<double> gain(d / 2 + 1);
    for (std::size_t k = 0; k < gain.size(); ++k) gain[k] = std::sqrt(std::max(rho_hat[k], 0.0)) / static_cast<double>(d);

    SignalBatch batch(count, d);
    const RealFft fft(d);
    const auto n = static_cast<std::ptrdiff_t>(count);
#pragma omp parallel
    {
        std::vector<double> z(d);
        std::vector<std::complex<double>> freq(d / 2 + 1);
#pragma omp for schedule(static)
        for (std::ptrdiff_t si = 0; si < n; ++si) {
            const auto i = static_cast<std::size_t>(si);
            auto rng = make_rng(seed, {0x9a, i});
            std::normal_distribution<double> normal;
            for (double& v : z) v = normal(rng);
            fft.forward(z.data(), freq.data());
            for (std::size_t k = 0; k < freq.size(); ++k) {
                freq[k] *= gain[k];
            }
            auto out = batch.row(i);
            fft.backward(freq.data(), out.data());
        }
    }
    return batch;
}

double correlation_gap(const RingModel& model) {
    validate(model);
    require(model.dim >= 4, ErrorKind::TooSmall, "the gap needs d >= 4");
    const double r0 = model.rho[0];
    const double near = model.rho[1] / r0;
    require(near <= 1.0, ErrorKind::InvalidModel, "rho(1) exceeds rho(0)");
    double far = -1.0;
    for (std::size_t n = 2; n <= model.dim / 2; ++n) far = std::max(far, model.rho[n] / r0);
    if (far >= near) return 0.0;
    const double root_gap = std::sqrt(1.0 - far) - std::sqrt(1.0 - near);
    return root_gap * root_gap;
}

double sample_size_bound(const RingModel& model, double epsilon) {
    require(epsilon > 0.0 && epsilon < 1.0, ErrorKind::InvalidArgument, "epsilon must lie in (0, 1)");
    const double gap = correlation_gap(model);
    require(gap > 0.0, ErrorKind::ZeroGap, "correlation gap is zero; no sample size suffices");
    const double d = static_cast<double>(model.dim);
    const double pi = std::numbers::pi;
    return pi * pi * pi * operator_norm(model) / (2.0 * gap) * d * (3.0 * std::log(d) - std::log(epsilon));
}

bool pairs_ring_neighbours(const Pairing& p) {
    const std::size_t d = p.units();
    return std::all_of(p.pairs().begin(), p.pairs().end(), [d](const IndexPair& pr) {
        const std::size_t gap = pr.second - pr.first;
        return gap == 1 || gap == d - 1;
    });
}

RecoveryTrial tv_recovery_trial(const RingModel& model, std::size_t count, std::uint64_t seed) {
    require(count >= 1, ErrorKind::TooFewSamples, "a recovery trial needs at least one sample");
    const auto batch = sample(model, count, seed);
    RecoveryTrial trial;
    trial.pairing = match_exact(cost_l1(batch, Mode::free, 0));
    trial.connected = pairs_ring_neighbours(trial.pairing);
    return trial;
}

RecoveryGrid recovery_grid(const std::function<RingModel(std::size_t)>& family, const std::vector<std::size_t>& dims,
                           const std::vector<std::size_t>& sample_sizes, std::size_t trials, std::uint64_t seed) {
    require(trials >= 1, ErrorKind::InvalidArgument, "need at least one trial");
    RecoveryGrid grid{dims, sample_sizes, trials, {}};
    std::vector<RingModel> models;
    for (std::size_t d : dims) models.push_back(family(d));

    const std::size_t cells = dims.size() * sample_sizes.size();
    std::vector<char> outcome(cells * trials, 0);
    const auto total = static_cast<std::ptrdiff_t>(outcome.size());
#pragma omp parallel for schedule(dynamic, 4)
    for (std::ptrdiff_t s = 0; s < total; ++s) {
        const auto k = static_cast<std::size_t>(s);
        const std::size_t t = k % trials;
        const std::size_t b = (k / trials) % sample_sizes.size();
        const std::size_t a = k / trials / sample_sizes.size();
        const auto trial_seed = derive_seed(seed, {dims[a], sample_sizes[b], t});
        outcome[k] = tv_recovery_trial(models[a], sample_sizes[b], trial_seed).connected ? 1 : 0;
    }
    grid.successes.assign(dims.size(), std::vector<std::size_t>(sample_sizes.size(), 0));
    for (std::size_t k = 0; k < outcome.size(); ++k)
        grid.successes[k / trials / sample_sizes.size()][(k / trials) % sample_sizes.size()] += outcome[k];
    return grid;
}

}  // namespace haarscat
