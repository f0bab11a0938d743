#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "haarscat/error.hpp"

namespace testing {

template <class F>
std::optional<haarscat::ErrorKind> error_kind(F&& f) {
    try {
        f();
    } catch (const haarscat::Error& e) {
        return e.kind();
    }
    return std::nullopt;
}

inline std::vector<double> uniform_signal(std::size_t d, std::mt19937_64& rng, double lo = 0.0, double hi = 1.0) {
    std::uniform_real_distribution<double> u(lo, hi);
    std::vector<double> x(d);
    for (double& v : x) v = u(rng);
    return x;
}

inline double norm2(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

inline double max_abs_diff(std::span<const double> a, std::span<const double> b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

}  // namespace testing
