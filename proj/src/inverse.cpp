#include "haarscat/inverse.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <deque>
#include <optional>
#include <string>

#include "haarscat/error.hpp"

namespace haarscat {

InterlacedPairingSet make_interlaced(std::size_t d) {
    require(d >= 4, ErrorKind::TooSmall, "interlaced pairings need d >= 4, got " + std::to_string(d));
    require(d % 2 == 0, ErrorKind::OddSize, "interlaced pairings need even d");
    std::vector<IndexPair> p0, p1;
    for (std::size_t n = 0; n < d / 2; ++n) {
        p0.push_back({2 * n, 2 * n + 1});
        p1.push_back({2 * n + 1, (2 * n + 2) % d});
    }
    InterlacedPairingSet set{Pairing(std::move(p0)), Pairing(std::move(p1))};
    require(check_interlaced(set.p0, set.p1), ErrorKind::InvalidArgument, "shift construction is not interlaced");
    return set;
}

InterlacedPairingSet random_interlaced(std::size_t d, std::mt19937_64& rng) {
    const auto base = make_interlaced(d);
    std::vector<std::size_t> label(d);
    for (std::size_t i = 0; i < d; ++i) label[i] = i;
    std::shuffle(label.begin(), label.end(), rng);
    auto relabel = [&](const Pairing& p) {
        std::vector<IndexPair> out;
        for (const auto& pr : p.pairs()) out.push_back({label[pr.first], label[pr.second]});
        return Pairing(std::move(out));
    };
    return {relabel(base.p0), relabel(base.p1)};
}

bool check_interlaced(const Pairing& p0, const Pairing& p1) {
    require(p0.units() == p1.units(), ErrorKind::DimensionMismatch, "pairings cover different sizes");
    const std::size_t d = p0.units();
    if (d == 0) return false;
    const auto a = p0.partners();
    const auto b = p1.partners();
    std::vector<char> seen(d, 0);
    std::deque<std::size_t> frontier{0};
    seen[0] = 1;
    std::size_t reached = 1;
    while (!frontier.empty()) {
        const std::size_t v = frontier.front();
        frontier.pop_front();
        for (std::size_t w : {a[v], b[v]}) {
            if (!seen[w]) {
                seen[w] = 1;
                ++reached;
                frontier.push_back(w);
            }
        }
    }
    return reached == d;
}

namespace {

struct ValuePair {
    double high;
    double low;
};

std::vector<ValuePair> unpaired(std::span<const double> s) {
    std::vector<ValuePair> out(s.size() / 2);
    for (std::size_t n = 0; n < out.size(); ++n) {
        const auto [hi, lo] = unpair(s[2 * n], s[2 * n + 1]);
        out[n] = {hi, lo};
    }
    return out;
}

// Propagates x[start] = value through one component. Returns nullopt when
// some pair cannot hold the values forced on it.
std::optional<std::vector<double>> propagate(std::size_t start, double value,
                                             const std::vector<std::size_t>& component,
                                             const std::array<std::vector<std::size_t>, 2>& partner,
                                             const std::array<std::vector<std::size_t>, 2>& slot,
                                             const std::array<std::vector<ValuePair>, 2>& values, double tol) {
    const std::size_t d = partner[0].size();
    std::vector<double> x(d, 0.0);
    std::vector<char> known(d, 0);
    x[start] = value;
    known[start] = 1;
    std::deque<std::size_t> frontier{start};
    while (!frontier.empty()) {
        const std::size_t v = frontier.front();
        frontier.pop_front();
        for (int k = 0; k < 2; ++k) {
            const std::size_t w = partner[k][v];
            const ValuePair vp = values[k][slot[k][v]];
            const double to_high = std::abs(x[v] - vp.high);
            const double to_low = std::abs(x[v] - vp.low);
            if (std::min(to_high, to_low) > tol) return std::nullopt;
            const double other = to_high <= to_low ? vp.low : vp.high;
            if (known[w]) {
                if (std::abs(x[w] - other) > tol) return std::nullopt;
            } else {
                x[w] = other;
                known[w] = 1;
                frontier.push_back(w);
            }
        }
    }
    std::vector<double> restricted;
    for (std::size_t v : component) restricted.push_back(x[v]);
    return restricted;
}

}  // namespace

std::vector<double> invert_layer(std::span<const double> s0, std::span<const double> s1,
                                 const InterlacedPairingSet& pairings) {
    const std::size_t d = pairings.p0.units();
    require(pairings.p1.units() == d, ErrorKind::DimensionMismatch, "pairings cover different sizes");
    require(s0.size() == d && s1.size() == d, ErrorKind::DimensionMismatch,
            "layer outputs must have " + std::to_string(d) + " coefficients");

    double scale = 1.0;
    for (double v : s0) scale = std::max(scale, std::abs(v));
    for (double v : s1) scale = std::max(scale, std::abs(v));
    const double tol = 1e-9 * scale;

    const std::array<std::vector<std::size_t>, 2> partner{pairings.p0.partners(), pairings.p1.partners()};
    std::array<std::vector<std::size_t>, 2> slot{std::vector<std::size_t>(d), std::vector<std::size_t>(d)};
    for (int k = 0; k < 2; ++k) {
        const auto& p = k == 0 ? pairings.p0 : pairings.p1;
        for (std::size_t n = 0; n < p.pairs().size(); ++n) slot[k][p[n].first] = slot[k][p[n].second] = n;
    }
    const std::array<std::vector<ValuePair>, 2> values{unpaired(s0), unpaired(s1)};

    std::vector<double> x(d, 0.0);
    std::vector<char> done(d, 0);
    for (std::size_t start = 0; start < d; ++start) {
        if (done[start]) continue;
        // Component of start in the union graph.
        std::vector<std::size_t> component{start};
        done[start] = 1;
        for (std::size_t i = 0; i < component.size(); ++i)
            for (int k = 0; k < 2; ++k) {
                const std::size_t w = partner[k][component[i]];
                if (!done[w]) {
                    done[w] = 1;
                    component.push_back(w);
                }
            }
        const ValuePair first = values[0][slot[0][start]];
        auto high = propagate(start, first.high, component, partner, slot, values, tol);
        auto low = propagate(start, first.low, component, partner, slot, values, tol);
        if (!high && !low)
            fail(ErrorKind::InconsistentInputs,
                 "no signal produces both layer outputs (component of index " + std::to_string(start) + ")");
        if (high && low) {
            for (std::size_t i = 0; i < component.size(); ++i)
                if (std::abs((*high)[i] - (*low)[i]) > tol)
                    fail(ErrorKind::AmbiguousReconstruction,
                         "two signals produce these outputs; x takes only two values on the component of index " +
                             std::to_string(start));
        }
        const auto& chosen = high ? *high : *low;
        for (std::size_t i = 0; i < component.size(); ++i) x[component[i]] = chosen[i];
    }
    return x;
}

TransformBag forward_bag(std::span<const double> x, std::span<const InterlacedPairingSet> layers) {
    const std::size_t d = x.size();
    const std::size_t depth = layers.size();
    require(depth < 32, ErrorKind::InvalidArgument, "too many layers");
    for (const auto& l : layers)
        require(l.p0.units() == d && l.p1.units() == d, ErrorKind::DimensionMismatch,
                "layer pairings must cover " + std::to_string(d) + " indices");
    TransformBag bag;
    bag.dim = d;
    bag.outputs.resize(std::size_t{1} << depth);
    const auto words = static_cast<std::ptrdiff_t>(bag.outputs.size());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t e = 0; e < words; ++e) {
        std::vector<double> s(x.begin(), x.end());
        for (std::size_t j = 0; j < depth; ++j)
            s = forward_free_layer(s, (e >> j) & 1 ? layers[j].p1 : layers[j].p0);
        bag.outputs[static_cast<std::size_t>(e)] = std::move(s);
    }
    return bag;
}

std::vector<double> reconstruct(const TransformBag& bag, std::span<const InterlacedPairingSet> layers) {
    const std::size_t depth = layers.size();
    require(depth < 32 && bag.outputs.size() == (std::size_t{1} << depth), ErrorKind::DimensionMismatch,
            "bag must hold 2^J transforms");
    for (const auto& out : bag.outputs)
        require(out.size() == bag.dim, ErrorKind::DimensionMismatch, "inconsistent transform sizes");
    if (depth == 0) return bag.outputs.front();

    std::vector<std::vector<double>> level = bag.outputs;
    for (std::size_t k = depth; k > 0; --k) {
        const std::size_t half = std::size_t{1} << (k - 1);
        std::vector<std::vector<double>> previous(half);
        for (std::size_t e = 0; e < half; ++e)
            previous[e] = invert_layer(level[e], level[e | half], layers[k - 1]);
        level = std::move(previous);
    }
    return level.front();
}

}  // namespace haarscat
