#include "haarscat/matching.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "haarscat/error.hpp"

namespace haarscat {

CostMatrix::CostMatrix(std::size_t size, std::vector<double> costs) : size_(size), costs_(std::move(costs)) {
    require(costs_.size() == size * size, ErrorKind::ShapeMismatch,
            "cost buffer holds " + std::to_string(costs_.size()) + " entries, expected " +
                std::to_string(size * size));
    for (std::size_t a = 0; a < size; ++a) {
        for (std::size_t b = a + 1; b < size; ++b) {
            const double v = costs_[a * size + b];
            require(std::isfinite(v) && v >= 0.0, ErrorKind::InvalidArgument, "costs must be finite and nonnegative");
            require(v == costs_[b * size + a], ErrorKind::InvalidArgument, "cost matrix is not symmetric");
        }
    }
}

double total_cost(const CostMatrix& c, const Pairing& p) {
    require(p.units() == c.size(), ErrorKind::DimensionMismatch, "pairing size != cost matrix size");
    double total = 0.0;
    for (const auto& pr : p.pairs()) total += c(pr.first, pr.second);
    return total;
}

namespace {

using Index = std::ptrdiff_t;

// Edmonds' blossom algorithm with primal-dual updates, following the
// structure of Van Rantwijk's reference implementation. Dual variables of
// vertices are stored doubled so integer weights keep integer duals.
class BlossomMatcher {
public:
    BlossomMatcher(std::size_t vertices, std::span<const WeightedEdge> edges, bool max_cardinality)
        : n_(static_cast<Index>(vertices)), edges_(edges.begin(), edges.end()), max_cardinality_(max_cardinality) {}

    std::vector<Index> solve();

private:
    std::int64_t slack(Index k) const {
        const auto& e = edges_[static_cast<std::size_t>(k)];
        return dual_[e.u] + dual_[e.v] - 2 * e.weight;
    }

    Index endpoint(Index p) const {
        const auto& e = edges_[static_cast<std::size_t>(p / 2)];
        return static_cast<Index>(p % 2 == 0 ? e.u : e.v);
    }

    void leaves(Index b, std::vector<Index>& out) const {
        if (b < n_) {
            out.push_back(b);
            return;
        }
        for (Index t : childs_[b]) leaves(t, out);
    }

    std::vector<Index> leaves(Index b) const {
        std::vector<Index> out;
        leaves(b, out);
        return out;
    }

    template <class T>
    static T& wrap(std::vector<T>& v, Index j) {
        const auto len = static_cast<Index>(v.size());
        return v[static_cast<std::size_t>(((j % len) + len) % len)];
    }

    void assign_label(Index w, int t, Index p);
    Index scan_blossom(Index v, Index w);
    void add_blossom(Index base, Index k);
    void expand_blossom(Index b, bool endstage);
    void augment_blossom(Index b, Index v);
    void augment_matching(Index k);

    Index n_;
    std::vector<WeightedEdge> edges_;
    bool max_cardinality_;

    std::vector<std::vector<Index>> neighbend_;
    std::vector<Index> mate_;
    std::vector<int> label_;
    std::vector<Index> labelend_;
    std::vector<Index> inblossom_;
    std::vector<Index> parent_;
    std::vector<std::vector<Index>> childs_;
    std::vector<Index> base_;
    std::vector<std::vector<Index>> endps_;
    std::vector<Index> bestedge_;
    std::vector<std::vector<Index>> bestedges_;
    std::vector<char> has_bestedges_;
    std::vector<Index> unused_;
    std::vector<std::int64_t> dual_;
    std::vector<char> allowedge_;
    std::vector<Index> queue_;
};

void BlossomMatcher::assign_label(Index w, int t, Index p) {
    const Index b = inblossom_[w];
    label_[w] = label_[b] = t;
    labelend_[w] = labelend_[b] = p;
    bestedge_[w] = bestedge_[b] = -1;
    if (t == 1) {
        leaves(b, queue_);
    } else if (t == 2) {
        const Index base = base_[b];
        assign_label(endpoint(mate_[base]), 1, mate_[base] ^ 1);
    }
}

Index BlossomMatcher::scan_blossom(Index v, Index w) {
    std::vector<Index> path;
    Index base = -1;
    while (v != -1 || w != -1) {
        Index b = inblossom_[v];
        if (label_[b] & 4) {
            base = base_[b];
            break;
        }
        path.push_back(b);
        label_[b] = 5;
        if (labelend_[b] == -1) {
            v = -1;
        } else {
            v = endpoint(labelend_[b]);
            b = inblossom_[v];
            v = endpoint(labelend_[b]);
        }
        if (w != -1) std::swap(v, w);
    }
    for (Index b : path) label_[b] = 1;
    return base;
}

void BlossomMatcher::add_blossom(Index base, Index k) {
    Index v = static_cast<Index>(edges_[static_cast<std::size_t>(k)].u);
    Index w = static_cast<Index>(edges_[static_cast<std::size_t>(k)].v);
    const Index bb = inblossom_[base];
    Index bv = inblossom_[v];
    Index bw = inblossom_[w];
    const Index b = unused_.back();
    unused_.pop_back();
    base_[b] = base;
    parent_[b] = -1;
    parent_[bb] = b;
    auto& path = childs_[b];
    auto& endps = endps_[b];
    path.clear();
    endps.clear();
    while (bv != bb) {
        parent_[bv] = b;
        path.push_back(bv);
        endps.push_back(labelend_[bv]);
        v = endpoint(labelend_[bv]);
        bv = inblossom_[v];
    }
    path.push_back(bb);
    std::reverse(path.begin(), path.end());
    std::reverse(endps.begin(), endps.end());
    endps.push_back(2 * k);
    while (bw != bb) {
        parent_[bw] = b;
        path.push_back(bw);
        endps.push_back(labelend_[bw] ^ 1);
        w = endpoint(labelend_[bw]);
        bw = inblossom_[w];
    }
    label_[b] = 1;
    labelend_[b] = labelend_[bb];
    dual_[b] = 0;
    for (Index leaf : leaves(b)) {
        if (label_[inblossom_[leaf]] == 2) queue_.push_back(leaf);
        inblossom_[leaf] = b;
    }
    std::vector<Index> bestedgeto(static_cast<std::size_t>(2 * n_), -1);
    for (Index sub : path) {
        std::vector<Index> candidates;
        if (!has_bestedges_[sub]) {
            for (Index leaf : leaves(sub))
                for (Index p : neighbend_[leaf]) candidates.push_back(p / 2);
        } else {
            candidates = bestedges_[sub];
        }
        for (Index e : candidates) {
            Index i = static_cast<Index>(edges_[static_cast<std::size_t>(e)].u);
            Index j = static_cast<Index>(edges_[static_cast<std::size_t>(e)].v);
            if (inblossom_[j] == b) std::swap(i, j);
            const Index bj = inblossom_[j];
            if (bj != b && label_[bj] == 1 && (bestedgeto[bj] == -1 || slack(e) < slack(bestedgeto[bj])))
                bestedgeto[bj] = e;
        }
        bestedges_[sub].clear();
        has_bestedges_[sub] = 0;
        bestedge_[sub] = -1;
    }
    bestedges_[b].clear();
    for (Index e : bestedgeto)
        if (e != -1) bestedges_[b].push_back(e);
    has_bestedges_[b] = 1;
    bestedge_[b] = -1;
    for (Index e : bestedges_[b])
        if (bestedge_[b] == -1 || slack(e) < slack(bestedge_[b])) bestedge_[b] = e;
}

void BlossomMatcher::expand_blossom(Index b, bool endstage) {
    const std::vector<Index> children = childs_[b];
    for (Index s : children) {
        parent_[s] = -1;
        if (s < n_) {
            inblossom_[s] = s;
        } else if (endstage && dual_[s] == 0) {
            expand_blossom(s, endstage);
        } else {
            for (Index leaf : leaves(s)) inblossom_[leaf] = s;
        }
    }
    if (!endstage && label_[b] == 2) {
        const Index entrychild = inblossom_[endpoint(labelend_[b] ^ 1)];
        auto& ch = childs_[b];
        auto& ep = endps_[b];
        Index j = std::find(ch.begin(), ch.end(), entrychild) - ch.begin();
        Index jstep, endptrick;
        if (j & 1) {
            j -= static_cast<Index>(ch.size());
            jstep = 1;
            endptrick = 0;
        } else {
            jstep = -1;
            endptrick = 1;
        }
        Index p = labelend_[b];
        while (j != 0) {
            label_[endpoint(p ^ 1)] = 0;
            label_[endpoint(wrap(ep, j - endptrick) ^ endptrick ^ 1)] = 0;
            assign_label(endpoint(p ^ 1), 2, p);
            allowedge_[wrap(ep, j - endptrick) / 2] = 1;
            j += jstep;
            p = wrap(ep, j - endptrick) ^ endptrick;
            allowedge_[p / 2] = 1;
            j += jstep;
        }
        Index bv = wrap(ch, j);
        label_[endpoint(p ^ 1)] = label_[bv] = 2;
        labelend_[endpoint(p ^ 1)] = labelend_[bv] = p;
        bestedge_[bv] = -1;
        j += jstep;
        while (wrap(ch, j) != entrychild) {
            bv = wrap(ch, j);
            if (label_[bv] == 1) {
                j += jstep;
                continue;
            }
            Index reached = -1;
            for (Index leaf : leaves(bv)) {
                if (label_[leaf] != 0) {
                    reached = leaf;
                    break;
                }
            }
            if (reached != -1) {
                label_[reached] = 0;
                label_[endpoint(mate_[base_[bv]])] = 0;
                assign_label(reached, 2, labelend_[reached]);
            }
            j += jstep;
        }
    }
    label_[b] = -1;
    labelend_[b] = -1;
    childs_[b].clear();
    endps_[b].clear();
    base_[b] = -1;
    bestedges_[b].clear();
    has_bestedges_[b] = 0;
    bestedge_[b] = -1;
    unused_.push_back(b);
}

void BlossomMatcher::augment_blossom(Index b, Index v) {
    Index t = v;
    while (parent_[t] != b) t = parent_[t];
    if (t >= n_) augment_blossom(t, v);
    auto& ch = childs_[b];
    auto& ep = endps_[b];
    const Index i = std::find(ch.begin(), ch.end(), t) - ch.begin();
    Index j = i;
    Index jstep, endptrick;
    if (i & 1) {
        j -= static_cast<Index>(ch.size());
        jstep = 1;
        endptrick = 0;
    } else {
        jstep = -1;
        endptrick = 1;
    }
    while (j != 0) {
        j += jstep;
        t = wrap(ch, j);
        const Index p = wrap(ep, j - endptrick) ^ endptrick;
        if (t >= n_) augment_blossom(t, endpoint(p));
        j += jstep;
        t = wrap(ch, j);
        if (t >= n_) augment_blossom(t, endpoint(p ^ 1));
        mate_[endpoint(p)] = p ^ 1;
        mate_[endpoint(p ^ 1)] = p;
    }
    std::rotate(ch.begin(), ch.begin() + i, ch.end());
    std::rotate(ep.begin(), ep.begin() + i, ep.end());
    base_[b] = base_[ch.front()];
}

void BlossomMatcher::augment_matching(Index k) {
    const auto& e = edges_[static_cast<std::size_t>(k)];
    const Index ends[2][2] = {{static_cast<Index>(e.u), 2 * k + 1}, {static_cast<Index>(e.v), 2 * k}};
    for (const auto& sp : ends) {
        Index s = sp[0];
        Index p = sp[1];
        while (true) {
            const Index bs = inblossom_[s];
            if (bs >= n_) augment_blossom(bs, s);
            mate_[s] = p;
            if (labelend_[bs] == -1) break;
            const Index t = endpoint(labelend_[bs]);
            const Index bt = inblossom_[t];
            s = endpoint(labelend_[bt]);
            const Index j = endpoint(labelend_[bt] ^ 1);
            if (bt >= n_) augment_blossom(bt, j);
            mate_[j] = labelend_[bt];
            p = labelend_[bt] ^ 1;
        }
    }
}

std::vector<Index> BlossomMatcher::solve() {
    const auto n = static_cast<std::size_t>(n_);
    const Index nedge = static_cast<Index>(edges_.size());
    if (edges_.empty()) return std::vector<Index>(n, -1);

    std::int64_t maxweight = 0;
    for (const auto& e : edges_) maxweight = std::max(maxweight, e.weight);

    neighbend_.assign(n, {});
    for (Index k = 0; k < nedge; ++k) {
        neighbend_[edges_[static_cast<std::size_t>(k)].u].push_back(2 * k + 1);
        neighbend_[edges_[static_cast<std::size_t>(k)].v].push_back(2 * k);
    }
    mate_.assign(n, -1);
    label_.assign(2 * n, 0);
    labelend_.assign(2 * n, -1);
    inblossom_.resize(n);
    std::iota(inblossom_.begin(), inblossom_.end(), Index{0});
    parent_.assign(2 * n, -1);
    childs_.assign(2 * n, {});
    base_.assign(2 * n, -1);
    std::iota(base_.begin(), base_.begin() + static_cast<std::ptrdiff_t>(n), Index{0});
    endps_.assign(2 * n, {});
    bestedge_.assign(2 * n, -1);
    bestedges_.assign(2 * n, {});
    has_bestedges_.assign(2 * n, 0);
    unused_.clear();
    for (Index b = n_; b < 2 * n_; ++b) unused_.push_back(b);
    dual_.assign(2 * n, 0);
    std::fill(dual_.begin(), dual_.begin() + static_cast<std::ptrdiff_t>(n), maxweight);
    allowedge_.assign(edges_.size(), 0);

    for (Index stage = 0; stage < n_; ++stage) {
        std::fill(label_.begin(), label_.end(), 0);
        std::fill(bestedge_.begin(), bestedge_.end(), -1);
        for (std::size_t b = n; b < 2 * n; ++b) {
            bestedges_[b].clear();
            has_bestedges_[b] = 0;
        }
        std::fill(allowedge_.begin(), allowedge_.end(), 0);
        queue_.clear();

        for (Index v = 0; v < n_; ++v)
            if (mate_[v] == -1 && label_[inblossom_[v]] == 0) assign_label(v, 1, -1);

        bool augmented = false;
        while (true) {
            while (!queue_.empty() && !augmented) {
                const Index v = queue_.back();
                queue_.pop_back();
                for (Index p : neighbend_[v]) {
                    const Index k = p / 2;
                    const Index w = endpoint(p);
                    if (inblossom_[v] == inblossom_[w]) continue;
                    std::int64_t kslack = 0;
                    if (!allowedge_[k]) {
                        kslack = slack(k);
                        if (kslack <= 0) allowedge_[k] = 1;
                    }
                    if (allowedge_[k]) {
                        if (label_[inblossom_[w]] == 0) {
                            assign_label(w, 2, p ^ 1);
                        } else if (label_[inblossom_[w]] == 1) {
                            const Index base = scan_blossom(v, w);
                            if (base >= 0) {
                                add_blossom(base, k);
                            } else {
                                augment_matching(k);
                                augmented = true;
                                break;
                            }
                        } else if (label_[w] == 0) {
                            label_[w] = 2;
                            labelend_[w] = p ^ 1;
                        }
                    } else if (label_[inblossom_[w]] == 1) {
                        const Index b = inblossom_[v];
                        if (bestedge_[b] == -1 || kslack < slack(bestedge_[b])) bestedge_[b] = k;
                    } else if (label_[w] == 0) {
                        if (bestedge_[w] == -1 || kslack < slack(bestedge_[w])) bestedge_[w] = k;
                    }
                }
            }
            if (augmented) break;

            int deltatype = -1;
            std::int64_t delta = 0;
            Index deltaedge = -1;
            Index deltablossom = -1;
            if (!max_cardinality_) {
                deltatype = 1;
                delta = *std::min_element(dual_.begin(), dual_.begin() + static_cast<std::ptrdiff_t>(n));
            }
            for (Index v = 0; v < n_; ++v) {
                if (label_[inblossom_[v]] == 0 && bestedge_[v] != -1) {
                    const std::int64_t d = slack(bestedge_[v]);
                    if (deltatype == -1 || d < delta) {
                        delta = d;
                        deltatype = 2;
                        deltaedge = bestedge_[v];
                    }
                }
            }
            for (Index b = 0; b < 2 * n_; ++b) {
                if (parent_[b] == -1 && label_[b] == 1 && bestedge_[b] != -1) {
                    const std::int64_t d = slack(bestedge_[b]) / 2;
                    if (deltatype == -1 || d < delta) {
                        delta = d;
                        deltatype = 3;
                        deltaedge = bestedge_[b];
                    }
                }
            }
            for (Index b = n_; b < 2 * n_; ++b) {
                if (base_[b] >= 0 && parent_[b] == -1 && label_[b] == 2 && (deltatype == -1 || dual_[b] < delta)) {
                    delta = dual_[b];
                    deltatype = 4;
                    deltablossom = b;
                }
            }
            if (deltatype == -1) {
                deltatype = 1;
                delta = std::max<std::int64_t>(
                    0, *std::min_element(dual_.begin(), dual_.begin() + static_cast<std::ptrdiff_t>(n)));
            }

            for (Index v = 0; v < n_; ++v) {
                if (label_[inblossom_[v]] == 1)
                    dual_[v] -= delta;
                else if (label_[inblossom_[v]] == 2)
                    dual_[v] += delta;
            }
            for (Index b = n_; b < 2 * n_; ++b) {
                if (base_[b] >= 0 && parent_[b] == -1) {
                    if (label_[b] == 1)
                        dual_[b] += delta;
                    else if (label_[b] == 2)
                        dual_[b] -= delta;
                }
            }

            if (deltatype == 1) {
                break;
            } else if (deltatype == 2) {
                allowedge_[deltaedge] = 1;
                Index i = static_cast<Index>(edges_[static_cast<std::size_t>(deltaedge)].u);
                Index j = static_cast<Index>(edges_[static_cast<std::size_t>(deltaedge)].v);
                if (label_[inblossom_[i]] == 0) std::swap(i, j);
                queue_.push_back(i);
            } else if (deltatype == 3) {
                allowedge_[deltaedge] = 1;
                queue_.push_back(static_cast<Index>(edges_[static_cast<std::size_t>(deltaedge)].u));
            } else {
                expand_blossom(deltablossom, false);
            }
        }
        if (!augmented) break;

        for (Index b = n_; b < 2 * n_; ++b) {
            if (parent_[b] == -1 && base_[b] >= 0 && label_[b] == 1 && dual_[b] == 0) expand_blossom(b, true);
        }
    }

    std::vector<Index> result(n, -1);
    for (Index v = 0; v < n_; ++v)
        if (mate_[v] >= 0) result[v] = endpoint(mate_[v]);
    return result;
}

}  // namespace

std::vector<std::ptrdiff_t> max_weight_matching(std::size_t vertices, std::span<const WeightedEdge> edges,
                                                bool max_cardinality) {
    for (const auto& e : edges) {
        require(e.u < vertices && e.v < vertices && e.u != e.v, ErrorKind::InvalidArgument, "bad edge endpoint");
    }
    // Doubled weights keep every dual slack even.
    std::vector<WeightedEdge> doubled(edges.begin(), edges.end());
    for (auto& e : doubled) e.weight *= 2;
    BlossomMatcher matcher(vertices, doubled, max_cardinality);
    return matcher.solve();
}

Pairing match_exact(const CostMatrix& c) {
    const std::size_t u = c.size();
    require(u % 2 == 0, ErrorKind::OddSize, "perfect matching needs an even size, got " + std::to_string(u));
    require(u >= 2, ErrorKind::OddSize, "perfect matching needs at least 2 units");
    if (u == 2) return Pairing({{0, 1}});

    double cmax = 0.0;
    for (std::size_t a = 0; a < u; ++a)
        for (std::size_t b = a + 1; b < u; ++b) cmax = std::max(cmax, c(a, b));
    const double scale = cmax > 0.0 ? std::ldexp(1.0, 40) / cmax : 0.0;
    const std::int64_t top = std::int64_t{1} << 40;

    std::vector<WeightedEdge> edges;
    edges.reserve(u * (u - 1) / 2);
    for (std::size_t a = 0; a < u; ++a)
        for (std::size_t b = a + 1; b < u; ++b) {
            const auto q = static_cast<std::int64_t>(std::llround(c(a, b) * scale));
            edges.push_back({a, b, top - q + 1});
        }
    const auto mate = max_weight_matching(u, edges, true);
    std::vector<std::size_t> partner(u);
    for (std::size_t v = 0; v < u; ++v) {
        require(mate[v] >= 0, ErrorKind::InvalidArgument, "blossom solver left a vertex unmatched");
        partner[v] = static_cast<std::size_t>(mate[v]);
    }
    return pairing_from_partners(partner);
}

Pairing match_greedy(const CostMatrix& c) {
    const std::size_t u = c.size();
    require(u % 2 == 0, ErrorKind::OddSize, "perfect matching needs an even size, got " + std::to_string(u));
    require(u >= 2, ErrorKind::OddSize, "perfect matching needs at least 2 units");
    std::vector<IndexPair> candidates;
    candidates.reserve(u * (u - 1) / 2);
    for (std::size_t a = 0; a < u; ++a)
        for (std::size_t b = a + 1; b < u; ++b) candidates.push_back({a, b});
    std::stable_sort(candidates.begin(), candidates.end(), [&](const IndexPair& x, const IndexPair& y) {
        return c(x.first, x.second) < c(y.first, y.second);
    });
    std::vector<char> used(u, 0);
    std::vector<IndexPair> chosen;
    for (const auto& e : candidates) {
        if (used[e.first] || used[e.second]) continue;
        used[e.first] = used[e.second] = 1;
        chosen.push_back(e);
        if (2 * chosen.size() == u) break;
    }
    return Pairing(std::move(chosen));
}

}  // namespace haarscat
