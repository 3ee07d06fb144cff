#include "confres/graph.hpp"

#include "confres/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <string>
#include <thread>
#include <utility>

namespace confres {

namespace {

// Builds CSR arrays from unordered pairs, merging duplicates by summing.
void build_csr(std::size_t n, std::vector<WeightedEdge> pairs, std::vector<std::size_t>& offsets,
               std::vector<Neighbor>& adj) {
    std::vector<WeightedEdge> directed;
    directed.reserve(pairs.size() * 2);
    for (const auto& e : pairs) {
        if (e.i >= n || e.j >= n)
            throw InputError("edge index out of range");
        if (e.i == e.j)
            throw InputError("self-loop on node " + std::to_string(e.i));
        if (!(e.weight >= 0.0) || !std::isfinite(e.weight))
            throw InputError("weights must be finite and non-negative");
        if (e.weight == 0.0)
            continue;
        directed.push_back(e);
        directed.push_back({e.j, e.i, e.weight});
    }
    std::sort(directed.begin(), directed.end(), [](const WeightedEdge& a, const WeightedEdge& b) {
        return a.i != b.i ? a.i < b.i : a.j < b.j;
    });
    offsets.assign(n + 1, 0);
    adj.clear();
    adj.reserve(directed.size());
    for (std::size_t p = 0; p < directed.size(); ++p) {
        const auto& e = directed[p];
        if (!adj.empty() && p > 0 && directed[p - 1].i == e.i && directed[p - 1].j == e.j) {
            adj.back().weight += e.weight;
            continue;
        }
        adj.push_back({e.j, e.weight});
        ++offsets[e.i + 1];
    }
    std::partial_sum(offsets.begin(), offsets.end(), offsets.begin());
}

double lookup(std::span<const Neighbor> row, std::size_t j) {
    auto it = std::lower_bound(row.begin(), row.end(), j,
                               [](const Neighbor& nb, std::size_t v) { return nb.node < v; });
    return (it != row.end() && it->node == j) ? it->weight : 0.0;
}

double distance(std::span<const double> a, std::span<const double> b, Metric metric,
                double norm_a, double norm_b) {
    if (metric == Metric::euclidean) {
        double s = 0.0;
        for (std::size_t t = 0; t < a.size(); ++t) {
            const double d = a[t] - b[t];
            s += d * d;
        }
        return std::sqrt(s);
    }
    if (norm_a == 0.0 || norm_b == 0.0)
        return norm_a == norm_b ? 0.0 : 1.0;
    double dot = 0.0;
    for (std::size_t t = 0; t < a.size(); ++t)
        dot += a[t] * b[t];
    return std::max(0.0, 1.0 - dot / (norm_a * norm_b));
}

// Averages the directed weights of each unordered pair: duplicates within a
// direction are summed first.
std::vector<WeightedEdge> average_directions(std::size_t n, std::span<const WeightedEdge> edges) {
    struct Directions {
        double forward = 0.0, backward = 0.0;
        bool has_forward = false, has_backward = false;
    };
    std::map<std::pair<std::size_t, std::size_t>, Directions> acc;
    for (const auto& e : edges) {
        if (e.i >= n || e.j >= n)
            throw InputError("edge (" + std::to_string(e.i) + ", " + std::to_string(e.j) +
                             ") out of range for n = " + std::to_string(n));
        if (e.i == e.j)
            throw InputError("self-loop on node " + std::to_string(e.i));
        if (!std::isfinite(e.weight) || e.weight < 0.0)
            throw InputError("negative or non-finite weight on edge (" + std::to_string(e.i) +
                             ", " + std::to_string(e.j) + ")");
        auto& slot = acc[{std::min(e.i, e.j), std::max(e.i, e.j)}];
        if (e.i < e.j) {
            slot.forward += e.weight;
            slot.has_forward = true;
        } else {
            slot.backward += e.weight;
            slot.has_backward = true;
        }
    }
    std::vector<WeightedEdge> out;
    out.reserve(acc.size());
    for (const auto& [key, d] : acc) {
        const double weight = (d.has_forward && d.has_backward) ? 0.5 * (d.forward + d.backward)
                                                                : d.forward + d.backward;
        out.push_back({key.first, key.second, weight});
    }
    return out;
}

}  // namespace

PointSet::PointSet(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), values_(std::move(values)) {
    if (rows_ < 2)
        throw InputError("a point set needs at least 2 points");
    if (cols_ < 1)
        throw InputError("a point set needs at least 1 column");
    if (values_.size() != rows_ * cols_)
        throw InputError("point matrix has " + std::to_string(values_.size()) +
                         " values, expected " + std::to_string(rows_ * cols_));
    for (std::size_t p = 0; p < values_.size(); ++p) {
        if (!std::isfinite(values_[p]))
            throw InputError("non-finite coordinate at row " + std::to_string(p / cols_));
    }
}

AffinityGraph::AffinityGraph(AffinityParts parts) : n_(parts.n), scheme_(parts.scheme) {
    build_csr(n_, std::move(parts.attraction), att_offsets_, att_);
    build_csr(n_, std::move(parts.repulsion), rep_offsets_, rep_);

    auto fill = [this](std::vector<double>& v, const char* what) {
        if (v.empty())
            v.assign(n_, 0.0);
        if (v.size() != n_)
            throw InputError(std::string(what) + " has wrong length");
        for (double x : v) {
            if (!std::isfinite(x) || x < 0.0)
                throw InputError(std::string(what) + " must be finite and non-negative");
        }
    };
    fill(parts.self_attraction, "self attraction");
    fill(parts.self_repulsion, "self repulsion");
    self_att_ = std::move(parts.self_attraction);
    self_rep_ = std::move(parts.self_repulsion);

    if (parts.strengths.empty()) {
        strengths_.assign(n_, 0.0);
        for (std::size_t i = 0; i < n_; ++i) {
            for (const auto& nb : attraction(i))
                strengths_[i] += nb.weight;
        }
    } else {
        strengths_ = std::move(parts.strengths);
        fill(strengths_, "strengths");
    }

    if (parts.total > 0.0) {
        total_ = parts.total;
    } else {
        double t = 0.0;
        for (std::size_t i = 0; i < n_; ++i) {
            t += self_att_[i];
            for (const auto& nb : attraction(i))
                if (nb.node > i)
                    t += nb.weight;
        }
        total_ = t;
    }

    if (!parts.repulsion_mass.empty()) {
        mass_ = std::move(parts.repulsion_mass);
        fill(mass_, "repulsion mass");
        scale_ = parts.repulsion_scale;
    } else {
        switch (scheme_) {
        case RepulsionScheme::configuration_null:
            mass_ = strengths_;
            scale_ = total_ > 0.0 ? 1.0 / (2.0 * total_) : 0.0;
            break;
        case RepulsionScheme::uniform:
            mass_.assign(n_, 1.0);
            scale_ = n_ > 0 ? 1.0 / static_cast<double>(n_) : 0.0;
            break;
        case RepulsionScheme::explicit_weights:
            mass_.assign(n_, 0.0);
            scale_ = 0.0;
            break;
        }
    }
    if (!std::isfinite(scale_) || scale_ < 0.0)
        throw InputError("repulsion scale must be finite and non-negative");
}

double AffinityGraph::attraction_weight(std::size_t i, std::size_t j) const {
    return i == j ? 0.0 : lookup(attraction(i), j);
}

double AffinityGraph::repulsion_weight(std::size_t i, std::size_t j) const {
    if (i == j)
        return 0.0;
    return scale_ * mass_[i] * mass_[j] + lookup(explicit_repulsion(i), j);
}

double AffinityGraph::max_attraction() const {
    double m = 0.0;
    for (const auto& nb : att_)
        m = std::max(m, nb.weight);
    return m;
}

NeighborGraph build_knn_graph(const PointSet& points, std::size_t k, Metric metric,
                              unsigned threads) {
    const std::size_t n = points.size();
    if (k < 1 || k >= n)
        throw ParameterError("k must satisfy 1 <= k <= n - 1 (k = " + std::to_string(k) +
                             ", n = " + std::to_string(n) + ")");

    std::vector<double> norms(n, 0.0);
    if (metric == Metric::cosine) {
        for (std::size_t i = 0; i < n; ++i) {
            double s = 0.0;
            for (double x : points.row(i))
                s += x * x;
            norms[i] = std::sqrt(s);
        }
    }

    // knn[i] holds the k nearest (distance, index) pairs of item i.
    std::vector<std::vector<std::pair<double, std::size_t>>> knn(n);
    auto work = [&](std::size_t begin, std::size_t end) {
        std::vector<std::pair<double, std::size_t>> cand;
        cand.reserve(n - 1);
        for (std::size_t i = begin; i < end; ++i) {
            cand.clear();
            for (std::size_t j = 0; j < n; ++j) {
                if (j != i)
                    cand.emplace_back(distance(points.row(i), points.row(j), metric, norms[i],
                                               norms[j]),
                                      j);
            }
            std::partial_sort(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(k),
                              cand.end());
            knn[i].assign(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(k));
        }
    };

    const std::size_t workers = std::max<std::size_t>(1, std::min<std::size_t>(threads, n));
    if (workers == 1) {
        work(0, n);
    } else {
        std::vector<std::thread> pool;
        const std::size_t chunk = (n + workers - 1) / workers;
        for (std::size_t w = 0; w < workers; ++w) {
            const std::size_t b = w * chunk, e = std::min(n, b + chunk);
            if (b < e)
                pool.emplace_back(work, b, e);
        }
        for (auto& t : pool)
            t.join();
    }

    std::map<std::pair<std::size_t, std::size_t>, double> uniq;
    for (std::size_t i = 0; i < n; ++i) {
        for (const auto& [d, j] : knn[i])
            uniq.emplace(std::make_pair(std::min(i, j), std::max(i, j)), d);
    }
    NeighborGraph g;
    g.n = n;
    g.k = k;
    g.edges.reserve(uniq.size());
    for (const auto& [key, d] : uniq)
        g.edges.push_back({key.first, key.second, d});
    return g;
}

std::vector<std::vector<Neighbor>> stochastic_rows(const NeighborGraph& graph, Kernel kernel) {
    const std::size_t n = graph.n;
    std::vector<std::vector<Neighbor>> rows(n);  // node = neighbor, weight = distance
    for (const auto& e : graph.edges) {
        if (e.i >= n || e.j >= n || e.i == e.j)
            throw InputError("invalid neighbor graph edge");
        if (!std::isfinite(e.distance) || e.distance < 0.0)
            throw InputError("neighbor distances must be finite and non-negative");
        rows[e.i].push_back({e.j, e.distance});
        rows[e.j].push_back({e.i, e.distance});
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (rows[i].empty())
            throw InputError("item " + std::to_string(i) + " has no neighbors");
        std::sort(rows[i].begin(), rows[i].end(),
                  [](const Neighbor& a, const Neighbor& b) { return a.node < b.node; });
    }

    // sigma_i: distance to the ceil(k/2)-th nearest incident neighbor,
    // falling back to the smallest positive distance.
    std::vector<double> sigma(n, 0.0);
    if (kernel == Kernel::self_tuning_gaussian) {
        const std::size_t rank = std::max<std::size_t>(1, (graph.k + 1) / 2);
        std::vector<double> d;
        for (std::size_t i = 0; i < n; ++i) {
            d.clear();
            for (const auto& nb : rows[i])
                d.push_back(nb.weight);
            std::sort(d.begin(), d.end());
            sigma[i] = d[std::min(rank, d.size()) - 1];
            if (sigma[i] == 0.0) {
                auto pos = std::upper_bound(d.begin(), d.end(), 0.0);
                if (pos != d.end())
                    sigma[i] = *pos;
            }
        }
    }

    std::vector<std::vector<Neighbor>> p(n);
    for (std::size_t i = 0; i < n; ++i) {
        auto& out = p[i];
        out.reserve(rows[i].size());
        std::size_t zero_count = 0;
        for (const auto& nb : rows[i])
            zero_count += nb.weight == 0.0;
        double sum = 0.0;
        for (const auto& nb : rows[i]) {
            double s = 0.0;
            if (kernel == Kernel::inverse_distance) {
                // Coincident neighbors absorb all mass, the limit of 1/d.
                if (zero_count > 0)
                    s = nb.weight == 0.0 ? 1.0 : 0.0;
                else
                    s = 1.0 / nb.weight;
            } else {
                const double denom = sigma[i] * sigma[nb.node];
                if (denom > 0.0)
                    s = std::exp(-(nb.weight * nb.weight) / denom);
                else
                    s = nb.weight == 0.0 ? 1.0 : 0.0;
            }
            out.push_back({nb.node, s});
            sum += s;
        }
        if (!(sum > 0.0) || !std::isfinite(sum))
            throw NumericalError("all similarities of item " + std::to_string(i) +
                                 " vanish; distances are degenerate");
        for (auto& nb : out)
            nb.weight /= sum;
    }
    return p;
}

AffinityGraph derive_affinity(const NeighborGraph& graph, Kernel kernel, RepulsionScheme scheme) {
    if (scheme == RepulsionScheme::explicit_weights)
        throw ParameterError("explicit repulsion needs explicit weights; use from_edge_list");
    const auto p = stochastic_rows(graph, kernel);
    AffinityParts parts;
    parts.n = graph.n;
    parts.scheme = scheme;
    parts.attraction.reserve(graph.edges.size());
    for (std::size_t i = 0; i < graph.n; ++i) {
        for (const auto& nb : p[i]) {
            if (nb.node <= i)
                continue;
            const double back = lookup(p[nb.node], i);
            parts.attraction.push_back({i, nb.node, 0.5 * (nb.weight + back)});
        }
    }
    return AffinityGraph(std::move(parts));
}

AffinityGraph from_edge_list(std::size_t n, std::span<const WeightedEdge> edges,
                             RepulsionScheme scheme, std::span<const WeightedEdge> repulsion) {
    if (n < 1)
        throw InputError("graph needs at least one node");
    if (scheme != RepulsionScheme::explicit_weights && !repulsion.empty())
        throw ParameterError("explicit repulsion edges given with a factorized scheme");
    AffinityParts parts;
    parts.n = n;
    parts.scheme = scheme;
    parts.attraction = average_directions(n, edges);
    parts.repulsion = average_directions(n, repulsion);
    return AffinityGraph(std::move(parts));
}

double singleton_bound(const AffinityGraph& graph) {
    const double max_att = graph.max_attraction();
    if (max_att == 0.0)
        return 0.0;
    const std::size_t n = graph.size();
    double min_rep = std::numeric_limits<double>::infinity();
    if (graph.repulsion_scale() > 0.0) {
        double a = std::numeric_limits<double>::infinity(), b = a;
        for (std::size_t i = 0; i < n; ++i) {
            const double m = graph.repulsion_mass(i);
            if (m <= 0.0)
                continue;
            if (m < a) {
                b = a;
                a = m;
            } else if (m < b) {
                b = m;
            }
        }
        if (std::isfinite(b))
            min_rep = graph.repulsion_scale() * a * b;
    }
    for (std::size_t i = 0; i < n; ++i) {
        for (const auto& nb : graph.explicit_repulsion(i))
            if (nb.weight > 0.0)
                min_rep = std::min(min_rep, nb.weight);
    }
    for (std::size_t i = 0; i < n; ++i) {
        for (const auto& nb : graph.attraction(i)) {
            if (nb.weight > 0.0 && !(graph.repulsion_weight(i, nb.node) > 0.0))
                return std::numeric_limits<double>::infinity();
        }
    }
    return max_att / min_rep;
}

}  // namespace confres
