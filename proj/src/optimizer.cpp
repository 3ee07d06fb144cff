#include "confres/optimizer.hpp"

#include "confres/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace confres {

namespace {

void check_gamma(double gamma) {
    if (!(gamma >= 0.0) || !std::isfinite(gamma))
        throw ParameterError("gamma must be finite and non-negative");
}

// Per-item scratch accumulator for the attraction and explicit repulsion an
// item has towards each neighboring cluster.
class NeighborClusters {
public:
    explicit NeighborClusters(std::size_t n) : att_(n, 0.0), rep_(n, 0.0), mark_(n, 0) {}

    void collect(const ClusterState& state, std::size_t item, const std::vector<std::size_t>* group) {
        clear();
        const auto& g = state.graph();
        const std::size_t own_group = group ? (*group)[item] : 0;
        for (const auto& nb : g.attraction(item)) {
            if (group && (*group)[nb.node] != own_group)
                continue;
            const std::size_t c = state.cluster_of(nb.node);
            touch(c);
            att_[c] += nb.weight;
        }
        for (const auto& nb : g.explicit_repulsion(item)) {
            const std::size_t c = state.cluster_of(nb.node);
            if (mark_[c] || c == state.cluster_of(item)) {
                touch(c);
                rep_[c] += nb.weight;
            }
        }
        touch(state.cluster_of(item));
    }

    const std::vector<std::size_t>& clusters() const { return touched_; }
    double attraction(std::size_t c) const { return att_[c]; }
    double repulsion(std::size_t c) const { return rep_[c]; }

private:
    void touch(std::size_t c) {
        if (!mark_[c]) {
            mark_[c] = 1;
            touched_.push_back(c);
        }
    }
    void clear() {
        for (auto c : touched_) {
            att_[c] = 0.0;
            rep_[c] = 0.0;
            mark_[c] = 0;
        }
        touched_.clear();
    }

    std::vector<double> att_;
    std::vector<double> rep_;
    std::vector<char> mark_;
    std::vector<std::size_t> touched_;
};

// Chooses the best relocation of `item`. Returns kNewCluster for a new
// cluster, the current cluster when no move beats -epsilon.
std::size_t best_move(const ClusterState& state, NeighborClusters& nbc, std::size_t item,
                      double gamma, double epsilon, const std::vector<std::size_t>* group) {
    nbc.collect(state, item, group);
    const std::size_t cur = state.cluster_of(item);
    const double leave = state.join_cost(item, cur, nbc.attraction(cur), nbc.repulsion(cur), gamma);

    std::size_t best = cur;
    double best_delta = 0.0;
    bool have = false;
    for (std::size_t c : nbc.clusters()) {
        if (c == cur)
            continue;
        const double delta =
            state.join_cost(item, c, nbc.attraction(c), nbc.repulsion(c), gamma) - leave;
        if (!have || delta < best_delta || (delta == best_delta && c < best)) {
            best = c;
            best_delta = delta;
            have = true;
        }
    }
    if (state.cluster_size(cur) > 1) {
        const double delta = -leave;
        if (!have || delta < best_delta) {
            best = kNewCluster;
            best_delta = delta;
            have = true;
        }
    }
    return (have && best_delta < -epsilon) ? best : cur;
}

bool sweep(ClusterState& state, NeighborClusters& nbc, std::vector<std::size_t>& order, Rng& rng,
           double gamma, double epsilon, const std::vector<std::size_t>* group) {
    std::shuffle(order.begin(), order.end(), rng);
    bool improved = false;
    for (std::size_t item : order) {
        const std::size_t target = best_move(state, nbc, item, gamma, epsilon, group);
        if (target != state.cluster_of(item)) {
            state.move(item, target);
            improved = true;
        }
    }
    return improved;
}

// Sweeps until no move is accepted or the sweep budget runs out.
bool local_moving(ClusterState& state, Rng& rng, double gamma, double epsilon, int max_sweeps,
                  const std::vector<std::size_t>* group = nullptr) {
    const std::size_t n = state.graph().size();
    NeighborClusters nbc(n);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    bool any = false;
    for (int s = 0; s < max_sweeps; ++s) {
        if (!sweep(state, nbc, order, rng, gamma, epsilon, group))
            break;
        any = true;
    }
    return any;
}

// Queue-driven local moving: every node is visited once in shuffled order,
// then only neighbors of moved nodes are revisited. Cheaper than repeated
// full sweeps; stability is restored by the full-sweep polish at the end.
void queued_moving(ClusterState& state, Rng& rng, double gamma, double epsilon,
                   const std::vector<std::size_t>* group = nullptr) {
    const auto& g = state.graph();
    const std::size_t n = g.size();
    NeighborClusters nbc(n);
    std::vector<std::size_t> queue(n);
    std::iota(queue.begin(), queue.end(), 0);
    std::shuffle(queue.begin(), queue.end(), rng);
    std::vector<char> queued(n, 1);
    std::size_t head = 0;
    while (head < queue.size()) {
        const std::size_t item = queue[head++];
        queued[item] = 0;
        const std::size_t target = best_move(state, nbc, item, gamma, epsilon, group);
        if (target == state.cluster_of(item))
            continue;
        const std::size_t now = state.move(item, target);
        for (const auto& nb : g.attraction(item)) {
            if (queued[nb.node] || state.cluster_of(nb.node) == now)
                continue;
            if (group && (*group)[nb.node] != (*group)[item])
                continue;
            queued[nb.node] = 1;
            queue.push_back(nb.node);
        }
        // Keep the buffer from growing without bound.
        if (head > n && head * 2 > queue.size()) {
            queue.erase(queue.begin(), queue.begin() + static_cast<std::ptrdiff_t>(head));
            head = 0;
        }
    }
}

// Labels renumbered 0.. in first-occurrence order. Input labels are < n.
std::vector<std::size_t> dense_labels(const std::vector<std::size_t>& labels) {
    std::vector<std::size_t> out(labels.size());
    std::vector<std::size_t> ids(labels.size(), kNewCluster);
    std::size_t next = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        auto& id = ids[labels[i]];
        if (id == kNewCluster)
            id = next++;
        out[i] = id;
    }
    return out;
}

}  // namespace

AggregateGraph aggregate(const AffinityGraph& graph, const Partition& partition) {
    const std::size_t n = graph.size();
    if (partition.size() != n)
        throw InputError("partition length does not match graph size");
    const std::size_t k = partition.cluster_count();
    const auto lab = partition.labels();

    AffinityParts parts;
    parts.n = k;
    parts.scheme = graph.scheme();
    parts.strengths.assign(k, 0.0);
    parts.repulsion_mass.assign(k, 0.0);
    parts.repulsion_scale = graph.repulsion_scale();
    parts.self_attraction.assign(k, 0.0);
    parts.self_repulsion.assign(k, 0.0);
    parts.total = graph.total_attraction();

    AggregateGraph out{AffinityGraph(AffinityParts{}), std::vector<std::vector<std::size_t>>(k)};
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t u = lab[i];
        out.members[u].push_back(i);
        parts.strengths[u] += graph.strength(i);
        const double m = graph.repulsion_mass(i);
        parts.self_attraction[u] += graph.self_attraction(i);
        parts.self_repulsion[u] += graph.self_repulsion(i) + graph.repulsion_scale() * m * parts.repulsion_mass[u];
        parts.repulsion_mass[u] += m;
    }

    // Sum edges per super-node pair, one super-node at a time, with a
    // scratch row indexed by the other end.
    std::vector<double> att(k, 0.0), rep(k, 0.0);
    std::vector<char> seen_att(k, 0), seen_rep(k, 0);
    std::vector<std::size_t> touched_att, touched_rep;
    for (std::size_t u = 0; u < k; ++u) {
        for (std::size_t i : out.members[u]) {
            for (const auto& nb : graph.attraction(i)) {
                if (nb.node <= i && lab[nb.node] == u)
                    continue;
                const std::size_t v = lab[nb.node];
                if (v == u) {
                    parts.self_attraction[u] += nb.weight;
                } else if (v > u) {
                    if (!seen_att[v]) {
                        seen_att[v] = 1;
                        touched_att.push_back(v);
                    }
                    att[v] += nb.weight;
                }
            }
            for (const auto& nb : graph.explicit_repulsion(i)) {
                if (nb.node <= i && lab[nb.node] == u)
                    continue;
                const std::size_t v = lab[nb.node];
                if (v == u) {
                    parts.self_repulsion[u] += nb.weight;
                } else if (v > u) {
                    if (!seen_rep[v]) {
                        seen_rep[v] = 1;
                        touched_rep.push_back(v);
                    }
                    rep[v] += nb.weight;
                }
            }
        }
        std::sort(touched_att.begin(), touched_att.end());
        for (std::size_t v : touched_att) {
            parts.attraction.push_back({u, v, att[v]});
            att[v] = 0.0;
            seen_att[v] = 0;
        }
        std::sort(touched_rep.begin(), touched_rep.end());
        for (std::size_t v : touched_rep) {
            parts.repulsion.push_back({u, v, rep[v]});
            rep[v] = 0.0;
            seen_rep[v] = 0;
        }
        touched_att.clear();
        touched_rep.clear();
    }
    out.graph = AffinityGraph(std::move(parts));
    return out;
}

std::pair<Partition, bool> local_move_sweep(const AffinityGraph& graph, const Partition& partition,
                                            double gamma, Rng& rng, double epsilon) {
    check_gamma(gamma);
    ClusterState state(graph, partition.labels());
    NeighborClusters nbc(graph.size());
    std::vector<std::size_t> order(graph.size());
    std::iota(order.begin(), order.end(), 0);
    const bool improved = sweep(state, nbc, order, rng, gamma, epsilon, nullptr);
    return {state.partition(), improved};
}

bool is_single_move_stable(const AffinityGraph& graph, const Partition& partition, double gamma,
                           double epsilon) {
    ClusterState state(graph, partition.labels());
    NeighborClusters nbc(graph.size());
    for (std::size_t i = 0; i < graph.size(); ++i) {
        if (best_move(state, nbc, i, gamma, epsilon, nullptr) != state.cluster_of(i))
            return false;
    }
    return true;
}

OptimizeResult optimize(const AffinityGraph& graph, double gamma, const OptimizeOptions& opts) {
    check_gamma(gamma);
    if (opts.max_levels < 1 || opts.max_sweeps_per_level < 1 || !(opts.epsilon > 0.0))
        throw ParameterError("optimizer bounds must be positive");
    const std::size_t n = graph.size();
    Rng rng(opts.seed);

    // Level state: current graph, the original items behind each node and
    // the working partition of the current graph's nodes.
    const AffinityGraph* current = &graph;
    AffinityGraph level_graph = graph;
    std::vector<std::size_t> item_node(n);
    std::iota(item_node.begin(), item_node.end(), 0);
    std::vector<std::size_t> node_cluster(n);
    std::iota(node_cluster.begin(), node_cluster.end(), 0);

    for (int level = 0; level < opts.max_levels; ++level) {
        const std::size_t nodes = current->size();
        ClusterState state(*current, node_cluster);
        queued_moving(state, rng, gamma, opts.epsilon);
        node_cluster = dense_labels(state.labels());
        const std::size_t clusters =
            1 + *std::max_element(node_cluster.begin(), node_cluster.end());
        if (clusters == nodes)
            break;

        // Refinement: restart from singletons inside every cluster and only
        // allow merges between nodes of the same cluster.
        std::vector<std::size_t> singles(nodes);
        std::iota(singles.begin(), singles.end(), 0);
        ClusterState refine(*current, singles);
        queued_moving(refine, rng, gamma, opts.epsilon, &node_cluster);
        const auto refined = Partition::from_labels(refine.labels());
        if (refined.cluster_count() == nodes)
            break;

        auto agg = aggregate(*current, refined);
        std::vector<std::size_t> next_cluster(refined.cluster_count());
        for (std::size_t u = 0; u < agg.members.size(); ++u)
            next_cluster[u] = node_cluster[agg.members[u].front()];
        for (auto& node : item_node)
            node = refined[node];
        node_cluster = dense_labels(next_cluster);
        level_graph = std::move(agg.graph);
        current = &level_graph;
    }

    // Expand to items and polish on the input graph so that single-item
    // moves cannot improve the result.
    std::vector<std::size_t> labels(n);
    for (std::size_t i = 0; i < n; ++i)
        labels[i] = node_cluster[item_node[i]];
    ClusterState state(graph, labels);
    const int polish_budget = opts.max_levels * opts.max_sweeps_per_level;
    local_moving(state, rng, gamma, opts.epsilon, polish_budget);

    OptimizeResult res;
    res.partition = state.partition();
    res.energy = hamiltonian(graph, res.partition, gamma);
    return res;
}

}  // namespace confres
