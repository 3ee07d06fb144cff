#include "confres/energy.hpp"

#include "confres/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <unordered_map>

namespace confres {

namespace {

template <typename T>
std::vector<std::size_t> canonicalize(std::span<const T> labels, std::size_t& count) {
    std::unordered_map<T, std::size_t> seen;
    seen.reserve(labels.size());
    std::vector<std::size_t> out(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) {
        auto [it, inserted] = seen.emplace(labels[i], seen.size());
        out[i] = it->second;
    }
    count = seen.size();
    return out;
}

void check_gamma(double gamma) {
    if (!(gamma >= 0.0) || !std::isfinite(gamma))
        throw ParameterError("gamma must be finite and non-negative");
}

}  // namespace

Partition Partition::from_labels(std::span<const std::size_t> labels) {
    Partition p;
    p.labels_ = canonicalize(labels, p.count_);
    return p;
}

Partition Partition::from_labels(std::span<const int> labels) {
    Partition p;
    p.labels_ = canonicalize(labels, p.count_);
    return p;
}

Partition Partition::singletons(std::size_t n) {
    Partition p;
    p.labels_.resize(n);
    for (std::size_t i = 0; i < n; ++i)
        p.labels_[i] = i;
    p.count_ = n;
    return p;
}

Partition Partition::whole(std::size_t n) {
    Partition p;
    p.labels_.assign(n, 0);
    p.count_ = n > 0 ? 1 : 0;
    return p;
}

std::vector<int> Partition::as_ints() const {
    return {labels_.begin(), labels_.end()};
}

std::vector<std::size_t> Partition::cluster_sizes() const {
    std::vector<std::size_t> s(count_, 0);
    for (auto l : labels_)
        ++s[l];
    return s;
}

LandscapePoint landscape_point(const AffinityGraph& graph, const Partition& partition) {
    const std::size_t n = graph.size();
    if (partition.size() != n)
        throw InputError("partition length " + std::to_string(partition.size()) +
                         " does not match graph size " + std::to_string(n));
    const auto lab = partition.labels();
    LandscapePoint pt;
    double att = 0.0, rep = 0.0;
    // Factorized repulsion accumulated as sum_j m_j * (mass of earlier
    // members), which avoids the cancellation of (sum m)^2 - sum m^2.
    std::vector<double> running(partition.cluster_count(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        att += graph.self_attraction(i);
        rep += graph.self_repulsion(i);
        for (const auto& nb : graph.attraction(i))
            if (nb.node > i && lab[nb.node] == lab[i])
                att += nb.weight;
        for (const auto& nb : graph.explicit_repulsion(i))
            if (nb.node > i && lab[nb.node] == lab[i])
                rep += nb.weight;
        const double m = graph.repulsion_mass(i);
        rep += graph.repulsion_scale() * m * running[lab[i]];
        running[lab[i]] += m;
    }
    pt.h_a = -att;
    pt.h_r = rep;
    return pt;
}

EnergySummary hamiltonian(const AffinityGraph& graph, const Partition& partition, double gamma) {
    check_gamma(gamma);
    const auto pt = landscape_point(graph, partition);
    return {gamma, pt.h_a, pt.h_r, pt.h_a + gamma * pt.h_r};
}

ClusterState::ClusterState(const AffinityGraph& graph, std::span<const std::size_t> labels)
    : graph_(&graph), labels_(labels.begin(), labels.end()) {
    const std::size_t n = graph.size();
    if (labels_.size() != n)
        throw InputError("label vector length does not match graph size");
    sizes_.assign(n, 0);
    mass_.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        if (labels_[i] >= n)
            throw InputError("cluster id out of range");
        ++sizes_[labels_[i]];
        mass_[labels_[i]] += graph.repulsion_mass(i);
    }
    for (std::size_t c = n; c-- > 0;)
        if (sizes_[c] == 0)
            free_ids_.push_back(c);
}

double ClusterState::join_cost(std::size_t item, std::size_t c, double attraction,
                               double explicit_rep, double gamma) const {
    const double m = graph_->repulsion_mass(item);
    double other_mass = mass_[c];
    if (labels_[item] == c)
        other_mass -= m;
    const double rep = graph_->repulsion_scale() * m * other_mass + explicit_rep;
    return -attraction + gamma * rep;
}

double ClusterState::move_delta(std::size_t item, std::size_t target, double gamma) const {
    const std::size_t cur = labels_[item];
    if (target == cur)
        return 0.0;
    if (target != kNewCluster && (target >= labels_.size() || sizes_[target] == 0))
        throw ParameterError("invalid move target");
    double att_cur = 0.0, att_tgt = 0.0, rep_cur = 0.0, rep_tgt = 0.0;
    for (const auto& nb : graph_->attraction(item)) {
        const std::size_t c = labels_[nb.node];
        if (c == cur)
            att_cur += nb.weight;
        else if (c == target)
            att_tgt += nb.weight;
    }
    for (const auto& nb : graph_->explicit_repulsion(item)) {
        const std::size_t c = labels_[nb.node];
        if (c == cur)
            rep_cur += nb.weight;
        else if (c == target)
            rep_tgt += nb.weight;
    }
    const double leave = join_cost(item, cur, att_cur, rep_cur, gamma);
    const double join = target == kNewCluster ? 0.0 : join_cost(item, target, att_tgt, rep_tgt, gamma);
    return join - leave;
}

std::size_t ClusterState::fresh_id() {
    while (!free_ids_.empty()) {
        const std::size_t id = free_ids_.back();
        free_ids_.pop_back();
        if (sizes_[id] == 0)
            return id;
    }
    throw NumericalError("no free cluster id");
}

std::size_t ClusterState::move(std::size_t item, std::size_t target) {
    const std::size_t cur = labels_[item];
    if (target == cur)
        return cur;
    if (target == kNewCluster) {
        if (sizes_[cur] == 1)
            return cur;
        target = fresh_id();
    }
    const double m = graph_->repulsion_mass(item);
    --sizes_[cur];
    mass_[cur] -= m;
    if (sizes_[cur] == 0) {
        mass_[cur] = 0.0;
        free_ids_.push_back(cur);
    }
    ++sizes_[target];
    mass_[target] += m;
    labels_[item] = target;
    return target;
}

double move_delta(const AffinityGraph& graph, const Partition& partition, std::size_t item,
                  std::size_t target, double gamma) {
    check_gamma(gamma);
    if (item >= partition.size())
        throw InputError("item out of range");
    if (target == partition.cluster_count())
        target = kNewCluster;
    else if (target != kNewCluster && target > partition.cluster_count())
        throw ParameterError("invalid move target " + std::to_string(target));
    ClusterState state(graph, partition.labels());
    return state.move_delta(item, target, gamma);
}

}  // namespace confres
