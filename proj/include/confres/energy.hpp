#pragma once
// Hamiltonian energy of a partition: within-cluster attraction against
// gamma-weighted within-cluster repulsion.
//
//     H(w; gamma) = h_a(w) + gamma * h_r(w)
//     h_a = -sum_{i<j, w_i = w_j} w+_ij        h_r = sum_{i<j, w_i = w_j} w-_ij
//
// Self pairs (i = j) never contribute.

#include "confres/graph.hpp"

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

namespace confres {

// Cluster-label vector in canonical form: labels appear in first-occurrence
// order starting at 0.
class Partition {
public:
    Partition() = default;

    // Canonicalizes arbitrary labels.
    static Partition from_labels(std::span<const std::size_t> labels);
    static Partition from_labels(std::span<const int> labels);
    static Partition singletons(std::size_t n);
    static Partition whole(std::size_t n);

    std::size_t size() const { return labels_.size(); }
    std::size_t cluster_count() const { return count_; }
    std::span<const std::size_t> labels() const { return labels_; }
    std::size_t operator[](std::size_t i) const { return labels_[i]; }
    std::vector<int> as_ints() const;
    std::vector<std::size_t> cluster_sizes() const;

    bool operator==(const Partition& other) const { return labels_ == other.labels_; }

private:
    std::vector<std::size_t> labels_;
    std::size_t count_ = 0;
};

struct EnergySummary {
    double gamma = 0.0;
    double h_a = 0.0;  // <= 0
    double h_r = 0.0;  // >= 0
    double H = 0.0;
};

struct LandscapePoint {
    double h_a = 0.0;
    double h_r = 0.0;
    double at(double gamma) const { return h_a + gamma * h_r; }
};

LandscapePoint landscape_point(const AffinityGraph& graph, const Partition& partition);

EnergySummary hamiltonian(const AffinityGraph& graph, const Partition& partition, double gamma);

inline constexpr std::size_t kNewCluster = std::numeric_limits<std::size_t>::max();

// Mutable cluster assignment with per-cluster repulsion-mass sums, so that
// single-item move deltas cost O(degree). Cluster ids live in [0, n);
// empty ids are recycled when a new cluster is opened.
class ClusterState {
public:
    ClusterState(const AffinityGraph& graph, std::span<const std::size_t> labels);

    const AffinityGraph& graph() const { return *graph_; }
    std::size_t cluster_of(std::size_t item) const { return labels_[item]; }
    std::size_t cluster_size(std::size_t c) const { return sizes_[c]; }
    double cluster_mass(std::size_t c) const { return mass_[c]; }
    const std::vector<std::size_t>& labels() const { return labels_; }
    Partition partition() const { return Partition::from_labels(labels_); }

    // Energy change of moving `item` into cluster `target` (kNewCluster opens
    // a fresh one). Costs O(deg(item)).
    double move_delta(std::size_t item, std::size_t target, double gamma) const;

    // Attraction/repulsion cost of `item` joining cluster c, given its summed
    // attraction and explicit repulsion to c's members (excluding itself).
    double join_cost(std::size_t item, std::size_t c, double attraction, double explicit_rep,
                     double gamma) const;

    // Moves `item`; returns the id it ended up in.
    std::size_t move(std::size_t item, std::size_t target);

private:
    std::size_t fresh_id();

    const AffinityGraph* graph_;
    std::vector<std::size_t> labels_;
    std::vector<std::size_t> sizes_;
    std::vector<double> mass_;
    std::vector<std::size_t> free_ids_;
};

// Delta of moving one item, H(after) - H(before). `target` is a canonical
// cluster id of `partition` or cluster_count() / kNewCluster for a new one.
double move_delta(const AffinityGraph& graph, const Partition& partition, std::size_t item,
                  std::size_t target, double gamma);

}  // namespace confres
