#pragma once
// Point sets, kNN neighbor graphs and the attraction/repulsion weight pair
// consumed by the energy model.

#include <cstddef>
#include <span>
#include <vector>

namespace confres {

// Dense n x d matrix of finite coordinates, row-major.
class PointSet {
public:
    PointSet() = default;
    PointSet(std::size_t rows, std::size_t cols, std::vector<double> values);

    std::size_t size() const { return rows_; }
    std::size_t dim() const { return cols_; }
    std::span<const double> row(std::size_t i) const {
        return {values_.data() + i * cols_, cols_};
    }
    const std::vector<double>& values() const { return values_; }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> values_;
};

enum class Metric { euclidean, cosine };
enum class Kernel { self_tuning_gaussian, inverse_distance };
enum class RepulsionScheme { configuration_null, uniform, explicit_weights };

struct NeighborEdge {
    std::size_t i;
    std::size_t j;
    double distance;
};

// Symmetrized kNN graph. Every undirected edge is stored once with i < j,
// sorted by (i, j).
struct NeighborGraph {
    std::size_t n = 0;
    std::size_t k = 0;
    std::vector<NeighborEdge> edges;
};

struct WeightedEdge {
    std::size_t i;
    std::size_t j;
    double weight;
};

struct Neighbor {
    std::size_t node;
    double weight;
};

// Raw parts of an AffinityGraph. Nodes may stand for groups of original
// items (see aggregate()), which is why self terms and repulsion masses are
// stored rather than derived.
//
// Repulsion between distinct nodes u, v is
//     w-_uv = repulsion_scale * mass_u * mass_v + explicit_uv
// which covers the configuration null (mass = strength, scale = 1/2W), the
// uniform scheme (mass = item count, scale = 1/n) and explicit weights
// (scale = 0).
struct AffinityParts {
    std::size_t n = 0;
    std::vector<WeightedEdge> attraction;  // unordered pairs, i != j
    std::vector<WeightedEdge> repulsion;   // explicit pairs, i != j
    RepulsionScheme scheme = RepulsionScheme::configuration_null;
    std::vector<double> strengths;
    std::vector<double> repulsion_mass;
    double repulsion_scale = 0.0;
    std::vector<double> self_attraction;
    std::vector<double> self_repulsion;
    double total = 0.0;
};

// Immutable symmetric attraction/repulsion weights over n nodes, stored as
// CSR adjacency lists sorted by neighbor index.
class AffinityGraph {
public:
    explicit AffinityGraph(AffinityParts parts);

    std::size_t size() const { return n_; }
    RepulsionScheme scheme() const { return scheme_; }

    std::span<const Neighbor> attraction(std::size_t i) const {
        return {att_.data() + att_offsets_[i], att_offsets_[i + 1] - att_offsets_[i]};
    }
    std::span<const Neighbor> explicit_repulsion(std::size_t i) const {
        return {rep_.data() + rep_offsets_[i], rep_offsets_[i + 1] - rep_offsets_[i]};
    }

    double strength(std::size_t i) const { return strengths_[i]; }
    const std::vector<double>& strengths() const { return strengths_; }
    // W = sum over unordered pairs of w+ (including pairs folded into self terms).
    double total_attraction() const { return total_; }

    double repulsion_mass(std::size_t i) const { return mass_[i]; }
    double repulsion_scale() const { return scale_; }
    double self_attraction(std::size_t i) const { return self_att_[i]; }
    double self_repulsion(std::size_t i) const { return self_rep_[i]; }

    double attraction_weight(std::size_t i, std::size_t j) const;
    double repulsion_weight(std::size_t i, std::size_t j) const;

    std::size_t edge_count() const { return att_.size() / 2; }
    double max_attraction() const;

private:
    std::size_t n_ = 0;
    RepulsionScheme scheme_ = RepulsionScheme::configuration_null;
    std::vector<std::size_t> att_offsets_;
    std::vector<Neighbor> att_;
    std::vector<std::size_t> rep_offsets_;
    std::vector<Neighbor> rep_;
    std::vector<double> strengths_;
    std::vector<double> mass_;
    double scale_ = 0.0;
    std::vector<double> self_att_;
    std::vector<double> self_rep_;
    double total_ = 0.0;
};

// Links each item to its k nearest others (ties by smaller index) and
// symmetrizes by union. Work is split over `threads` workers; the result
// does not depend on the thread count.
NeighborGraph build_knn_graph(const PointSet& points, std::size_t k,
                              Metric metric = Metric::euclidean, unsigned threads = 1);

// Applies the similarity kernel, row-normalizes to a stochastic matrix P and
// symmetrizes w+ = (P + P^T) / 2.
AffinityGraph derive_affinity(const NeighborGraph& graph,
                              Kernel kernel = Kernel::self_tuning_gaussian,
                              RepulsionScheme scheme = RepulsionScheme::configuration_null);

// Directed duplicates are summed per direction, then both directions are
// averaged. Explicit repulsion edges follow the same rule.
AffinityGraph from_edge_list(std::size_t n, std::span<const WeightedEdge> edges,
                             RepulsionScheme scheme = RepulsionScheme::configuration_null,
                             std::span<const WeightedEdge> repulsion = {});

// Row-stochastic intermediate of derive_affinity, exposed for testing.
std::vector<std::vector<Neighbor>> stochastic_rows(const NeighborGraph& graph, Kernel kernel);

// Smallest gamma above which every attracting pair costs more than it
// gains: max w+ / min positive w-. Infinite when some attracting pair has no
// repulsion, zero when there is no attraction at all.
double singleton_bound(const AffinityGraph& graph);

}  // namespace confres
