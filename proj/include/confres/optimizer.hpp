#pragma once
// Fixed-gamma minimization of the Hamiltonian with Leiden-style local
// moving, refinement and aggregation.

#include "confres/energy.hpp"
#include "confres/graph.hpp"

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace confres {

struct OptimizeOptions {
    std::uint64_t seed = 0;
    int max_levels = 32;
    // Levels use queue-driven moving; the final full-sweep polish gets
    // max_levels * max_sweeps_per_level sweeps.
    int max_sweeps_per_level = 100;
    double epsilon = 1e-12;  // minimum accepted |delta H|
};

struct OptimizeResult {
    Partition partition;
    EnergySummary energy;
};

// Graph over super-nodes plus, for every super-node, the nodes of the input
// graph it stands for.
struct AggregateGraph {
    AffinityGraph graph;
    std::vector<std::vector<std::size_t>> members;
};

using Rng = std::mt19937_64;

OptimizeResult optimize(const AffinityGraph& graph, double gamma, const OptimizeOptions& opts = {});

// One pass over the items in shuffled order. Each item goes to the
// neighboring cluster (or a new one) with the lowest delta H when that
// delta is below -epsilon; ties go to the lowest cluster id.
std::pair<Partition, bool> local_move_sweep(const AffinityGraph& graph, const Partition& partition,
                                            double gamma, Rng& rng, double epsilon = 1e-12);

// Collapses every cluster into one super-node. Energies of super-partitions
// equal the energies of their expansions on the input graph.
AggregateGraph aggregate(const AffinityGraph& graph, const Partition& partition);

// True when no single-item relocation lowers H by more than epsilon.
bool is_single_move_stable(const AffinityGraph& graph, const Partition& partition, double gamma,
                           double epsilon = 1e-12);

}  // namespace confres
