#pragma once
// Desk-scale experiments on synthetic data: hierarchical selectivity,
// energy-based novelty detection and category evolution, plus the k-means
// baseline they are compared against.

#include "confres/evaluation.hpp"
#include "confres/graph.hpp"
#include "confres/resolution.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace confres {

struct HierarchySpec {
    std::size_t superordinate_count = 2;
    std::size_t basic_per_super = 2;
    std::size_t points_per_basic = 50;
    double super_separation = 24.0;
    double basic_separation = 6.0;
    std::size_t dimension = 2;
    double noise_sigma = 1.0;
    std::uint64_t seed = 1;
};

struct HierarchyData {
    PointSet points;
    std::vector<int> super_labels;
    std::vector<int> basic_labels;
};

HierarchyData generate_hierarchy(const HierarchySpec& spec);

// Four Gaussian blobs of 250 points in 16 dimensions: the inlier set of
// the novelty experiment.
HierarchySpec novelty_blobs(std::uint64_t seed = 1);

struct OutlierData {
    PointSet points;  // inliers first, outliers appended
    std::vector<bool> novel;
};

// Appends round(fraction * n) points drawn uniformly from the bounding box
// of `points`, widened by `spread` times its range on every side.
OutlierData inject_outliers(const PointSet& points, double fraction, double spread,
                            std::uint64_t seed);

enum class KMeansInit { plus_plus, uniform };

struct KMeansOptions {
    KMeansInit init = KMeansInit::plus_plus;
    int max_iter = 100;
    int restarts = 1;  // the run with the lowest inertia is kept
};

// Lloyd iterations from k distinct seeded items (k-means++ weighting or
// uniform). Empty clusters are reseeded with the point farthest from its
// center.
Partition kmeans_baseline(const PointSet& points, std::size_t k, std::uint64_t seed,
                          const KMeansOptions& opts = {});

enum class EventKind { split, merge };
std::string to_string(EventKind kind);

struct ClusterEvent {
    EventKind kind = EventKind::split;
    std::vector<std::size_t> sources;  // clusters of the earlier partition
    std::vector<std::size_t> targets;  // clusters of the later partition
};

// A row of the contingency table spreading at least `threshold` of its mass
// onto two or more columns is a split; a column drawing at least
// `threshold` of its mass from two or more rows is a merge.
std::vector<ClusterEvent> detect_events(const Partition& before, const Partition& after,
                                        double threshold = 0.2);

struct GraphOptions {
    std::size_t k = 10;
    Metric metric = Metric::euclidean;
    Kernel kernel = Kernel::self_tuning_gaussian;
    RepulsionScheme scheme = RepulsionScheme::configuration_null;
};

AffinityGraph affinity_from_points(const PointSet& points, const GraphOptions& opts,
                                   unsigned threads = 1);

struct PlateauMatch {
    bool found = false;
    std::size_t index = 0;
    double gamma_lo = 0.0;
    double gamma_hi = 0.0;
    std::size_t cluster_count = 0;
    double ari = 0.0;
};

struct HierarchyReport {
    ConfigurationSet configs;
    std::vector<SweepScore> super_curve;
    std::vector<SweepScore> basic_curve;
    PlateauMatch super_match;
    PlateauMatch basic_match;
    bool coarse_before_fine = false;
};

struct ExperimentOptions {
    GraphOptions graph;
    SweepOptions sweep;
};

HierarchyReport run_hierarchy_experiment(const HierarchySpec& spec, double gamma_max,
                                         const ExperimentOptions& opts = {});

// Best plateau (highest ARI, earliest on ties) against the given labels.
PlateauMatch best_plateau(const std::vector<SweepScore>& curve);

struct GammaPolicy {
    enum class Kind { widest_plateau, fixed } kind = Kind::widest_plateau;
    double gamma = 1.0;       // used by fixed
    double gamma_max = 4.0;   // sweep range for widest_plateau
    WidthScale width_scale = WidthScale::log;
};

struct NoveltyReport {
    double gamma = 0.0;
    std::size_t cluster_count = 0;
    double auc = 0.0;
    double mean_novel = 0.0;
    double mean_familiar = 0.0;
    std::size_t items = 0;
    std::size_t novel_items = 0;
    std::vector<double> scores;
    std::vector<bool> novel;
};

struct NoveltyOptions {
    ExperimentOptions experiment;
    double spread = 0.1;
    std::uint64_t outlier_seed = 1;
};

NoveltyReport run_novelty_experiment(const HierarchySpec& spec, double fraction,
                                     const GammaPolicy& policy, const NoveltyOptions& opts = {});

enum class Method { configurations, kmeans };
std::string to_string(Method m);

struct ScheduledEvent {
    std::size_t t = 0;
    EventKind kind = EventKind::split;
    std::vector<int> categories;
};

struct EvolutionSpec {
    std::size_t steps = 12;
    std::optional<std::size_t> split_at = 10;
    std::optional<std::size_t> merge_at = 2;
    std::size_t groups = 4;
    std::size_t points_per_group = 60;
    double separation = 10.0;
    double noise_sigma = 1.0;
    double jitter = 0.25;
    std::size_t dimension = 2;
    std::uint64_t seed = 1;
    double gamma_max = 4.0;
    WidthScale width_scale = WidthScale::log;
    GraphOptions graph;
    OptimizeOptions optimize;
    KMeansOptions kmeans;
    std::vector<Method> methods = {Method::configurations, Method::kmeans};
};

struct MethodTrace {
    Method method = Method::configurations;
    std::vector<Partition> partitions;   // one per step
    std::vector<double> inverse_ari;     // steps - 1 entries
    std::vector<double> gammas;          // working gamma per step (configurations)
    std::vector<std::vector<ClusterEvent>> detected;  // per transition

    double mean_inverse_ari() const;
};

struct EvolutionTrace {
    std::size_t steps = 0;
    std::vector<PointSet> points;
    std::vector<std::vector<int>> truth;
    std::vector<ScheduledEvent> events;
    std::vector<MethodTrace> methods;

    const MethodTrace& method(Method m) const;
};

EvolutionTrace run_evolution_experiment(const EvolutionSpec& spec);

}  // namespace confres
