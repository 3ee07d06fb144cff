#pragma once
// Discovery of the configurations that minimize H over a range of
// resolutions, and the lower envelope of their energy lines.

#include "confres/energy.hpp"
#include "confres/optimizer.hpp"

#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace confres {

enum class WidthScale { linear, log };

struct PlateauEntry {
    double gamma_lo = 0.0;
    double gamma_hi = 0.0;
    Partition partition;
    double h_a = 0.0;
    double h_r = 0.0;
    std::size_t cluster_count = 0;

    double width() const { return gamma_hi - gamma_lo; }
    // Width in log gamma; the lower end is floored at `floor` so the
    // plateau starting at zero has a finite width.
    double log_width(double floor) const;
};

struct ConfigurationSet {
    double gamma_max = 0.0;
    std::vector<PlateauEntry> entries;  // ordered by gamma, tiling [0, gamma_max]
    // Every distinct partition the sweep evaluated, in discovery order.
    std::vector<Partition> candidates;
    bool has_whole = false;       // all-in-one configuration among the plateaus
    bool has_singletons = false;  // all-singletons configuration among the plateaus
    bool budget_exhausted = false;
    // Adjacent plateaus whose cluster count decreases with gamma.
    std::size_t monotonicity_violations = 0;

    std::size_t size() const { return entries.size(); }
    const PlateauEntry& at_gamma(double gamma) const;
    double width_floor = 0.0;  // smallest gamma gap the sweep resolves

    const PlateauEntry& widest(WidthScale scale = WidthScale::linear) const;
};

struct SweepOptions {
    OptimizeOptions optimize;
    double width_floor_fraction = 1e-4;  // of gamma_max
    int max_depth = 32;
    unsigned threads = 1;
};

ConfigurationSet find_configurations(const AffinityGraph& graph, double gamma_max,
                                     const SweepOptions& opts = {});

struct EnvelopeLine {
    std::size_t id = 0;
    double h_a = 0.0;
    double h_r = 0.0;
};

struct EnvelopeSegment {
    std::size_t id = 0;
    double gamma_lo = 0.0;
    double gamma_hi = std::numeric_limits<double>::infinity();
};

// Lines H = h_a + gamma * h_r that are minimal for some gamma >= 0, ordered
// by the gamma range where each one dominates. Ties prefer the smaller h_r,
// then the smaller id.
std::vector<EnvelopeSegment> lower_envelope(std::span<const EnvelopeLine> lines);

enum class LabelLevel { superordinate, basic, other };

struct SweepScore {
    double gamma_lo = 0.0;
    double gamma_hi = 0.0;
    std::size_t cluster_count = 0;
    double ari = 0.0;
    LabelLevel level = LabelLevel::other;
};

std::vector<SweepScore> evaluate_sweep(const ConfigurationSet& configs, std::span<const int> truth,
                                       LabelLevel level = LabelLevel::other);

std::string to_string(LabelLevel level);

}  // namespace confres
