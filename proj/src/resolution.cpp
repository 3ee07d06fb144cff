#include "confres/resolution.hpp"

#include "confres/error.hpp"
#include "confres/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <map>

namespace confres {

namespace {

struct Probe {
    double gamma = 0.0;
    Partition partition;
    LandscapePoint point;
};

class Discovery {
public:
    Discovery(const AffinityGraph& graph, double gamma_max, const SweepOptions& opts)
        : graph_(graph), opts_(opts), floor_(gamma_max * opts.width_floor_fraction) {}

    Probe probe(double gamma) const {
        auto res = optimize(graph_, gamma, opts_.optimize);
        return {gamma, res.partition, {res.energy.h_a, res.energy.h_r}};
    }

    // Probes strictly between lo and hi until the two ends agree, the next
    // probe brings nothing better than the known lines, or the budget ends.
    // Found probes are appended in gamma order.
    void divide(const Probe& lo, const Probe& hi, int depth, unsigned workers,
                std::vector<Probe>& out, bool& exhausted) const {
        if (lo.partition == hi.partition)
            return;
        const double width = hi.gamma - lo.gamma;
        if (width < floor_ || depth >= opts_.max_depth) {
            exhausted = true;
            return;
        }
        // Both energies are linear in gamma, so dominance between the two
        // known partitions can only change where their lines cross.
        double gamma = 0.5 * (lo.gamma + hi.gamma);
        const double denom = lo.point.h_r - hi.point.h_r;
        if (denom > 0.0) {
            const double cross = (hi.point.h_a - lo.point.h_a) / denom;
            if (std::isfinite(cross))
                gamma = cross;
        }
        const double margin = 0.5 * std::min(floor_, 0.5 * width);
        gamma = std::clamp(gamma, lo.gamma + margin, hi.gamma - margin);

        Probe mid = probe(gamma);
        const double known = std::min(lo.point.at(gamma), hi.point.at(gamma));
        const double tol = 1e-12 * std::max(1.0, std::abs(known));
        const bool fresh = !(mid.partition == lo.partition) && !(mid.partition == hi.partition);
        if (!fresh || !(mid.point.at(gamma) < known - tol)) {
            if (fresh)
                out.push_back(std::move(mid));
            return;
        }

        std::vector<Probe> left, right;
        bool ex_left = false, ex_right = false;
        if (workers > 1) {
            auto fut = std::async(std::launch::async, [&] {
                divide(lo, mid, depth + 1, workers / 2, left, ex_left);
            });
            divide(mid, hi, depth + 1, workers - workers / 2, right, ex_right);
            fut.get();
        } else {
            divide(lo, mid, depth + 1, 1, left, ex_left);
            divide(mid, hi, depth + 1, 1, right, ex_right);
        }
        exhausted = exhausted || ex_left || ex_right;
        out.insert(out.end(), std::make_move_iterator(left.begin()),
                   std::make_move_iterator(left.end()));
        out.push_back(std::move(mid));
        out.insert(out.end(), std::make_move_iterator(right.begin()),
                   std::make_move_iterator(right.end()));
    }

private:
    const AffinityGraph& graph_;
    SweepOptions opts_;
    double floor_;
};

}  // namespace

const PlateauEntry& ConfigurationSet::at_gamma(double gamma) const {
    if (entries.empty())
        throw InputError("empty configuration set");
    for (const auto& e : entries)
        if (gamma >= e.gamma_lo && gamma < e.gamma_hi)
            return e;
    return entries.back();
}

double PlateauEntry::log_width(double floor) const {
    const double lo = std::max(gamma_lo, floor);
    return gamma_hi > lo ? std::log(gamma_hi / lo) : 0.0;
}

const PlateauEntry& ConfigurationSet::widest(WidthScale scale) const {
    if (entries.empty())
        throw InputError("empty configuration set");
    auto measure = [&](const PlateauEntry& e) {
        return scale == WidthScale::linear ? e.width() : e.log_width(width_floor);
    };
    const PlateauEntry* best = &entries.front();
    for (const auto& e : entries)
        if (measure(e) > measure(*best))
            best = &e;
    return *best;
}

std::vector<EnvelopeSegment> lower_envelope(std::span<const EnvelopeLine> lines) {
    std::vector<EnvelopeSegment> out;
    if (lines.empty())
        return out;
    auto better_at_zero = [](const EnvelopeLine& a, const EnvelopeLine& b) {
        if (a.h_a != b.h_a)
            return a.h_a < b.h_a;
        if (a.h_r != b.h_r)
            return a.h_r < b.h_r;
        return a.id < b.id;
    };
    const EnvelopeLine* cur = &*std::min_element(lines.begin(), lines.end(), better_at_zero);
    double gamma = 0.0;
    while (true) {
        const EnvelopeLine* next = nullptr;
        double next_gamma = std::numeric_limits<double>::infinity();
        for (const auto& l : lines) {
            if (!(l.h_r < cur->h_r))
                continue;
            double t = (l.h_a - cur->h_a) / (cur->h_r - l.h_r);
            t = std::max(t, gamma);
            if (t < next_gamma ||
                (t == next_gamma && (l.h_r < next->h_r || (l.h_r == next->h_r && l.id < next->id)))) {
                next = &l;
                next_gamma = t;
            }
        }
        if (!next) {
            out.push_back({cur->id, gamma, std::numeric_limits<double>::infinity()});
            break;
        }
        if (next_gamma > gamma)
            out.push_back({cur->id, gamma, next_gamma});
        cur = next;
        gamma = next_gamma;
    }
    return out;
}

ConfigurationSet find_configurations(const AffinityGraph& graph, double gamma_max,
                                     const SweepOptions& opts) {
    if (!(gamma_max > 0.0) || !std::isfinite(gamma_max))
        throw ParameterError("gamma_max must be positive and finite");
    if (!(opts.width_floor_fraction > 0.0) || opts.max_depth < 1)
        throw ParameterError("sweep budget must be positive");

    Discovery discovery(graph, gamma_max, opts);
    Probe lo = discovery.probe(0.0);
    Probe hi = discovery.probe(gamma_max);
    std::vector<Probe> inner;
    bool exhausted = false;
    discovery.divide(lo, hi, 0, std::max(1u, opts.threads), inner, exhausted);

    std::vector<Probe> probes;
    probes.push_back(std::move(lo));
    for (auto& p : inner)
        probes.push_back(std::move(p));
    probes.push_back(std::move(hi));
    // All singletons never needs a probe: its energy is identically zero.
    const std::size_t n = graph.size();
    probes.push_back({gamma_max, Partition::singletons(n), {0.0, 0.0}});

    ConfigurationSet set;
    set.gamma_max = gamma_max;
    set.width_floor = gamma_max * opts.width_floor_fraction;
    set.budget_exhausted = exhausted;
    std::vector<LandscapePoint> points;
    std::map<std::vector<std::size_t>, std::size_t> seen;
    for (auto& p : probes) {
        std::vector<std::size_t> key(p.partition.labels().begin(), p.partition.labels().end());
        if (seen.emplace(std::move(key), set.candidates.size()).second) {
            set.candidates.push_back(p.partition);
            points.push_back(p.point);
        }
    }

    std::vector<EnvelopeLine> lines;
    for (std::size_t id = 0; id < points.size(); ++id)
        lines.push_back({id, points[id].h_a, points[id].h_r});
    for (const auto& seg : lower_envelope(lines)) {
        if (seg.gamma_lo >= gamma_max)
            break;
        PlateauEntry e;
        e.gamma_lo = seg.gamma_lo;
        e.gamma_hi = std::min(seg.gamma_hi, gamma_max);
        e.partition = set.candidates[seg.id];
        e.h_a = points[seg.id].h_a;
        e.h_r = points[seg.id].h_r;
        e.cluster_count = e.partition.cluster_count();
        set.entries.push_back(std::move(e));
    }
    for (std::size_t t = 0; t < set.entries.size(); ++t) {
        const auto k = set.entries[t].cluster_count;
        set.has_whole = set.has_whole || k == 1;
        set.has_singletons = set.has_singletons || k == n;
        if (t > 0 && k < set.entries[t - 1].cluster_count)
            ++set.monotonicity_violations;
    }
    return set;
}

std::vector<SweepScore> evaluate_sweep(const ConfigurationSet& configs, std::span<const int> truth,
                                       LabelLevel level) {
    std::vector<SweepScore> out;
    for (const auto& e : configs.entries) {
        if (truth.size() != e.partition.size())
            throw InputError("truth labels have length " + std::to_string(truth.size()) +
                             ", partitions have " + std::to_string(e.partition.size()));
        const auto pred = e.partition.as_ints();
        out.push_back({e.gamma_lo, e.gamma_hi, e.cluster_count,
                       ari(contingency(truth, pred)), level});
    }
    return out;
}

std::string to_string(LabelLevel level) {
    switch (level) {
    case LabelLevel::superordinate:
        return "superordinate";
    case LabelLevel::basic:
        return "basic";
    case LabelLevel::other:
        break;
    }
    return "other";
}

}  // namespace confres
