#include "confres/cognition.hpp"

#include "confres/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <set>

namespace confres {

namespace {

using Vec = std::vector<double>;

// `count` centers with pairwise (or adjacent, on a circle) distance
// `separation`, centered on the origin.
std::vector<Vec> spread_centers(std::size_t count, std::size_t dim, double separation) {
    std::vector<Vec> c(count, Vec(dim, 0.0));
    if (count <= 1)
        return c;
    if (dim >= count) {
        for (std::size_t s = 0; s < count; ++s)
            c[s][s] = separation / std::sqrt(2.0);
    } else if (dim == 1) {
        for (std::size_t s = 0; s < count; ++s)
            c[s][0] = separation * static_cast<double>(s);
    } else {
        const double pi = std::acos(-1.0);
        const double radius = separation / (2.0 * std::sin(pi / static_cast<double>(count)));
        for (std::size_t s = 0; s < count; ++s) {
            const double a = 2.0 * pi * static_cast<double>(s) / static_cast<double>(count);
            c[s][0] = radius * std::cos(a);
            c[s][1] = radius * std::sin(a);
        }
    }
    Vec mean(dim, 0.0);
    for (const auto& v : c)
        for (std::size_t d = 0; d < dim; ++d)
            mean[d] += v[d] / static_cast<double>(count);
    for (auto& v : c)
        for (std::size_t d = 0; d < dim; ++d)
            v[d] -= mean[d];
    return c;
}

double sq_dist(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t d = 0; d < a.size(); ++d) {
        const double t = a[d] - b[d];
        s += t * t;
    }
    return s;
}

std::vector<double> mean_scores(const std::vector<double>& scores, const std::vector<bool>& flags,
                                bool want) {
    double s = 0.0;
    std::size_t c = 0;
    for (std::size_t i = 0; i < scores.size(); ++i)
        if (flags[i] == want) {
            s += scores[i];
            ++c;
        }
    return {c ? s / static_cast<double>(c) : 0.0};
}

}  // namespace

HierarchyData generate_hierarchy(const HierarchySpec& spec) {
    if (spec.superordinate_count < 1 || spec.basic_per_super < 1 || spec.points_per_basic < 1 ||
        spec.dimension < 1)
        throw ParameterError("hierarchy counts and dimension must be positive");
    if (!(spec.super_separation > 0.0) || !(spec.basic_separation > 0.0))
        throw ParameterError("separations must be positive");
    if (spec.superordinate_count > 1 && spec.basic_per_super > 1 &&
        !(spec.super_separation > spec.basic_separation))
        throw ParameterError("super separation must exceed basic separation");
    if (!(spec.noise_sigma >= 0.0) || !std::isfinite(spec.noise_sigma))
        throw ParameterError("noise must be finite and non-negative");
    const std::size_t n = spec.superordinate_count * spec.basic_per_super * spec.points_per_basic;
    if (n < 2)
        throw ParameterError("hierarchy must produce at least 2 points");

    const std::size_t dim = spec.dimension;
    const auto supers = spread_centers(spec.superordinate_count, dim, spec.super_separation);
    const auto basics = spread_centers(spec.basic_per_super, dim, spec.basic_separation);
    std::mt19937_64 rng(spec.seed);
    std::normal_distribution<double> noise(0.0, 1.0);

    HierarchyData out;
    std::vector<double> values;
    values.reserve(n * dim);
    for (std::size_t s = 0; s < spec.superordinate_count; ++s) {
        for (std::size_t b = 0; b < spec.basic_per_super; ++b) {
            for (std::size_t p = 0; p < spec.points_per_basic; ++p) {
                for (std::size_t d = 0; d < dim; ++d)
                    values.push_back(supers[s][d] + basics[b][d] + spec.noise_sigma * noise(rng));
                out.super_labels.push_back(static_cast<int>(s));
                out.basic_labels.push_back(static_cast<int>(s * spec.basic_per_super + b));
            }
        }
    }
    out.points = PointSet(n, dim, std::move(values));
    return out;
}

HierarchySpec novelty_blobs(std::uint64_t seed) {
    HierarchySpec s;
    s.superordinate_count = 1;
    s.basic_per_super = 4;
    s.points_per_basic = 250;
    s.basic_separation = 8.0;
    s.dimension = 16;
    s.seed = seed;
    return s;
}

OutlierData inject_outliers(const PointSet& points, double fraction, double spread,
                            std::uint64_t seed) {
    if (!(fraction >= 0.0 && fraction < 1.0))
        throw ParameterError("outlier fraction must lie in [0, 1)");
    if (!(spread >= 0.0) || !std::isfinite(spread))
        throw ParameterError("spread must be finite and non-negative");
    const std::size_t n = points.size(), dim = points.dim();
    const auto count = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));

    Vec lo(dim, std::numeric_limits<double>::infinity()), hi(dim, -lo[0]);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t d = 0; d < dim; ++d) {
            lo[d] = std::min(lo[d], points.row(i)[d]);
            hi[d] = std::max(hi[d], points.row(i)[d]);
        }
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<double> values = points.values();
    for (std::size_t o = 0; o < count; ++o)
        for (std::size_t d = 0; d < dim; ++d) {
            const double range = hi[d] - lo[d];
            const double a = lo[d] - spread * range, b = hi[d] + spread * range;
            values.push_back(a + (b - a) * unit(rng));
        }
    OutlierData out{PointSet(n + count, dim, std::move(values)), std::vector<bool>(n + count, false)};
    for (std::size_t o = 0; o < count; ++o)
        out.novel[n + o] = true;
    return out;
}

namespace {

std::vector<std::size_t> uniform_seeds(std::size_t n, std::size_t k, std::mt19937_64& rng) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    order.resize(k);
    return order;
}

// k distinct items, each drawn with probability proportional to its squared
// distance from the nearest item already chosen.
std::vector<std::size_t> plus_plus_seeds(const PointSet& points, std::size_t k,
                                         std::mt19937_64& rng) {
    const std::size_t n = points.size();
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<std::size_t> chosen;
    std::vector<char> taken(n, 0);
    std::vector<double> d2(n, std::numeric_limits<double>::infinity());
    chosen.push_back(std::uniform_int_distribution<std::size_t>(0, n - 1)(rng));
    taken[chosen.back()] = 1;
    while (chosen.size() < k) {
        const auto last = points.row(chosen.back());
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            d2[i] = std::min(d2[i], sq_dist(points.row(i), last));
            if (!taken[i])
                total += d2[i];
        }
        std::size_t pick = n;
        if (total > 0.0) {
            double r = unit(rng) * total;
            for (std::size_t i = 0; i < n; ++i) {
                if (taken[i] || d2[i] <= 0.0)
                    continue;
                pick = i;
                r -= d2[i];
                if (r < 0.0)
                    break;
            }
        }
        if (pick == n) {
            // Every remaining item coincides with a chosen one.
            std::vector<std::size_t> free;
            for (std::size_t i = 0; i < n; ++i)
                if (!taken[i])
                    free.push_back(i);
            pick = free[std::uniform_int_distribution<std::size_t>(0, free.size() - 1)(rng)];
        }
        taken[pick] = 1;
        chosen.push_back(pick);
    }
    return chosen;
}

// One Lloyd run; returns assignments and sets `inertia`.
std::vector<std::size_t> lloyd(const PointSet& points, std::size_t k, KMeansInit init,
                               std::mt19937_64& rng, int max_iter, double& inertia) {
    const std::size_t n = points.size(), dim = points.dim();

    const auto chosen = init == KMeansInit::uniform ? uniform_seeds(n, k, rng)
                                                    : plus_plus_seeds(points, k, rng);

    std::vector<double> centers(k * dim);
    for (std::size_t c = 0; c < k; ++c)
        std::copy_n(points.row(chosen[c]).begin(), dim, centers.begin() + static_cast<std::ptrdiff_t>(c * dim));
    auto center = [&](std::size_t c) { return std::span<const double>(centers.data() + c * dim, dim); };

    std::vector<std::size_t> assign(n, k);
    for (int iter = 0; iter < max_iter; ++iter) {
        bool changed = false;
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t best = 0;
            double bd = sq_dist(points.row(i), center(0));
            for (std::size_t c = 1; c < k; ++c) {
                const double d = sq_dist(points.row(i), center(c));
                if (d < bd) {
                    bd = d;
                    best = c;
                }
            }
            if (assign[i] != best) {
                assign[i] = best;
                changed = true;
            }
        }
        if (!changed)
            break;

        std::vector<std::size_t> counts(k, 0);
        std::fill(centers.begin(), centers.end(), 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            ++counts[assign[i]];
            for (std::size_t d = 0; d < dim; ++d)
                centers[assign[i] * dim + d] += points.row(i)[d];
        }
        for (std::size_t c = 0; c < k; ++c) {
            if (counts[c] == 0)
                continue;
            for (std::size_t d = 0; d < dim; ++d)
                centers[c * dim + d] /= static_cast<double>(counts[c]);
        }
        for (std::size_t c = 0; c < k; ++c) {
            if (counts[c] > 0)
                continue;
            std::size_t far = 0;
            double fd = -1.0;
            for (std::size_t i = 0; i < n; ++i) {
                if (counts[assign[i]] <= 1)
                    continue;
                const double d = sq_dist(points.row(i), center(assign[i]));
                if (d > fd) {
                    fd = d;
                    far = i;
                }
            }
            --counts[assign[far]];
            assign[far] = c;
            counts[c] = 1;
            std::copy_n(points.row(far).begin(), dim, centers.begin() + static_cast<std::ptrdiff_t>(c * dim));
        }
    }
    inertia = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        inertia += sq_dist(points.row(i), center(assign[i]));
    return assign;
}

}  // namespace

Partition kmeans_baseline(const PointSet& points, std::size_t k, std::uint64_t seed,
                          const KMeansOptions& opts) {
    if (k < 1 || k > points.size())
        throw ParameterError("k-means needs 1 <= k <= n");
    if (opts.max_iter < 1 || opts.restarts < 1)
        throw ParameterError("max_iter and restarts must be positive");
    std::mt19937_64 rng(seed);
    std::vector<std::size_t> best;
    double best_inertia = std::numeric_limits<double>::infinity();
    for (int r = 0; r < opts.restarts; ++r) {
        double inertia = 0.0;
        auto assign = lloyd(points, k, opts.init, rng, opts.max_iter, inertia);
        if (inertia < best_inertia) {
            best_inertia = inertia;
            best = std::move(assign);
        }
    }
    return Partition::from_labels(best);
}

std::string to_string(EventKind kind) {
    return kind == EventKind::split ? "split" : "merge";
}

std::string to_string(Method m) {
    return m == Method::configurations ? "configurations" : "kmeans";
}

std::vector<ClusterEvent> detect_events(const Partition& before, const Partition& after,
                                        double threshold) {
    if (before.size() != after.size())
        throw InputError("partitions differ in length");
    if (!(threshold > 0.0 && threshold <= 1.0))
        throw ParameterError("event threshold must lie in (0, 1]");
    const auto t = contingency(before, after);
    std::vector<ClusterEvent> out;
    for (std::size_t i = 0; i < t.rows(); ++i) {
        ClusterEvent e{EventKind::split, {static_cast<std::size_t>(t.row_ids[i])}, {}};
        for (std::size_t j = 0; j < t.cols(); ++j)
            if (static_cast<double>(t(i, j)) >= threshold * static_cast<double>(t.row_sum(i)))
                e.targets.push_back(static_cast<std::size_t>(t.col_ids[j]));
        if (e.targets.size() >= 2)
            out.push_back(std::move(e));
    }
    for (std::size_t j = 0; j < t.cols(); ++j) {
        ClusterEvent e{EventKind::merge, {}, {static_cast<std::size_t>(t.col_ids[j])}};
        for (std::size_t i = 0; i < t.rows(); ++i)
            if (static_cast<double>(t(i, j)) >= threshold * static_cast<double>(t.col_sum(j)))
                e.sources.push_back(static_cast<std::size_t>(t.row_ids[i]));
        if (e.sources.size() >= 2)
            out.push_back(std::move(e));
    }
    return out;
}

AffinityGraph affinity_from_points(const PointSet& points, const GraphOptions& opts,
                                   unsigned threads) {
    const std::size_t k = std::min(opts.k, points.size() - 1);
    return derive_affinity(build_knn_graph(points, k, opts.metric, threads), opts.kernel,
                           opts.scheme);
}

PlateauMatch best_plateau(const std::vector<SweepScore>& curve) {
    PlateauMatch m;
    for (std::size_t p = 0; p < curve.size(); ++p) {
        if (!m.found || curve[p].ari > m.ari) {
            m.found = true;
            m.index = p;
            m.gamma_lo = curve[p].gamma_lo;
            m.gamma_hi = curve[p].gamma_hi;
            m.cluster_count = curve[p].cluster_count;
            m.ari = curve[p].ari;
        }
    }
    return m;
}

HierarchyReport run_hierarchy_experiment(const HierarchySpec& spec, double gamma_max,
                                         const ExperimentOptions& opts) {
    const auto data = generate_hierarchy(spec);
    const auto graph = affinity_from_points(data.points, opts.graph, opts.sweep.threads);
    HierarchyReport r;
    r.configs = find_configurations(graph, gamma_max, opts.sweep);
    r.super_curve = evaluate_sweep(r.configs, data.super_labels, LabelLevel::superordinate);
    r.basic_curve = evaluate_sweep(r.configs, data.basic_labels, LabelLevel::basic);
    r.super_match = best_plateau(r.super_curve);
    r.basic_match = best_plateau(r.basic_curve);
    r.coarse_before_fine = r.super_match.found && r.basic_match.found &&
                           r.super_match.gamma_lo < r.basic_match.gamma_lo;
    return r;
}

NoveltyReport run_novelty_experiment(const HierarchySpec& spec, double fraction,
                                     const GammaPolicy& policy, const NoveltyOptions& opts) {
    if (!(fraction > 0.0))
        throw ParameterError("novelty experiment needs a positive outlier fraction");
    const auto data = generate_hierarchy(spec);
    const auto mixed = inject_outliers(data.points, fraction, opts.spread, opts.outlier_seed);
    if (std::find(mixed.novel.begin(), mixed.novel.end(), true) == mixed.novel.end())
        throw ParameterError("outlier fraction too small to produce any outlier");
    const auto graph = affinity_from_points(mixed.points, opts.experiment.graph,
                                            opts.experiment.sweep.threads);

    NoveltyReport r;
    Partition partition;
    if (policy.kind == GammaPolicy::Kind::fixed) {
        r.gamma = policy.gamma;
        partition = optimize(graph, r.gamma, opts.experiment.sweep.optimize).partition;
    } else {
        const auto configs = find_configurations(graph, policy.gamma_max, opts.experiment.sweep);
        const auto& best = configs.widest(policy.width_scale);
        r.gamma = 0.5 * (best.gamma_lo + best.gamma_hi);
        partition = best.partition;
    }
    const auto scores = item_energy_scores(graph, partition, r.gamma);
    r.cluster_count = partition.cluster_count();
    r.auc = roc_auc(scores.scores, mixed.novel);
    r.mean_novel = mean_scores(scores.scores, mixed.novel, true)[0];
    r.mean_familiar = mean_scores(scores.scores, mixed.novel, false)[0];
    r.items = mixed.points.size();
    r.novel_items = static_cast<std::size_t>(std::count(mixed.novel.begin(), mixed.novel.end(), true));
    r.scores = scores.scores;
    r.novel = mixed.novel;
    return r;
}

double MethodTrace::mean_inverse_ari() const {
    if (inverse_ari.empty())
        return 0.0;
    return std::accumulate(inverse_ari.begin(), inverse_ari.end(), 0.0) /
           static_cast<double>(inverse_ari.size());
}

const MethodTrace& EvolutionTrace::method(Method m) const {
    for (const auto& t : methods)
        if (t.method == m)
            return t;
    throw InputError("method " + to_string(m) + " was not run");
}

EvolutionTrace run_evolution_experiment(const EvolutionSpec& spec) {
    const std::size_t T = spec.steps;
    if (T < 2)
        throw ParameterError("evolution needs at least 2 steps");
    if ((spec.split_at && (*spec.split_at < 1 || *spec.split_at >= T)) ||
        (spec.merge_at && (*spec.merge_at < 1 || *spec.merge_at >= T)))
        throw ParameterError("event times must lie in [1, steps)");
    if (spec.groups < 3 && spec.merge_at)
        throw ParameterError("a merge needs at least 3 groups");
    if (spec.groups < 1 || spec.points_per_group < 2 || spec.dimension < 2)
        throw ParameterError("evolution needs groups >= 1, points_per_group >= 2, dimension >= 2");
    if (!(spec.separation > 0.0) || !(spec.noise_sigma >= 0.0) || !(spec.jitter >= 0.0))
        throw ParameterError("separation must be positive, noise and jitter non-negative");

    const std::size_t G = spec.groups, dim = spec.dimension, n = G * spec.points_per_group;
    const auto centers = spread_centers(G, dim, spec.separation);
    std::mt19937_64 rng(spec.seed);
    std::normal_distribution<double> normal(0.0, 1.0);

    // Fixed per-item offsets; half of group 0 peels off when it splits.
    std::vector<std::size_t> group(n);
    std::vector<bool> second_half(n);
    std::vector<double> offset(n * dim);
    for (std::size_t i = 0; i < n; ++i) {
        group[i] = i / spec.points_per_group;
        second_half[i] = (i % spec.points_per_group) % 2 == 1;
        for (std::size_t d = 0; d < dim; ++d)
            offset[i * dim + d] = spec.noise_sigma * normal(rng);
    }
    // Split direction: radial for group 0; merging groups are 1 and 2.
    Vec split_dir(dim, 0.0);
    {
        double norm = 0.0;
        for (std::size_t d = 0; d < dim; ++d)
            norm += centers[0][d] * centers[0][d];
        norm = std::sqrt(norm);
        for (std::size_t d = 0; d < dim; ++d)
            split_dir[d] = norm > 0.0 ? centers[0][d] / norm : (d == 0 ? 1.0 : 0.0);
    }
    Vec merge_point(dim, 0.0);
    if (G >= 3)
        for (std::size_t d = 0; d < dim; ++d)
            merge_point[d] = 0.5 * (centers[1][d] + centers[2][d]);

    auto progress = [](std::optional<std::size_t> at, std::size_t t) {
        if (!at)
            return 0.0;
        const double p = (static_cast<double>(t) - static_cast<double>(*at) + 1.0) / 2.0;
        return std::clamp(p, 0.0, 1.0);
    };

    EvolutionTrace trace;
    trace.steps = T;
    if (spec.split_at)
        trace.events.push_back({*spec.split_at, EventKind::split, {0}});
    if (spec.merge_at)
        trace.events.push_back({*spec.merge_at, EventKind::merge, {1, 2}});

    for (std::size_t t = 0; t < T; ++t) {
        const double ps = progress(spec.split_at, t), pm = progress(spec.merge_at, t);
        std::vector<double> values(n * dim);
        std::vector<int> truth(n);
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t g = group[i];
            Vec c = centers[g];
            if (g == 0 && ps > 0.0) {
                const double sign = second_half[i] ? -1.0 : 1.0;
                for (std::size_t d = 0; d < dim; ++d)
                    c[d] += sign * ps * 0.5 * spec.separation * split_dir[d];
            }
            if ((g == 1 || g == 2) && pm > 0.0)
                for (std::size_t d = 0; d < dim; ++d)
                    c[d] += pm * (merge_point[d] - c[d]);
            for (std::size_t d = 0; d < dim; ++d)
                values[i * dim + d] = c[d] + offset[i * dim + d] + spec.jitter * normal(rng);
            int label = static_cast<int>(g);
            if (g == 0 && ps >= 1.0 && second_half[i])
                label = static_cast<int>(G);
            if (g == 2 && pm >= 1.0)
                label = 1;
            truth[i] = label;
        }
        trace.points.emplace_back(n, dim, std::move(values));
        trace.truth.push_back(std::move(truth));
    }

    const std::size_t k0 = std::set<int>(trace.truth[0].begin(), trace.truth[0].end()).size();
    SweepOptions sweep;
    sweep.optimize = spec.optimize;
    for (Method m : spec.methods) {
        MethodTrace mt;
        mt.method = m;
        for (std::size_t t = 0; t < T; ++t) {
            if (m == Method::configurations) {
                const auto graph = affinity_from_points(trace.points[t], spec.graph);
                const auto configs = find_configurations(graph, spec.gamma_max, sweep);
                const auto& best = configs.widest(spec.width_scale);
                mt.gammas.push_back(0.5 * (best.gamma_lo + best.gamma_hi));
                mt.partitions.push_back(best.partition);
            } else {
                mt.partitions.push_back(
                    kmeans_baseline(trace.points[t], k0, spec.seed + 7919 * (t + 1), spec.kmeans));
            }
        }
        for (std::size_t t = 0; t + 1 < T; ++t) {
            mt.inverse_ari.push_back(inverse_ari(mt.partitions[t], mt.partitions[t + 1]));
            mt.detected.push_back(detect_events(mt.partitions[t], mt.partitions[t + 1]));
        }
        trace.methods.push_back(std::move(mt));
    }
    return trace;
}

}  // namespace confres
