#include "confres/evaluation.hpp"

#include "confres/error.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <string>

namespace confres {

namespace {

std::int64_t comb2(std::int64_t x) {
    return x * (x - 1) / 2;
}

// Sums in ascending order so the result only depends on the multiset of
// terms, not on row/column order.
double ordered_sum(std::vector<double> terms) {
    std::sort(terms.begin(), terms.end());
    double s = 0.0;
    for (double t : terms)
        s += t;
    return s;
}

double entropy(const std::vector<std::int64_t>& sums, double n) {
    std::vector<double> terms;
    for (auto c : sums) {
        if (c > 0) {
            const double p = static_cast<double>(c) / n;
            terms.push_back(-p * std::log(p));
        }
    }
    return ordered_sum(std::move(terms));
}

// Every row and every column holds exactly one non-zero cell.
bool is_perfect_correspondence(const ContingencyTable& t) {
    if (t.rows() != t.cols())
        return false;
    std::vector<int> row_nz(t.rows(), 0), col_nz(t.cols(), 0);
    for (std::size_t i = 0; i < t.rows(); ++i)
        for (std::size_t j = 0; j < t.cols(); ++j)
            if (t(i, j) > 0) {
                ++row_nz[i];
                ++col_nz[j];
            }
    return std::all_of(row_nz.begin(), row_nz.end(), [](int c) { return c == 1; }) &&
           std::all_of(col_nz.begin(), col_nz.end(), [](int c) { return c == 1; });
}

std::vector<std::int64_t> row_sums(const ContingencyTable& t) {
    std::vector<std::int64_t> v(t.rows());
    for (std::size_t i = 0; i < t.rows(); ++i)
        v[i] = t.row_sum(i);
    return v;
}

std::vector<std::int64_t> col_sums(const ContingencyTable& t) {
    std::vector<std::int64_t> v(t.cols());
    for (std::size_t j = 0; j < t.cols(); ++j)
        v[j] = t.col_sum(j);
    return v;
}

}  // namespace

ContingencyTable::ContingencyTable(std::size_t rows, std::size_t cols,
                                   std::vector<std::int64_t> counts)
    : rows_(rows), cols_(cols), counts_(std::move(counts)) {
    if (counts_.size() != rows_ * cols_)
        throw InputError("contingency counts have the wrong size");
    row_sums_.assign(rows_, 0);
    col_sums_.assign(cols_, 0);
    for (std::size_t i = 0; i < rows_; ++i) {
        for (std::size_t j = 0; j < cols_; ++j) {
            const auto c = counts_[i * cols_ + j];
            if (c < 0)
                throw InputError("contingency counts must be non-negative");
            row_sums_[i] += c;
            col_sums_[j] += c;
            n_ += c;
        }
    }
    row_ids.resize(rows_);
    col_ids.resize(cols_);
    std::iota(row_ids.begin(), row_ids.end(), 0);
    std::iota(col_ids.begin(), col_ids.end(), 0);
}

std::int64_t ContingencyTable::max_count() const {
    return counts_.empty() ? 0 : *std::max_element(counts_.begin(), counts_.end());
}

ContingencyTable ContingencyTable::permuted(std::span<const std::size_t> rows,
                                            std::span<const std::size_t> cols) const {
    std::vector<std::int64_t> c(rows.size() * cols.size());
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t k = 0; k < cols.size(); ++k)
            c[r * cols.size() + k] = (*this)(rows[r], cols[k]);
    ContingencyTable out(rows.size(), cols.size(), std::move(c));
    for (std::size_t r = 0; r < rows.size(); ++r)
        out.row_ids[r] = row_ids[rows[r]];
    for (std::size_t k = 0; k < cols.size(); ++k)
        out.col_ids[k] = col_ids[cols[k]];
    return out;
}

ContingencyTable contingency(std::span<const int> a, std::span<const int> b) {
    if (a.size() != b.size())
        throw InputError("label vectors differ in length (" + std::to_string(a.size()) + " vs " +
                         std::to_string(b.size()) + ")");
    std::map<int, std::size_t> ra, cb;
    for (int x : a)
        ra.emplace(x, 0);
    for (int x : b)
        cb.emplace(x, 0);
    std::size_t idx = 0;
    for (auto& [k, v] : ra)
        v = idx++;
    idx = 0;
    for (auto& [k, v] : cb)
        v = idx++;
    std::vector<std::int64_t> counts(ra.size() * cb.size(), 0);
    for (std::size_t t = 0; t < a.size(); ++t)
        ++counts[ra[a[t]] * cb.size() + cb[b[t]]];
    ContingencyTable table(ra.size(), cb.size(), std::move(counts));
    for (const auto& [k, v] : ra)
        table.row_ids[v] = k;
    for (const auto& [k, v] : cb)
        table.col_ids[v] = k;
    return table;
}

ContingencyTable contingency(const Partition& a, const Partition& b) {
    const auto x = a.as_ints(), y = b.as_ints();
    return contingency(x, y);
}

double ari(const ContingencyTable& t) {
    if (t.total() < 2)
        throw InputError("ARI needs at least 2 items");
    std::int64_t index = 0, sa = 0, sb = 0;
    for (auto c : t.counts())
        index += comb2(c);
    for (std::size_t i = 0; i < t.rows(); ++i)
        sa += comb2(t.row_sum(i));
    for (std::size_t j = 0; j < t.cols(); ++j)
        sb += comb2(t.col_sum(j));
    const double total = static_cast<double>(comb2(t.total()));
    const double expected = static_cast<double>(sa) * static_cast<double>(sb) / total;
    const double max_index = 0.5 * static_cast<double>(sa + sb);
    if (max_index == expected)
        return 1.0;
    return (static_cast<double>(index) - expected) / (max_index - expected);
}

double nmi(const ContingencyTable& t) {
    if (t.total() < 1)
        throw InputError("NMI needs at least 1 item");
    if (is_perfect_correspondence(t))
        return 1.0;
    const double n = static_cast<double>(t.total());
    const double hu = entropy(row_sums(t), n);
    const double hv = entropy(col_sums(t), n);
    if (hu + hv == 0.0)
        return 1.0;
    std::vector<double> terms;
    for (std::size_t i = 0; i < t.rows(); ++i) {
        for (std::size_t j = 0; j < t.cols(); ++j) {
            const auto c = t(i, j);
            if (c == 0)
                continue;
            const double p = static_cast<double>(c) / n;
            terms.push_back(p * std::log(n * static_cast<double>(c) /
                                         (static_cast<double>(t.row_sum(i)) *
                                          static_cast<double>(t.col_sum(j)))));
        }
    }
    const double mi = std::max(0.0, ordered_sum(std::move(terms)));
    return std::clamp(mi / (0.5 * (hu + hv)), 0.0, 1.0);
}

double v_measure(const ContingencyTable& t) {
    if (t.total() < 1)
        throw InputError("V-measure needs at least 1 item");
    if (is_perfect_correspondence(t))
        return 1.0;
    const double n = static_cast<double>(t.total());
    const double h_class = entropy(row_sums(t), n);
    const double h_cluster = entropy(col_sums(t), n);
    std::vector<double> class_given_cluster, cluster_given_class;
    for (std::size_t i = 0; i < t.rows(); ++i) {
        for (std::size_t j = 0; j < t.cols(); ++j) {
            const auto c = t(i, j);
            if (c == 0)
                continue;
            const double p = static_cast<double>(c) / n;
            const double cd = static_cast<double>(c);
            class_given_cluster.push_back(-p * std::log(cd / static_cast<double>(t.col_sum(j))));
            cluster_given_class.push_back(-p * std::log(cd / static_cast<double>(t.row_sum(i))));
        }
    }
    const double h = h_class == 0.0 ? 1.0 : 1.0 - ordered_sum(class_given_cluster) / h_class;
    const double c = h_cluster == 0.0 ? 1.0 : 1.0 - ordered_sum(cluster_given_class) / h_cluster;
    if (h + c == 0.0)
        return 0.0;
    return std::clamp(2.0 * h * c / (h + c), 0.0, 1.0);
}

std::int64_t diagonal_mass(const ContingencyTable& t) {
    std::int64_t s = 0;
    for (std::size_t i = 0; i < std::min(t.rows(), t.cols()); ++i)
        s += t(i, i);
    return s;
}

std::vector<std::size_t> max_weight_assignment(std::span<const double> weights, std::size_t size) {
    if (weights.size() != size * size)
        throw InputError("assignment matrix must be square");
    if (size == 0)
        return {};
    // Hungarian method with potentials on cost = max - weight (1-based).
    const double top = *std::max_element(weights.begin(), weights.end());
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(size + 1, 0.0), v(size + 1, 0.0), minv(size + 1);
    std::vector<std::size_t> p(size + 1, 0), way(size + 1, 0);
    std::vector<char> used(size + 1);
    auto cost = [&](std::size_t i, std::size_t j) { return top - weights[(i - 1) * size + (j - 1)]; };
    for (std::size_t i = 1; i <= size; ++i) {
        p[0] = i;
        std::size_t j0 = 0;
        std::fill(minv.begin(), minv.end(), inf);
        std::fill(used.begin(), used.end(), 0);
        do {
            used[j0] = 1;
            const std::size_t i0 = p[j0];
            double delta = inf;
            std::size_t j1 = 0;
            for (std::size_t j = 1; j <= size; ++j) {
                if (used[j])
                    continue;
                const double cur = cost(i0, j) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (std::size_t j = 0; j <= size; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            const std::size_t j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0 != 0);
    }
    std::vector<std::size_t> row_to_col(size);
    for (std::size_t j = 1; j <= size; ++j)
        row_to_col[p[j] - 1] = j - 1;
    return row_to_col;
}

std::int64_t AlignmentResult::assigned_mass(const ContingencyTable& original) const {
    std::int64_t s = 0;
    for (std::size_t j = 0; j < assigned_row.size(); ++j)
        if (assigned_row[j] != kUnassigned)
            s += original(assigned_row[j], j);
    return s;
}

std::vector<std::size_t> AlignmentResult::display_assignment() const {
    std::vector<std::size_t> out(column_map.size(), kUnassigned);
    for (std::size_t j = 0; j < column_map.size(); ++j)
        if (assigned_row[j] != kUnassigned)
            out[column_map[j]] = row_map[assigned_row[j]];
    return out;
}

AlignmentResult rms_align(const ContingencyTable& table) {
    const std::size_t rows = table.rows(), cols = table.cols();
    AlignmentResult res;
    res.assigned_row.assign(cols, kUnassigned);
    if (rows == 0 || cols == 0) {
        res.aligned = table;
        return res;
    }

    // Stage 1: one-to-one matching on the zero-padded square table.
    const std::size_t size = std::max(rows, cols);
    std::vector<double> w(size * size, 0.0);
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j)
            w[i * size + j] = static_cast<double>(table(i, j));
    const auto match = max_weight_assignment(w, size);
    std::vector<std::size_t> matched_col(rows, kUnassigned);
    for (std::size_t i = 0; i < rows; ++i) {
        const std::size_t j = match[i];
        if (j < cols && table(i, j) > 0) {
            matched_col[i] = j;
            res.assigned_row[j] = i;
        }
    }

    // Stage 2: leftover columns go to the row holding most of their mass.
    for (std::size_t j = 0; j < cols; ++j) {
        if (res.assigned_row[j] != kUnassigned || table.col_sum(j) == 0)
            continue;
        std::size_t best = 0;
        for (std::size_t i = 1; i < rows; ++i)
            if (table(i, j) > table(best, j))
                best = i;
        res.assigned_row[j] = best;
    }

    // Stage 3: rows with columns first (reference order), each followed by
    // its matched column and then its split columns by decreasing overlap.
    std::vector<std::vector<std::size_t>> row_cols(rows);
    for (std::size_t i = 0; i < rows; ++i)
        if (matched_col[i] != kUnassigned)
            row_cols[i].push_back(matched_col[i]);
    for (std::size_t j = 0; j < cols; ++j) {
        const std::size_t i = res.assigned_row[j];
        if (i != kUnassigned && matched_col[i] != j)
            row_cols[i].push_back(j);
    }
    for (std::size_t i = 0; i < rows; ++i) {
        auto& v = row_cols[i];
        const std::size_t lead = matched_col[i] != kUnassigned ? 1 : 0;
        std::stable_sort(v.begin() + static_cast<std::ptrdiff_t>(lead), v.end(),
                         [&](std::size_t a, std::size_t b) { return table(i, a) > table(i, b); });
    }

    std::vector<std::size_t> row_order, col_order;
    for (std::size_t i = 0; i < rows; ++i)
        if (!row_cols[i].empty()) {
            row_order.push_back(i);
            col_order.insert(col_order.end(), row_cols[i].begin(), row_cols[i].end());
        }
    for (std::size_t i = 0; i < rows; ++i)
        if (row_cols[i].empty())
            row_order.push_back(i);
    for (std::size_t j = 0; j < cols; ++j)
        if (res.assigned_row[j] == kUnassigned)
            col_order.push_back(j);

    res.row_map.assign(rows, 0);
    res.column_map.assign(cols, 0);
    for (std::size_t p = 0; p < rows; ++p)
        res.row_map[row_order[p]] = p;
    for (std::size_t p = 0; p < cols; ++p)
        res.column_map[col_order[p]] = p;

    for (std::size_t i = 0; i < rows; ++i) {
        if (row_cols[i].size() >= 2)
            res.splits.push_back({i, row_cols[i]});
        if (row_cols[i].empty()) {
            MergeRecord m{i, {}};
            for (std::size_t j = 0; j < cols; ++j)
                if (table(i, j) > 0)
                    m.clusters.push_back(j);
            res.merges.push_back(std::move(m));
        }
    }
    res.aligned = table.permuted(row_order, col_order);
    return res;
}

AlignmentResult identity_alignment(const ContingencyTable& table) {
    AlignmentResult res;
    res.row_map.resize(table.rows());
    res.column_map.resize(table.cols());
    std::iota(res.row_map.begin(), res.row_map.end(), 0);
    std::iota(res.column_map.begin(), res.column_map.end(), 0);
    res.assigned_row.assign(table.cols(), kUnassigned);
    for (std::size_t j = 0; j < std::min(table.rows(), table.cols()); ++j)
        res.assigned_row[j] = j;
    res.aligned = table;
    return res;
}

double accuracy(const AlignmentResult& alignment) {
    const auto& t = alignment.aligned;
    if (alignment.assigned_row.size() != t.cols() || alignment.column_map.size() != t.cols() ||
        alignment.row_map.size() != t.rows())
        throw InputError("accuracy needs an aligned table with its maps");
    if (t.total() == 0)
        throw InputError("accuracy of an empty table");
    const auto disp = alignment.display_assignment();
    std::int64_t hit = 0;
    for (std::size_t p = 0; p < disp.size(); ++p)
        if (disp[p] != kUnassigned)
            hit += t(disp[p], p);
    return static_cast<double>(hit) / static_cast<double>(t.total());
}

double inverse_ari(const Partition& a, const Partition& b) {
    if (a.size() != b.size())
        throw InputError("partitions differ in length");
    return 1.0 / std::max(ari(contingency(a, b)), 1e-3);
}

NoveltyScores item_energy_scores(const AffinityGraph& graph, const Partition& partition,
                                 double gamma) {
    const std::size_t n = graph.size();
    if (partition.size() != n)
        throw InputError("partition length does not match graph size");
    if (!(gamma >= 0.0) || !std::isfinite(gamma))
        throw ParameterError("gamma must be finite and non-negative");
    const auto lab = partition.labels();
    const auto sizes = partition.cluster_sizes();
    std::vector<double> mass(partition.cluster_count(), 0.0);
    for (std::size_t i = 0; i < n; ++i)
        mass[lab[i]] += graph.repulsion_mass(i);

    NoveltyScores out;
    out.gamma = gamma;
    out.partition = partition;
    out.scores.assign(n, 0.0);
    bool any = false;
    double top = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t c = lab[i];
        if (sizes[c] < 2)
            continue;
        double att = 0.0, rep = 0.0;
        for (const auto& nb : graph.attraction(i))
            if (lab[nb.node] == c)
                att += nb.weight;
        for (const auto& nb : graph.explicit_repulsion(i))
            if (lab[nb.node] == c)
                rep += nb.weight;
        const double m = graph.repulsion_mass(i);
        rep += graph.repulsion_scale() * m * (mass[c] - m);
        out.scores[i] = (-att + gamma * rep) / static_cast<double>(sizes[c] - 1);
        top = std::max(top, out.scores[i]);
        any = true;
    }
    const double singleton_score = (any ? top : 0.0) + 1.0;
    for (std::size_t i = 0; i < n; ++i)
        if (sizes[lab[i]] < 2)
            out.scores[i] = singleton_score;
    return out;
}

double roc_auc(std::span<const double> scores, const std::vector<bool>& novel) {
    if (scores.size() != novel.size())
        throw InputError("scores and flags differ in length");
    const std::size_t n = scores.size();
    std::size_t pos = 0;
    for (bool f : novel)
        pos += f;
    const std::size_t neg = n - pos;
    if (pos == 0 || neg == 0)
        throw InputError("ROC-AUC needs at least one novel and one familiar item");
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
    double rank_sum = 0.0;
    for (std::size_t s = 0; s < n;) {
        std::size_t e = s;
        while (e + 1 < n && scores[order[e + 1]] == scores[order[s]])
            ++e;
        const double midrank = 0.5 * static_cast<double>(s + e) + 1.0;
        for (std::size_t t = s; t <= e; ++t)
            if (novel[order[t]])
                rank_sum += midrank;
        s = e + 1;
    }
    const double p = static_cast<double>(pos), q = static_cast<double>(neg);
    return (rank_sum - p * (p + 1.0) / 2.0) / (p * q);
}

}  // namespace confres
