#pragma once
// Contingency analysis, clustering metrics, reverse merge/split alignment
// and energy-based novelty scoring.

#include "confres/energy.hpp"
#include "confres/graph.hpp"

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

namespace confres {

// Overlap counts between a reference labeling (rows) and a predicted one
// (columns). Row and column ids are the distinct label values, ascending.
class ContingencyTable {
public:
    ContingencyTable() = default;
    ContingencyTable(std::size_t rows, std::size_t cols, std::vector<std::int64_t> counts);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::int64_t operator()(std::size_t i, std::size_t j) const { return counts_[i * cols_ + j]; }
    std::int64_t row_sum(std::size_t i) const { return row_sums_[i]; }
    std::int64_t col_sum(std::size_t j) const { return col_sums_[j]; }
    std::int64_t total() const { return n_; }
    std::int64_t max_count() const;
    const std::vector<std::int64_t>& counts() const { return counts_; }

    // Original label values behind each row / column.
    std::vector<int> row_ids;
    std::vector<int> col_ids;

    // Table with row r taken from rows[r] and column c from cols[c].
    ContingencyTable permuted(std::span<const std::size_t> rows,
                              std::span<const std::size_t> cols) const;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<std::int64_t> counts_;
    std::vector<std::int64_t> row_sums_;
    std::vector<std::int64_t> col_sums_;
    std::int64_t n_ = 0;
};

ContingencyTable contingency(std::span<const int> a, std::span<const int> b);
ContingencyTable contingency(const Partition& a, const Partition& b);

double ari(const ContingencyTable& table);
double nmi(const ContingencyTable& table);
double v_measure(const ContingencyTable& table);

// Sum of N_ii over the leading diagonal.
std::int64_t diagonal_mass(const ContingencyTable& table);

inline constexpr std::size_t kUnassigned = std::numeric_limits<std::size_t>::max();

struct MergeRecord {
    std::size_t category;              // reference row left without a matched column
    std::vector<std::size_t> clusters;  // columns that absorbed its items
};

struct SplitRecord {
    std::size_t category;
    std::vector<std::size_t> clusters;  // every column mapped to this row
};

struct AlignmentResult {
    std::vector<std::size_t> column_map;    // column -> display position
    std::vector<std::size_t> row_map;       // row -> display position
    std::vector<std::size_t> assigned_row;  // column -> row it is credited to, or kUnassigned
    std::vector<MergeRecord> merges;
    std::vector<SplitRecord> splits;
    ContingencyTable aligned;  // display order

    // Counts that fall on each column's assigned row.
    std::int64_t assigned_mass(const ContingencyTable& original) const;
    // Assigned row of each display column, in display row positions.
    std::vector<std::size_t> display_assignment() const;
};

// Three stages: optimal one-to-one matching on the zero-padded square
// table; leftover columns credited to the row holding most of their mass
// (splits); rows left unmatched recorded as merges. Columns are then laid
// out so each row's columns are contiguous.
AlignmentResult rms_align(const ContingencyTable& table);

// Column j credited to row j when j < rows; no merge/split bookkeeping.
AlignmentResult identity_alignment(const ContingencyTable& table);

// Fraction of items on their column's assigned row.
double accuracy(const AlignmentResult& alignment);

// Maximum-weight perfect matching on a square matrix (row -> column).
std::vector<std::size_t> max_weight_assignment(std::span<const double> weights, std::size_t size);

// 1 / max(ARI, 1e-3).
double inverse_ari(const Partition& a, const Partition& b);

struct NoveltyScores {
    std::vector<double> scores;  // higher = more novel
    double gamma = 0.0;
    Partition partition;
};

// Mean per-pair energy of each item inside its cluster. Singletons get the
// largest non-singleton score + 1.
NoveltyScores item_energy_scores(const AffinityGraph& graph, const Partition& partition,
                                 double gamma);

// Mann-Whitney AUC with midranks for ties.
double roc_auc(std::span<const double> scores, const std::vector<bool>& novel);

}  // namespace confres
