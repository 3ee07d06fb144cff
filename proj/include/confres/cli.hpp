#pragma once
// Command-line front end and its file formats.

#include "confres/graph.hpp"

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace confres::cli {

inline constexpr const char* kToolName = "confres";
inline constexpr const char* kVersion = "0.1.0";

// Exit codes shared by every command.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInternal = 1;
inline constexpr int kExitUsage = 2;

int run(int argc, const char* const* argv);

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t hash = 0xcbf29ce484222325ULL);
std::string hex64(std::uint64_t value);

std::string read_file(const std::string& path);

// Comma-separated rows of reals, one item per row. A first row with any
// non-numeric field is taken as a header.
PointSet parse_points_csv(const std::string& text);

// One integer label per row; a non-numeric first row is a header.
std::vector<int> parse_labels_csv(const std::string& text);

struct EdgeList {
    std::size_t nodes = 0;
    std::vector<WeightedEdge> edges;
};

// Rows i,j,w with 0-based node indices; a non-numeric first row is a
// header. Node count is the largest index + 1 unless `nodes` is larger.
EdgeList parse_edges_csv(const std::string& text, std::size_t nodes = 0);

// Flat `key = value` lines; '#' starts a comment.
std::vector<std::pair<std::string, std::string>> parse_config(const std::string& text);

}  // namespace confres::cli
