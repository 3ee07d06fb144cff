#pragma once
// Proportional mosaic layout of a contingency table and SVG output.
//
// Column band j spans c_j / n of the canvas width and row band i spans
// r_i / n of its height. Cell (i, j) sits at the top-left corner of its
// band intersection; its width is N_ij / r_i of the row extent and its
// height N_ij / c_j of the column extent.

#include "confres/evaluation.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace confres {

struct MosaicCell {
    std::size_t row = 0;
    std::size_t col = 0;
    double x = 0.0;
    double y = 0.0;
    double w = 0.0;
    double h = 0.0;
    std::int64_t value = 0;
};

struct MosaicLayout {
    double width = 1.0;
    double height = 1.0;
    double gap = 0.01;
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::int64_t max_value = 0;
    // Drawn band extents after the gap shrink: [start, start + extent).
    std::vector<double> col_start, col_extent;
    std::vector<double> row_start, row_extent;
    std::vector<MosaicCell> cells;
};

MosaicLayout layout(const ContingencyTable& table, double gap = 0.01);

struct MosaicStyle {
    double pixels = 480.0;
    std::string color = "#1f5fa8";
    bool show_grid = true;
    std::optional<std::vector<std::string>> row_labels;
    std::optional<std::vector<std::string>> col_labels;
};

std::string render_svg(const MosaicLayout& layout, const MosaicStyle& style = {});

// Cell geometry as CSV rows: i,j,x,y,w,h,value.
std::string layout_csv(const MosaicLayout& layout);

struct LineSeries {
    std::string name;
    std::vector<double> x;
    std::vector<double> y;
};

// Plain line chart used for gamma or time curves.
std::string render_line_plot(const std::vector<LineSeries>& series, const std::string& x_label,
                             const std::string& y_label, const std::string& title = {});

}  // namespace confres
