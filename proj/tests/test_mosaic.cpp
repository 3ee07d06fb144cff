#include "confres/error.hpp"
#include "confres/mosaic.hpp"

#include <doctest.h>

#include <algorithm>
#include <random>

using namespace confres;

namespace {

std::size_t count(const std::string& text, const std::string& needle) {
    std::size_t n = 0;
    for (auto p = text.find(needle); p != std::string::npos; p = text.find(needle, p + 1))
        ++n;
    return n;
}

const MosaicCell* cell(const MosaicLayout& l, std::size_t i, std::size_t j) {
    for (const auto& c : l.cells)
        if (c.row == i && c.col == j)
            return &c;
    return nullptr;
}

// Summed area of cells lying on their column's assigned row, drawn in
// display order.
double diagonal_area(const AlignmentResult& a) {
    const auto lay = layout(a.aligned, 0.0);
    const auto rows = a.display_assignment();
    double area = 0.0;
    for (const auto& c : lay.cells)
        if (rows[c.col] == c.row)
            area += c.w * c.h;
    return area;
}

}  // namespace

TEST_CASE("layout: hand fractions") {
    const ContingencyTable t(2, 2, {2, 2, 0, 4});
    const auto l = layout(t, 0.0);
    CHECK(l.cells.size() == 3);
    const auto* a = cell(l, 0, 0);
    const auto* b = cell(l, 1, 1);
    REQUIRE(a);
    REQUIRE(b);
    CHECK(cell(l, 1, 0) == nullptr);
    CHECK(a->w == doctest::Approx(0.5 * l.row_extent[0]));
    CHECK(a->h == doctest::Approx(1.0 * l.col_extent[0]));
    CHECK(b->w == doctest::Approx(1.0 * l.row_extent[1]));
    CHECK(b->h == doctest::Approx(2.0 / 3.0 * l.col_extent[1]));
    CHECK(a->x == l.col_start[0]);
    CHECK(a->y == l.row_start[0]);
}

TEST_CASE("layout: identity table gives equal full-band squares") {
    const ContingencyTable t(2, 2, {5, 0, 0, 5});
    const auto l = layout(t);
    REQUIRE(l.cells.size() == 2);
    CHECK(l.cells[0].w == doctest::Approx(l.cells[1].w));
    CHECK(l.cells[0].h == doctest::Approx(l.cells[1].h));
    CHECK(l.cells[0].w == doctest::Approx(l.col_extent[0]));
    CHECK(l.cells[0].h == doctest::Approx(l.row_extent[0]));
}

TEST_CASE("layout: an even split gives two half-width full-height cells") {
    // Category 0 split evenly over clusters 0 and 1.
    const ContingencyTable t(2, 3, {5, 5, 0, 0, 0, 10});
    const auto l = layout(t, 0.0);
    const auto* a = cell(l, 0, 0);
    const auto* b = cell(l, 0, 1);
    REQUIRE(a);
    REQUIRE(b);
    CHECK(a->w == doctest::Approx(0.5 * l.row_extent[0]));
    CHECK(b->w == doctest::Approx(0.5 * l.row_extent[0]));
    CHECK(a->h == doctest::Approx(l.col_extent[0]));
    CHECK(b->h == doctest::Approx(l.col_extent[1]));
    CHECK(a->x + a->w == doctest::Approx(b->x));
    // Together they cover both column bands without a seam.
    CHECK(a->w == doctest::Approx(l.col_extent[0]));
    CHECK(b->x + b->w == doctest::Approx(l.col_start[1] + l.col_extent[1]));
    CHECK(a->h == doctest::Approx(b->h));
}

TEST_CASE("layout: band sums and containment on random tables") {
    std::mt19937_64 rng(12);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t r = 1 + rng() % 7, c = 1 + rng() % 7;
        std::vector<std::int64_t> v(r * c);
        for (auto& x : v)
            x = rng() % 3 == 0 ? 0 : static_cast<std::int64_t>(rng() % 30);
        v[0] += 1;
        const ContingencyTable t(r, c, v);
        const double gap = 0.01 * static_cast<double>(trial % 11);
        const auto l = layout(t, gap);
        std::vector<double> row_w(r, 0.0), col_h(c, 0.0);
        for (const auto& cl : l.cells) {
            CHECK(cl.value > 0);
            row_w[cl.row] += cl.w;
            col_h[cl.col] += cl.h;
            CHECK(cl.x >= 0.0);
            CHECK(cl.y >= 0.0);
            CHECK(cl.x + cl.w <= l.width + 1e-12);
            CHECK(cl.y + cl.h <= l.height + 1e-12);
        }
        for (std::size_t i = 0; i < r; ++i)
            if (t.row_sum(i) > 0)
                CHECK(std::abs(row_w[i] - l.row_extent[i]) <= 1e-9);
        for (std::size_t j = 0; j < c; ++j)
            if (t.col_sum(j) > 0)
                CHECK(std::abs(col_h[j] - l.col_extent[j]) <= 1e-9);
    }
}

TEST_CASE("layout: errors") {
    CHECK_THROWS_AS(layout(ContingencyTable(1, 1, {0})), InputError);
    CHECK_THROWS_AS(layout(ContingencyTable(1, 1, {1}), 0.2), ParameterError);
}

TEST_CASE("svg: cell count and determinism") {
    const ContingencyTable t(3, 3, {4, 0, 0, 0, 5, 0, 0, 0, 6});
    const auto l = layout(t);
    const auto svg = render_svg(l);
    CHECK(count(svg, "fill-opacity=") == 3);
    CHECK(svg == render_svg(l));
    CHECK(svg.rfind("</svg>") != std::string::npos);
    CHECK(count(svg, "<g") == count(svg, "</g>"));

    MosaicLayout empty;
    const auto blank = render_svg(empty);
    CHECK(count(blank, "fill-opacity=") == 0);
    CHECK(blank.find("<svg") != std::string::npos);
}

TEST_CASE("svg: opacity grows with the count") {
    const ContingencyTable t(1, 3, {1, 4, 2});
    const auto svg = render_svg(layout(t));
    CHECK(svg.find("fill-opacity=\"0.2500\"") != std::string::npos);
    CHECK(svg.find("fill-opacity=\"1.0000\"") != std::string::npos);
    CHECK(svg.find("fill-opacity=\"0.5000\"") != std::string::npos);
}

TEST_CASE("svg: labels are escaped") {
    MosaicStyle style;
    style.row_labels = std::vector<std::string>{"a<b"};
    style.col_labels = std::vector<std::string>{"x&y"};
    const auto svg = render_svg(layout(ContingencyTable(1, 1, {3})), style);
    CHECK(svg.find("a&lt;b") != std::string::npos);
    CHECK(svg.find("x&amp;y") != std::string::npos);
}

TEST_CASE("alignment enlarges the diagonal band") {
    std::mt19937_64 rng(2);
    for (int trial = 0; trial < 20; ++trial) {
        // A shuffled noisy diagonal with two extra clusters.
        const std::size_t k = 12, c = 14;
        std::vector<std::size_t> perm(c);
        std::iota(perm.begin(), perm.end(), 0);
        std::shuffle(perm.begin(), perm.end(), rng);
        std::vector<std::int64_t> v(k * c, 0);
        for (std::size_t i = 0; i < k; ++i) {
            v[i * c + perm[i]] = 40 + static_cast<std::int64_t>(rng() % 40);
            for (std::size_t j = 0; j < c; ++j)
                v[i * c + j] += static_cast<std::int64_t>(rng() % 4);
        }
        v[perm[12]] += 30;
        v[5 * c + perm[13]] += 25;
        const ContingencyTable t(k, c, v);
        CHECK(diagonal_area(rms_align(t)) > diagonal_area(identity_alignment(t)));
    }
}

TEST_CASE("layout csv") {
    const auto csv = layout_csv(layout(ContingencyTable(2, 2, {2, 2, 0, 4})));
    CHECK(csv.rfind("i,j,x,y,w,h,value\n", 0) == 0);
    CHECK(count(csv, "\n") == 4);
}

TEST_CASE("line plot") {
    const std::vector<LineSeries> s{{"a", {0, 1, 2}, {1, 3, 2}}, {"b", {0, 2}, {0, 1}}};
    const auto svg = render_line_plot(s, "t", "y", "title");
    CHECK(count(svg, "<polyline") == 2);
    CHECK(svg == render_line_plot(s, "t", "y", "title"));
}
