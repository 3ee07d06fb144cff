#include "confres/mosaic.hpp"

#include "confres/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace confres {

namespace {

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", v);
    return buf;
}

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        default: out += c;
        }
    }
    return out;
}

const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};

}  // namespace

MosaicLayout layout(const ContingencyTable& table, double gap) {
    if (table.total() <= 0)
        throw InputError("cannot lay out an empty table");
    if (!(gap >= 0.0 && gap <= 0.1))
        throw ParameterError("gap must lie in [0, 0.1]");
    const double n = static_cast<double>(table.total());
    MosaicLayout out;
    out.gap = gap;
    out.rows = table.rows();
    out.cols = table.cols();
    out.max_value = table.max_count();

    // Bands follow the marginal fractions and shrink symmetrically by gap.
    double x = 0.0;
    for (std::size_t j = 0; j < table.cols(); ++j) {
        const double band = static_cast<double>(table.col_sum(j)) / n * out.width;
        out.col_start.push_back(x + 0.5 * gap * band);
        out.col_extent.push_back((1.0 - gap) * band);
        x += band;
    }
    double y = 0.0;
    for (std::size_t i = 0; i < table.rows(); ++i) {
        const double band = static_cast<double>(table.row_sum(i)) / n * out.height;
        out.row_start.push_back(y + 0.5 * gap * band);
        out.row_extent.push_back((1.0 - gap) * band);
        y += band;
    }

    for (std::size_t i = 0; i < table.rows(); ++i) {
        for (std::size_t j = 0; j < table.cols(); ++j) {
            const auto v = table(i, j);
            if (v == 0)
                continue;
            MosaicCell c;
            c.row = i;
            c.col = j;
            c.value = v;
            c.x = out.col_start[j];
            c.y = out.row_start[i];
            c.w = static_cast<double>(v) / static_cast<double>(table.row_sum(i)) * out.row_extent[i];
            c.h = static_cast<double>(v) / static_cast<double>(table.col_sum(j)) * out.col_extent[j];
            out.cells.push_back(c);
        }
    }
    return out;
}

std::string render_svg(const MosaicLayout& lay, const MosaicStyle& style) {
    const double px = style.pixels;
    const double margin_left = style.row_labels ? 80.0 : 10.0;
    const double margin_top = style.col_labels ? 40.0 : 10.0;
    const double w = margin_left + px * lay.width + 10.0;
    const double h = margin_top + px * lay.height + 10.0;

    std::ostringstream os;
    os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
       << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << num(w)
       << "\" height=\"" << num(h) << "\" viewBox=\"0 0 " << num(w) << ' ' << num(h) << "\">\n"
       << "<rect x=\"0\" y=\"0\" width=\"" << num(w) << "\" height=\"" << num(h)
       << "\" fill=\"#ffffff\"/>\n";

    if (style.show_grid) {
        os << "<g class=\"grid\" fill=\"none\" stroke=\"#d0d0d0\" stroke-width=\"0.5\">\n";
        for (std::size_t j = 0; j < lay.cols; ++j)
            for (std::size_t i = 0; i < lay.rows; ++i)
                os << "<rect x=\"" << num(margin_left + px * lay.col_start[j]) << "\" y=\""
                   << num(margin_top + px * lay.row_start[i]) << "\" width=\""
                   << num(px * lay.col_extent[j]) << "\" height=\"" << num(px * lay.row_extent[i])
                   << "\"/>\n";
        os << "</g>\n";
    }

    os << "<g class=\"cells\" fill=\"" << escape(style.color) << "\">\n";
    const double top = lay.max_value > 0 ? static_cast<double>(lay.max_value) : 1.0;
    for (const auto& c : lay.cells) {
        os << "<rect x=\"" << num(margin_left + px * c.x) << "\" y=\"" << num(margin_top + px * c.y)
           << "\" width=\"" << num(px * c.w) << "\" height=\"" << num(px * c.h)
           << "\" fill-opacity=\"" << num(static_cast<double>(c.value) / top) << "\"><title>("
           << c.row << ", " << c.col << ") " << c.value << "</title></rect>\n";
    }
    os << "</g>\n";

    if (style.row_labels) {
        os << "<g class=\"row-labels\" font-family=\"sans-serif\" font-size=\"11\" "
              "text-anchor=\"end\">\n";
        for (std::size_t i = 0; i < lay.rows && i < style.row_labels->size(); ++i)
            os << "<text x=\"" << num(margin_left - 4.0) << "\" y=\""
               << num(margin_top + px * (lay.row_start[i] + 0.5 * lay.row_extent[i]) + 4.0) << "\">"
               << escape((*style.row_labels)[i]) << "</text>\n";
        os << "</g>\n";
    }
    if (style.col_labels) {
        os << "<g class=\"col-labels\" font-family=\"sans-serif\" font-size=\"11\" "
              "text-anchor=\"middle\">\n";
        for (std::size_t j = 0; j < lay.cols && j < style.col_labels->size(); ++j)
            os << "<text x=\"" << num(margin_left + px * (lay.col_start[j] + 0.5 * lay.col_extent[j]))
               << "\" y=\"" << num(margin_top - 8.0) << "\">" << escape((*style.col_labels)[j])
               << "</text>\n";
        os << "</g>\n";
    }
    os << "</svg>\n";
    return os.str();
}

std::string layout_csv(const MosaicLayout& lay) {
    std::ostringstream os;
    os << "i,j,x,y,w,h,value\n";
    char buf[160];
    for (const auto& c : lay.cells) {
        std::snprintf(buf, sizeof buf, "%zu,%zu,%.10g,%.10g,%.10g,%.10g,%lld\n", c.row, c.col, c.x,
                      c.y, c.w, c.h, static_cast<long long>(c.value));
        os << buf;
    }
    return os.str();
}

std::string render_line_plot(const std::vector<LineSeries>& series, const std::string& x_label,
                             const std::string& y_label, const std::string& title) {
    const double W = 640, H = 400, left = 60, right = 130, top = 30, bottom = 50;
    double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
    for (const auto& s : series) {
        for (double v : s.x) {
            x0 = std::min(x0, v);
            x1 = std::max(x1, v);
        }
        for (double v : s.y) {
            y0 = std::min(y0, v);
            y1 = std::max(y1, v);
        }
    }
    if (!std::isfinite(x0)) {
        x0 = 0;
        x1 = 1;
        y0 = 0;
        y1 = 1;
    }
    if (x1 == x0)
        x1 = x0 + 1;
    if (y1 == y0)
        y1 = y0 + 1;
    y0 = std::min(y0, 0.0);
    const double pw = W - left - right, ph = H - top - bottom;
    auto sx = [&](double v) { return left + (v - x0) / (x1 - x0) * pw; };
    auto sy = [&](double v) { return top + ph - (v - y0) / (y1 - y0) * ph; };

    std::ostringstream os;
    os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
       << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << num(W)
       << "\" height=\"" << num(H) << "\" font-family=\"sans-serif\" font-size=\"11\">\n"
       << "<rect x=\"0\" y=\"0\" width=\"" << num(W) << "\" height=\"" << num(H)
       << "\" fill=\"#ffffff\"/>\n"
       << "<rect x=\"" << num(left) << "\" y=\"" << num(top) << "\" width=\"" << num(pw)
       << "\" height=\"" << num(ph) << "\" fill=\"none\" stroke=\"#444444\"/>\n";
    if (!title.empty())
        os << "<text x=\"" << num(left + pw / 2) << "\" y=\"18\" text-anchor=\"middle\">"
           << escape(title) << "</text>\n";
    os << "<text x=\"" << num(left + pw / 2) << "\" y=\"" << num(H - 12)
       << "\" text-anchor=\"middle\">" << escape(x_label) << "</text>\n"
       << "<text x=\"14\" y=\"" << num(top + ph / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 14 "
       << num(top + ph / 2) << ")\">" << escape(y_label) << "</text>\n";
    for (int t = 0; t <= 4; ++t) {
        const double xv = x0 + (x1 - x0) * t / 4.0, yv = y0 + (y1 - y0) * t / 4.0;
        os << "<text x=\"" << num(sx(xv)) << "\" y=\"" << num(top + ph + 16)
           << "\" text-anchor=\"middle\">" << num(xv) << "</text>\n"
           << "<text x=\"" << num(left - 4) << "\" y=\"" << num(sy(yv) + 4)
           << "\" text-anchor=\"end\">" << num(yv) << "</text>\n";
    }
    for (std::size_t s = 0; s < series.size(); ++s) {
        const char* color = kPalette[s % (sizeof kPalette / sizeof kPalette[0])];
        os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t p = 0; p < std::min(series[s].x.size(), series[s].y.size()); ++p)
            os << (p ? " " : "") << num(sx(series[s].x[p])) << ',' << num(sy(series[s].y[p]));
        os << "\"/>\n"
           << "<text x=\"" << num(left + pw + 8) << "\" y=\"" << num(top + 14 + 16.0 * s)
           << "\" fill=\"" << color << "\">" << escape(series[s].name) << "</text>\n";
    }
    os << "</svg>\n";
    return os.str();
}

}  // namespace confres
