// Plot-ready exports for embeddings: CSV data and a self-contained SVG
// scatter (one color per class, one marker shape per domain).
#pragma once

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "amclab/data/dataset.hpp"
#include "amclab/viz/tsne.hpp"

namespace amclab::viz {

inline void export_plot_data(const Embedding2D& e, const std::string& path) {
    if (e.points.rows == 0) throw std::invalid_argument("export_plot_data: empty embedding");
    if (e.labels.size() != e.points.rows || e.domains.size() != e.points.rows)
        throw std::invalid_argument("export_plot_data: labels/domains missing");
    std::ofstream os(path, std::ios::trunc);
    if (!os) throw std::runtime_error("export_plot_data: cannot open " + path);
    os << "x,y,class,domain\n";
    char buf[96];
    for (std::size_t i = 0; i < e.points.rows; ++i) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,", e.points(i, 0), e.points(i, 1));
        os << buf << data::decode_label(e.labels[i]) << "," << e.domains[i] << "\n";
    }
    if (!os) throw std::runtime_error("export_plot_data: write failed: " + path);
}

namespace detail {

inline const char* class_color(int cls) {
    static const char* colors[5] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd"};
    return colors[cls % 5];
}

inline std::string fmtd(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

}  // namespace detail

inline void render_scatter(const Embedding2D& e, const std::string& path,
                           const std::string& title = "") {
    if (e.points.rows == 0) throw std::invalid_argument("render_scatter: empty embedding");
    if (e.labels.size() != e.points.rows || e.domains.size() != e.points.rows)
        throw std::invalid_argument("render_scatter: labels/domains missing");

    const double width = 720, height = 540, margin = 48;
    double xmin = e.points(0, 0), xmax = xmin, ymin = e.points(0, 1), ymax = ymin;
    for (std::size_t i = 0; i < e.points.rows; ++i) {
        xmin = std::min(xmin, e.points(i, 0));
        xmax = std::max(xmax, e.points(i, 0));
        ymin = std::min(ymin, e.points(i, 1));
        ymax = std::max(ymax, e.points(i, 1));
    }
    const double xspan = xmax > xmin ? xmax - xmin : 1.0;
    const double yspan = ymax > ymin ? ymax - ymin : 1.0;
    auto sx = [&](double x) { return margin + (x - xmin) / xspan * (width - 2 * margin); };
    auto sy = [&](double y) { return height - margin - (y - ymin) / yspan * (height - 2 * margin); };

    std::vector<std::string> domain_order;
    for (const auto& d : e.domains)
        if (std::find(domain_order.begin(), domain_order.end(), d) == domain_order.end())
            domain_order.push_back(d);

    std::ofstream os(path, std::ios::trunc);
    if (!os) throw std::runtime_error("render_scatter: cannot open " + path);
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
       << height << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    if (!title.empty())
        os << "<text x=\"" << width / 2 << "\" y=\"24\" text-anchor=\"middle\" "
           << "font-family=\"sans-serif\" font-size=\"15\">" << title << "</text>\n";

    for (std::size_t i = 0; i < e.points.rows; ++i) {
        const double cx = sx(e.points(i, 0));
        const double cy = sy(e.points(i, 1));
        const char* color = detail::class_color(e.labels[i]);
        const auto shape_idx =
            std::find(domain_order.begin(), domain_order.end(), e.domains[i]) -
            domain_order.begin();
        if (shape_idx == 0) {
            os << "<circle cx=\"" << detail::fmtd(cx) << "\" cy=\"" << detail::fmtd(cy)
               << "\" r=\"2.4\" fill=\"" << color << "\" fill-opacity=\"0.7\"/>\n";
        } else {
            os << "<rect x=\"" << detail::fmtd(cx - 2.2) << "\" y=\"" << detail::fmtd(cy - 2.2)
               << "\" width=\"4.4\" height=\"4.4\" fill=\"" << color
               << "\" fill-opacity=\"0.7\"/>\n";
        }
    }

    // legend: classes by color, domains by shape
    double ly = margin;
    const double lx = width - margin - 120;
    for (int c = 0; c < 5; ++c) {
        os << "<circle cx=\"" << lx << "\" cy=\"" << ly << "\" r=\"4\" fill=\""
           << detail::class_color(c) << "\"/>\n";
        os << "<text x=\"" << lx + 10 << "\" y=\"" << ly + 4
           << "\" font-family=\"sans-serif\" font-size=\"12\">" << data::decode_label(c)
           << "</text>\n";
        ly += 18;
    }
    ly += 6;
    for (std::size_t d = 0; d < domain_order.size(); ++d) {
        if (d == 0)
            os << "<circle cx=\"" << lx << "\" cy=\"" << ly << "\" r=\"4\" fill=\"#444\"/>\n";
        else
            os << "<rect x=\"" << lx - 4 << "\" y=\"" << ly - 4
               << "\" width=\"8\" height=\"8\" fill=\"#444\"/>\n";
        os << "<text x=\"" << lx + 10 << "\" y=\"" << ly + 4
           << "\" font-family=\"sans-serif\" font-size=\"12\">" << domain_order[d]
           << "</text>\n";
        ly += 18;
    }
    os << "</svg>\n";
    if (!os) throw std::runtime_error("render_scatter: write failed: " + path);
}

}  // namespace amclab::viz
