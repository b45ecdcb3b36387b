#pragma once
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

// Minimal deterministic SVG 1.1 line plots: fixed canvas, fixed formatting,
// no timestamps or generator strings, so identical data yields identical
// bytes.  Four kinds are produced by the CLI: map graph, orbit trace
// projection, measure-path distance profile, loop-family convergence.

namespace lzl {

namespace detail {

inline std::string fmt_num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

}  // namespace detail

class SvgPlot {
  public:
    SvgPlot(std::string title, std::string xlabel, std::string ylabel)
        : title_(std::move(title)), xlabel_(std::move(xlabel)),
          ylabel_(std::move(ylabel)) {}

    void add_polyline(std::vector<std::pair<double, double>> pts,
                      std::string color) {
        for (auto& [x, y] : pts) {
            xmin_ = std::min(xmin_, x);
            xmax_ = std::max(xmax_, x);
            ymin_ = std::min(ymin_, y);
            ymax_ = std::max(ymax_, y);
        }
        lines_.push_back({std::move(pts), std::move(color)});
    }

    void add_points(std::vector<std::pair<double, double>> pts,
                    std::string color) {
        for (auto& [x, y] : pts) {
            xmin_ = std::min(xmin_, x);
            xmax_ = std::max(xmax_, x);
            ymin_ = std::min(ymin_, y);
            ymax_ = std::max(ymax_, y);
        }
        dots_.push_back({std::move(pts), std::move(color)});
    }

    void write(const std::string& path) const {
        std::ofstream out(path, std::ios::binary);
        if (!out) throw std::invalid_argument("svg: cannot open " + path);
        const double W = 640.0, H = 480.0, ml = 60.0, mr = 20.0, mt = 40.0,
                     mb = 50.0;
        double xmin = xmin_, xmax = xmax_, ymin = ymin_, ymax = ymax_;
        if (!(xmax > xmin)) { xmin -= 0.5; xmax += 0.5; }
        if (!(ymax > ymin)) { ymin -= 0.5; ymax += 0.5; }
        const double xpad = 0.03 * (xmax - xmin), ypad = 0.03 * (ymax - ymin);
        xmin -= xpad; xmax += xpad; ymin -= ypad; ymax += ypad;
        auto sx = [&](double x) {
            return ml + (x - xmin) / (xmax - xmin) * (W - ml - mr);
        };
        auto sy = [&](double y) {
            return H - mb - (y - ymin) / (ymax - ymin) * (H - mt - mb);
        };
        using detail::fmt_num;
        out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
            << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" "
            << "width=\"640\" height=\"480\" viewBox=\"0 0 640 480\">\n"
            << "<rect x=\"0\" y=\"0\" width=\"640\" height=\"480\" "
               "fill=\"white\"/>\n";
        // frame
        out << "<rect x=\"" << fmt_num(ml) << "\" y=\"" << fmt_num(mt)
            << "\" width=\"" << fmt_num(W - ml - mr) << "\" height=\""
            << fmt_num(H - mt - mb)
            << "\" fill=\"none\" stroke=\"black\" stroke-width=\"1\"/>\n";
        // axis labels and corner ticks
        out << "<text x=\"" << fmt_num(W / 2) << "\" y=\"24\" "
            << "font-family=\"monospace\" font-size=\"14\" "
               "text-anchor=\"middle\">"
            << title_ << "</text>\n";
        out << "<text x=\"" << fmt_num(W / 2) << "\" y=\""
            << fmt_num(H - 12)
            << "\" font-family=\"monospace\" font-size=\"12\" "
               "text-anchor=\"middle\">"
            << xlabel_ << "</text>\n";
        out << "<text x=\"16\" y=\"" << fmt_num(H / 2)
            << "\" font-family=\"monospace\" font-size=\"12\" "
               "text-anchor=\"middle\" transform=\"rotate(-90 16 "
            << fmt_num(H / 2) << ")\">" << ylabel_ << "</text>\n";
        auto tick = [&](double v, bool xaxis) {
            if (xaxis) {
                out << "<text x=\"" << fmt_num(sx(v)) << "\" y=\""
                    << fmt_num(H - mb + 16)
                    << "\" font-family=\"monospace\" font-size=\"10\" "
                       "text-anchor=\"middle\">"
                    << fmt_num(v) << "</text>\n";
            } else {
                out << "<text x=\"" << fmt_num(ml - 6) << "\" y=\""
                    << fmt_num(sy(v) + 3)
                    << "\" font-family=\"monospace\" font-size=\"10\" "
                       "text-anchor=\"end\">"
                    << fmt_num(v) << "</text>\n";
            }
        };
        tick(xmin + xpad, true);
        tick(xmax - xpad, true);
        tick(ymin + ypad, false);
        tick(ymax - ypad, false);
        for (const auto& [pts, color] : lines_) {
            out << "<polyline fill=\"none\" stroke=\"" << color
                << "\" stroke-width=\"1.5\" points=\"";
            for (std::size_t i = 0; i < pts.size(); ++i) {
                if (i) out << ' ';
                out << fmt_num(sx(pts[i].first)) << ','
                    << fmt_num(sy(pts[i].second));
            }
            out << "\"/>\n";
        }
        for (const auto& [pts, color] : dots_) {
            for (const auto& [x, y] : pts)
                out << "<circle cx=\"" << fmt_num(sx(x)) << "\" cy=\""
                    << fmt_num(sy(y)) << "\" r=\"2.5\" fill=\"" << color
                    << "\"/>\n";
        }
        out << "</svg>\n";
    }

  private:
    struct Series {
        std::vector<std::pair<double, double>> pts;
        std::string color;
    };
    std::string title_, xlabel_, ylabel_;
    std::vector<Series> lines_, dots_;
    double xmin_ = 1e300, xmax_ = -1e300, ymin_ = 1e300, ymax_ = -1e300;
};

// RFC-4180 CSV writer with a header row.
class CsvWriter {
  public:
    explicit CsvWriter(std::vector<std::string> header)
        : header_(std::move(header)) {}

    void add_row(std::vector<std::string> row) {
        if (row.size() != header_.size())
            throw std::invalid_argument("csv: row width mismatch");
        rows_.push_back(std::move(row));
    }

    void write(const std::string& path) const {
        std::ofstream out(path, std::ios::binary);
        if (!out) throw std::invalid_argument("csv: cannot open " + path);
        auto emit = [&](const std::vector<std::string>& row) {
            for (std::size_t i = 0; i < row.size(); ++i) {
                if (i) out << ',';
                out << quote(row[i]);
            }
            out << "\r\n";
        };
        emit(header_);
        for (const auto& r : rows_) emit(r);
    }

  private:
    static std::string quote(const std::string& s) {
        if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
        std::string q = "\"";
        for (char ch : s) {
            if (ch == '"') q += "\"\"";
            else q += ch;
        }
        q += "\"";
        return q;
    }
    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

}  // namespace lzl
