#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

namespace prn {

/// Minimal line/scatter plot writer. CSV files are the authoritative
/// outputs; this exists so figure presets can be eyeballed without any
/// plotting dependency.
class SvgPlot {
public:
    SvgPlot(int width = 720, int height = 480) : width_(width), height_(height) {}

    void add_line(const std::string& name, const std::string& color,
                  std::vector<double> xs, std::vector<double> ys, bool dashed = false) {
        series_.push_back({name, color, std::move(xs), std::move(ys), dashed, false});
    }

    void add_points(const std::string& name, const std::string& color,
                    std::vector<double> xs, std::vector<double> ys) {
        series_.push_back({name, color, std::move(xs), std::move(ys), false, true});
    }

    void write(std::ostream& os) const {
        double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
        double ymin = xmin, ymax = -xmin;
        for (const auto& s : series_) {
            for (double x : s.xs) { xmin = std::min(xmin, x); xmax = std::max(xmax, x); }
            for (double y : s.ys) { ymin = std::min(ymin, y); ymax = std::max(ymax, y); }
        }
        if (!(xmin < xmax)) { xmin -= 0.5; xmax += 0.5; }
        if (!(ymin < ymax)) { ymin -= 0.5; ymax += 0.5; }
        const double xpad = 0.03 * (xmax - xmin), ypad = 0.06 * (ymax - ymin);
        xmin -= xpad; xmax += xpad; ymin -= ypad; ymax += ypad;

        const double left = 56, right = 16, top = 16, bottom = 40;
        const double pw = width_ - left - right, ph = height_ - top - bottom;
        auto px = [&](double x) { return left + (x - xmin) / (xmax - xmin) * pw; };
        auto py = [&](double y) { return top + (ymax - y) / (ymax - ymin) * ph; };

        os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width_
           << "\" height=\"" << height_ << "\">\n";
        os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
        // axes box and ticks
        os << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw
           << "\" height=\"" << ph << "\" fill=\"none\" stroke=\"black\"/>\n";
        for (int i = 0; i <= 5; ++i) {
            const double fx = xmin + (xmax - xmin) * i / 5.0;
            const double fy = ymin + (ymax - ymin) * i / 5.0;
            os << "<text x=\"" << px(fx) << "\" y=\"" << (height_ - bottom + 18)
               << "\" font-size=\"11\" text-anchor=\"middle\">" << label(fx) << "</text>\n";
            os << "<text x=\"" << (left - 6) << "\" y=\"" << (py(fy) + 4)
               << "\" font-size=\"11\" text-anchor=\"end\">" << label(fy) << "</text>\n";
        }
        for (const auto& s : series_) {
            if (s.points) {
                for (std::size_t i = 0; i < s.xs.size(); ++i)
                    os << "<circle cx=\"" << px(s.xs[i]) << "\" cy=\"" << py(s.ys[i])
                       << "\" r=\"3\" fill=\"" << s.color << "\"/>\n";
            } else {
                os << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.5\"";
                if (s.dashed) os << " stroke-dasharray=\"6 4\"";
                os << " points=\"";
                for (std::size_t i = 0; i < s.xs.size(); ++i)
                    os << px(s.xs[i]) << "," << py(s.ys[i]) << " ";
                os << "\"/>\n";
            }
        }
        // legend
        double ly = top + 14;
        for (const auto& s : series_) {
            os << "<rect x=\"" << (left + 10) << "\" y=\"" << (ly - 8)
               << "\" width=\"14\" height=\"4\" fill=\"" << s.color << "\"/>\n";
            os << "<text x=\"" << (left + 30) << "\" y=\"" << ly
               << "\" font-size=\"12\">" << s.name << "</text>\n";
            ly += 16;
        }
        os << "</svg>\n";
    }

private:
    struct Series {
        std::string name, color;
        std::vector<double> xs, ys;
        bool dashed = false;
        bool points = false;
    };

    static std::string label(double v) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.3g", v);
        return buf;
    }

    int width_, height_;
    std::vector<Series> series_;
};

} // namespace prn
