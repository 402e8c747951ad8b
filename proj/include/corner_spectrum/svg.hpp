#pragma once

// Minimal line-plot emitter: axes, ticks, polylines and shaded x-bands.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

namespace corner::svg {

struct Series {
    std::string label;
    std::string colour;
    std::vector<std::pair<double, double>> points;  // NaN y breaks the path
};

struct Band {
    double x0, x1;
    std::string label;
};

inline std::string escape(const std::string& s) {
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

inline std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

class Plot {
public:
    Plot(std::string title, std::string x_label, std::string y_label)
        : title_(std::move(title)), x_label_(std::move(x_label)), y_label_(std::move(y_label)) {}

    void add(Series s) { series_.push_back(std::move(s)); }
    void shade(Band b) { bands_.push_back(std::move(b)); }

    void write(std::ostream& os) const {
        constexpr double W = 720, H = 440, L = 70, R = 20, T = 40, B = 60;
        double x0 = inf, x1 = -inf, y0 = inf, y1 = -inf;
        for (const auto& s : series_)
            for (auto [x, y] : s.points) {
                if (!std::isfinite(x) || !std::isfinite(y)) continue;
                x0 = std::min(x0, x), x1 = std::max(x1, x), y0 = std::min(y0, y), y1 = std::max(y1, y);
            }
        if (!(x0 < x1)) x0 -= 1, x1 += 1;
        if (!(y0 < y1)) y0 -= 1, y1 += 1;
        const double pad = 0.05 * (y1 - y0);
        y0 -= pad, y1 += pad;
        auto px = [&](double x) { return L + (x - x0) / (x1 - x0) * (W - L - R); };
        auto py = [&](double y) { return H - B - (y - y0) / (y1 - y0) * (H - T - B); };

        os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" viewBox=\"0 0 "
           << W << ' ' << H << "\">\n";
        os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
        os << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">" << escape(title_)
           << "</text>\n";
        for (const auto& b : bands_) {
            const double a = px(std::clamp(b.x0, x0, x1)), c = px(std::clamp(b.x1, x0, x1));
            os << "<rect x=\"" << num(a) << "\" y=\"" << T << "\" width=\"" << num(c - a) << "\" height=\""
               << H - T - B << "\" fill=\"#dddddd\"><title>" << escape(b.label) << "</title></rect>\n";
        }
        os << "<g stroke=\"black\" fill=\"none\">\n";
        os << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\"" << H - B << "\"/>\n";
        os << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << H - B << "\"/>\n";
        os << "</g>\n<g font-size=\"11\">\n";
        for (int i = 0; i <= 5; ++i) {
            const double xv = x0 + (x1 - x0) * i / 5, yv = y0 + (y1 - y0) * i / 5;
            os << "<text x=\"" << num(px(xv)) << "\" y=\"" << H - B + 16 << "\" text-anchor=\"middle\">" << num(xv)
               << "</text>\n";
            os << "<text x=\"" << L - 6 << "\" y=\"" << num(py(yv) + 4) << "\" text-anchor=\"end\">" << num(yv)
               << "</text>\n";
        }
        os << "</g>\n";
        os << "<text x=\"" << W / 2 << "\" y=\"" << H - 16 << "\" text-anchor=\"middle\">" << escape(x_label_)
           << "</text>\n";
        os << "<text x=\"16\" y=\"" << H / 2 << "\" transform=\"rotate(-90 16 " << H / 2
           << ")\" text-anchor=\"middle\">" << escape(y_label_) << "</text>\n";
        int row = 0;
        for (const auto& s : series_) {
            std::string d;
            bool pen = false;
            for (auto [x, y] : s.points) {
                if (!std::isfinite(x) || !std::isfinite(y)) {
                    pen = false;
                    continue;
                }
                d += (pen ? " L" : " M") + num(px(x)) + ' ' + num(py(y));
                pen = true;
            }
            if (!d.empty())
                os << "<path d=\"" << d.substr(1) << "\" stroke=\"" << s.colour
                   << "\" stroke-width=\"1.5\" fill=\"none\"/>\n";
            os << "<text x=\"" << W - R - 4 << "\" y=\"" << T + 14 + 14 * row++ << "\" text-anchor=\"end\" fill=\""
               << s.colour << "\" font-size=\"12\">" << escape(s.label) << "</text>\n";
        }
        os << "</svg>\n";
    }

private:
    static constexpr double inf = std::numeric_limits<double>::infinity();
    std::string title_, x_label_, y_label_;
    std::vector<Series> series_;
    std::vector<Band> bands_;
};

}  // namespace corner::svg
