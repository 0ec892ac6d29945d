#include "nlt/svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace nlt {

namespace {

constexpr const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                   "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string tick_label(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '&': out += "&amp;"; break;
            default: out += c;
        }
    }
    return out;
}

struct Axis {
    bool log = false;
    double lo = 0.0;
    double hi = 1.0;

    double map(double v) const { return log ? std::log10(v) : v; }
    bool usable(double v) const { return std::isfinite(v) && (!log || v > 0.0); }

    void fit(double mn, double mx) {
        if (!(mn <= mx)) {
            mn = log ? 1.0 : 0.0;
            mx = log ? 10.0 : 1.0;
        }
        lo = map(mn);
        hi = map(mx);
        if (hi - lo < 1e-12) {
            lo -= 0.5;
            hi += 0.5;
        }
    }

    std::vector<double> ticks() const {
        std::vector<double> t;
        if (log) {
            const int a = static_cast<int>(std::ceil(lo));
            const int b = static_cast<int>(std::floor(hi));
            const int stride = std::max(1, (b - a) / 8 + 1);
            for (int e = a; e <= b; e += stride) {
                t.push_back(e);
            }
        } else {
            for (int k = 0; k <= 5; ++k) {
                t.push_back(lo + (hi - lo) * k / 5.0);
            }
        }
        return t;
    }

    std::string label(double mapped) const {
        return log ? "1e" + std::to_string(static_cast<int>(std::lround(mapped)))
                   : tick_label(mapped);
    }
};

}  // namespace

std::string render_line_chart(const ChartSpec& spec, const std::vector<Series>& series) {
    Axis ax{spec.log_x};
    Axis ay{spec.log_y};
    double xmn = std::numeric_limits<double>::infinity(), xmx = -xmn;
    double ymn = xmn, ymx = -xmn;
    for (const auto& s : series) {
        for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
            if (ax.usable(s.x[i]) && ay.usable(s.y[i])) {
                xmn = std::min(xmn, s.x[i]);
                xmx = std::max(xmx, s.x[i]);
                ymn = std::min(ymn, s.y[i]);
                ymx = std::max(ymx, s.y[i]);
            }
        }
    }
    ax.fit(xmn, xmx);
    ay.fit(ymn, ymx);

    const double left = 70, right = 20, top = 40, bottom = 50;
    const double pw = spec.width - left - right;
    const double ph = spec.height - top - bottom;
    auto px = [&](double v) { return left + (ax.map(v) - ax.lo) / (ax.hi - ax.lo) * pw; };
    auto py = [&](double v) { return top + ph - (ay.map(v) - ay.lo) / (ay.hi - ay.lo) * ph; };

    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << spec.width << "\" height=\""
       << spec.height << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<text x=\"" << num(spec.width / 2.0) << "\" y=\"22\" text-anchor=\"middle\" "
       << "font-size=\"14\">" << escape(spec.title) << "</text>\n";
    os << "<rect x=\"" << num(left) << "\" y=\"" << num(top) << "\" width=\"" << num(pw)
       << "\" height=\"" << num(ph) << "\" fill=\"none\" stroke=\"black\"/>\n";

    for (double t : ax.ticks()) {
        const double x = left + (t - ax.lo) / (ax.hi - ax.lo) * pw;
        os << "<line x1=\"" << num(x) << "\" y1=\"" << num(top) << "\" x2=\"" << num(x)
           << "\" y2=\"" << num(top + ph) << "\" stroke=\"#ddd\"/>\n";
        os << "<text x=\"" << num(x) << "\" y=\"" << num(top + ph + 15)
           << "\" text-anchor=\"middle\">" << ax.label(t) << "</text>\n";
    }
    for (double t : ay.ticks()) {
        const double y = top + ph - (t - ay.lo) / (ay.hi - ay.lo) * ph;
        os << "<line x1=\"" << num(left) << "\" y1=\"" << num(y) << "\" x2=\"" << num(left + pw)
           << "\" y2=\"" << num(y) << "\" stroke=\"#ddd\"/>\n";
        os << "<text x=\"" << num(left - 5) << "\" y=\"" << num(y + 4)
           << "\" text-anchor=\"end\">" << ay.label(t) << "</text>\n";
    }
    os << "<text x=\"" << num(left + pw / 2) << "\" y=\"" << num(spec.height - 10.0)
       << "\" text-anchor=\"middle\">" << escape(spec.x_label) << "</text>\n";
    os << "<text transform=\"translate(15," << num(top + ph / 2) << ") rotate(-90)\" "
       << "text-anchor=\"middle\">" << escape(spec.y_label) << "</text>\n";

    for (std::size_t k = 0; k < series.size(); ++k) {
        const auto& s = series[k];
        const char* color = kColors[k % std::size(kColors)];
        os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\"";
        if (s.dashed) {
            os << " stroke-dasharray=\"5,3\"";
        }
        os << " points=\"";
        for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
            if (ax.usable(s.x[i]) && ay.usable(s.y[i])) {
                os << num(px(s.x[i])) << ',' << num(py(s.y[i])) << ' ';
            }
        }
        os << "\"/>\n";
        const double ly = top + 14.0 + 14.0 * static_cast<double>(k);
        os << "<line x1=\"" << num(left + pw - 130) << "\" y1=\"" << num(ly - 4) << "\" x2=\""
           << num(left + pw - 110) << "\" y2=\"" << num(ly - 4) << "\" stroke=\"" << color
           << "\"" << (s.dashed ? " stroke-dasharray=\"5,3\"" : "") << "/>\n";
        os << "<text x=\"" << num(left + pw - 105) << "\" y=\"" << num(ly) << "\">"
           << escape(s.name) << "</text>\n";
    }
    os << "</svg>\n";
    return os.str();
}

}  // namespace nlt
