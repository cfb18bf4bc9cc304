#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include "muce/report.hpp"

namespace muce {

struct PlotFiles {
    std::string svg;
    std::string csv;
};

namespace detail {

// Fixed canvas; no timestamps or environment-dependent content anywhere, so
// identical inputs render byte-identical files.
constexpr double kCanvasW = 720.0, kCanvasH = 480.0;
constexpr double kLeft = 64.0, kRight = 700.0, kTop = 48.0, kBottom = 430.0;

inline std::string px(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return std::string(buf);
}

inline std::string xml_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (c == '&') out += "&amp;";
        else if (c == '<') out += "&lt;";
        else if (c == '>') out += "&gt;";
        else out += c;
    }
    return out;
}

class SvgBuilder {
public:
    explicit SvgBuilder(const std::string& title) {
        out_ << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kCanvasW << "\" height=\""
             << kCanvasH << "\" viewBox=\"0 0 " << kCanvasW << " " << kCanvasH << "\">\n";
        out_ << "<rect width=\"" << kCanvasW << "\" height=\"" << kCanvasH << "\" fill=\"white\"/>\n";
        out_ << "<text x=\"" << px((kLeft + kRight) / 2) << "\" y=\"24\" font-family=\"sans-serif\""
             << " font-size=\"15\" text-anchor=\"middle\">" << xml_escape(title) << "</text>\n";
    }

    void frame_and_y_axis() {
        out_ << "<rect x=\"" << px(kLeft) << "\" y=\"" << px(kTop) << "\" width=\"" << px(kRight - kLeft)
             << "\" height=\"" << px(kBottom - kTop) << "\" fill=\"none\" stroke=\"black\"/>\n";
        for (int i = 0; i <= 4; ++i) {
            double p = 0.25 * i;
            double y = y_of(p);
            out_ << "<line x1=\"" << px(kLeft - 4) << "\" y1=\"" << px(y) << "\" x2=\"" << px(kLeft)
                 << "\" y2=\"" << px(y) << "\" stroke=\"black\"/>\n";
            char lab[8];
            std::snprintf(lab, sizeof(lab), "%.2f", p);
            out_ << "<text x=\"" << px(kLeft - 8) << "\" y=\"" << px(y + 4)
                 << "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">" << lab
                 << "</text>\n";
            if (i > 0 && i < 4)
                out_ << "<line x1=\"" << px(kLeft) << "\" y1=\"" << px(y) << "\" x2=\"" << px(kRight)
                     << "\" y2=\"" << px(y) << "\" stroke=\"#dddddd\"/>\n";
        }
        out_ << "<text x=\"20\" y=\"" << px((kTop + kBottom) / 2)
             << "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\""
             << " transform=\"rotate(-90 20 " << px((kTop + kBottom) / 2)
             << ")\">probability</text>\n";
    }

    static double y_of(double prediction) { return kBottom - prediction * (kBottom - kTop); }

    void x_tick(double xpix, const std::string& label) {
        out_ << "<line x1=\"" << px(xpix) << "\" y1=\"" << px(kBottom) << "\" x2=\"" << px(xpix)
             << "\" y2=\"" << px(kBottom + 4) << "\" stroke=\"black\"/>\n";
        out_ << "<text x=\"" << px(xpix) << "\" y=\"" << px(kBottom + 18)
             << "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">"
             << xml_escape(label) << "</text>\n";
    }

    void x_label(const std::string& label) {
        out_ << "<text x=\"" << px((kLeft + kRight) / 2) << "\" y=\"" << px(kCanvasH - 12)
             << "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">"
             << xml_escape(label) << "</text>\n";
    }

    void polyline(const std::vector<std::pair<double, double>>& pix, const std::string& color,
                  bool dashed = false) {
        out_ << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.8\"";
        if (dashed) out_ << " stroke-dasharray=\"6 4\"";
        out_ << " points=\"";
        for (const auto& [x, y] : pix) out_ << px(x) << ',' << px(y) << ' ';
        out_ << "\"/>\n";
    }

    void circle(double x, double y, double r, const std::string& color) {
        out_ << "<circle cx=\"" << px(x) << "\" cy=\"" << px(y) << "\" r=\"" << px(r) << "\" fill=\""
             << color << "\"/>\n";
    }

    void star(double x, double y, const std::string& color) {
        // five-point star, outer radius 7
        static const double outer = 7.0, inner = 2.8;
        out_ << "<polygon fill=\"" << color << "\" points=\"";
        for (int i = 0; i < 10; ++i) {
            double r = i % 2 == 0 ? outer : inner;
            double a = -1.5707963267948966 + i * 0.6283185307179586;
            out_ << px(x + r * std::cos(a)) << ',' << px(y + r * std::sin(a)) << ' ';
        }
        out_ << "\"/>\n";
    }

    void bar(double x, double w, double prediction, const std::string& color) {
        double y = y_of(prediction);
        out_ << "<rect x=\"" << px(x) << "\" y=\"" << px(y) << "\" width=\"" << px(w) << "\" height=\""
             << px(kBottom - y) << "\" fill=\"" << color << "\" stroke=\"black\"/>\n";
    }

    void whisker(double x, double lo_pred, double hi_pred) {
        double y1 = y_of(lo_pred), y2 = y_of(hi_pred);
        out_ << "<line x1=\"" << px(x) << "\" y1=\"" << px(y1) << "\" x2=\"" << px(x) << "\" y2=\""
             << px(y2) << "\" stroke=\"black\" stroke-width=\"1.5\"/>\n";
        for (double y : {y1, y2})
            out_ << "<line x1=\"" << px(x - 5) << "\" y1=\"" << px(y) << "\" x2=\"" << px(x + 5)
                 << "\" y2=\"" << px(y) << "\" stroke=\"black\" stroke-width=\"1.5\"/>\n";
    }

    void text(double x, double y, const std::string& s, const std::string& anchor = "middle") {
        out_ << "<text x=\"" << px(x) << "\" y=\"" << px(y)
             << "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"" << anchor << "\">"
             << xml_escape(s) << "</text>\n";
    }

    void legend(const std::vector<std::pair<std::string, std::string>>& entries) {
        double y = kTop + 14;
        for (const auto& [color, label] : entries) {
            out_ << "<line x1=\"" << px(kRight - 150) << "\" y1=\"" << px(y - 4) << "\" x2=\""
                 << px(kRight - 126) << "\" y2=\"" << px(y - 4) << "\" stroke=\"" << color
                 << "\" stroke-width=\"3\"/>\n";
            text(kRight - 120, y, label, "start");
            y += 16;
        }
    }

    std::string finish() {
        out_ << "</svg>\n";
        return out_.str();
    }

private:
    std::ostringstream out_;
};

struct XScale {
    double lo = 0.0, hi = 1.0;

    static XScale padded(double lo, double hi) {
        double span = hi - lo;
        double pad = span == 0.0 ? 0.5 : 0.05 * span;
        return {lo - pad, hi + pad};
    }
    double operator()(double v) const { return kLeft + (v - lo) / (hi - lo) * (kRight - kLeft); }
};

inline std::string axis_tick_label(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4g", v);
    return std::string(buf);
}

} // namespace detail

/// ICE plot: full curve over the observed range with the observation marked by
/// a green star and the stability-range endpoints by red stars (ordered
/// kinds), or per-value bars (binary/categorical, ordering ranks annotated).
inline PlotFiles render_ice_plot(const FeatureReport& fr) {
    PlotFiles files;
    std::ostringstream csv;
    csv << "value,prediction\n";
    for (const auto& p : fr.ice_full) csv << format_value(p.value) << ',' << format_double(p.prediction) << '\n';
    files.csv = csv.str();

    detail::SvgBuilder svg(fr.name + " - ICE");
    svg.frame_and_y_axis();
    bool bars = fr.kind == FeatureKind::binary || fr.kind == FeatureKind::categorical;
    if (!bars) {
        double lo = numeric_value(fr.ice_full.front().value);
        double hi = numeric_value(fr.ice_full.back().value);
        auto xs = detail::XScale::padded(lo, hi);
        std::vector<std::pair<double, double>> pix;
        for (const auto& p : fr.ice_full)
            pix.emplace_back(xs(numeric_value(p.value)), detail::SvgBuilder::y_of(p.prediction));
        svg.polyline(pix, "#1f77b4");
        for (int i = 0; i <= 4; ++i) {
            double v = lo + (hi - lo) * i / 4.0;
            svg.x_tick(xs(v), detail::axis_tick_label(v));
        }
        // red stars at the stability-range endpoints, on the restricted curve
        if (!fr.ice_restricted.empty()) {
            const auto& a = fr.ice_restricted.front();
            const auto& b = fr.ice_restricted.back();
            svg.star(xs(numeric_value(a.value)), detail::SvgBuilder::y_of(a.prediction), "#d62728");
            svg.star(xs(numeric_value(b.value)), detail::SvgBuilder::y_of(b.prediction), "#d62728");
        }
        double ox = numeric_value(fr.value);
        for (const auto& p : fr.ice_full)
            if (p.value == fr.value)
                svg.star(xs(ox), detail::SvgBuilder::y_of(p.prediction), "#2ca02c");
        svg.legend({{"#1f77b4", "ICE"}, {"#2ca02c", "observation"}, {"#d62728", "stability range"}});
    } else {
        std::size_t n = fr.ice_full.size();
        double slot = (detail::kRight - detail::kLeft) / static_cast<double>(n);
        double width = slot * 0.6;
        for (std::size_t i = 0; i < n; ++i) {
            const auto& p = fr.ice_full[i];
            double x0 = detail::kLeft + slot * (static_cast<double>(i) + 0.2);
            bool is_obs = p.value == fr.value;
            svg.bar(x0, width, p.prediction, is_obs ? "#2ca02c" : "#7aa9d1");
            svg.x_tick(x0 + width / 2, format_value(p.value));
            if (fr.kind == FeatureKind::categorical)
                svg.text(x0 + width / 2, detail::SvgBuilder::y_of(p.prediction) - 6,
                         "#" + std::to_string(i + 1));
        }
    }
    svg.x_label(fr.name);
    files.svg = svg.finish();
    return files;
}

/// MUCE plot: max and min curves with the restricted ICE overlay and both
/// extremal markers (ordered kinds), or ICE-height bars with min/max whiskers
/// (binary/categorical).
inline PlotFiles render_muce_plot(const FeatureReport& fr) {
    PlotFiles files;
    std::ostringstream csv;
    csv << "index,value,max,min\n";
    for (std::size_t i = 0; i < fr.max_curve.points.size(); ++i) {
        const auto& mx = fr.max_curve.points[i];
        const auto& mn = fr.min_curve.points[i];
        csv << mx.index << ',' << format_value(mx.value) << ',' << format_double(mx.prediction) << ','
            << format_double(mn.prediction) << '\n';
    }
    files.csv = csv.str();

    detail::SvgBuilder svg(fr.name + " - MUCE");
    svg.frame_and_y_axis();
    if (fr.max_curve.ordered) {
        double lo = numeric_value(fr.max_curve.points.front().value);
        double hi = numeric_value(fr.max_curve.points.back().value);
        auto xs = detail::XScale::padded(lo, hi);
        auto to_pix = [&](const MuceCurve& curve) {
            std::vector<std::pair<double, double>> pix;
            for (const auto& p : curve.points)
                pix.emplace_back(xs(numeric_value(p.value)), detail::SvgBuilder::y_of(p.prediction));
            return pix;
        };
        svg.polyline(to_pix(fr.max_curve), "#1f77b4");
        svg.polyline(to_pix(fr.min_curve), "#e8c547");
        std::vector<std::pair<double, double>> ice_pix;
        for (const auto& p : fr.ice_restricted)
            ice_pix.emplace_back(xs(std::clamp(numeric_value(p.value), lo, hi)),
                                 detail::SvgBuilder::y_of(p.prediction));
        svg.polyline(ice_pix, "#1f77b4", true);
        for (int i = 0; i <= 4; ++i) {
            double v = lo + (hi - lo) * i / 4.0;
            svg.x_tick(xs(v), detail::axis_tick_label(v));
        }
        svg.circle(xs(numeric_value(fr.extremal_max.observation.at(fr.name))),
                   detail::SvgBuilder::y_of(fr.extremal_max.probability), 5.0, "#800000");
        svg.circle(xs(numeric_value(fr.extremal_min.observation.at(fr.name))),
                   detail::SvgBuilder::y_of(fr.extremal_min.probability), 5.0, "#17becf");
        svg.star(xs(std::clamp(numeric_value(fr.ice_marker_value), lo, hi)),
                 detail::SvgBuilder::y_of(fr.ice_marker_prediction), "#2ca02c");
        svg.legend({{"#1f77b4", "MUCE max"},
                    {"#e8c547", "MUCE min"},
                    {"#800000", "estimated max"},
                    {"#17becf", "estimated min"}});
    } else {
        std::size_t n = fr.max_curve.points.size();
        double slot = (detail::kRight - detail::kLeft) / static_cast<double>(n);
        double width = slot * 0.6;
        for (std::size_t i = 0; i < n; ++i) {
            const auto& mx = fr.max_curve.points[i];
            const auto& mn = fr.min_curve.points[i];
            // bar height is the ICE value at this position
            double ice_pred = 0.0;
            for (const auto& p : fr.ice_restricted)
                if (p.value == mx.value) ice_pred = p.prediction;
            double x0 = detail::kLeft + slot * (static_cast<double>(i) + 0.2);
            bool is_obs = mx.value == fr.value;
            svg.bar(x0, width, ice_pred, is_obs ? "#2ca02c" : "#7aa9d1");
            svg.whisker(x0 + width / 2, mn.prediction, mx.prediction);
            svg.x_tick(x0 + width / 2, format_value(mx.value));
        }
    }
    svg.x_label(fr.name);
    files.svg = svg.finish();
    return files;
}

} // namespace muce
