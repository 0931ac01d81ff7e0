#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>

#include "cdaug/explain.hpp"

namespace cdaug {

namespace {

// Fixed-precision formatting keeps the output bytes deterministic.
std::string num(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.3f", v);
    return buf;
}

void append(std::string& out, const char* text) { out += text; }
void append(std::string& out, const std::string& text) { out += text; }

constexpr double kPanelWidth = 860.0;
constexpr double kPanelHeight = 150.0;
constexpr double kPanelGap = 26.0;
constexpr double kMarginLeft = 60.0;
constexpr double kMarginRight = 60.0;
constexpr double kMarginTop = 30.0;

} // namespace

std::string render_svg(const Explanation& explanation, const Window& w) {
    const std::size_t channels = w.channels();
    const std::size_t steps = w.timesteps();
    if (explanation.necessity.size() != steps ||
        explanation.non_essential_mask.size() != steps)
        raise(ErrorCode::ShapeMismatch, "explanation length does not match the window");

    const double width = kMarginLeft + kPanelWidth + kMarginRight;
    const double height =
        kMarginTop + static_cast<double>(channels) * (kPanelHeight + kPanelGap);

    const auto x_of = [&](double t) {
        return kPanelWidth * t / static_cast<double>(steps > 1 ? steps - 1 : 1);
    };

    std::string svg;
    svg.reserve(1 << 16);
    append(svg, "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    append(svg, "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(width) +
                    "\" height=\"" + num(height) + "\" viewBox=\"0 0 " + num(width) + " " +
                    num(height) + "\">\n");
    append(svg, "<rect x=\"0\" y=\"0\" width=\"" + num(width) + "\" height=\"" + num(height) +
                    "\" fill=\"white\"/>\n");

    for (std::size_t c = 0; c < channels; ++c) {
        const double top = kMarginTop + static_cast<double>(c) * (kPanelHeight + kPanelGap);
        const auto ch = w.channel(c);
        double lo = *std::min_element(ch.begin(), ch.end());
        double hi = *std::max_element(ch.begin(), ch.end());
        if (hi - lo < 1e-12) {
            lo -= 1.0;
            hi += 1.0;
        }
        const auto y_of = [&](double v) {
            return top + kPanelHeight - kPanelHeight * (v - lo) / (hi - lo);
        };

        append(svg, "<g>\n");
        append(svg, "<rect x=\"" + num(kMarginLeft) + "\" y=\"" + num(top) + "\" width=\"" +
                        num(kPanelWidth) + "\" height=\"" + num(kPanelHeight) +
                        "\" fill=\"none\" stroke=\"#888888\" stroke-width=\"0.8\"/>\n");

        // Sufficient segments: red translucent rectangles.
        for (const auto& [start, end] : explanation.sufficient_segments) {
            const double x0 = kMarginLeft + x_of(static_cast<double>(start));
            const double x1 = kMarginLeft + x_of(static_cast<double>(end > 0 ? end - 1 : 0));
            append(svg, "<rect x=\"" + num(x0) + "\" y=\"" + num(top) + "\" width=\"" +
                            num(std::max(1.0, x1 - x0)) + "\" height=\"" + num(kPanelHeight) +
                            "\" fill=\"#dd2222\" fill-opacity=\"0.18\"/>\n");
        }

        // Band sensitivity: blue area against a right-hand [0,1] axis, the
        // horizontal position proportional to frequency over (0, Nyquist].
        if (!explanation.band_sensitivity.empty()) {
            const double nyquist = w.nyquist_hz();
            std::string points;
            points += num(kMarginLeft) + "," + num(top + kPanelHeight) + " ";
            for (const BandSensitivity& bs : explanation.band_sensitivity) {
                const double x0 = kMarginLeft + kPanelWidth * (bs.band.lo / nyquist);
                const double x1 = kMarginLeft + kPanelWidth * (bs.band.hi / nyquist);
                const double y = top + kPanelHeight - kPanelHeight * bs.flip_rate;
                points += num(x0) + "," + num(y) + " " + num(x1) + "," + num(y) + " ";
            }
            points += num(kMarginLeft + kPanelWidth) + "," + num(top + kPanelHeight);
            append(svg, "<polygon points=\"" + points +
                            "\" fill=\"#3366cc\" fill-opacity=\"0.25\" stroke=\"#3366cc\" "
                            "stroke-width=\"1.0\"/>\n");
        }

        // Signal polyline, split into solid (essential) and dashed
        // (non-essential) runs.
        std::size_t run_start = 0;
        while (run_start < steps) {
            const bool dashed = explanation.non_essential_mask[run_start];
            std::size_t run_end = run_start;
            while (run_end + 1 < steps &&
                   explanation.non_essential_mask[run_end + 1] == dashed)
                ++run_end;
            // Extend one point so adjacent runs connect.
            const std::size_t draw_end = std::min(run_end + 1, steps - 1);
            std::string points;
            for (std::size_t t = run_start; t <= draw_end; ++t) {
                points += num(kMarginLeft + x_of(static_cast<double>(t))) + "," +
                          num(y_of(ch[t]));
                if (t != draw_end) points += " ";
            }
            append(svg, std::string("<polyline points=\"") + points +
                            "\" fill=\"none\" stroke=\"#222222\" stroke-width=\"1.2\"" +
                            (dashed ? " stroke-dasharray=\"5,4\"" : "") + "/>\n");
            run_start = run_end + 1;
        }

        // Labels and axes.
        append(svg, "<text x=\"" + num(kMarginLeft - 52.0) + "\" y=\"" + num(top + 14.0) +
                        "\" font-family=\"sans-serif\" font-size=\"11\">" +
                        w.channel_names[c] + "</text>\n");
        append(svg, "<text x=\"" + num(kMarginLeft - 52.0) + "\" y=\"" + num(top + 30.0) +
                        "\" font-family=\"sans-serif\" font-size=\"9\" fill=\"#555555\">" +
                        num(hi) + "</text>\n");
        append(svg, "<text x=\"" + num(kMarginLeft - 52.0) + "\" y=\"" +
                        num(top + kPanelHeight) +
                        "\" font-family=\"sans-serif\" font-size=\"9\" fill=\"#555555\">" +
                        num(lo) + "</text>\n");
        append(svg, "<text x=\"" + num(kMarginLeft + kPanelWidth + 6.0) + "\" y=\"" +
                        num(top + 10.0) +
                        "\" font-family=\"sans-serif\" font-size=\"9\" fill=\"#3366cc\">flip "
                        "1.0</text>\n");
        append(svg, "<text x=\"" + num(kMarginLeft + kPanelWidth + 6.0) + "\" y=\"" +
                        num(top + kPanelHeight) +
                        "\" font-family=\"sans-serif\" font-size=\"9\" "
                        "fill=\"#3366cc\">0.0</text>\n");
        append(svg, "</g>\n");
    }

    append(svg, "<text x=\"" + num(kMarginLeft) + "\" y=\"" + num(kMarginTop - 12.0) +
                    "\" font-family=\"sans-serif\" font-size=\"12\">predicted class " +
                    std::to_string(explanation.predicted_class) + " (" +
                    std::to_string(explanation.n_variants_used) + " probe evaluations)</text>\n");
    append(svg, "</svg>\n");
    return svg;
}

} // namespace cdaug
