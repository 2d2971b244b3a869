#include "yannrl/bench/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "yannrl/numerics/errors.hpp"

namespace yannrl::bench {

namespace {

constexpr double kWidth = 720.0;
constexpr double kPanelHeight = 150.0;
constexpr double kLeft = 90.0;
constexpr double kRight = 20.0;
constexpr double kTop = 40.0;
constexpr double kGap = 40.0;
constexpr double kPlotHeight = kPanelHeight - kGap;

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string tick(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
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

struct Range {
    double lo;
    double hi;
};

Range padded(double lo, double hi) {
    if (!(hi > lo)) {
        const double pad = std::max(1.0, std::abs(lo)) * 0.05;
        return {lo - pad, hi + pad};
    }
    const double pad = 0.05 * (hi - lo);
    return {lo - pad, hi + pad};
}

class Panel {
public:
    Panel(std::string& out, int index, double t_max, Range y) : out_(out), y_(y), t_max_(t_max) {
        top_ = kTop + index * kPanelHeight;
    }

    double px(double t) const { return kLeft + (kWidth - kLeft - kRight) * t / t_max_; }
    double py(double v) const { return top_ + kPlotHeight * (y_.hi - v) / (y_.hi - y_.lo); }

    void axes(const std::string& label) {
        const double x0 = kLeft;
        const double x1 = kWidth - kRight;
        const double yb = top_ + kPlotHeight;
        out_ += "<g class=\"axes\">";
        out_ += "<line x1=\"" + num(x0) + "\" y1=\"" + num(yb) + "\" x2=\"" + num(x1) + "\" y2=\"" + num(yb) + "\"/>";
        out_ += "<line x1=\"" + num(x0) + "\" y1=\"" + num(top_) + "\" x2=\"" + num(x0) + "\" y2=\"" + num(yb) + "\"/>";
        out_ += "<text x=\"" + num(x0 - 6) + "\" y=\"" + num(top_ + 4) + "\" text-anchor=\"end\">" + tick(y_.hi) +
                "</text>";
        out_ += "<text x=\"" + num(x0 - 6) + "\" y=\"" + num(yb) + "\" text-anchor=\"end\">" + tick(y_.lo) + "</text>";
        out_ += "<text x=\"" + num(x0) + "\" y=\"" + num(yb + 14) + "\">0</text>";
        out_ += "<text x=\"" + num(x1) + "\" y=\"" + num(yb + 14) + "\" text-anchor=\"end\">" + tick(t_max_) +
                " min</text>";
        out_ += "<text class=\"label\" x=\"" + num(x0 + 6) + "\" y=\"" + num(top_ - 6) + "\">" + escape(label) +
                "</text>";
        out_ += "</g>\n";
    }

    void hline(double v, const std::string& cls) {
        out_ += "<line class=\"" + cls + "\" x1=\"" + num(px(0.0)) + "\" y1=\"" + num(py(v)) + "\" x2=\"" +
                num(px(t_max_)) + "\" y2=\"" + num(py(v)) + "\"/>\n";
    }

    /// Inputs are held over each sample period, so they are drawn as steps.
    void series(const std::vector<double>& t, const std::vector<double>& v, double dt_hold) {
        if (t.empty()) {
            return;
        }
        out_ += "<polyline class=\"series\" points=\"";
        for (std::size_t k = 0; k < t.size(); ++k) {
            if (k > 0) {
                out_ += ' ';
            }
            out_ += num(px(t[k])) + "," + num(py(v[k]));
            if (dt_hold > 0.0) {
                out_ += ' ' + num(px(t[k] + dt_hold)) + "," + num(py(v[k]));
            }
        }
        out_ += "\"/>\n";
    }

private:
    std::string& out_;
    Range y_;
    double t_max_;
    double top_ = 0.0;
};

}  // namespace

std::string render_svg_timeseries(const envs::Trajectory& traj, const Vector& setpoint, const Box& input_bounds,
                                  const SvgLabels& labels) {
    const auto n = setpoint.size();
    const auto m = input_bounds.size();
    const std::size_t K = traj.size();
    const double dt = K > 1 ? traj.t[1] - traj.t[0] : 0.0;
    double t_max = K > 0 ? traj.t.back() + dt : 1.0;
    if (!(t_max > 0.0)) {
        t_max = 1.0;
    }
    const double height = kTop + static_cast<double>(n + m) * kPanelHeight;

    std::string out;
    out += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(kWidth) + "\" height=\"" + num(height) +
           "\" viewBox=\"0 0 " + num(kWidth) + " " + num(height) + "\" font-family=\"sans-serif\" font-size=\"11\">\n";
    out += "<style>.axes line{stroke:#000;stroke-width:1}.series{fill:none;stroke:#1f77b4;stroke-width:1.5}"
           ".setpoint{stroke:#d62728;stroke-dasharray:6 4}.bound{stroke:#555;stroke-dasharray:2 3}"
           ".label{font-weight:bold}</style>\n";
    out += "<rect width=\"100%\" height=\"100%\" fill=\"#fff\"/>\n";
    out += "<text x=\"" + num(kWidth / 2) + "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">" +
           escape(labels.title) + "</text>\n";

    const auto name = [](const std::vector<std::string>& names, Eigen::Index i, const char* prefix) {
        return static_cast<std::size_t>(i) < names.size() ? names[static_cast<std::size_t>(i)]
                                                          : prefix + std::to_string(i + 1);
    };

    for (Eigen::Index i = 0; i < n; ++i) {
        std::vector<double> v(K);
        double lo = setpoint[i];
        double hi = setpoint[i];
        for (std::size_t k = 0; k < K; ++k) {
            v[k] = traj.x[k][i];
            lo = std::min(lo, v[k]);
            hi = std::max(hi, v[k]);
        }
        Panel p(out, static_cast<int>(i), t_max, padded(lo, hi));
        p.axes(name(labels.states, i, "x"));
        p.hline(setpoint[i], "setpoint");
        p.series(traj.t, v, 0.0);
    }
    for (Eigen::Index j = 0; j < m; ++j) {
        std::vector<double> v(K);
        double lo = input_bounds.lower[j];
        double hi = input_bounds.upper[j];
        for (std::size_t k = 0; k < K; ++k) {
            v[k] = traj.u[k][j];
            lo = std::min(lo, v[k]);
            hi = std::max(hi, v[k]);
        }
        Panel p(out, static_cast<int>(n + j), t_max, padded(lo, hi));
        p.axes(name(labels.inputs, j, "u"));
        p.hline(input_bounds.lower[j], "bound");
        p.hline(input_bounds.upper[j], "bound");
        p.series(traj.t, v, dt);
    }
    out += "</svg>\n";
    return out;
}

void emit_svg_timeseries(const envs::Trajectory& traj, const Vector& setpoint, const Box& input_bounds,
                         const std::string& path, const SvgLabels& labels) {
    const std::string svg = render_svg_timeseries(traj, setpoint, input_bounds, labels);
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw Error("cannot write " + path);
    }
    out << svg;
    if (!out) {
        throw Error("failed writing " + path);
    }
}

}  // namespace yannrl::bench
