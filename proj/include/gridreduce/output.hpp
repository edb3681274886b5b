#pragma once

// Trajectory CSV and SVG emission.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "gridreduce/simulation.hpp"

namespace gridreduce {

inline constexpr int kCsvFormatVersion = 1;

/// 17 significant digits, locale independent.
inline std::string format_double(double x) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

/// Hz on the nominal grid: f = f_nominal + omega / (2 pi).
inline double to_hertz(double omega, double nominal = 50.0) { return nominal + omega / (2.0 * std::numbers::pi); }

/// Header line, column names, then one row per sample:
/// time, eta_k..., omega_i..., xi_i..., u_i..., channels (alphabetical).
inline std::string trajectory_csv(const Trajectory& traj) {
    if (traj.size() == 0) throw InvalidArgument("trajectory is empty");
    const auto m = traj.states.front().eta.size();
    const auto ng = traj.states.front().omega.size();
    std::ostringstream os;
    os << "# gridreduce trajectory format_version=" << kCsvFormatVersion << "\n";
    os << "time";
    for (Eigen::Index k = 0; k < m; ++k) os << ",eta_" << k + 1;
    for (Eigen::Index i = 0; i < ng; ++i) os << ",omega_" << i + 1;
    if (!traj.xi.empty())
        for (Eigen::Index i = 0; i < ng; ++i) os << ",xi_" << i + 1;
    if (!traj.inputs.empty())
        for (Eigen::Index i = 0; i < traj.inputs.front().size(); ++i) os << ",u_" << i + 1;
    for (const auto& [name, _] : traj.channels) os << "," << name;
    os << "\n";
    for (std::size_t s = 0; s < traj.size(); ++s) {
        os << format_double(traj.times[s]);
        for (auto x : traj.states[s].eta) os << "," << format_double(x);
        for (auto x : traj.states[s].omega) os << "," << format_double(x);
        if (!traj.xi.empty())
            for (auto x : traj.xi[s]) os << "," << format_double(x);
        if (!traj.inputs.empty())
            for (auto x : traj.inputs[s]) os << "," << format_double(x);
        for (const auto& [_, series] : traj.channels) os << "," << format_double(series[s]);
        os << "\n";
    }
    return os.str();
}

inline void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << text;
    if (!out) throw IoError("failed writing '" + path + "'");
}

inline void write_csv(const Trajectory& traj, const std::string& path) { write_text(path, trajectory_csv(traj)); }

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
    /// Raw cell text, kept for decimal-exact comparisons.
    std::vector<std::vector<std::string>> cells;
};

inline CsvTable parse_csv(const std::string& text) {
    CsvTable t;
    std::istringstream in(text);
    std::string line;
    auto split = [](const std::string& l) {
        std::vector<std::string> out;
        std::string cell;
        std::istringstream ls(l);
        while (std::getline(ls, cell, ',')) out.push_back(cell);
        return out;
    };
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (t.header.empty()) {
            t.header = split(line);
            continue;
        }
        auto cells = split(line);
        if (cells.size() != t.header.size()) throw InvalidArgument("CSV row has " + std::to_string(cells.size()) + " cells");
        std::vector<double> row;
        for (const auto& c : cells) row.push_back(std::stod(c));
        t.rows.push_back(std::move(row));
        t.cells.push_back(std::move(cells));
    }
    return t;
}

namespace detail {

struct Series {
    std::string label;
    std::vector<double> values;
};

inline std::vector<Series> plot_series(const Trajectory& traj, const std::string& channel, double nominal) {
    std::vector<Series> out;
    if (channel == "frequency") {
        const auto ng = traj.states.front().omega.size();
        for (Eigen::Index i = 0; i < ng; ++i) {
            Series s{"f_" + std::to_string(i + 1) + " [Hz]", {}};
            for (const auto& st : traj.states) s.values.push_back(to_hertz(st.omega[i], nominal));
            out.push_back(std::move(s));
        }
    } else if (channel == "power") {
        const auto ng = traj.inputs.front().size();
        for (Eigen::Index i = 0; i < ng; ++i) {
            Series s{"u_" + std::to_string(i + 1) + " [pu]", {}};
            for (const auto& u : traj.inputs) s.values.push_back(u[i]);
            out.push_back(std::move(s));
        }
    } else {
        const auto it = traj.channels.find(channel);
        if (it == traj.channels.end()) throw InvalidArgument("unknown plot channel '" + channel + "'");
        out.push_back({channel, it->second});
    }
    return out;
}

}  // namespace detail

/// Stacked line plots, one panel per channel. "frequency" and "power" plot
/// per-generator Hz and u; any other name refers to a monitor channel.
inline std::string trajectory_svg(const Trajectory& traj, const std::vector<std::string>& channels, double nominal = 50.0) {
    if (channels.empty()) throw InvalidArgument("no channels to plot");
    if (traj.size() == 0) throw InvalidArgument("trajectory is empty");
    constexpr double width = 800, panel = 240, left = 90, right = 20, top = 30, bottom = 40;
    static constexpr const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};
    const double height = static_cast<double>(channels.size()) * (panel + top + bottom);
    const std::size_t stride = std::max<std::size_t>(1, traj.size() / 2000);
    const double t0 = traj.times.front();
    const double t1 = std::max(traj.times.back(), t0 + 1e-12);

    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
       << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    os << "<!-- gridreduce plot format_version=" << kCsvFormatVersion << " -->\n";
    for (std::size_t p = 0; p < channels.size(); ++p) {
        const auto series = detail::plot_series(traj, channels[p], nominal);
        double lo = series.front().values.front(), hi = lo;
        for (const auto& s : series)
            for (auto v : s.values) lo = std::min(lo, v), hi = std::max(hi, v);
        if (hi - lo < 1e-12) lo -= 0.5e-3, hi += 0.5e-3;
        const double y0 = static_cast<double>(p) * (panel + top + bottom) + top;
        const double pw = width - left - right;
        auto px = [&](double t) { return left + (t - t0) / (t1 - t0) * pw; };
        auto py = [&](double v) { return y0 + panel - (v - lo) / (hi - lo) * panel; };
        os << "<rect x=\"" << left << "\" y=\"" << y0 << "\" width=\"" << pw << "\" height=\"" << panel
           << "\" fill=\"none\" stroke=\"#444\"/>\n";
        os << "<text x=\"" << left << "\" y=\"" << y0 - 8 << "\">" << channels[p] << "</text>\n";
        os << "<text x=\"" << left - 6 << "\" y=\"" << y0 + 10 << "\" text-anchor=\"end\">" << format_double(hi).substr(0, 10)
           << "</text>\n";
        os << "<text x=\"" << left - 6 << "\" y=\"" << y0 + panel << "\" text-anchor=\"end\">" << format_double(lo).substr(0, 10)
           << "</text>\n";
        os << "<text x=\"" << left << "\" y=\"" << y0 + panel + 16 << "\">" << t0 << " s</text>\n";
        os << "<text x=\"" << left + pw << "\" y=\"" << y0 + panel + 16 << "\" text-anchor=\"end\">" << t1 << " s</text>\n";
        for (std::size_t s = 0; s < series.size(); ++s) {
            os << "<polyline fill=\"none\" stroke-width=\"1.5\" stroke=\"" << colors[s % 6] << "\" points=\"";
            for (std::size_t k = 0; k < traj.size(); k += stride) os << px(traj.times[k]) << "," << py(series[s].values[k]) << " ";
            os << px(traj.times.back()) << "," << py(series[s].values.back()) << "\"/>\n";
            os << "<text x=\"" << left + pw - 120 << "\" y=\"" << y0 + 16 + 14 * static_cast<double>(s) << "\" fill=\""
               << colors[s % 6] << "\">" << series[s].label << "</text>\n";
        }
    }
    os << "</svg>\n";
    return os.str();
}

inline void write_svg(const Trajectory& traj, const std::vector<std::string>& channels, const std::string& path,
                      double nominal = 50.0) {
    write_text(path, trajectory_svg(traj, channels, nominal));
}

}  // namespace gridreduce
