#pragma once

// Flat key = value configuration files, CSV tables and SVG line charts.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "rchwave/errors.hpp"

namespace rchwave {

/// Malformed configuration or command-line input.
class ConfigError : public Error {
public:
    using Error::Error;
};

namespace io {

inline std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

/// Parse `key = value` lines; '#' starts a comment.
inline std::map<std::string, std::string> parse_key_values(std::istream& in, const std::string& origin = "config")
{
    std::map<std::string, std::string> kv;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto h = line.find('#'); h != std::string::npos) line.erase(h);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            std::ostringstream os;
            os << origin << ":" << lineno << ": expected 'key = value'";
            throw ConfigError(os.str());
        }
        const std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty()) {
            std::ostringstream os;
            os << origin << ":" << lineno << ": empty key or value";
            throw ConfigError(os.str());
        }
        kv[key] = value;
    }
    return kv;
}

inline std::map<std::string, std::string> read_key_values(const std::string& path)
{
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open config file " + path);
    return parse_key_values(f, path);
}

inline double to_double(const std::string& key, const std::string& v)
{
    try {
        std::size_t pos = 0;
        const double d = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "': not a number: " + v);
    }
}

inline long to_long(const std::string& key, const std::string& v)
{
    try {
        std::size_t pos = 0;
        const long d = std::stol(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "': not an integer: " + v);
    }
}

/// Shortest decimal form with 17 significant digits, locale independent.
inline std::string format_number(double x)
{
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

/// Compact form for messages and file names.
inline std::string format_short(double x)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", x);
    return buf;
}

/// A CSV table whose cells are kept as text; numeric access parses on demand.
struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::optional<std::size_t> column(const std::string& name) const
    {
        const auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) return std::nullopt;
        return static_cast<std::size_t>(it - header.begin());
    }

    std::vector<double> numeric(const std::string& name) const
    {
        const auto c = column(name);
        if (!c) throw ConfigError("column '" + name + "' not found");
        std::vector<double> v;
        v.reserve(rows.size());
        for (const auto& r : rows) {
            if (*c >= r.size()) throw ConfigError("short row in table");
            v.push_back(to_double(name, r[*c]));
        }
        return v;
    }
};

inline std::vector<std::string> split_csv_line(const std::string& line)
{
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

inline Table read_csv(const std::string& path)
{
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open CSV file " + path);
    Table t;
    std::string line;
    bool have_header = false;
    while (std::getline(f, line)) {
        if (trim(line).empty()) continue;
        auto cells = split_csv_line(line);
        if (!have_header) {
            t.header = std::move(cells);
            have_header = true;
        } else {
            t.rows.push_back(std::move(cells));
        }
    }
    if (!have_header) throw ConfigError("CSV file " + path + " is empty");
    return t;
}

class CsvWriter {
public:
    CsvWriter(const std::string& path, const std::vector<std::string>& header) : f_(path), width_(header.size())
    {
        if (!f_) throw ConfigError("cannot write " + path);
        write_cells(header);
    }

    void row(const std::vector<double>& values)
    {
        std::vector<std::string> cells;
        cells.reserve(values.size());
        for (double v : values) cells.push_back(format_number(v));
        write_cells(cells);
    }

    void row_cells(const std::vector<std::string>& cells) { write_cells(cells); }

private:
    void write_cells(const std::vector<std::string>& cells)
    {
        if (cells.size() != width_) throw ConfigError("CSV row width does not match header");
        for (std::size_t i = 0; i < cells.size(); ++i) f_ << (i ? "," : "") << cells[i];
        f_ << '\n';
    }

    std::ofstream f_;
    std::size_t width_;
};

// ---------------------------------------------------------------------------
// SVG line charts

struct Series {
    std::vector<double> x, y;
    std::string label;
};

struct ChartSpec {
    std::string title;
    std::string x_label;
    std::string y_label;
    int width = 800;
    int height = 500;
};

inline std::string xml_escape(const std::string& s)
{
    std::string o;
    for (char ch : s) {
        switch (ch) {
        case '&': o += "&amp;"; break;
        case '<': o += "&lt;"; break;
        case '>': o += "&gt;"; break;
        case '"': o += "&quot;"; break;
        default: o += ch;
        }
    }
    return o;
}

/// Round tick positions covering [lo, hi].
inline std::vector<double> nice_ticks(double lo, double hi, int target = 6)
{
    if (!(hi > lo)) {
        lo -= 0.5;
        hi += 0.5;
    }
    const double raw = (hi - lo) / target;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double step = mag;
    for (double m : {1.0, 2.0, 2.5, 5.0, 10.0})
        if (m * mag >= raw) {
            step = m * mag;
            break;
        }
    std::vector<double> t;
    for (double v = std::ceil(lo / step) * step; v <= hi + 1e-9 * step; v += step) t.push_back(std::abs(v) < 1e-12 * step ? 0.0 : v);
    return t;
}

inline std::string tick_label(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

inline std::string render_svg(const std::vector<Series>& series, const ChartSpec& spec)
{
    const double ml = 80, mr = 30, mt = 50, mb = 60;
    const double pw = spec.width - ml - mr, ph = spec.height - mt - mb;
    double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin, ymin = xmin, ymax = -xmin;
    for (const auto& s : series)
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
            xmin = std::min(xmin, s.x[i]);
            xmax = std::max(xmax, s.x[i]);
            ymin = std::min(ymin, s.y[i]);
            ymax = std::max(ymax, s.y[i]);
        }
    if (!std::isfinite(xmin)) {
        xmin = ymin = 0.0;
        xmax = ymax = 1.0;
    }
    if (!(xmax > xmin)) {
        xmin -= 0.5;
        xmax += 0.5;
    }
    if (!(ymax > ymin)) {
        const double d = std::max(1e-12, 0.05 * std::abs(ymin));
        ymin -= d;
        ymax += d;
    }
    const double pad = 0.04 * (ymax - ymin);
    ymin -= pad;
    ymax += pad;
    auto X = [&](double x) { return ml + (x - xmin) / (xmax - xmin) * pw; };
    auto Y = [&](double y) { return mt + (ymax - y) / (ymax - ymin) * ph; };

    std::ostringstream o;
    o << std::setprecision(6);
    o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << spec.width << "\" height=\"" << spec.height
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    o << "<text x=\"" << spec.width / 2 << "\" y=\"28\" text-anchor=\"middle\" font-size=\"16\">"
      << xml_escape(spec.title) << "</text>\n";
    o << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << pw << "\" height=\"" << ph
      << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (double t : nice_ticks(xmin, xmax)) {
        if (t < xmin || t > xmax) continue;
        o << "<line x1=\"" << X(t) << "\" y1=\"" << mt + ph << "\" x2=\"" << X(t) << "\" y2=\"" << mt + ph + 5
          << "\" stroke=\"black\"/>\n";
        o << "<line x1=\"" << X(t) << "\" y1=\"" << mt << "\" x2=\"" << X(t) << "\" y2=\"" << mt + ph
          << "\" stroke=\"#e0e0e0\"/>\n";
        o << "<text x=\"" << X(t) << "\" y=\"" << mt + ph + 20 << "\" text-anchor=\"middle\">" << tick_label(t)
          << "</text>\n";
    }
    for (double t : nice_ticks(ymin, ymax)) {
        if (t < ymin || t > ymax) continue;
        o << "<line x1=\"" << ml - 5 << "\" y1=\"" << Y(t) << "\" x2=\"" << ml << "\" y2=\"" << Y(t)
          << "\" stroke=\"black\"/>\n";
        o << "<line x1=\"" << ml << "\" y1=\"" << Y(t) << "\" x2=\"" << ml + pw << "\" y2=\"" << Y(t)
          << "\" stroke=\"#e0e0e0\"/>\n";
        o << "<text x=\"" << ml - 8 << "\" y=\"" << Y(t) + 4 << "\" text-anchor=\"end\">" << tick_label(t)
          << "</text>\n";
    }
    o << "<text x=\"" << ml + pw / 2 << "\" y=\"" << spec.height - 15 << "\" text-anchor=\"middle\">"
      << xml_escape(spec.x_label) << "</text>\n";
    o << "<text x=\"20\" y=\"" << mt + ph / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 20 " << mt + ph / 2
      << ")\">" << xml_escape(spec.y_label) << "</text>\n";

    static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};
    for (std::size_t s = 0; s < series.size(); ++s) {
        o << "<polyline fill=\"none\" stroke=\"" << colors[s % 5] << "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t i = 0; i < series[s].x.size(); ++i) {
            if (!std::isfinite(series[s].x[i]) || !std::isfinite(series[s].y[i])) continue;
            o << X(series[s].x[i]) << "," << Y(series[s].y[i]) << " ";
        }
        o << "\"/>\n";
        if (!series[s].label.empty())
            o << "<text x=\"" << ml + pw - 10 << "\" y=\"" << mt + 18 + 16 * s << "\" text-anchor=\"end\" fill=\""
              << colors[s % 5] << "\">" << xml_escape(series[s].label) << "</text>\n";
    }
    o << "</svg>\n";
    return o.str();
}

inline void write_svg(const std::string& path, const std::vector<Series>& series, const ChartSpec& spec)
{
    std::ofstream f(path);
    if (!f) throw ConfigError("cannot write " + path);
    f << render_svg(series, spec);
}

}  // namespace io
}  // namespace rchwave
