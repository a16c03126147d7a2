#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "dagsim/harness.hpp"

namespace dagsim {

class MalformedCsvError : public std::runtime_error {
  public:
    explicit MalformedCsvError(const std::string& what) : std::runtime_error(what) {}
};

struct CsvRow {
    std::string experiment;
    std::string contract;
    std::string strategy;
    double tx_count = 0;
    double dep_ratio = 0;
    double throughput_tps = 0;
    double art_all_ms = 0;
};

namespace detail {

inline std::vector<std::string> split_commas(const std::string& line) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string::npos) {
            fields.push_back(line.substr(start));
            return fields;
        }
        fields.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
}

inline double csv_number(const std::string& field, std::size_t line_no) {
    try {
        std::size_t used = 0;
        const double v = std::stod(field, &used);
        if (used != field.size()) throw std::invalid_argument(field);
        return v;
    } catch (const std::exception&) {
        throw MalformedCsvError("line " + std::to_string(line_no) + ": not a number: " + field);
    }
}

}  // namespace detail

inline std::vector<CsvRow> parse_sweep_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw MalformedCsvError("csv is empty");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto header = detail::split_commas(line);
    const auto expected = detail::split_commas(kCsvHeader);
    if (header != expected) throw MalformedCsvError("unexpected csv header: " + line);

    std::map<std::string, std::size_t> col;
    for (std::size_t i = 0; i < header.size(); ++i) col[header[i]] = i;

    std::vector<CsvRow> rows;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto fields = detail::split_commas(line);
        if (fields.size() != expected.size())
            throw MalformedCsvError("line " + std::to_string(line_no) + ": expected " +
                                    std::to_string(expected.size()) + " fields");
        CsvRow row;
        row.experiment = fields[col["experiment"]];
        row.contract = fields[col["contract"]];
        row.strategy = fields[col["strategy"]];
        row.tx_count = detail::csv_number(fields[col["tx_count"]], line_no);
        row.dep_ratio = detail::csv_number(fields[col["dep_ratio"]], line_no);
        row.throughput_tps = detail::csv_number(fields[col["throughput_tps"]], line_no);
        row.art_all_ms = detail::csv_number(fields[col["art_all_ms"]], line_no);
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw MalformedCsvError("csv holds no data rows");
    return rows;
}

struct Series {
    std::string name;
    std::vector<std::pair<double, double>> points;  // sorted by x
};

namespace detail {

inline std::string fmt_num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

inline const char* series_color(std::size_t i) {
    static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c",
                                    "#9467bd", "#ff7f0e", "#8c564b"};
    return palette[i % (sizeof palette / sizeof palette[0])];
}

}  // namespace detail

// Minimal SVG line chart: one polyline plus point markers per series, five
// ticks per axis, legend on the right.
inline std::string render_line_chart(const std::string& title, const std::string& x_label,
                                     const std::string& y_label,
                                     const std::vector<Series>& series) {
    if (series.empty()) throw MalformedCsvError("nothing to plot: " + title);

    double x_min = 0, x_max = 0, y_max = 0;
    bool first = true;
    for (const auto& s : series) {
        if (s.points.empty()) throw MalformedCsvError("series has no points: " + s.name);
        for (const auto& [x, y] : s.points) {
            if (first) {
                x_min = x_max = x;
                first = false;
            }
            x_min = std::min(x_min, x);
            x_max = std::max(x_max, x);
            y_max = std::max(y_max, y);
        }
    }
    if (x_max == x_min) x_max = x_min + 1;
    if (y_max <= 0) y_max = 1;
    y_max *= 1.05;

    const double width = 680, height = 420;
    const double left = 80, right = width - 170, top = 50, bottom = height - 60;
    auto px = [&](double x) { return left + (x - x_min) / (x_max - x_min) * (right - left); };
    auto py = [&](double y) { return bottom - y / y_max * (bottom - top); };

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
        << height << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
    svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg << "<text x=\"" << (left + right) / 2 << "\" y=\"24\" text-anchor=\"middle\" "
        << "font-family=\"sans-serif\" font-size=\"15\">" << title << "</text>\n";

    svg << "<g font-family=\"sans-serif\" font-size=\"11\" fill=\"#333\">\n";
    for (int t = 0; t <= 4; ++t) {
        const double xv = x_min + (x_max - x_min) * t / 4.0;
        const double yv = y_max * t / 4.0;
        svg << "<line x1=\"" << px(xv) << "\" y1=\"" << bottom << "\" x2=\"" << px(xv)
            << "\" y2=\"" << bottom + 5 << "\" stroke=\"#333\"/>\n";
        svg << "<text x=\"" << px(xv) << "\" y=\"" << bottom + 18
            << "\" text-anchor=\"middle\">" << detail::fmt_num(xv) << "</text>\n";
        svg << "<line x1=\"" << left - 5 << "\" y1=\"" << py(yv) << "\" x2=\"" << left
            << "\" y2=\"" << py(yv) << "\" stroke=\"#333\"/>\n";
        svg << "<text x=\"" << left - 9 << "\" y=\"" << py(yv) + 4
            << "\" text-anchor=\"end\">" << detail::fmt_num(yv) << "</text>\n";
        svg << "<line x1=\"" << left << "\" y1=\"" << py(yv) << "\" x2=\"" << right
            << "\" y2=\"" << py(yv) << "\" stroke=\"#eee\"/>\n";
    }
    svg << "<text x=\"" << (left + right) / 2 << "\" y=\"" << height - 14
        << "\" text-anchor=\"middle\">" << x_label << "</text>\n";
    svg << "<text x=\"20\" y=\"" << (top + bottom) / 2
        << "\" text-anchor=\"middle\" transform=\"rotate(-90 20 " << (top + bottom) / 2
        << ")\">" << y_label << "</text>\n";
    svg << "</g>\n";

    svg << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\""
        << bottom << "\" stroke=\"#333\"/>\n";
    svg << "<line x1=\"" << left << "\" y1=\"" << bottom << "\" x2=\"" << right << "\" y2=\""
        << bottom << "\" stroke=\"#333\"/>\n";

    for (std::size_t i = 0; i < series.size(); ++i) {
        const char* color = detail::series_color(i);
        svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
        for (const auto& [x, y] : series[i].points) svg << px(x) << ',' << py(y) << ' ';
        svg << "\"/>\n";
        for (const auto& [x, y] : series[i].points)
            svg << "<circle cx=\"" << px(x) << "\" cy=\"" << py(y) << "\" r=\"3\" fill=\""
                << color << "\"/>\n";
        const double ly = top + 18 * static_cast<double>(i);
        svg << "<line x1=\"" << right + 12 << "\" y1=\"" << ly << "\" x2=\"" << right + 40
            << "\" y2=\"" << ly << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
        svg << "<text x=\"" << right + 46 << "\" y=\"" << ly + 4
            << "\" font-family=\"sans-serif\" font-size=\"12\">" << series[i].name
            << "</text>\n";
    }
    svg << "</svg>\n";
    return svg.str();
}

namespace detail {

inline std::vector<Series> collect_series(const std::vector<CsvRow>& rows,
                                          const std::string& experiment, double CsvRow::*x,
                                          double CsvRow::*y) {
    std::vector<Series> series;
    auto slot = [&](const std::string& name) -> Series& {
        for (auto& s : series)
            if (s.name == name) return s;
        series.push_back({name, {}});
        return series.back();
    };
    for (const auto& row : rows) {
        if (row.experiment != experiment) continue;
        slot(row.strategy).points.emplace_back(row.*x, row.*y);
    }
    for (auto& s : series)
        std::sort(s.points.begin(), s.points.end());
    return series;
}

}  // namespace detail

// Renders one figure per experiment family present in the CSV and returns
// the written paths.
inline std::vector<std::string> emit_plots(const std::string& csv_path,
                                           const std::string& out_dir) {
    const auto rows = parse_sweep_csv(read_text_file(csv_path));
    std::filesystem::create_directories(out_dir);

    struct Figure {
        const char* experiment;
        const char* file;
        const char* title;
        const char* x_label;
        const char* y_label;
        double CsvRow::*x;
        double CsvRow::*y;
    };
    const Figure figures[] = {
        {"exp1", "exp1_throughput_vs_txs.svg", "Throughput vs transaction count",
         "transactions", "throughput (tx/s)", &CsvRow::tx_count, &CsvRow::throughput_tps},
        {"exp2", "exp2_art_vs_txs.svg", "Avg response time vs transaction count",
         "transactions", "avg response time (ms)", &CsvRow::tx_count, &CsvRow::art_all_ms},
        {"exp3", "exp3_art_vs_ratio.svg", "Avg response time vs dependency ratio",
         "dependency ratio", "avg response time (ms)", &CsvRow::dep_ratio, &CsvRow::art_all_ms},
    };

    std::vector<std::string> written;
    for (const auto& fig : figures) {
        const auto series = detail::collect_series(rows, fig.experiment, fig.x, fig.y);
        if (series.empty()) continue;
        const std::string path = (std::filesystem::path(out_dir) / fig.file).string();
        write_text_file(path, render_line_chart(fig.title, fig.x_label, fig.y_label, series));
        written.push_back(path);
    }
    if (written.empty())
        throw MalformedCsvError("csv holds no rows from a known experiment sweep");
    return written;
}

}  // namespace dagsim
