#pragma once

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "windflex/common.hpp"
#include "windflex/dispatch.hpp"
#include "windflex/errors.hpp"
#include "windflex/load_model.hpp"
#include "windflex/sweep.hpp"

namespace windflex::io {

// All persisted series live on a 365-day year: leap days are dropped on
// ingest and never written, and day-of-year numbering always follows the
// non-leap calendar (Mar 1 is day 60).
inline int day_of_year_365(const std::chrono::year_month_day& ymd) {
    static constexpr int cumulative[] = {0, 31, 59, 90, 120, 151, 181, 212, 243, 273, 304, 334};
    const unsigned m = static_cast<unsigned>(ymd.month());
    const unsigned d = static_cast<unsigned>(ymd.day());
    return cumulative[m - 1] + static_cast<int>(d);
}

inline bool is_leap_day(const std::chrono::year_month_day& ymd) {
    return ymd.month() == std::chrono::February && ymd.day() == std::chrono::day{29};
}

inline demand::Weekday weekday_of(const std::chrono::year_month_day& ymd) {
    const std::chrono::weekday wd{std::chrono::sys_days{ymd}};
    return static_cast<demand::Weekday>(wd.iso_encoding() - 1); // ISO: Monday = 1
}

inline std::string format_date(const std::chrono::year_month_day& ymd) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
    return buf;
}

struct TimeseriesFile {
    std::vector<std::string> names; // column headers after `date`
    Matrix values;
    std::vector<std::chrono::year_month_day> dates;
    std::vector<int> day_of_year;
};

enum class SeriesKind { capacity_factor, temperature, load };

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    return fields;
}

inline std::string strip_cr(std::string line) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return line;
}

inline std::chrono::year_month_day parse_date(const std::string& text, const std::string& where) {
    int y = 0;
    unsigned m = 0, d = 0;
    char tail = 0;
    if (std::sscanf(text.c_str(), "%d-%u-%u%c", &y, &m, &d, &tail) != 3)
        throw ParseError(where + ": '" + text + "' is not an ISO date");
    const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{m},
                                          std::chrono::day{d}};
    if (!ymd.ok()) throw ParseError(where + ": '" + text + "' is not a valid calendar date");
    return ymd;
}

inline double parse_number(const std::string& text, const std::string& where) {
    try {
        std::size_t used = 0;
        const double v = std::stod(text, &used);
        if (used != text.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw ParseError(where + ": '" + text + "' is not a number");
    }
}

inline void check_range(double v, SeriesKind kind, const std::string& where) {
    switch (kind) {
        case SeriesKind::capacity_factor:
            if (!(v >= 0.0 && v < 1.0))
                throw RangeViolation(where + ": capacity factor " + format_double(v) +
                                     " outside [0,1)");
            break;
        case SeriesKind::temperature:
            if (!(v >= -60.0 && v <= 50.0))
                throw RangeViolation(where + ": temperature " + format_double(v) +
                                     " outside [-60,50] degC");
            break;
        case SeriesKind::load:
            if (!(v >= 0.0))
                throw RangeViolation(where + ": load " + format_double(v) + " is negative");
            break;
    }
}

} // namespace detail

inline TimeseriesFile ingest_timeseries(const std::string& path, SeriesKind kind) {
    std::ifstream in(path);
    if (!in.is_open()) throw IoError("cannot open " + path);

    std::string line;
    if (!std::getline(in, line)) throw ParseError(path + ": empty file");
    const std::vector<std::string> header = detail::split_csv_line(detail::strip_cr(line));
    if (header.size() < 2 || header[0] != "date")
        throw ParseError(path + ": header must be `date,<name>,...`, got '" + line + "'");

    TimeseriesFile out;
    out.names.assign(header.begin() + 1, header.end());
    const std::size_t d = out.names.size();

    std::vector<double> flat;
    bool have_prev = false;
    std::chrono::sys_days prev{};
    std::size_t row_no = 1; // header was line 1
    while (std::getline(in, line)) {
        ++row_no;
        line = detail::strip_cr(line);
        if (line.empty()) continue;
        const std::vector<std::string> fields = detail::split_csv_line(line);
        const std::string where = path + ": row " + std::to_string(row_no);
        if (fields.size() != d + 1)
            throw ParseError(where + ": expected " + std::to_string(d + 1) + " fields, got " +
                             std::to_string(fields.size()));
        const std::chrono::year_month_day date =
            detail::parse_date(fields[0], where + ", column date");
        const std::chrono::sys_days day{date};
        if (have_prev) {
            // The next calendar day must follow. When that day is Feb 29 the
            // file may either carry it (it is dropped below) or skip straight
            // to Mar 1, which is how the 365-day convention writes years out.
            const std::chrono::sys_days next = prev + std::chrono::days{1};
            const bool next_is_leap = is_leap_day(std::chrono::year_month_day{next});
            const std::chrono::sys_days after = next + std::chrono::days{1};
            if (!(day == next || (next_is_leap && day == after))) {
                if (day <= prev)
                    throw GapDetected(where + ": date " + fields[0] +
                                      " does not advance (duplicate or unsorted)");
                throw GapDetected(
                    where + ": expected " +
                    format_date(std::chrono::year_month_day{next_is_leap ? after : next}) +
                    ", got " + fields[0]);
            }
        }
        prev = day;
        have_prev = true;
        if (is_leap_day(date)) continue; // dropped, but still anchors the gap check

        for (std::size_t i = 0; i < d; ++i) {
            const double v =
                detail::parse_number(fields[i + 1], where + ", column " + out.names[i]);
            detail::check_range(v, kind, where + ", column " + out.names[i]);
            flat.push_back(v);
        }
        out.dates.push_back(date);
        out.day_of_year.push_back(day_of_year_365(date));
    }
    if (out.dates.empty()) throw ParseError(path + ": no data rows");

    out.values = Matrix(out.dates.size(), d);
    out.values.data() = std::move(flat);
    return out;
}

namespace detail {

inline std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out.is_open()) throw IoError("cannot write " + path);
    return out;
}

} // namespace detail

inline void write_timeseries_csv(const std::string& path, const std::vector<std::string>& names,
                                 const Matrix& values,
                                 const std::vector<std::chrono::year_month_day>& dates) {
    if (values.rows() != dates.size() || values.cols() != names.size())
        throw ShapeMismatch("write_timeseries_csv: shape mismatch");
    std::ofstream out = detail::open_out(path);
    out << "date";
    for (const auto& n : names) out << ',' << n;
    out << '\n';
    for (std::size_t t = 0; t < values.rows(); ++t) {
        out << format_date(dates[t]);
        for (std::size_t i = 0; i < values.cols(); ++i) out << ',' << format_double(values(t, i));
        out << '\n';
    }
}

inline void write_trace_csv(const std::string& path, const dispatch::DispatchTrace& trace,
                            const std::vector<std::string>& node_names) {
    if (node_names.size() != trace.production.cols())
        throw ShapeMismatch("write_trace_csv: node name count mismatch");
    std::ofstream out = detail::open_out(path);
    out << "t,node,production,demand,import,export,charge,discharge,storage_level,loss,scenario\n";
    for (std::size_t t = 0; t < trace.production.rows(); ++t)
        for (std::size_t i = 0; i < trace.production.cols(); ++i)
            out << (t + 1) << ',' << node_names[i] << ',' << format_double(trace.production(t, i))
                << ',' << format_double(trace.demand(t, i)) << ','
                << format_double(trace.import_mw(t, i)) << ','
                << format_double(trace.export_mw(t, i)) << ','
                << format_double(trace.charge_mw(t, i)) << ','
                << format_double(trace.discharge_mw(t, i)) << ','
                << format_double(trace.storage_level(t, i)) << ','
                << format_double(trace.loss(t, i)) << ',' << dispatch::to_string(trace.scenario)
                << '\n';
}

inline void write_surface_csv(const std::string& path, const sweep::LossSurface& surface) {
    surface.validate();
    std::ofstream out = detail::open_out(path);
    out << "wind_nn_mw,wind_ns_mw,scenario,expected_penalty,penalty_nn,penalty_ns,stderr\n";
    for (std::size_t cell = 0; cell < surface.n_cells(); ++cell) {
        const double nn = surface.grid_nn.value(cell / surface.grid_ns.points());
        const double ns = surface.grid_ns.value(cell % surface.grid_ns.points());
        for (std::size_t s = 0; s < surface.scenarios.size(); ++s) {
            const sweep::SurfaceLayer& layer = surface.layers[s];
            out << format_double(nn) << ',' << format_double(ns) << ','
                << dispatch::to_string(surface.scenarios[s]) << ','
                << format_double(layer.expected_penalty[cell]) << ','
                << format_double(layer.penalty_nn[cell]) << ','
                << format_double(layer.penalty_ns[cell]) << ',' << format_double(layer.se[cell])
                << '\n';
        }
    }
}

// Rebuilds a surface from its CSV form. Axes are inferred from the distinct
// coordinates; rows may arrive in any order but must cover the full grid for
// every scenario exactly once.
inline sweep::LossSurface read_surface_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in.is_open()) throw IoError("cannot open " + path);
    std::string line;
    if (!std::getline(in, line) ||
        detail::strip_cr(line) !=
            "wind_nn_mw,wind_ns_mw,scenario,expected_penalty,penalty_nn,penalty_ns,stderr")
        throw ParseError(path + ": not a surface CSV (bad header)");

    struct Row {
        double nn, ns, vals[4];
        dispatch::Scenario scenario;
    };
    std::vector<Row> rows;
    std::vector<double> nn_vals, ns_vals;
    std::vector<dispatch::Scenario> scenarios;
    std::size_t row_no = 1;
    while (std::getline(in, line)) {
        ++row_no;
        line = detail::strip_cr(line);
        if (line.empty()) continue;
        const std::vector<std::string> f = detail::split_csv_line(line);
        const std::string where = path + ": row " + std::to_string(row_no);
        if (f.size() != 7) throw ParseError(where + ": expected 7 fields");
        Row r{};
        r.nn = detail::parse_number(f[0], where + ", column wind_nn_mw");
        r.ns = detail::parse_number(f[1], where + ", column wind_ns_mw");
        r.scenario = dispatch::scenario_from_string(f[2]);
        for (int k = 0; k < 4; ++k) r.vals[k] = detail::parse_number(f[3 + k], where);
        rows.push_back(r);
        if (std::find(nn_vals.begin(), nn_vals.end(), r.nn) == nn_vals.end())
            nn_vals.push_back(r.nn);
        if (std::find(ns_vals.begin(), ns_vals.end(), r.ns) == ns_vals.end())
            ns_vals.push_back(r.ns);
        if (std::find(scenarios.begin(), scenarios.end(), r.scenario) == scenarios.end())
            scenarios.push_back(r.scenario);
    }
    if (rows.empty()) throw EmptySurface(path + ": no surface rows");
    std::sort(nn_vals.begin(), nn_vals.end());
    std::sort(ns_vals.begin(), ns_vals.end());

    const auto make_axis = [](const std::vector<double>& vals) {
        sweep::GridAxis axis;
        axis.min_mw = vals.front();
        axis.max_mw = vals.back();
        axis.step_mw = vals.size() > 1
                           ? (vals.back() - vals.front()) / static_cast<double>(vals.size() - 1)
                           : 1.0;
        return axis;
    };
    sweep::LossSurface surface;
    surface.grid_nn = make_axis(nn_vals);
    surface.grid_ns = make_axis(ns_vals);
    surface.scenarios = scenarios;
    surface.layers.resize(scenarios.size());
    for (auto& layer : surface.layers) layer.resize(surface.n_cells());
    if (surface.grid_nn.points() != nn_vals.size() || surface.grid_ns.points() != ns_vals.size())
        throw GridMismatch(path + ": grid coordinates are not evenly spaced");

    std::vector<char> seen(surface.n_cells() * scenarios.size(), 0);
    for (const Row& r : rows) {
        const std::size_t cell = surface.cell_index(surface.grid_nn.nearest(r.nn),
                                                    surface.grid_ns.nearest(r.ns));
        std::size_t s = 0;
        while (scenarios[s] != r.scenario) ++s;
        if (seen[cell * scenarios.size() + s]++)
            throw ParseError(path + ": duplicate row for cell/scenario");
        surface.layers[s].expected_penalty[cell] = r.vals[0];
        surface.layers[s].penalty_nn[cell] = r.vals[1];
        surface.layers[s].penalty_ns[cell] = r.vals[2];
        surface.layers[s].se[cell] = r.vals[3];
    }
    for (char c : seen)
        if (!c) throw GridMismatch(path + ": grid is not fully covered for every scenario");
    surface.validate();
    return surface;
}

inline void write_dominance_csv(const std::string& path,
                                const std::vector<sweep::DominanceCell>& cells) {
    std::ofstream out = detail::open_out(path);
    out << "wind_nn_mw,wind_ns_mw,best,second_best\n";
    for (const auto& c : cells)
        out << format_double(c.nn_mw) << ',' << format_double(c.ns_mw) << ','
            << dispatch::to_string(c.best) << ',' << dispatch::to_string(c.second_best) << '\n';
}

inline void write_optima_csv(const std::string& path,
                             const std::vector<sweep::OptimumRow>& rows) {
    std::ofstream out = detail::open_out(path);
    out << "scenario,opt_nn_mw,opt_ns_mw,expected_penalty,reference_penalty,improvement\n";
    for (const auto& r : rows)
        out << dispatch::to_string(r.scenario) << ',' << format_double(r.nn_mw) << ','
            << format_double(r.ns_mw) << ',' << format_double(r.expected_penalty) << ','
            << format_double(r.reference_penalty) << ',' << format_double(r.improvement) << '\n';
}

inline void write_sensitivity_csv(const std::string& path,
                                  const std::vector<sweep::SensitivityRow>& rows) {
    std::ofstream out = detail::open_out(path);
    out << "factor,multiplier,scenario,opt_nn_mw,opt_ns_mw,expected_penalty,delta_vs_base\n";
    for (const auto& r : rows)
        out << sweep::to_string(r.factor) << ',' << format_double(r.multiplier) << ','
            << dispatch::to_string(r.scenario) << ',' << format_double(r.opt_nn_mw) << ','
            << format_double(r.opt_ns_mw) << ',' << format_double(r.expected_penalty) << ','
            << format_double(r.delta_vs_base) << '\n';
}

struct PlotRow {
    int day = 1;
    std::string node;
    dispatch::Scenario scenario = dispatch::Scenario::no_flex;
    std::string statistic; // mean, q10, q90
    double value = 0.0;
};

inline void write_plotdata_csv(const std::string& path, const std::vector<PlotRow>& rows) {
    std::ofstream out = detail::open_out(path);
    out << "day,node,scenario,statistic,value\n";
    for (const auto& r : rows)
        out << r.day << ',' << r.node << ',' << dispatch::to_string(r.scenario) << ','
            << r.statistic << ',' << format_double(r.value) << '\n';
}

} // namespace windflex::io
