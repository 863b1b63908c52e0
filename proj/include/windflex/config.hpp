#pragma once

#include <cctype>
#include <chrono>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "windflex/csv.hpp"
#include "windflex/dispatch.hpp"
#include "windflex/errors.hpp"
#include "windflex/sweep.hpp"

namespace windflex::io {

// Flat declarative run configuration. Field names carry their units so a
// mis-scaled value is visible at the assignment site.
struct ProjectConfig {
    std::vector<std::string> node_names{"NO-N", "NO-S"};
    std::string wind_params_path;
    std::string demand_params_path;

    dispatch::FlexSpec flex{
        900.0,          // transmission_mw
        {15000.0, 30000.0},
        {900.0, 900.0},
        {900.0, 900.0},
        0.75,
        0.90,
        24.0,
    };

    double coverage_share = 0.128;
    double reference_nn_mw = 3257.0;
    double reference_ns_mw = 1811.0;

    sweep::GridAxis grid_nn{3250.0, 6000.0, 2750.0 / 109.0};
    sweep::GridAxis grid_ns{1800.0, 10000.0, 8200.0 / 162.0};
    std::size_t n_realizations = 100;
    std::vector<dispatch::Scenario> scenarios{dispatch::Scenario::no_flex,
                                              dispatch::Scenario::trans, dispatch::Scenario::stor,
                                              dispatch::Scenario::full_flex};
    std::uint64_t master_seed = 42;
    std::size_t n_threads = 1;
    std::string checkpoint_path;
    std::size_t checkpoint_every = 16;
    std::vector<std::chrono::year_month_day> holidays; // regressed as Sundays when fitting

    void validate() const {
        if (node_names.size() != 2)
            throw ShapeMismatch("ProjectConfig: exactly two node names required");
        flex.validate(2);
        if (!(coverage_share > 0.0 && coverage_share <= 1.0))
            throw RangeViolation("ProjectConfig: coverage_share must lie in (0,1]");
        grid_nn.validate();
        grid_ns.validate();
        if (n_realizations < 1)
            throw RangeViolation("ProjectConfig: n_realizations must be >= 1");
        if (scenarios.empty())
            throw ShapeMismatch("ProjectConfig: no scenarios");
    }
};

inline sweep::SweepConfig make_sweep_config(const ProjectConfig& config) {
    sweep::SweepConfig sc;
    sc.grid_nn = config.grid_nn;
    sc.grid_ns = config.grid_ns;
    sc.n_realizations = config.n_realizations;
    sc.scenarios = config.scenarios;
    sc.base_flex = config.flex;
    sc.coverage_share = config.coverage_share;
    sc.master_seed = config.master_seed;
    sc.n_threads = config.n_threads;
    sc.checkpoint_path = config.checkpoint_path;
    sc.checkpoint_every = config.checkpoint_every;
    sc.reference_nn_mw = config.reference_nn_mw;
    sc.reference_ns_mw = config.reference_ns_mw;
    return sc;
}

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

inline std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> parts;
    std::istringstream in(s);
    std::string part;
    while (std::getline(in, part, ',')) {
        part = trim(part);
        if (!part.empty()) parts.push_back(part);
    }
    return parts;
}

inline double to_double(const std::string& v, const std::string& where) {
    try {
        std::size_t used = 0;
        const double x = std::stod(v, &used);
        if (used != v.size()) throw std::invalid_argument("trailing characters");
        return x;
    } catch (const std::exception&) {
        throw ParseError(where + ": '" + v + "' is not a number");
    }
}

inline std::uint64_t to_uint(const std::string& v, const std::string& where) {
    try {
        std::size_t used = 0;
        const std::uint64_t x = std::stoull(v, &used);
        if (used != v.size()) throw std::invalid_argument("trailing characters");
        return x;
    } catch (const std::exception&) {
        throw ParseError(where + ": '" + v + "' is not a nonnegative integer");
    }
}

} // namespace detail

// `key = value` lines, `#` comments, unknown keys rejected.
inline ProjectConfig load_project_config(const std::string& path) {
    std::ifstream in(path);
    if (!in.is_open()) throw IoError("cannot open config " + path);

    ProjectConfig config;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const std::string where = path + ": line " + std::to_string(line_no);
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ParseError(where + ": expected `key = value`, got '" + line + "'");
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string value = detail::trim(line.substr(eq + 1));
        if (key.empty()) throw ParseError(where + ": empty key");

        if (key == "node_names") {
            config.node_names = detail::split_list(value);
        } else if (key == "wind_params") {
            config.wind_params_path = value;
        } else if (key == "demand_params") {
            config.demand_params_path = value;
        } else if (key == "transmission_mw") {
            config.flex.transmission_mw = detail::to_double(value, where);
        } else if (key == "storage_energy_mwh_nn") {
            config.flex.storage_energy_mwh[0] = detail::to_double(value, where);
        } else if (key == "storage_energy_mwh_ns") {
            config.flex.storage_energy_mwh[1] = detail::to_double(value, where);
        } else if (key == "charge_mw_nn") {
            config.flex.charge_mw[0] = detail::to_double(value, where);
        } else if (key == "charge_mw_ns") {
            config.flex.charge_mw[1] = detail::to_double(value, where);
        } else if (key == "discharge_mw_nn") {
            config.flex.discharge_mw[0] = detail::to_double(value, where);
        } else if (key == "discharge_mw_ns") {
            config.flex.discharge_mw[1] = detail::to_double(value, where);
        } else if (key == "eta_charge") {
            config.flex.eta_charge = detail::to_double(value, where);
        } else if (key == "eta_discharge") {
            config.flex.eta_discharge = detail::to_double(value, where);
        } else if (key == "step_hours") {
            config.flex.step_hours = detail::to_double(value, where);
        } else if (key == "coverage_share") {
            config.coverage_share = detail::to_double(value, where);
        } else if (key == "reference_nn_mw") {
            config.reference_nn_mw = detail::to_double(value, where);
        } else if (key == "reference_ns_mw") {
            config.reference_ns_mw = detail::to_double(value, where);
        } else if (key == "grid_nn_min_mw") {
            config.grid_nn.min_mw = detail::to_double(value, where);
        } else if (key == "grid_nn_max_mw") {
            config.grid_nn.max_mw = detail::to_double(value, where);
        } else if (key == "grid_nn_step_mw") {
            config.grid_nn.step_mw = detail::to_double(value, where);
        } else if (key == "grid_ns_min_mw") {
            config.grid_ns.min_mw = detail::to_double(value, where);
        } else if (key == "grid_ns_max_mw") {
            config.grid_ns.max_mw = detail::to_double(value, where);
        } else if (key == "grid_ns_step_mw") {
            config.grid_ns.step_mw = detail::to_double(value, where);
        } else if (key == "n_realizations") {
            config.n_realizations = static_cast<std::size_t>(detail::to_uint(value, where));
        } else if (key == "master_seed") {
            config.master_seed = detail::to_uint(value, where);
        } else if (key == "n_threads") {
            config.n_threads = static_cast<std::size_t>(detail::to_uint(value, where));
        } else if (key == "checkpoint_path") {
            config.checkpoint_path = value;
        } else if (key == "checkpoint_every") {
            config.checkpoint_every = static_cast<std::size_t>(detail::to_uint(value, where));
        } else if (key == "scenarios") {
            config.scenarios.clear();
            for (const auto& name : detail::split_list(value))
                config.scenarios.push_back(dispatch::scenario_from_string(name));
        } else if (key == "holidays") {
            config.holidays.clear();
            for (const auto& d : detail::split_list(value))
                config.holidays.push_back(detail::parse_date(d, where));
        } else {
            throw ParseError(where + ": unknown key '" + key + "'");
        }
    }
    try {
        config.validate();
    } catch (const Error& e) {
        throw ParseError(path + ": " + e.what());
    }
    return config;
}

} // namespace windflex::io
