#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "windflex/csv.hpp"
#include "windflex/defaults.hpp"
#include "windflex/load_model.hpp"
#include "windflex/rng.hpp"
#include "windflex/temperature_model.hpp"
#include "windflex/wind_model.hpp"

namespace windflex::io {

struct FixturePaths {
    std::string capacity_factors;
    std::string temperatures;
    std::string loads;
    std::string manifest;
};

namespace detail {

inline std::vector<std::chrono::year_month_day> dates_from(int start_year, std::size_t n_rows) {
    std::vector<std::chrono::year_month_day> dates;
    dates.reserve(n_rows);
    std::chrono::sys_days day{
        std::chrono::year_month_day{std::chrono::year{start_year}, std::chrono::January,
                                    std::chrono::day{1}}};
    while (dates.size() < n_rows) {
        const std::chrono::year_month_day ymd{day};
        if (!is_leap_day(ymd)) dates.push_back(ymd);
        day += std::chrono::days{1};
    }
    return dates;
}

} // namespace detail

// Deterministic synthetic input bundle: 40 years of capacity factors, 30
// years of temperatures, and 5 years of load derived from the tail of the
// temperature file plus 1% observation noise. Everything is generated from
// the shipped default parameters, which is exactly what makes the bundle
// useful: fitting each series back must recover those parameters.
inline FixturePaths generate_fixtures(const std::string& dir, std::uint64_t seed = 42) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create fixture directory " + dir + ": " + ec.message());

    const wind::WindModelParams wind_params = defaults::default_wind_params();
    const demand::DemandModelParams demand_params = defaults::default_demand_params();
    const std::vector<std::string> nodes = demand_params.temperature.nodes;

    FixturePaths paths;
    paths.capacity_factors = dir + "/capacity_factors.csv";
    paths.temperatures = dir + "/temperatures.csv";
    paths.loads = dir + "/loads.csv";
    paths.manifest = dir + "/MANIFEST.txt";

    // Capacity factors: 40 years starting 1980.
    {
        RngStream stream = make_stream(seed, 0, stream_tag::fixtures);
        const wind::CapacityFactorSeries cf =
            wind::simulate_capacity_factors(wind_params, 40, stream, 200, nodes);
        write_timeseries_csv(paths.capacity_factors, nodes, cf.values,
                             detail::dates_from(1980, cf.values.rows()));
    }

    // Temperatures: 30 years starting 1991; the last five feed the load file.
    RngStream temp_stream = make_stream(seed, 1, stream_tag::fixtures);
    const demand::TemperatureSeries temps =
        demand::simulate_temperature(demand_params.temperature, 30, temp_stream);
    write_timeseries_csv(paths.temperatures, nodes, temps.values,
                         detail::dates_from(1991, temps.values.rows()));

    // Load: regression applied to 2014-2018 temperatures on the real-weekday
    // calendar, plus mild noise so the fit is a statistics problem rather
    // than an algebra exercise.
    {
        const std::size_t first_row = (2014 - 1991) * 365;
        const std::size_t n_rows = 5 * 365;
        demand::TemperatureSeries slice;
        slice.nodes = nodes;
        slice.values = Matrix(n_rows, 2);
        slice.day_of_year.resize(n_rows);
        for (std::size_t t = 0; t < n_rows; ++t) {
            slice.day_of_year[t] = temps.day_of_year[first_row + t];
            for (std::size_t i = 0; i < 2; ++i)
                slice.values(t, i) = temps.values(first_row + t, i);
        }
        const std::vector<std::chrono::year_month_day> dates = detail::dates_from(2014, n_rows);
        demand::Calendar calendar;
        calendar.weekday.reserve(n_rows);
        calendar.holiday.assign(n_rows, false);
        for (const auto& date : dates) calendar.weekday.push_back(weekday_of(date));

        demand::LoadSeries load = demand::synthesize_load(demand_params.load_regression, slice,
                                                          calendar, /*coverage_share=*/1.0);
        RngStream noise = make_stream(seed, 2, stream_tag::fixtures);
        for (std::size_t i = 0; i < 2; ++i) {
            double base_mean = 0.0;
            for (double b : demand_params.load_regression.node_params[i].beta_weekday)
                base_mean += b / 7.0;
            const double sigma = 0.01 * base_mean;
            for (std::size_t t = 0; t < n_rows; ++t) {
                const double v = load.values(t, i) + noise.normal(0.0, sigma);
                load.values(t, i) = v < 0.0 ? 0.0 : v;
            }
        }
        write_timeseries_csv(paths.loads, nodes, load.values, dates);
    }

    {
        std::ofstream manifest(paths.manifest, std::ios::trunc);
        if (!manifest.is_open()) throw IoError("cannot write " + paths.manifest);
        manifest << "Synthetic fixture bundle (seed " << seed << ").\n"
                 << "All three files are generated from the shipped default parameters;\n"
                 << "none of this is observed data. Re-running with the same seed rewrites\n"
                 << "byte-identical files.\n"
                 << "  capacity_factors.csv  40 years, daily, per region, in [0,1)\n"
                 << "  temperatures.csv      30 years, daily, degC\n"
                 << "  loads.csv             5 years, daily, MW (regression output + 1% noise)\n"
                 << "Leap days are omitted; every year has 365 rows.\n";
    }
    return paths;
}

} // namespace windflex::io
