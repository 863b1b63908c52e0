#include <CLI11.hpp>

#include "windflex/windflex.hpp"

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

namespace {

using namespace windflex;

// Joins --out (a directory for every multi-file command) with a file name,
// creating the directory on first use.
std::string in_out_dir(const std::string& out_dir, const std::string& file) {
    const std::string dir = out_dir.empty() ? "." : out_dir;
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory " + dir + ": " + ec.message());
    return dir + "/" + file;
}

demand::Calendar calendar_for(const std::vector<std::chrono::year_month_day>& dates,
                              const std::vector<std::chrono::year_month_day>& holidays) {
    demand::Calendar calendar;
    calendar.weekday.reserve(dates.size());
    calendar.holiday.reserve(dates.size());
    for (const auto& date : dates) {
        calendar.weekday.push_back(io::weekday_of(date));
        calendar.holiday.push_back(std::find(holidays.begin(), holidays.end(), date) !=
                                   holidays.end());
    }
    return calendar;
}

wind::WindModelParams wind_params_for(const io::ProjectConfig& config) {
    return config.wind_params_path.empty() ? defaults::default_wind_params()
                                           : io::read_wind_params(config.wind_params_path);
}

demand::DemandModelParams demand_params_for(const io::ProjectConfig& config) {
    return config.demand_params_path.empty() ? defaults::default_demand_params()
                                             : io::read_demand_params(config.demand_params_path);
}

// Demand parameter files carry both halves of the model; a single `fit`
// invocation updates its half and keeps the other from the existing file (or
// from the shipped defaults when starting fresh).
demand::DemandModelParams read_or_default_demand(const std::string& path, bool& existed) {
    existed = std::filesystem::exists(path);
    return existed ? io::read_demand_params(path) : defaults::default_demand_params();
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Two-node wind power planning toolkit: fits weather and demand models from "
                 "daily CSV series, synthesizes representative years, dispatches flexibility "
                 "scenarios and maps expected mismatch penalties over capacity plans."};
    app.require_subcommand(1);
    app.fallthrough(); // global flags are accepted after the subcommand too

    std::string config_path;
    std::string out_path;
    std::uint64_t seed = 0;
    std::size_t threads = 0;
    auto* opt_config =
        app.add_option("--config", config_path, "run configuration (key = value lines)")
            ->check(CLI::ExistingFile);
    auto* opt_seed = app.add_option("--seed", seed, "master seed (overrides the config)");
    auto* opt_threads =
        app.add_option("--threads", threads, "sweep worker pool size (overrides the config)");
    app.add_option("--out", out_path,
                   "output file for fit commands, output directory for everything else");

    const auto project_config = [&]() {
        io::ProjectConfig config = (*opt_config) ? io::load_project_config(config_path)
                                                 : defaults::shipped_project_config();
        if (*opt_seed) config.master_seed = seed;
        if (*opt_threads) config.n_threads = threads;
        return config;
    };

    // ------------------------------------------------------------------ fit
    auto* fit = app.add_subcommand("fit", "fit model parameters from CSV time series");
    fit->require_subcommand(1);
    std::string fit_input, fit_loads, fit_temps;
    double fit_share = 1.0;
    double fit_threshold = 15.5;

    auto* fit_wind = fit->add_subcommand("wind", "capacity factors -> wind parameter JSON");
    fit_wind->add_option("--input", fit_input, "capacity factor CSV (date,<region>,...)")
        ->required()
        ->check(CLI::ExistingFile);
    fit_wind->callback([&]() {
        const io::TimeseriesFile ts =
            io::ingest_timeseries(fit_input, io::SeriesKind::capacity_factor);
        wind::CapacityFactorSeries cf;
        cf.regions = ts.names;
        cf.values = ts.values;
        cf.day_of_year = ts.day_of_year;
        const wind::WindFitReport report = wind::fit_wind_model(cf);
        if (report.ou.fallback_used)
            std::cerr << "note: negative residual cross-covariance; coupling dropped "
                         "(sigma(1,0) = 0)\n";
        const std::string out = out_path.empty() ? "wind_params.json" : out_path;
        io::write_wind_params(out, report.params);
        std::cout << "wrote " << out << '\n';
    });

    auto* fit_temp =
        fit->add_subcommand("temperature", "temperature CSV -> demand parameter JSON "
                                           "(temperature section)");
    fit_temp->add_option("--input", fit_input, "temperature CSV (date,<node>,..., deg C)")
        ->required()
        ->check(CLI::ExistingFile);
    fit_temp->callback([&]() {
        const io::TimeseriesFile ts =
            io::ingest_timeseries(fit_input, io::SeriesKind::temperature);
        demand::TemperatureSeries temps;
        temps.nodes = ts.names;
        temps.values = ts.values;
        temps.day_of_year = ts.day_of_year;
        const std::string out = out_path.empty() ? "demand_params.json" : out_path;
        bool existed = false;
        demand::DemandModelParams params = read_or_default_demand(out, existed);
        params.temperature = demand::fit_temperature_model(temps);
        if (!existed) params.load_regression.nodes = params.temperature.nodes;
        io::write_demand_params(out, params);
        std::cout << "wrote " << out << '\n';
    });

    auto* fit_load = fit->add_subcommand("load", "load + temperature CSVs -> demand parameter "
                                                 "JSON (regression section)");
    fit_load->add_option("--loads", fit_loads, "daily load CSV (date,<node>,..., MW)")
        ->required()
        ->check(CLI::ExistingFile);
    fit_load->add_option("--temps", fit_temps, "temperature CSV covering the same dates")
        ->required()
        ->check(CLI::ExistingFile);
    fit_load->add_option("--coverage-share", fit_share,
                         "fraction of the modeled load present in the file; coefficients are "
                         "rescaled to a share of one (default 1.0)");
    fit_load->add_option("--threshold", fit_threshold, "degree-day threshold, deg C");
    fit_load->callback([&]() {
        const io::ProjectConfig config = project_config();
        const io::TimeseriesFile lts = io::ingest_timeseries(fit_loads, io::SeriesKind::load);
        const io::TimeseriesFile tts =
            io::ingest_timeseries(fit_temps, io::SeriesKind::temperature);
        if (lts.dates != tts.dates)
            throw ShapeMismatch("fit load: " + fit_loads + " and " + fit_temps +
                                " cover different dates");
        if (!(fit_share > 0.0 && fit_share <= 1.0))
            throw RangeViolation("fit load: --coverage-share must lie in (0,1]");
        Matrix load_values = lts.values;
        for (double& v : load_values.data()) v /= fit_share;
        demand::TemperatureSeries temps;
        temps.nodes = tts.names;
        temps.values = tts.values;
        temps.day_of_year = tts.day_of_year;
        const demand::Calendar calendar = calendar_for(lts.dates, config.holidays);
        const demand::LoadRegressionParams reg =
            demand::fit_load_regression(load_values, temps, calendar, fit_threshold);
        for (std::size_t i = 0; i < reg.node_params.size(); ++i)
            if (reg.node_params[i].cooling_insignificant)
                std::cerr << "note: node " << reg.nodes[i]
                          << " never crosses the cooling threshold; beta_cooling = 0\n";
        const std::string out = out_path.empty() ? "demand_params.json" : out_path;
        bool existed = false;
        demand::DemandModelParams params = read_or_default_demand(out, existed);
        params.load_regression = reg;
        if (!existed) params.temperature.nodes = reg.nodes;
        io::write_demand_params(out, params);
        std::cout << "wrote " << out << '\n';
    });

    // ------------------------------------------------------------- simulate
    auto* simulate =
        app.add_subcommand("simulate", "synthesize capacity factor, temperature and load years");
    std::size_t sim_years = 1;
    int sim_start_year = 2000;
    simulate->add_option("--years", sim_years, "number of 365-day years")
        ->check(CLI::PositiveNumber);
    simulate->add_option("--start-year", sim_start_year,
                         "calendar year of the first row (sets weekdays and dates)");
    simulate->callback([&]() {
        const io::ProjectConfig config = project_config();
        const wind::WindModelParams wind_params = wind_params_for(config);
        const demand::DemandModelParams demand_params = demand_params_for(config);

        RngStream wind_stream = make_stream(config.master_seed, 0, stream_tag::wind);
        const wind::CapacityFactorSeries cf = wind::simulate_capacity_factors(
            wind_params, sim_years, wind_stream, 200, config.node_names);
        RngStream temp_stream = make_stream(config.master_seed, 0, stream_tag::temperature);
        const demand::TemperatureSeries temps =
            demand::simulate_temperature(demand_params.temperature, sim_years, temp_stream);

        const std::vector<std::chrono::year_month_day> dates =
            io::detail::dates_from(sim_start_year, cf.values.rows());
        const demand::Calendar calendar = calendar_for(dates, config.holidays);
        const demand::LoadSeries load = demand::synthesize_load(
            demand_params.load_regression, temps, calendar, config.coverage_share);

        const std::string cf_path = in_out_dir(out_path, "capacity_factors.csv");
        const std::string temp_path = in_out_dir(out_path, "temperatures.csv");
        const std::string load_path = in_out_dir(out_path, "loads.csv");
        io::write_timeseries_csv(cf_path, cf.regions, cf.values, dates);
        io::write_timeseries_csv(temp_path, temps.nodes, temps.values, dates);
        io::write_timeseries_csv(load_path, load.nodes, load.values, dates);
        std::cout << "wrote " << cf_path << '\n'
                  << "wrote " << temp_path << '\n'
                  << "wrote " << load_path << '\n';
    });

    // ------------------------------------------------------------- dispatch
    auto* dispatch_cmd =
        app.add_subcommand("dispatch", "dispatch the flexibility scenarios at one capacity plan");
    double plan_nn = 0.0, plan_ns = 0.0;
    std::size_t dispatch_reals = 1;
    bool emit_plotdata = false;
    auto* opt_plan_nn =
        dispatch_cmd->add_option("--plan-nn", plan_nn, "installed wind in the first node, MW");
    auto* opt_plan_ns =
        dispatch_cmd->add_option("--plan-ns", plan_ns, "installed wind in the second node, MW");
    dispatch_cmd
        ->add_option("--realizations", dispatch_reals, "synthetic years behind the statistics")
        ->check(CLI::PositiveNumber);
    dispatch_cmd->add_flag("--emit-plotdata", emit_plotdata,
                           "also write per-day loss statistics (mean, q10, q90 over "
                           "realizations) in tidy long format");
    dispatch_cmd->callback([&]() {
        const io::ProjectConfig config = project_config();
        const wind::WindModelParams wind_params = wind_params_for(config);
        const demand::DemandModelParams demand_params = demand_params_for(config);
        dispatch::CapacityPlan plan;
        plan.wind_mw = {(*opt_plan_nn) ? plan_nn : config.reference_nn_mw,
                        (*opt_plan_ns) ? plan_ns : config.reference_ns_mw};

        std::vector<io::PlotRow> plot_rows;
        for (const dispatch::Scenario scenario : config.scenarios) {
            const sweep::RealizationResult first =
                sweep::run_realization(plan, scenario, config.flex, wind_params, demand_params,
                                       config.coverage_share, config.master_seed, 0);
            const std::string trace_path = in_out_dir(
                out_path, std::string("trace_") + dispatch::to_string(scenario) + ".csv");
            io::write_trace_csv(trace_path, first.trace, config.node_names);
            std::cout << "wrote " << trace_path << "  (annual penalty "
                      << format_double(first.penalty.total) << ")\n";

            if (!emit_plotdata) continue;
            // Loss per (day, node) across realizations; realization 0 reuses
            // the trace already in hand.
            const std::size_t t_steps = first.trace.loss.rows();
            const std::size_t n_nodes = first.trace.loss.cols();
            std::vector<std::vector<double>> losses(t_steps * n_nodes);
            for (auto& v : losses) v.reserve(dispatch_reals);
            for (std::size_t r = 0; r < dispatch_reals; ++r) {
                const sweep::RealizationResult res =
                    r == 0 ? first
                           : sweep::run_realization(plan, scenario, config.flex, wind_params,
                                                    demand_params, config.coverage_share,
                                                    config.master_seed, r);
                for (std::size_t t = 0; t < t_steps; ++t)
                    for (std::size_t i = 0; i < n_nodes; ++i)
                        losses[t * n_nodes + i].push_back(res.trace.loss(t, i));
            }
            for (std::size_t t = 0; t < t_steps; ++t) {
                for (std::size_t i = 0; i < n_nodes; ++i) {
                    const std::vector<double>& v = losses[t * n_nodes + i];
                    const auto push = [&](const char* stat, double value) {
                        io::PlotRow row;
                        row.day = static_cast<int>(t) + 1;
                        row.node = config.node_names[i];
                        row.scenario = scenario;
                        row.statistic = stat;
                        row.value = value;
                        plot_rows.push_back(row);
                    };
                    push("mean", mean(v));
                    push("q10", quantile(v, 0.10));
                    push("q90", quantile(v, 0.90));
                }
            }
        }
        if (emit_plotdata) {
            const std::string plot_path = in_out_dir(out_path, "plotdata.csv");
            io::write_plotdata_csv(plot_path, plot_rows);
            std::cout << "wrote " << plot_path << '\n';
        }
    });

    // ---------------------------------------------------------------- sweep
    auto* sweep_cmd =
        app.add_subcommand("sweep", "expected penalty over the wind capacity grid");
    double nn_min = 0, nn_max = 0, nn_step = 0, ns_min = 0, ns_max = 0, ns_step = 0;
    std::size_t sweep_reals = 0;
    std::vector<std::string> sweep_scenarios;
    std::string sweep_checkpoint;
    auto* opt_nn_min = sweep_cmd->add_option("--nn-min", nn_min, "first node grid minimum, MW");
    auto* opt_nn_max = sweep_cmd->add_option("--nn-max", nn_max, "first node grid maximum, MW");
    auto* opt_nn_step = sweep_cmd->add_option("--nn-step", nn_step, "first node grid step, MW");
    auto* opt_ns_min = sweep_cmd->add_option("--ns-min", ns_min, "second node grid minimum, MW");
    auto* opt_ns_max = sweep_cmd->add_option("--ns-max", ns_max, "second node grid maximum, MW");
    auto* opt_ns_step = sweep_cmd->add_option("--ns-step", ns_step, "second node grid step, MW");
    auto* opt_sweep_reals =
        sweep_cmd->add_option("--realizations", sweep_reals, "synthetic years per cell")
            ->check(CLI::PositiveNumber);
    sweep_cmd
        ->add_option("--scenarios", sweep_scenarios,
                     "comma-separated subset of no-flex,trans,stor,full-flex")
        ->delimiter(',');
    auto* opt_checkpoint = sweep_cmd->add_option(
        "--checkpoint", sweep_checkpoint, "checkpoint file; an interrupted sweep resumes from it");
    sweep_cmd->callback([&]() {
        io::ProjectConfig config = project_config();
        if (*opt_nn_min) config.grid_nn.min_mw = nn_min;
        if (*opt_nn_max) config.grid_nn.max_mw = nn_max;
        if (*opt_nn_step) config.grid_nn.step_mw = nn_step;
        if (*opt_ns_min) config.grid_ns.min_mw = ns_min;
        if (*opt_ns_max) config.grid_ns.max_mw = ns_max;
        if (*opt_ns_step) config.grid_ns.step_mw = ns_step;
        if (*opt_sweep_reals) config.n_realizations = sweep_reals;
        if (*opt_checkpoint) config.checkpoint_path = sweep_checkpoint;
        if (!sweep_scenarios.empty()) {
            config.scenarios.clear();
            for (const std::string& name : sweep_scenarios)
                config.scenarios.push_back(dispatch::scenario_from_string(name));
        }
        const wind::WindModelParams wind_params = wind_params_for(config);
        const demand::DemandModelParams demand_params = demand_params_for(config);
        const sweep::LossSurface surface =
            sweep::sweep(io::make_sweep_config(config), wind_params, demand_params);

        const std::string surface_path = in_out_dir(out_path, "surface.csv");
        io::write_surface_csv(surface_path, surface);
        const std::vector<sweep::OptimumRow> optima =
            sweep::argmin_surface(surface, config.reference_nn_mw, config.reference_ns_mw);
        const std::string optima_path = in_out_dir(out_path, "optima.csv");
        io::write_optima_csv(optima_path, optima);
        std::cout << "wrote " << surface_path << '\n' << "wrote " << optima_path << '\n';
        for (const auto& row : optima)
            std::cout << dispatch::to_string(row.scenario) << ": optimum ("
                      << format_double(row.nn_mw) << ", " << format_double(row.ns_mw)
                      << ") MW, expected penalty " << format_double(row.expected_penalty)
                      << ", improvement " << format_double(100.0 * row.improvement) << "%\n";
    });

    // ---------------------------------------------------------- sensitivity
    auto* sens_cmd =
        app.add_subcommand("sensitivity", "what-if multipliers around the base configuration");
    std::string factor_name;
    std::vector<double> multipliers;
    std::size_t sens_node = 0;
    sens_cmd
        ->add_option("--factor", factor_name,
                     "one of demand_joint, demand_node, transmission, storage, charging")
        ->required();
    sens_cmd->add_option("--multipliers", multipliers, "comma-separated positive factors")
        ->required()
        ->delimiter(',');
    sens_cmd->add_option("--node", sens_node, "node index for demand_node (0 or 1)");
    sens_cmd->callback([&]() {
        const io::ProjectConfig config = project_config();
        sweep::SensitivitySpec spec;
        spec.factor = sweep::factor_from_string(factor_name);
        spec.multipliers = multipliers;
        spec.node = sens_node;
        const wind::WindModelParams wind_params = wind_params_for(config);
        const demand::DemandModelParams demand_params = demand_params_for(config);
        const std::vector<sweep::SensitivityRow> rows = sweep::sensitivity(
            io::make_sweep_config(config), {&spec, 1}, wind_params, demand_params);
        const std::string path = in_out_dir(out_path, "sensitivity.csv");
        io::write_sensitivity_csv(path, rows);
        std::cout << "wrote " << path << '\n';
    });

    // --------------------------------------------------------------- report
    auto* report_cmd =
        app.add_subcommand("report", "optima and dominance tables from a saved surface");
    std::string surface_path;
    report_cmd->add_option("--surface", surface_path, "surface CSV written by `sweep`")
        ->required()
        ->check(CLI::ExistingFile);
    report_cmd->callback([&]() {
        const io::ProjectConfig config = project_config();
        const sweep::LossSurface surface = io::read_surface_csv(surface_path);
        const std::vector<sweep::OptimumRow> optima =
            sweep::argmin_surface(surface, config.reference_nn_mw, config.reference_ns_mw);
        const std::string optima_path = in_out_dir(out_path, "optima.csv");
        io::write_optima_csv(optima_path, optima);
        std::cout << "wrote " << optima_path << '\n';
        if (surface.scenarios.size() >= 2) {
            const std::string dom_path = in_out_dir(out_path, "dominance.csv");
            io::write_dominance_csv(dom_path, sweep::dominance_map(surface));
            std::cout << "wrote " << dom_path << '\n';
        } else {
            std::cerr << "note: single-scenario surface, skipping the dominance map\n";
        }
    });

    // ------------------------------------------------------------- fixtures
    auto* fixtures_cmd = app.add_subcommand("fixtures", "write the synthetic input bundle");
    fixtures_cmd->callback([&]() {
        const io::ProjectConfig config = project_config();
        const std::string dir = out_path.empty() ? "fixtures" : out_path;
        const io::FixturePaths paths = io::generate_fixtures(dir, config.master_seed);
        std::cout << "wrote " << paths.capacity_factors << '\n'
                  << "wrote " << paths.temperatures << '\n'
                  << "wrote " << paths.loads << '\n'
                  << "wrote " << paths.manifest << '\n';
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        std::cerr << e.what() << "\n\n" << app.help() << '\n';
        return 1;
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const RuntimeFailure& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
