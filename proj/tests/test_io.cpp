#include <catch2/catch_amalgamated.hpp>

#include "windflex/windflex.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#ifdef _WIN32
#else
#include <sys/wait.h>
#endif

using namespace windflex;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

// Scratch files live under one cwd-local directory so a crashed run leaves a
// single obvious artifact to delete.
struct ScratchDir {
    std::string path;
    explicit ScratchDir(std::string name) : path(std::move(name)) {
        std::filesystem::remove_all(path);
        std::filesystem::create_directories(path);
    }
    ~ScratchDir() { std::filesystem::remove_all(path); }
    std::string file(const std::string& name) const { return path + "/" + name; }
};

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::trunc);
    out << content;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

std::size_t count_lines(const std::string& text) {
    return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n'));
}

std::chrono::year_month_day ymd(int y, unsigned m, unsigned d) {
    return {std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
}

} // namespace

// ============================================================================
// Calendar arithmetic
// ============================================================================

TEST_CASE("day_of_year_365: fixed non-leap numbering", "[io]") {
    REQUIRE(io::day_of_year_365(ymd(2021, 1, 1)) == 1);
    REQUIRE(io::day_of_year_365(ymd(2021, 2, 28)) == 59);
    REQUIRE(io::day_of_year_365(ymd(2021, 3, 1)) == 60);
    REQUIRE(io::day_of_year_365(ymd(2020, 3, 1)) == 60); // leap year numbers identically
    REQUIRE(io::day_of_year_365(ymd(2021, 12, 31)) == 365);
    REQUIRE(io::is_leap_day(ymd(2020, 2, 29)));
    REQUIRE_FALSE(io::is_leap_day(ymd(2020, 2, 28)));
}

TEST_CASE("weekday_of: ISO weekday mapping", "[io]") {
    REQUIRE(io::weekday_of(ymd(2024, 1, 1)) == demand::Weekday::monday);
    REQUIRE(io::weekday_of(ymd(2024, 1, 7)) == demand::Weekday::sunday);
    REQUIRE(io::weekday_of(ymd(2014, 1, 1)) == demand::Weekday::wednesday);
    REQUIRE(io::format_date(ymd(2024, 3, 7)) == "2024-03-07");
}

// ============================================================================
// Time series ingestion
// ============================================================================

TEST_CASE("ingest_timeseries: parses well-formed series and drops leap days", "[io]") {
    const ScratchDir dir("io_test_ingest");
    const std::string path = dir.file("cf.csv");
    write_file(path, "date,NO-N,NO-S\n"
                     "2020-02-27,0.5,0.25\n"
                     "2020-02-28,0.125,0.0\n"
                     "2020-02-29,0.9,0.9\n" // leap day: dropped, still anchors the gap check
                     "2020-03-01,0.75,0.375\n");
    const io::TimeseriesFile ts = io::ingest_timeseries(path, io::SeriesKind::capacity_factor);
    REQUIRE(ts.names == std::vector<std::string>{"NO-N", "NO-S"});
    REQUIRE(ts.values.rows() == 3);
    REQUIRE(ts.values(0, 0) == 0.5);
    REQUIRE(ts.values(1, 1) == 0.0);
    REQUIRE(ts.values(2, 0) == 0.75);
    REQUIRE(ts.day_of_year == std::vector<int>{58, 59, 60});
    REQUIRE(ts.dates[2] == ymd(2020, 3, 1));
}

TEST_CASE("ingest_timeseries: tolerates CRLF endings and blank lines", "[io]") {
    const ScratchDir dir("io_test_crlf");
    const std::string path = dir.file("t.csv");
    write_file(path, "date,A\r\n2021-01-01,3.5\r\n\r\n2021-01-02,-2\r\n");
    const io::TimeseriesFile ts = io::ingest_timeseries(path, io::SeriesKind::temperature);
    REQUIRE(ts.values.rows() == 2);
    REQUIRE(ts.values(1, 0) == -2.0);
}

TEST_CASE("ingest_timeseries: rejections name the offending location", "[io]") {
    const ScratchDir dir("io_test_bad");
    const auto ingest = [&](const std::string& body, io::SeriesKind kind) {
        const std::string path = dir.file("bad.csv");
        write_file(path, body);
        return io::ingest_timeseries(path, kind);
    };

    SECTION("capacity factor out of range names the cell") {
        const std::string body = "date,NO-N,NO-S\n"
                                 "2021-01-01,0.5,0.5\n"
                                 "2021-01-02,0.5,1.2\n";
        REQUIRE_THROWS_MATCHES(ingest(body, io::SeriesKind::capacity_factor), RangeViolation,
                               Catch::Matchers::MessageMatches(
                                   ContainsSubstring("row 3") &&
                                   ContainsSubstring("column NO-S") &&
                                   ContainsSubstring("1.2")));
    }
    SECTION("a capacity factor of exactly one is rejected") {
        REQUIRE_THROWS_AS(ingest("date,A\n2021-01-01,1.0\n", io::SeriesKind::capacity_factor),
                          RangeViolation);
    }
    SECTION("temperature and load ranges") {
        REQUIRE_THROWS_AS(ingest("date,A\n2021-01-01,-61\n", io::SeriesKind::temperature),
                          RangeViolation);
        REQUIRE_THROWS_AS(ingest("date,A\n2021-01-01,-0.5\n", io::SeriesKind::load),
                          RangeViolation);
    }
    SECTION("a skipped day is a gap") {
        const std::string body = "date,A\n2021-01-01,1\n2021-01-03,1\n";
        REQUIRE_THROWS_MATCHES(ingest(body, io::SeriesKind::load), GapDetected,
                               Catch::Matchers::MessageMatches(
                                   ContainsSubstring("expected 2021-01-02")));
    }
    SECTION("duplicate or unsorted dates are gaps") {
        REQUIRE_THROWS_AS(ingest("date,A\n2021-01-02,1\n2021-01-02,1\n", io::SeriesKind::load),
                          GapDetected);
        REQUIRE_THROWS_AS(ingest("date,A\n2021-01-02,1\n2021-01-01,1\n", io::SeriesKind::load),
                          GapDetected);
    }
    SECTION("malformed pieces are parse errors") {
        REQUIRE_THROWS_AS(ingest("when,A\n2021-01-01,1\n", io::SeriesKind::load), ParseError);
        REQUIRE_THROWS_AS(ingest("date,A\n2021-13-01,1\n", io::SeriesKind::load), ParseError);
        REQUIRE_THROWS_AS(ingest("date,A\n2021-02-29,1\n", io::SeriesKind::load), ParseError);
        REQUIRE_THROWS_AS(ingest("date,A\n2021-01-01,abc\n", io::SeriesKind::load), ParseError);
        REQUIRE_THROWS_AS(ingest("date,A\n2021-01-01,1,2\n", io::SeriesKind::load), ParseError);
        REQUIRE_THROWS_AS(ingest("date,A\n", io::SeriesKind::load), ParseError);
        REQUIRE_THROWS_AS(ingest("", io::SeriesKind::load), ParseError);
    }
    SECTION("a missing file is an IO failure") {
        REQUIRE_THROWS_AS(io::ingest_timeseries(dir.file("absent.csv"), io::SeriesKind::load),
                          IoError);
    }
}

TEST_CASE("timeseries CSV: write then ingest reproduces doubles exactly", "[io]") {
    const ScratchDir dir("io_test_roundtrip");
    Matrix values(3, 2);
    values(0, 0) = 0.1;
    values(0, 1) = 1.0 / 3.0;
    values(1, 0) = 0.123456789012345678;
    values(1, 1) = 1e-300;
    values(2, 0) = 0.9999999999999;
    values(2, 1) = 0.0;
    const std::vector<std::chrono::year_month_day> dates{ymd(2021, 3, 1), ymd(2021, 3, 2),
                                                         ymd(2021, 3, 3)};
    const std::string path = dir.file("rt.csv");
    io::write_timeseries_csv(path, {"a", "b"}, values, dates);
    const io::TimeseriesFile back = io::ingest_timeseries(path, io::SeriesKind::capacity_factor);
    REQUIRE(back.values.data() == values.data());
    REQUIRE(back.dates == dates);

    REQUIRE_THROWS_AS(io::write_timeseries_csv(path, {"a"}, values, dates), ShapeMismatch);
}

// ============================================================================
// Run configuration
// ============================================================================

TEST_CASE("load_project_config: full round of keys with comments and spacing", "[io]") {
    const ScratchDir dir("io_test_conf");
    const std::string path = dir.file("run.conf");
    write_file(path, "# comment line\n"
                     "node_names = N1, N2\n"
                     "transmission_mw = 450   # trailing comment\n"
                     "storage_energy_mwh_nn = 1000\n"
                     "storage_energy_mwh_ns = 2000\n"
                     "charge_mw_nn=100\n"
                     "charge_mw_ns=110\n"
                     "discharge_mw_nn = 120\n"
                     "discharge_mw_ns = 130\n"
                     "eta_charge = 0.8\n"
                     "eta_discharge = 0.95\n"
                     "step_hours = 8\n"
                     "coverage_share = 0.25\n"
                     "reference_nn_mw = 3000\n"
                     "reference_ns_mw = 2000\n"
                     "grid_nn_min_mw = 100\n"
                     "grid_nn_max_mw = 200\n"
                     "grid_nn_step_mw = 50\n"
                     "grid_ns_min_mw = 300\n"
                     "grid_ns_max_mw = 400\n"
                     "grid_ns_step_mw = 100\n"
                     "n_realizations = 7\n"
                     "master_seed = 99\n"
                     "n_threads = 3\n"
                     "checkpoint_path = ckpt.csv\n"
                     "checkpoint_every = 5\n"
                     "scenarios = no-flex, full-flex\n"
                     "holidays = 2021-12-24, 2021-12-25\n"
                     "wind_params = wp.json\n"
                     "demand_params = dp.json\n");
    const io::ProjectConfig config = io::load_project_config(path);
    REQUIRE(config.node_names == std::vector<std::string>{"N1", "N2"});
    REQUIRE(config.flex.transmission_mw == 450.0);
    REQUIRE(config.flex.storage_energy_mwh == std::vector<double>{1000.0, 2000.0});
    REQUIRE(config.flex.charge_mw == std::vector<double>{100.0, 110.0});
    REQUIRE(config.flex.discharge_mw == std::vector<double>{120.0, 130.0});
    REQUIRE(config.flex.eta_charge == 0.8);
    REQUIRE(config.flex.eta_discharge == 0.95);
    REQUIRE(config.flex.step_hours == 8.0);
    REQUIRE(config.coverage_share == 0.25);
    REQUIRE(config.reference_nn_mw == 3000.0);
    REQUIRE(config.grid_nn.min_mw == 100.0);
    REQUIRE(config.grid_ns.step_mw == 100.0);
    REQUIRE(config.n_realizations == 7);
    REQUIRE(config.master_seed == 99);
    REQUIRE(config.n_threads == 3);
    REQUIRE(config.checkpoint_path == "ckpt.csv");
    REQUIRE(config.checkpoint_every == 5);
    REQUIRE(config.scenarios == std::vector<dispatch::Scenario>{dispatch::Scenario::no_flex,
                                                                dispatch::Scenario::full_flex});
    REQUIRE(config.holidays == std::vector<std::chrono::year_month_day>{ymd(2021, 12, 24),
                                                                        ymd(2021, 12, 25)});
    REQUIRE(config.wind_params_path == "wp.json");
    REQUIRE(config.demand_params_path == "dp.json");
}

TEST_CASE("load_project_config: rejections", "[io]") {
    const ScratchDir dir("io_test_conf_bad");
    const auto load = [&](const std::string& body) {
        const std::string path = dir.file("bad.conf");
        write_file(path, body);
        return io::load_project_config(path);
    };
    REQUIRE_THROWS_MATCHES(load("mystery_key = 1\n"), ParseError,
                           Catch::Matchers::MessageMatches(
                               ContainsSubstring("line 1") &&
                               ContainsSubstring("mystery_key")));
    REQUIRE_THROWS_AS(load("transmission_mw = lots\n"), ParseError);
    REQUIRE_THROWS_AS(load("just words\n"), ParseError);
    REQUIRE_THROWS_AS(load("= 3\n"), ParseError);
    REQUIRE_THROWS_AS(load("scenarios = no-flex, warp\n"), ParseError);
    REQUIRE_THROWS_AS(load("holidays = yesterday\n"), ParseError);
    // Violating an embedded invariant surfaces as a parse error for the file.
    REQUIRE_THROWS_AS(load("coverage_share = 0\n"), ParseError);
    REQUIRE_THROWS_AS(load("eta_charge = 1.5\n"), ParseError);
    REQUIRE_THROWS_AS(io::load_project_config(dir.file("absent.conf")), IoError);
}

// ============================================================================
// Parameter files
// ============================================================================

TEST_CASE("wind params JSON: write/read round-trip is exact", "[io]") {
    const ScratchDir dir("io_test_windjson");
    const wind::WindModelParams params = defaults::default_wind_params();
    const std::string path = dir.file("wind.json");
    io::write_wind_params(path, params);
    const wind::WindModelParams back = io::read_wind_params(path);
    REQUIRE(back.ou.lambda == params.ou.lambda);
    REQUIRE(back.ou.sigma.data() == params.ou.sigma.data());
    REQUIRE(back.ou.jump_intensity == params.ou.jump_intensity);
    REQUIRE(back.ou.jump_mean == params.ou.jump_mean);
    REQUIRE(back.seasonality.size() == params.seasonality.size());
    for (std::size_t i = 0; i < params.seasonality.size(); ++i) {
        REQUIRE(back.seasonality[i].a == params.seasonality[i].a);
        REQUIRE(back.seasonality[i].b == params.seasonality[i].b);
        REQUIRE(back.seasonality[i].c == params.seasonality[i].c);
    }
}

TEST_CASE("wind params JSON: malformed files are parse errors", "[io]") {
    const ScratchDir dir("io_test_windjson_bad");
    const auto read = [&](const std::string& body) {
        const std::string path = dir.file("bad.json");
        write_file(path, body);
        return io::read_wind_params(path);
    };
    REQUIRE_THROWS_AS(read("not json at all"), ParseError);
    REQUIRE_THROWS_AS(read("{}"), ParseError); // missing fields
    // sigma must be dims^2 row-major entries
    REQUIRE_THROWS_AS(
        read(R"({"seasonality":[{"a":0.3,"b":0,"c":0},{"a":0.2,"b":0,"c":0}],
                 "lambda":[0.4,0.6],"sigma":[0.3,0,0.2],
                 "jump_intensity":[0.8,0.3],"jump_mean":[1,1]})"),
        ParseError);
    // structurally fine but invalid (negative rate) -> still a parse error
    REQUIRE_THROWS_MATCHES(
        read(R"({"seasonality":[{"a":0.3,"b":0,"c":0},{"a":0.2,"b":0,"c":0}],
                 "lambda":[-0.4,0.6],"sigma":[0.3,0,0.2,0.8],
                 "jump_intensity":[0.8,0.3],"jump_mean":[1,1]})"),
        ParseError, Catch::Matchers::MessageMatches(ContainsSubstring("bad.json")));
    REQUIRE_THROWS_AS(io::read_wind_params(dir.file("absent.json")), IoError);
}

TEST_CASE("demand params JSON: write/read round-trip is exact", "[io]") {
    const ScratchDir dir("io_test_demandjson");
    const demand::DemandModelParams params = defaults::default_demand_params();
    const std::string path = dir.file("demand.json");
    io::write_demand_params(path, params);
    const demand::DemandModelParams back = io::read_demand_params(path);
    REQUIRE(back.temperature.nodes == params.temperature.nodes);
    for (std::size_t i = 0; i < params.temperature.node_params.size(); ++i) {
        const auto& a = back.temperature.node_params[i];
        const auto& b = params.temperature.node_params[i];
        REQUIRE(a.seasonal_mean.a == b.seasonal_mean.a);
        REQUIRE(a.seasonal_mean.b == b.seasonal_mean.b);
        REQUIRE(a.seasonal_mean.c == b.seasonal_mean.c);
        REQUIRE(a.ar_coeffs == b.ar_coeffs);
        REQUIRE(a.innovation_std == b.innovation_std);
    }
    for (std::size_t i = 0; i < params.load_regression.node_params.size(); ++i) {
        const auto& a = back.load_regression.node_params[i];
        const auto& b = params.load_regression.node_params[i];
        REQUIRE(a.beta_weekday == b.beta_weekday);
        REQUIRE(a.beta_heating == b.beta_heating);
        REQUIRE(a.beta_cooling == b.beta_cooling);
        REQUIRE(a.threshold == b.threshold);
        REQUIRE(a.cooling_insignificant == b.cooling_insignificant);
    }
}

// ============================================================================
// Fixture bundle
// ============================================================================

TEST_CASE("generate_fixtures: deterministic, ingestible, and statistically sane",
          "[io][slow]") {
    const ScratchDir dir("io_test_fixtures");
    const io::FixturePaths first = io::generate_fixtures(dir.file("a"));
    const io::FixturePaths second = io::generate_fixtures(dir.file("b"));

    // Byte-identical across runs and directories.
    REQUIRE(read_file(first.capacity_factors) == read_file(second.capacity_factors));
    REQUIRE(read_file(first.temperatures) == read_file(second.temperatures));
    REQUIRE(read_file(first.loads) == read_file(second.loads));

    // Rewriting in place reproduces the same bytes.
    const std::string before = read_file(first.loads);
    io::generate_fixtures(dir.file("a"));
    REQUIRE(read_file(first.loads) == before);

    // A different seed changes the data.
    const io::FixturePaths other = io::generate_fixtures(dir.file("c"), 43);
    REQUIRE(read_file(other.capacity_factors) != read_file(first.capacity_factors));

    // Every file passes its own ingestion checks at the documented length.
    const io::TimeseriesFile cf =
        io::ingest_timeseries(first.capacity_factors, io::SeriesKind::capacity_factor);
    const io::TimeseriesFile temps =
        io::ingest_timeseries(first.temperatures, io::SeriesKind::temperature);
    const io::TimeseriesFile loads = io::ingest_timeseries(first.loads, io::SeriesKind::load);
    REQUIRE(cf.values.rows() == 40 * 365);
    REQUIRE(temps.values.rows() == 30 * 365);
    REQUIRE(loads.values.rows() == 5 * 365);
    REQUIRE(cf.names == std::vector<std::string>{"NO-N", "NO-S"});

    // Capacity-factor moments stay close to the documented reference column.
    REQUIRE_THAT(mean(cf.values.column(0)), WithinAbs(0.273, 0.05));
    REQUIRE_THAT(mean(cf.values.column(1)), WithinAbs(0.180, 0.05));

    REQUIRE(std::filesystem::exists(first.manifest));
}

// ============================================================================
// Surface, trace, and table writers
// ============================================================================

namespace {

sweep::LossSurface small_surface() {
    sweep::SweepConfig config;
    config.grid_nn = {2000.0, 3000.0, 1000.0};
    config.grid_ns = {1000.0, 3000.0, 1000.0};
    config.n_realizations = 2;
    config.base_flex.transmission_mw = 300.0;
    config.base_flex.storage_energy_mwh = {5000.0, 10000.0};
    config.base_flex.charge_mw = {300.0, 300.0};
    config.base_flex.discharge_mw = {300.0, 300.0};
    config.base_flex.step_hours = 8.0;
    return sweep::sweep(config, defaults::default_wind_params(),
                        defaults::default_demand_params());
}

} // namespace

TEST_CASE("surface CSV: write/read round-trip reproduces the surface exactly", "[io]") {
    const ScratchDir dir("io_test_surface");
    const sweep::LossSurface surface = small_surface();
    const std::string path = dir.file("surface.csv");
    io::write_surface_csv(path, surface);

    const sweep::LossSurface back = io::read_surface_csv(path);
    REQUIRE(back.grid_nn.min_mw == surface.grid_nn.min_mw);
    REQUIRE(back.grid_nn.max_mw == surface.grid_nn.max_mw);
    REQUIRE(back.grid_nn.points() == surface.grid_nn.points());
    REQUIRE(back.grid_ns.points() == surface.grid_ns.points());
    REQUIRE(back.scenarios == surface.scenarios);
    for (std::size_t s = 0; s < surface.layers.size(); ++s) {
        REQUIRE(back.layers[s].expected_penalty == surface.layers[s].expected_penalty);
        REQUIRE(back.layers[s].penalty_nn == surface.layers[s].penalty_nn);
        REQUIRE(back.layers[s].penalty_ns == surface.layers[s].penalty_ns);
        REQUIRE(back.layers[s].se == surface.layers[s].se);
    }

    SECTION("row order does not matter") {
        std::istringstream in(read_file(path));
        std::string header, line;
        std::getline(in, header);
        std::vector<std::string> rows;
        while (std::getline(in, line)) rows.push_back(line);
        std::reverse(rows.begin(), rows.end());
        std::ostringstream shuffled;
        shuffled << header << '\n';
        for (const auto& r : rows) shuffled << r << '\n';
        write_file(path, shuffled.str());
        // Scenario order now follows encounter order, so match layers by tag.
        const sweep::LossSurface reread = io::read_surface_csv(path);
        for (std::size_t s = 0; s < surface.scenarios.size(); ++s)
            REQUIRE(reread.layer(surface.scenarios[s]).expected_penalty ==
                    surface.layers[s].expected_penalty);
    }
}

TEST_CASE("surface CSV: structural defects are rejected", "[io]") {
    const ScratchDir dir("io_test_surface_bad");
    const std::string path = dir.file("surface.csv");
    const std::string header =
        "wind_nn_mw,wind_ns_mw,scenario,expected_penalty,penalty_nn,penalty_ns,stderr\n";

    write_file(path, "nope\n");
    REQUIRE_THROWS_AS(io::read_surface_csv(path), ParseError);

    write_file(path, header);
    REQUIRE_THROWS_AS(io::read_surface_csv(path), EmptySurface);

    // Full 2x1 grid for no-flex, but one cell missing for trans.
    write_file(path, header + "0,0,no-flex,1,1,0,0\n"
                              "100,0,no-flex,2,2,0,0\n"
                              "0,0,trans,1,1,0,0\n");
    REQUIRE_THROWS_AS(io::read_surface_csv(path), GridMismatch);

    write_file(path, header + "0,0,no-flex,1,1,0,0\n"
                              "0,0,no-flex,2,2,0,0\n");
    REQUIRE_THROWS_AS(io::read_surface_csv(path), ParseError);

    // Coordinates that collide once snapped to an even grid.
    write_file(path, header + "0,0,no-flex,1,1,0,0\n"
                              "400,0,no-flex,2,2,0,0\n"
                              "500,0,no-flex,3,3,0,0\n");
    REQUIRE_THROWS_AS(io::read_surface_csv(path), ParseError);

    write_file(path, header + "0,0,no-flex,1,1,0\n");
    REQUIRE_THROWS_AS(io::read_surface_csv(path), ParseError);

    REQUIRE_THROWS_AS(io::read_surface_csv(dir.file("absent.csv")), IoError);
}

TEST_CASE("write_trace_csv: long tidy layout, one row per step and node", "[io]") {
    const ScratchDir dir("io_test_trace");
    Matrix production(2, 2), demand_mw(2, 2);
    production(0, 0) = 10.0;
    production(0, 1) = 20.0;
    production(1, 0) = 30.0;
    production(1, 1) = 40.0;
    demand_mw(0, 0) = 5.0;
    demand_mw(0, 1) = 25.0;
    demand_mw(1, 0) = 35.0;
    demand_mw(1, 1) = 35.0;
    const dispatch::DispatchTrace trace = dispatch::dispatch_no_flex(production, demand_mw);

    const std::string path = dir.file("trace.csv");
    io::write_trace_csv(path, trace, {"NN", "NS"});
    REQUIRE(read_file(path) ==
            "t,node,production,demand,import,export,charge,discharge,storage_level,loss,scenario\n"
            "1,NN,10,5,0,0,0,0,0,25,no-flex\n"
            "1,NS,20,25,0,0,0,0,0,25,no-flex\n"
            "2,NN,30,35,0,0,0,0,0,25,no-flex\n"
            "2,NS,40,35,0,0,0,0,0,25,no-flex\n");

    REQUIRE_THROWS_AS(io::write_trace_csv(path, trace, {"NN"}), ShapeMismatch);
}

TEST_CASE("table writers: exact golden rows", "[io]") {
    const ScratchDir dir("io_test_tables");

    SECTION("dominance") {
        sweep::DominanceCell cell;
        cell.nn_mw = 3250.0;
        cell.ns_mw = 1800.0;
        cell.best = dispatch::Scenario::full_flex;
        cell.second_best = dispatch::Scenario::stor;
        const std::string path = dir.file("dominance.csv");
        io::write_dominance_csv(path, {cell});
        REQUIRE(read_file(path) == "wind_nn_mw,wind_ns_mw,best,second_best\n"
                                   "3250,1800,full-flex,stor\n");
    }
    SECTION("optima") {
        sweep::OptimumRow row;
        row.scenario = dispatch::Scenario::trans;
        row.nn_mw = 3250.0;
        row.ns_mw = 4325.0;
        row.expected_penalty = 123.5;
        row.reference_penalty = 247.0;
        row.improvement = 0.5;
        const std::string path = dir.file("optima.csv");
        io::write_optima_csv(path, {row});
        REQUIRE(read_file(path) ==
                "scenario,opt_nn_mw,opt_ns_mw,expected_penalty,reference_penalty,improvement\n"
                "trans,3250,4325,123.5,247,0.5\n");
    }
    SECTION("sensitivity") {
        sweep::SensitivityRow row;
        row.factor = sweep::SensitivitySpec::Factor::storage;
        row.multiplier = 0.5;
        row.scenario = dispatch::Scenario::stor;
        row.opt_nn_mw = 3250.0;
        row.opt_ns_mw = 1800.0;
        row.expected_penalty = 10.0;
        row.delta_vs_base = -2.5;
        const std::string path = dir.file("sensitivity.csv");
        io::write_sensitivity_csv(path, {row});
        REQUIRE(read_file(path) ==
                "factor,multiplier,scenario,opt_nn_mw,opt_ns_mw,expected_penalty,delta_vs_base\n"
                "storage,0.5,stor,3250,1800,10,-2.5\n");
    }
    SECTION("plot data") {
        io::PlotRow row;
        row.day = 17;
        row.node = "NO-S";
        row.scenario = dispatch::Scenario::no_flex;
        row.statistic = "q90";
        row.value = 0.25;
        const std::string path = dir.file("plot.csv");
        io::write_plotdata_csv(path, {row});
        REQUIRE(read_file(path) == "day,node,scenario,statistic,value\n"
                                   "17,NO-S,no-flex,q90,0.25\n");
    }
}

// ============================================================================
// Command-line driver
// ============================================================================

namespace {

// The test harness exports the driver's location; without it (manual runs of
// this binary alone) the CLI cases skip rather than fail.
std::string cli_path() {
    const char* env = std::getenv("WINDFLEX_CLI");
    return env ? env : "";
}

struct CliResult {
    int exit_code = -1;
    std::string out;
    std::string err;
};

CliResult run_cli(const ScratchDir& dir, const std::string& args) {
    const std::string out = dir.file("cli_stdout.txt");
    const std::string err = dir.file("cli_stderr.txt");
    const std::string cmd = cli_path() + " " + args + " >" + out + " 2>" + err;
    const int status = std::system(cmd.c_str());
    CliResult result;
#ifdef _WIN32
    result.exit_code = status;
#else
    result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
#endif
    result.out = read_file(out);
    result.err = read_file(err);
    return result;
}

} // namespace

TEST_CASE("cli: fixture and fit pipeline", "[io][cli][slow]") {
    if (cli_path().empty()) SKIP("WINDFLEX_CLI not set");
    const ScratchDir dir("io_test_cli_fit");

    const CliResult fx = run_cli(dir, "fixtures --out " + dir.file("fx"));
    REQUIRE(fx.exit_code == 0);
    REQUIRE(std::filesystem::exists(dir.file("fx/capacity_factors.csv")));

    const CliResult fit = run_cli(dir, "fit wind --input " + dir.file("fx/capacity_factors.csv") +
                                           " --out " + dir.file("wind.json"));
    REQUIRE(fit.exit_code == 0);
    const wind::WindModelParams fitted = io::read_wind_params(dir.file("wind.json"));
    const wind::WindModelParams truth = defaults::default_wind_params();
    REQUIRE_THAT(fitted.ou.lambda[0], WithinAbs(truth.ou.lambda[0], 0.05));
    REQUIRE_THAT(fitted.ou.lambda[1], WithinAbs(truth.ou.lambda[1], 0.05));

    const CliResult temp_fit =
        run_cli(dir, "fit temperature --input " + dir.file("fx/temperatures.csv") + " --out " +
                         dir.file("demand.json"));
    REQUIRE(temp_fit.exit_code == 0);
    const demand::DemandModelParams demand_fitted = io::read_demand_params(dir.file("demand.json"));
    const demand::DemandModelParams demand_truth = defaults::default_demand_params();
    REQUIRE_THAT(demand_fitted.temperature.node_params[0].ar_coeffs[0],
                 WithinAbs(demand_truth.temperature.node_params[0].ar_coeffs[0], 0.05));
}

TEST_CASE("cli: simulate is reproducible from the seed", "[io][cli][slow]") {
    if (cli_path().empty()) SKIP("WINDFLEX_CLI not set");
    const ScratchDir dir("io_test_cli_sim");
    REQUIRE(run_cli(dir, "simulate --years 2 --seed 7 --out " + dir.file("a")).exit_code == 0);
    REQUIRE(run_cli(dir, "simulate --years 2 --seed 7 --out " + dir.file("b")).exit_code == 0);
    REQUIRE(read_file(dir.file("a/loads.csv")) == read_file(dir.file("b/loads.csv")));
    REQUIRE(read_file(dir.file("a/capacity_factors.csv")) ==
            read_file(dir.file("b/capacity_factors.csv")));
    REQUIRE(run_cli(dir, "simulate --years 2 --seed 8 --out " + dir.file("c")).exit_code == 0);
    REQUIRE(read_file(dir.file("a/loads.csv")) != read_file(dir.file("c/loads.csv")));
}

TEST_CASE("cli: sweep and report round", "[io][cli][slow]") {
    if (cli_path().empty()) SKIP("WINDFLEX_CLI not set");
    const ScratchDir dir("io_test_cli_sweep");

    // The smallest possible sweep: one cell, one realization, one scenario.
    const CliResult tiny = run_cli(
        dir, "sweep --nn-min 3250 --nn-max 3250 --nn-step 1 --ns-min 1800 --ns-max 1800 "
             "--ns-step 1 --realizations 1 --scenarios no-flex --out " +
                 dir.file("tiny"));
    REQUIRE(tiny.exit_code == 0);
    const std::string tiny_surface = read_file(dir.file("tiny/surface.csv"));
    REQUIRE(count_lines(tiny_surface) == 2); // header plus exactly one row

    const CliResult sw = run_cli(
        dir, "sweep --nn-min 3250 --nn-max 3850 --nn-step 600 --ns-min 1800 --ns-max 2800 "
             "--ns-step 1000 --realizations 2 --out " +
                 dir.file("sw"));
    REQUIRE(sw.exit_code == 0);
    const CliResult rep =
        run_cli(dir, "report --surface " + dir.file("sw/surface.csv") + " --out " + dir.file("rep"));
    REQUIRE(rep.exit_code == 0);
    // 2x2 grid -> four dominance rows after the header.
    REQUIRE(count_lines(read_file(dir.file("rep/dominance.csv"))) == 5);
    REQUIRE(count_lines(read_file(dir.file("rep/optima.csv"))) == 5); // four scenarios

    const sweep::LossSurface surface = io::read_surface_csv(dir.file("sw/surface.csv"));
    REQUIRE(surface.n_cells() == 4);
    REQUIRE(surface.scenarios.size() == 4);
}

TEST_CASE("cli: exit codes separate validation from runtime failures", "[io][cli]") {
    if (cli_path().empty()) SKIP("WINDFLEX_CLI not set");
    const ScratchDir dir("io_test_cli_exit");

    REQUIRE(run_cli(dir, "--help").exit_code == 0);
    REQUIRE(run_cli(dir, "definitely-not-a-command").exit_code == 1);
    REQUIRE(run_cli(dir, "sweep --scenarios warp --out " + dir.file("x")).exit_code == 1);

    // Unreadable config content is a validation failure...
    write_file(dir.file("bad.conf"), "mystery = 1\n");
    const CliResult bad = run_cli(dir, "sweep --config " + dir.file("bad.conf"));
    REQUIRE(bad.exit_code == 1);
    REQUIRE_THAT(bad.err, ContainsSubstring("mystery"));

    // ...while an unwritable destination is a runtime failure.
    REQUIRE(run_cli(dir, "fixtures --out /dev/null/nope").exit_code == 2);
}

TEST_CASE("cli: dispatch writes traces and tidy plot data", "[io][cli][slow]") {
    if (cli_path().empty()) SKIP("WINDFLEX_CLI not set");
    const ScratchDir dir("io_test_cli_dispatch");
    const CliResult run = run_cli(
        dir, "dispatch --plan-nn 3250 --plan-ns 1800 --realizations 3 --emit-plotdata --out " +
                 dir.file("d"));
    REQUIRE(run.exit_code == 0);
    for (const char* name :
         {"trace_no-flex.csv", "trace_trans.csv", "trace_stor.csv", "trace_full-flex.csv"})
        REQUIRE(std::filesystem::exists(dir.file(std::string("d/") + name)));

    const std::string plot = read_file(dir.file("d/plotdata.csv"));
    // 365 days x 2 nodes x 3 statistics x 4 scenarios, plus the header.
    REQUIRE(count_lines(plot) == 1 + 365 * 2 * 3 * 4);
    REQUIRE_THAT(plot, ContainsSubstring("day,node,scenario,statistic,value"));
    REQUIRE_THAT(plot, ContainsSubstring("q10"));
    REQUIRE_THAT(plot, ContainsSubstring("q90"));

    const std::string trace = read_file(dir.file("d/trace_no-flex.csv"));
    REQUIRE(count_lines(trace) == 1 + 365 * 2);
}
