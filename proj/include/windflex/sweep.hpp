#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <span>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "windflex/common.hpp"
#include "windflex/dispatch.hpp"
#include "windflex/errors.hpp"
#include "windflex/load_model.hpp"
#include "windflex/rng.hpp"
#include "windflex/temperature_model.hpp"
#include "windflex/wind_model.hpp"

namespace windflex::sweep {

struct GridAxis {
    double min_mw = 0.0;
    double max_mw = 0.0;
    double step_mw = 1.0;

    void validate() const {
        if (!(min_mw <= max_mw))
            throw RangeViolation("GridAxis: min must not exceed max");
        if (!(step_mw > 0.0))
            throw RangeViolation("GridAxis: step must be positive");
    }

    std::size_t points() const {
        return static_cast<std::size_t>(std::floor((max_mw - min_mw) / step_mw + 1e-9)) + 1;
    }

    double value(std::size_t i) const { return min_mw + static_cast<double>(i) * step_mw; }

    std::size_t nearest(double v) const {
        const long k = std::lround((v - min_mw) / step_mw);
        const long hi = static_cast<long>(points()) - 1;
        return static_cast<std::size_t>(std::clamp(k, 0L, hi));
    }
};

struct SweepConfig {
    GridAxis grid_nn;
    GridAxis grid_ns;
    std::size_t n_realizations = 100;
    std::vector<dispatch::Scenario> scenarios{dispatch::Scenario::no_flex,
                                              dispatch::Scenario::trans, dispatch::Scenario::stor,
                                              dispatch::Scenario::full_flex};
    dispatch::FlexSpec base_flex;
    double coverage_share = 0.128;
    std::uint64_t master_seed = 42;
    // Operational knobs; none of these may change any output value.
    std::size_t n_threads = 1;
    std::string checkpoint_path;       // empty disables checkpointing
    std::size_t checkpoint_every = 16; // flush cadence in completed cells
    double reference_nn_mw = 3257.0;
    double reference_ns_mw = 1811.0;

    void validate() const {
        grid_nn.validate();
        grid_ns.validate();
        if (n_realizations < 1)
            throw RangeViolation("SweepConfig: n_realizations must be >= 1");
        if (scenarios.empty())
            throw ShapeMismatch("SweepConfig: no scenarios selected");
        for (std::size_t a = 0; a < scenarios.size(); ++a)
            for (std::size_t b = a + 1; b < scenarios.size(); ++b)
                if (scenarios[a] == scenarios[b])
                    throw ShapeMismatch("SweepConfig: duplicate scenario");
        if (!(coverage_share > 0.0 && coverage_share <= 1.0))
            throw RangeViolation("SweepConfig: coverage_share must lie in (0,1]");
        base_flex.validate(2);
    }
};

// One precomputed weather/load year shared by every grid cell and scenario
// (common random numbers), so surfaces differ only through dispatch.
struct Realization {
    Matrix capacity_factor; // 365 x 2
    Matrix demand_mw;       // 365 x 2
};

inline Realization make_realization(const wind::WindModelParams& weather,
                                    const demand::DemandModelParams& demand_params,
                                    double coverage_share, std::uint64_t master_seed,
                                    std::uint64_t realization) {
    RngStream wind_stream = make_stream(master_seed, realization, stream_tag::wind);
    wind::CapacityFactorSeries cf =
        wind::simulate_capacity_factors(weather, 1, wind_stream);
    RngStream temp_stream = make_stream(master_seed, realization, stream_tag::temperature);
    demand::TemperatureSeries temps =
        demand::simulate_temperature(demand_params.temperature, 1, temp_stream);
    const demand::Calendar calendar = demand::make_calendar(365);
    demand::LoadSeries load =
        demand::synthesize_load(demand_params.load_regression, temps, calendar, coverage_share);
    return Realization{std::move(cf.values), std::move(load.values)};
}

inline std::vector<Realization> make_realizations(const wind::WindModelParams& weather,
                                                  const demand::DemandModelParams& demand_params,
                                                  double coverage_share, std::size_t n,
                                                  std::uint64_t master_seed) {
    weather.validate();
    demand_params.validate();
    std::vector<Realization> out;
    out.reserve(n);
    for (std::size_t r = 0; r < n; ++r)
        out.push_back(make_realization(weather, demand_params, coverage_share, master_seed, r));
    return out;
}

struct CellResult {
    double expected_penalty = 0.0;
    double penalty_nn = 0.0;
    double penalty_ns = 0.0;
    double se = 0.0;
};

// Expected annual penalty of one (plan, scenario) cell over the shared
// realizations. Realizations run in fixed index order with compensated sums,
// so the result is independent of any outer parallelism.
inline CellResult evaluate_cell(const dispatch::CapacityPlan& plan,
                                const dispatch::FlexSpec& flex, dispatch::Scenario scenario,
                                std::span<const Realization> realizations,
                                std::array<double, 2> demand_scale = {1.0, 1.0}) {
    plan.validate();
    if (plan.wind_mw.size() != 2)
        throw ShapeMismatch("evaluate_cell: plan must cover exactly two nodes");
    dispatch::DispatchEngine engine(flex, scenario, 2);
    const std::size_t n = realizations.size();
    std::vector<double> totals(n);
    KahanSum sum_nn, sum_ns;
    double p[2], d[2];
    for (std::size_t r = 0; r < n; ++r) {
        engine.reset();
        const Matrix& cf = realizations[r].capacity_factor;
        const Matrix& dm = realizations[r].demand_mw;
        KahanSum year_nn, year_ns;
        for (std::size_t t = 0; t < cf.rows(); ++t) {
            p[0] = plan.wind_mw[0] * cf(t, 0);
            p[1] = plan.wind_mw[1] * cf(t, 1);
            d[0] = demand_scale[0] * dm(t, 0);
            d[1] = demand_scale[1] * dm(t, 1);
            engine.step(std::span<const double>(p, 2), std::span<const double>(d, 2));
            const double r0 = engine.residual()[0];
            const double r1 = engine.residual()[1];
            year_nn.add(r0 * r0);
            year_ns.add(r1 * r1);
        }
        sum_nn.add(year_nn.value());
        sum_ns.add(year_ns.value());
        totals[r] = year_nn.value() + year_ns.value();
    }
    CellResult cell;
    const double nd = static_cast<double>(n);
    cell.penalty_nn = sum_nn.value() / nd;
    cell.penalty_ns = sum_ns.value() / nd;
    KahanSum sum_tot;
    for (double v : totals) sum_tot.add(v);
    cell.expected_penalty = sum_tot.value() / nd;
    if (n > 1) {
        KahanSum sq;
        for (double v : totals) sq.add((v - cell.expected_penalty) * (v - cell.expected_penalty));
        cell.se = std::sqrt(sq.value() / (nd - 1.0) / nd);
    }
    return cell;
}

struct SurfaceLayer {
    std::vector<double> expected_penalty;
    std::vector<double> penalty_nn;
    std::vector<double> penalty_ns;
    std::vector<double> se;

    void resize(std::size_t n) {
        expected_penalty.assign(n, 0.0);
        penalty_nn.assign(n, 0.0);
        penalty_ns.assign(n, 0.0);
        se.assign(n, 0.0);
    }
};

struct LossSurface {
    GridAxis grid_nn;
    GridAxis grid_ns;
    std::vector<dispatch::Scenario> scenarios;
    std::vector<SurfaceLayer> layers; // parallel to scenarios

    std::size_t n_cells() const { return grid_nn.points() * grid_ns.points(); }
    std::size_t cell_index(std::size_t i_nn, std::size_t i_ns) const {
        return i_nn * grid_ns.points() + i_ns;
    }

    const SurfaceLayer& layer(dispatch::Scenario s) const {
        for (std::size_t k = 0; k < scenarios.size(); ++k)
            if (scenarios[k] == s) return layers[k];
        throw EmptySurface(std::string("LossSurface: no layer for scenario ") +
                           dispatch::to_string(s));
    }
    bool has(dispatch::Scenario s) const {
        for (dispatch::Scenario k : scenarios)
            if (k == s) return true;
        return false;
    }

    void validate() const {
        grid_nn.validate();
        grid_ns.validate();
        if (scenarios.size() != layers.size())
            throw ShapeMismatch("LossSurface: scenario/layer count mismatch");
        if (scenarios.empty() || n_cells() == 0)
            throw EmptySurface("LossSurface: empty");
        for (const auto& layer : layers) {
            if (layer.expected_penalty.size() != n_cells() ||
                layer.penalty_nn.size() != n_cells() || layer.penalty_ns.size() != n_cells() ||
                layer.se.size() != n_cells())
                throw ShapeMismatch("LossSurface: layer size != grid size");
            for (double v : layer.expected_penalty)
                if (v < 0.0) throw RangeViolation("LossSurface: negative expected penalty");
        }
    }
};

namespace detail {

class Fnv1a {
public:
    void add(std::uint64_t v) {
        for (int k = 0; k < 8; ++k) {
            h_ ^= (v >> (8 * k)) & 0xff;
            h_ *= 1099511628211ULL;
        }
    }
    void add(double v) { add(std::bit_cast<std::uint64_t>(v)); }
    std::uint64_t value() const { return h_; }

private:
    std::uint64_t h_ = 1469598103934665603ULL;
};

inline std::uint64_t params_digest(const wind::WindModelParams& weather,
                                   const demand::DemandModelParams& demand_params) {
    Fnv1a h;
    for (const auto& s : weather.seasonality) {
        h.add(s.a);
        h.add(s.b);
        h.add(s.c);
    }
    h.add(static_cast<std::uint64_t>(weather.ou.dims));
    for (double v : weather.ou.lambda) h.add(v);
    for (double v : weather.ou.sigma.data()) h.add(v);
    for (double v : weather.ou.jump_intensity) h.add(v);
    for (double v : weather.ou.jump_mean) h.add(v);
    for (const auto& p : demand_params.temperature.node_params) {
        h.add(p.seasonal_mean.a);
        h.add(p.seasonal_mean.b);
        h.add(p.seasonal_mean.c);
        for (double v : p.ar_coeffs) h.add(v);
        h.add(p.innovation_std);
    }
    for (const auto& p : demand_params.load_regression.node_params) {
        for (double v : p.beta_weekday) h.add(v);
        h.add(p.beta_heating);
        h.add(p.beta_cooling);
        h.add(p.threshold);
    }
    return h.value();
}

inline std::string checkpoint_meta(const SweepConfig& config, std::uint64_t digest) {
    std::ostringstream os;
    const auto axis = [&os](const char* name, const GridAxis& a) {
        os << ' ' << name << '=' << format_double(a.min_mw) << ':' << format_double(a.max_mw)
           << ':' << format_double(a.step_mw);
    };
    os << "# windflex-checkpoint v1";
    axis("nn", config.grid_nn);
    axis("ns", config.grid_ns);
    os << " scenarios=";
    for (std::size_t k = 0; k < config.scenarios.size(); ++k)
        os << (k ? "," : "") << dispatch::to_string(config.scenarios[k]);
    os << " n_realizations=" << config.n_realizations << " seed=" << config.master_seed
       << " coverage=" << format_double(config.coverage_share);
    const auto& f = config.base_flex;
    os << " flex=" << format_double(f.transmission_mw);
    for (std::size_t i = 0; i < 2; ++i)
        os << ':' << format_double(f.storage_energy_mwh[i]) << ':' << format_double(f.charge_mw[i])
           << ':' << format_double(f.discharge_mw[i]);
    os << ':' << format_double(f.eta_charge) << ':' << format_double(f.eta_discharge) << ':'
       << format_double(f.step_hours);
    os << " params=" << std::hex << digest;
    return os.str();
}

// Checkpoint rows are plain CSV, one row per (cell, scenario), appended
// strictly in cell order. Resume accepts only the leading run of fully
// written cells and rewrites the file to exactly that prefix, so a row torn
// by a crash can never corrupt a resumed sweep.
inline constexpr const char* checkpoint_header =
    "cell,i_nn,i_ns,scenario,expected_penalty,penalty_nn,penalty_ns,stderr";

inline std::string checkpoint_row(const LossSurface& surface, std::size_t cell,
                                  std::size_t scenario_idx) {
    const std::size_t i_nn = cell / surface.grid_ns.points();
    const std::size_t i_ns = cell % surface.grid_ns.points();
    const SurfaceLayer& layer = surface.layers[scenario_idx];
    std::ostringstream os;
    os << cell << ',' << i_nn << ',' << i_ns << ','
       << dispatch::to_string(surface.scenarios[scenario_idx]) << ','
       << format_double(layer.expected_penalty[cell]) << ',' << format_double(layer.penalty_nn[cell])
       << ',' << format_double(layer.penalty_ns[cell]) << ',' << format_double(layer.se[cell]);
    return os.str();
}

// Loads the reusable prefix of an existing checkpoint into the surface.
// Returns the number of leading cells recovered. Throws GridMismatch when the
// file belongs to a different sweep configuration.
inline std::size_t load_checkpoint(const std::string& path, const std::string& meta,
                                   LossSurface& surface) {
    std::ifstream in(path);
    if (!in.is_open()) return 0;
    std::string line;
    if (!std::getline(in, line)) return 0;
    if (line != meta)
        throw GridMismatch("checkpoint at " + path + " was written by a different configuration");
    if (!std::getline(in, line) || line != checkpoint_header) return 0;

    const std::size_t n_scenarios = surface.scenarios.size();
    std::size_t complete = 0;
    bool ok = true;
    while (ok && complete < surface.n_cells()) {
        std::array<std::array<double, 4>, 8> vals{};
        std::size_t k = 0;
        for (; k < n_scenarios; ++k) {
            if (!std::getline(in, line)) {
                ok = false;
                break;
            }
            std::istringstream row(line);
            std::string field;
            auto next = [&row, &field]() -> std::string& {
                if (!std::getline(row, field, ',')) field.clear();
                return field;
            };
            try {
                if (static_cast<std::size_t>(std::stoull(next())) != complete) break;
                next(); // i_nn, implied by cell
                next(); // i_ns
                if (next() != dispatch::to_string(surface.scenarios[k])) break;
                for (int c = 0; c < 4; ++c) vals[k][c] = std::stod(next());
            } catch (const std::exception&) {
                break;
            }
        }
        if (!ok || k != n_scenarios) break;
        for (std::size_t s = 0; s < n_scenarios; ++s) {
            surface.layers[s].expected_penalty[complete] = vals[s][0];
            surface.layers[s].penalty_nn[complete] = vals[s][1];
            surface.layers[s].penalty_ns[complete] = vals[s][2];
            surface.layers[s].se[complete] = vals[s][3];
        }
        ++complete;
    }
    in.close();

    // Rewrite the file as exactly the accepted prefix.
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::trunc);
        if (!out.is_open()) throw IoError("cannot write checkpoint at " + tmp);
        out << meta << '\n' << checkpoint_header << '\n';
        for (std::size_t cell = 0; cell < complete; ++cell)
            for (std::size_t s = 0; s < n_scenarios; ++s)
                out << checkpoint_row(surface, cell, s) << '\n';
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0)
        throw IoError("cannot replace checkpoint at " + path);
    return complete;
}

} // namespace detail

// Core grid evaluation over precomputed realizations. Cells are distributed
// over workers; every cell is computed by exactly one worker in a fixed
// internal order, and results land at their cell index, so outputs are
// identical for any worker count.
inline LossSurface sweep_precomputed(const SweepConfig& config,
                                     std::span<const Realization> realizations,
                                     const std::string& checkpoint_meta = {}) {
    config.validate();
    if (realizations.size() != config.n_realizations)
        throw ShapeMismatch("sweep: realization count != config");
    if (config.scenarios.size() > 8)
        throw ShapeMismatch("sweep: more than 8 scenarios");

    LossSurface surface;
    surface.grid_nn = config.grid_nn;
    surface.grid_ns = config.grid_ns;
    surface.scenarios = config.scenarios;
    surface.layers.resize(config.scenarios.size());
    const std::size_t n_cells = surface.n_cells();
    for (auto& layer : surface.layers) layer.resize(n_cells);

    const bool checkpointing = !config.checkpoint_path.empty();
    std::size_t resumed = 0;
    std::ofstream ckpt;
    if (checkpointing) {
        resumed = detail::load_checkpoint(config.checkpoint_path, checkpoint_meta, surface);
        ckpt.open(config.checkpoint_path, resumed > 0 ? std::ios::app : std::ios::trunc);
        if (!ckpt.is_open())
            throw IoError("cannot open checkpoint at " + config.checkpoint_path);
        if (resumed == 0) ckpt << checkpoint_meta << '\n' << detail::checkpoint_header << '\n';
    }

    std::vector<char> done(n_cells, 0);
    for (std::size_t c = 0; c < resumed; ++c) done[c] = 1;

    std::atomic<std::size_t> next_cell{resumed};
    std::mutex mu; // guards the done/write frontier and the error slot
    std::size_t write_frontier = resumed;
    std::size_t cells_since_flush = 0;
    std::exception_ptr first_error;
    std::atomic<bool> stop{false};

    const auto worker = [&]() {
        const std::size_t ns_points = config.grid_ns.points();
        while (!stop.load(std::memory_order_relaxed)) {
            const std::size_t cell = next_cell.fetch_add(1, std::memory_order_relaxed);
            if (cell >= n_cells) break;
            try {
                dispatch::CapacityPlan plan;
                plan.wind_mw = {config.grid_nn.value(cell / ns_points),
                                config.grid_ns.value(cell % ns_points)};
                for (std::size_t s = 0; s < config.scenarios.size(); ++s) {
                    const CellResult res = evaluate_cell(plan, config.base_flex,
                                                         config.scenarios[s], realizations);
                    surface.layers[s].expected_penalty[cell] = res.expected_penalty;
                    surface.layers[s].penalty_nn[cell] = res.penalty_nn;
                    surface.layers[s].penalty_ns[cell] = res.penalty_ns;
                    surface.layers[s].se[cell] = res.se;
                }
                std::lock_guard<std::mutex> lock(mu);
                done[cell] = 1;
                while (write_frontier < n_cells && done[write_frontier]) {
                    if (checkpointing) {
                        for (std::size_t s = 0; s < config.scenarios.size(); ++s)
                            ckpt << detail::checkpoint_row(surface, write_frontier, s) << '\n';
                        if (++cells_since_flush >= config.checkpoint_every) {
                            ckpt.flush();
                            cells_since_flush = 0;
                        }
                    }
                    ++write_frontier;
                }
            } catch (...) {
                std::lock_guard<std::mutex> lock(mu);
                if (!first_error) first_error = std::current_exception();
                stop.store(true, std::memory_order_relaxed);
            }
        }
    };

    const std::size_t n_threads = std::max<std::size_t>(config.n_threads, 1);
    if (n_threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(n_threads);
        for (std::size_t k = 0; k < n_threads; ++k) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (first_error) std::rethrow_exception(first_error);
    if (checkpointing) ckpt.flush();
    return surface;
}

inline LossSurface sweep(const SweepConfig& config, const wind::WindModelParams& weather,
                         const demand::DemandModelParams& demand_params) {
    config.validate();
    const std::vector<Realization> realizations = make_realizations(
        weather, demand_params, config.coverage_share, config.n_realizations,
        config.master_seed);
    std::string meta;
    if (!config.checkpoint_path.empty())
        meta = detail::checkpoint_meta(config, detail::params_digest(weather, demand_params));
    return sweep_precomputed(config, realizations, meta);
}

struct RealizationResult {
    dispatch::DispatchTrace trace;
    dispatch::PenaltyReport penalty;
};

// End-to-end single year: weather and load from the realization's streams,
// production scaled by the plan, one dispatch, aggregated penalties.
inline RealizationResult run_realization(const dispatch::CapacityPlan& plan,
                                         dispatch::Scenario scenario,
                                         const dispatch::FlexSpec& flex,
                                         const wind::WindModelParams& weather,
                                         const demand::DemandModelParams& demand_params,
                                         double coverage_share, std::uint64_t master_seed,
                                         std::uint64_t realization) {
    plan.validate();
    if (plan.wind_mw.size() != 2)
        throw ShapeMismatch("run_realization: plan must cover exactly two nodes");
    weather.validate();
    demand_params.validate();
    const Realization real =
        make_realization(weather, demand_params, coverage_share, master_seed, realization);
    Matrix production(real.capacity_factor.rows(), real.capacity_factor.cols());
    for (std::size_t t = 0; t < production.rows(); ++t)
        for (std::size_t i = 0; i < production.cols(); ++i)
            production(t, i) = plan.wind_mw[i] * real.capacity_factor(t, i);
    RealizationResult out;
    out.trace = dispatch::run_dispatch(production, real.demand_mw, flex, scenario);
    out.penalty = dispatch::aggregate_penalty(out.trace);
    return out;
}

struct OptimumRow {
    dispatch::Scenario scenario = dispatch::Scenario::no_flex;
    double nn_mw = 0.0;
    double ns_mw = 0.0;
    double expected_penalty = 0.0;
    double reference_penalty = 0.0;
    double improvement = 0.0;
};

// Per-scenario argmin over the surface, with improvement measured against a
// single reference: the penalty of today's capacities with no flexibility
// (falling back to the same scenario's reference cell when no-flex was not
// swept). Ties break toward smaller total capacity, then smaller node-1
// capacity.
inline std::vector<OptimumRow> argmin_surface(const LossSurface& surface,
                                              double reference_nn_mw = 3257.0,
                                              double reference_ns_mw = 1811.0) {
    surface.validate();
    const std::size_t ref_cell = surface.cell_index(surface.grid_nn.nearest(reference_nn_mw),
                                                    surface.grid_ns.nearest(reference_ns_mw));
    std::vector<OptimumRow> rows;
    for (std::size_t s = 0; s < surface.scenarios.size(); ++s) {
        const SurfaceLayer& layer = surface.layers[s];
        std::size_t best = 0;
        double best_nn = surface.grid_nn.value(0);
        double best_ns = surface.grid_ns.value(0);
        for (std::size_t cell = 1; cell < surface.n_cells(); ++cell) {
            const double nn = surface.grid_nn.value(cell / surface.grid_ns.points());
            const double ns = surface.grid_ns.value(cell % surface.grid_ns.points());
            const double a = layer.expected_penalty[cell];
            const double b = layer.expected_penalty[best];
            const bool better =
                a < b || (a == b && (nn + ns < best_nn + best_ns ||
                                     (nn + ns == best_nn + best_ns && nn < best_nn)));
            if (better) {
                best = cell;
                best_nn = nn;
                best_ns = ns;
            }
        }
        OptimumRow row;
        row.scenario = surface.scenarios[s];
        row.nn_mw = best_nn;
        row.ns_mw = best_ns;
        row.expected_penalty = layer.expected_penalty[best];
        const SurfaceLayer& ref_layer =
            surface.has(dispatch::Scenario::no_flex) ? surface.layer(dispatch::Scenario::no_flex)
                                                     : layer;
        row.reference_penalty = ref_layer.expected_penalty[ref_cell];
        row.improvement =
            row.reference_penalty > 0.0 ? 1.0 - row.expected_penalty / row.reference_penalty : 0.0;
        rows.push_back(row);
    }
    return rows;
}

struct DominanceCell {
    double nn_mw = 0.0;
    double ns_mw = 0.0;
    dispatch::Scenario best = dispatch::Scenario::no_flex;
    dispatch::Scenario second_best = dispatch::Scenario::no_flex;
};

// Ranks scenarios per cell by expected penalty; exact ties fall back to the
// fixed scenario declaration order, which keeps the map deterministic.
inline std::vector<DominanceCell> dominance_map(const LossSurface& surface) {
    surface.validate();
    if (surface.scenarios.size() < 2)
        throw EmptySurface("dominance_map: need at least two scenarios");
    std::vector<DominanceCell> cells(surface.n_cells());
    std::vector<std::size_t> order(surface.scenarios.size());
    for (std::size_t cell = 0; cell < surface.n_cells(); ++cell) {
        for (std::size_t s = 0; s < order.size(); ++s) order[s] = s;
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return surface.layers[a].expected_penalty[cell] <
                   surface.layers[b].expected_penalty[cell];
        });
        DominanceCell& c = cells[cell];
        c.nn_mw = surface.grid_nn.value(cell / surface.grid_ns.points());
        c.ns_mw = surface.grid_ns.value(cell % surface.grid_ns.points());
        c.best = surface.scenarios[order[0]];
        c.second_best = surface.scenarios[order[1]];
    }
    return cells;
}

// Merged view over surfaces produced separately (for example one scenario per
// run); all inputs must share the exact grid.
inline LossSurface merge_surfaces(std::span<const LossSurface> parts) {
    if (parts.empty()) throw EmptySurface("merge_surfaces: nothing to merge");
    LossSurface merged = parts[0];
    for (std::size_t k = 1; k < parts.size(); ++k) {
        const LossSurface& p = parts[k];
        if (p.grid_nn.min_mw != merged.grid_nn.min_mw || p.grid_nn.max_mw != merged.grid_nn.max_mw ||
            p.grid_nn.step_mw != merged.grid_nn.step_mw ||
            p.grid_ns.min_mw != merged.grid_ns.min_mw || p.grid_ns.max_mw != merged.grid_ns.max_mw ||
            p.grid_ns.step_mw != merged.grid_ns.step_mw)
            throw GridMismatch("merge_surfaces: grids differ");
        for (std::size_t s = 0; s < p.scenarios.size(); ++s) {
            if (merged.has(p.scenarios[s]))
                throw GridMismatch(std::string("merge_surfaces: duplicate scenario ") +
                                   dispatch::to_string(p.scenarios[s]));
            merged.scenarios.push_back(p.scenarios[s]);
            merged.layers.push_back(p.layers[s]);
        }
    }
    merged.validate();
    return merged;
}

struct SensitivitySpec {
    enum class Factor { demand_joint, demand_node, transmission, storage, charging };

    Factor factor = Factor::transmission;
    std::vector<double> multipliers;
    std::size_t node = 0; // demand_node only

    void validate() const {
        if (multipliers.empty())
            throw ShapeMismatch("SensitivitySpec: no multipliers");
        for (double m : multipliers)
            if (!(m > 0.0)) throw RangeViolation("SensitivitySpec: multipliers must be positive");
        if (node > 1)
            throw RangeViolation("SensitivitySpec: node selector must be 0 or 1");
    }
};

inline const char* to_string(SensitivitySpec::Factor f) {
    switch (f) {
        case SensitivitySpec::Factor::demand_joint: return "demand_joint";
        case SensitivitySpec::Factor::demand_node: return "demand_node";
        case SensitivitySpec::Factor::transmission: return "transmission";
        case SensitivitySpec::Factor::storage: return "storage";
        case SensitivitySpec::Factor::charging: return "charging";
    }
    return "?";
}

inline SensitivitySpec::Factor factor_from_string(const std::string& name) {
    using Factor = SensitivitySpec::Factor;
    for (Factor f : {Factor::demand_joint, Factor::demand_node, Factor::transmission,
                     Factor::storage, Factor::charging})
        if (name == to_string(f)) return f;
    throw ParseError("unknown sensitivity factor '" + name + "'");
}

struct SensitivityRow {
    SensitivitySpec::Factor factor = SensitivitySpec::Factor::transmission;
    double multiplier = 1.0;
    dispatch::Scenario scenario = dispatch::Scenario::no_flex;
    double opt_nn_mw = 0.0;
    double opt_ns_mw = 0.0;
    double expected_penalty = 0.0;
    double delta_vs_base = 0.0;
    std::array<double, 2> penalty_per_node{0.0, 0.0};
};

// Appendix-style what-if table. Flexibility factors re-run the whole sweep
// with the scaled FlexSpec and report the moved optimum; demand factors keep
// the reference plan fixed and report the penalty change there. Common random
// numbers make a multiplier of exactly 1.0 a strict no-op.
inline std::vector<SensitivityRow> sensitivity(const SweepConfig& config,
                                               std::span<const SensitivitySpec> specs,
                                               const wind::WindModelParams& weather,
                                               const demand::DemandModelParams& demand_params) {
    config.validate();
    for (const auto& spec : specs) spec.validate();

    const std::vector<Realization> realizations = make_realizations(
        weather, demand_params, config.coverage_share, config.n_realizations, config.master_seed);
    SweepConfig base_config = config;
    base_config.checkpoint_path.clear();
    const LossSurface base_surface = sweep_precomputed(base_config, realizations);
    const std::vector<OptimumRow> base_optima =
        argmin_surface(base_surface, config.reference_nn_mw, config.reference_ns_mw);

    dispatch::CapacityPlan reference_plan;
    reference_plan.wind_mw = {
        config.grid_nn.value(config.grid_nn.nearest(config.reference_nn_mw)),
        config.grid_ns.value(config.grid_ns.nearest(config.reference_ns_mw))};

    std::vector<CellResult> reference_base(config.scenarios.size());
    for (std::size_t s = 0; s < config.scenarios.size(); ++s)
        reference_base[s] = evaluate_cell(reference_plan, config.base_flex, config.scenarios[s],
                                          realizations);

    std::vector<SensitivityRow> rows;
    for (const auto& spec : specs) {
        for (double m : spec.multipliers) {
            using Factor = SensitivitySpec::Factor;
            if (spec.factor == Factor::demand_joint || spec.factor == Factor::demand_node) {
                std::array<double, 2> scale{1.0, 1.0};
                if (spec.factor == Factor::demand_joint)
                    scale = {m, m};
                else
                    scale[spec.node] = m;
                for (std::size_t s = 0; s < config.scenarios.size(); ++s) {
                    const CellResult res = evaluate_cell(reference_plan, config.base_flex,
                                                         config.scenarios[s], realizations, scale);
                    SensitivityRow row;
                    row.factor = spec.factor;
                    row.multiplier = m;
                    row.scenario = config.scenarios[s];
                    row.opt_nn_mw = reference_plan.wind_mw[0];
                    row.opt_ns_mw = reference_plan.wind_mw[1];
                    row.expected_penalty = res.expected_penalty;
                    row.delta_vs_base = res.expected_penalty - reference_base[s].expected_penalty;
                    row.penalty_per_node = {res.penalty_nn, res.penalty_ns};
                    rows.push_back(row);
                }
                continue;
            }

            SweepConfig varied = base_config;
            switch (spec.factor) {
                case Factor::transmission:
                    varied.base_flex.transmission_mw *= m;
                    break;
                case Factor::storage:
                    for (double& v : varied.base_flex.storage_energy_mwh) v *= m;
                    break;
                case Factor::charging:
                    for (double& v : varied.base_flex.charge_mw) v *= m;
                    for (double& v : varied.base_flex.discharge_mw) v *= m;
                    break;
                default:
                    break;
            }
            const LossSurface varied_surface = sweep_precomputed(varied, realizations);
            const std::vector<OptimumRow> optima =
                argmin_surface(varied_surface, config.reference_nn_mw, config.reference_ns_mw);
            for (std::size_t s = 0; s < optima.size(); ++s) {
                const OptimumRow& opt = optima[s];
                const std::size_t cell =
                    varied_surface.cell_index(varied_surface.grid_nn.nearest(opt.nn_mw),
                                              varied_surface.grid_ns.nearest(opt.ns_mw));
                SensitivityRow row;
                row.factor = spec.factor;
                row.multiplier = m;
                row.scenario = opt.scenario;
                row.opt_nn_mw = opt.nn_mw;
                row.opt_ns_mw = opt.ns_mw;
                row.expected_penalty = opt.expected_penalty;
                row.delta_vs_base = opt.expected_penalty - base_optima[s].expected_penalty;
                row.penalty_per_node = {varied_surface.layers[s].penalty_nn[cell],
                                        varied_surface.layers[s].penalty_ns[cell]};
                rows.push_back(row);
            }
        }
    }
    return rows;
}

} // namespace windflex::sweep
