#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "windflex/common.hpp"
#include "windflex/errors.hpp"

namespace windflex::dispatch {

enum class Scenario { no_flex, trans, stor, full_flex };

inline constexpr Scenario all_scenarios[] = {Scenario::no_flex, Scenario::trans, Scenario::stor,
                                             Scenario::full_flex};

inline const char* to_string(Scenario s) {
    switch (s) {
        case Scenario::no_flex: return "no-flex";
        case Scenario::trans: return "trans";
        case Scenario::stor: return "stor";
        case Scenario::full_flex: return "full-flex";
    }
    return "?";
}

inline Scenario scenario_from_string(const std::string& name) {
    for (Scenario s : all_scenarios)
        if (name == to_string(s)) return s;
    throw ParseError("unknown scenario '" + name +
                     "' (expected no-flex, trans, stor or full-flex)");
}

struct CapacityPlan {
    std::vector<double> wind_mw;

    void validate() const {
        if (wind_mw.empty())
            throw ShapeMismatch("CapacityPlan: empty");
        for (double v : wind_mw)
            if (v < 0.0) throw RangeViolation("CapacityPlan: wind_mw must be nonnegative");
    }
};

struct FlexSpec {
    double transmission_mw = 0.0;
    std::vector<double> storage_energy_mwh;
    std::vector<double> charge_mw;
    std::vector<double> discharge_mw;
    double eta_charge = 0.75;
    double eta_discharge = 0.90;
    double step_hours = 24.0;

    void validate(std::size_t n_nodes) const {
        if (transmission_mw < 0.0)
            throw RangeViolation("FlexSpec: transmission_mw must be nonnegative");
        if (storage_energy_mwh.size() != n_nodes || charge_mw.size() != n_nodes ||
            discharge_mw.size() != n_nodes)
            throw ShapeMismatch("FlexSpec: per-node vectors must have one entry per node");
        for (std::size_t i = 0; i < n_nodes; ++i)
            if (storage_energy_mwh[i] < 0.0 || charge_mw[i] < 0.0 || discharge_mw[i] < 0.0)
                throw RangeViolation("FlexSpec: capacities must be nonnegative");
        if (!(eta_charge > 0.0 && eta_charge <= 1.0) ||
            !(eta_discharge > 0.0 && eta_discharge <= 1.0))
            throw RangeViolation("FlexSpec: efficiencies must lie in (0,1]");
        if (!(step_hours > 0.0))
            throw RangeViolation("FlexSpec: step_hours must be positive");
    }
};

struct DispatchTrace {
    Scenario scenario = Scenario::no_flex;
    Matrix production;    // T x d, MW
    Matrix demand;        // T x d, MW
    Matrix import_mw;     // T x d
    Matrix export_mw;     // T x d
    Matrix charge_mw;     // T x d
    Matrix discharge_mw;  // T x d
    Matrix storage_level; // T x d, MWh, end-of-step
    Matrix loss;          // T x d, squared residual (MW^2)
};

// Sequential per-step dispatcher holding the storage state. One instance
// serves one realization; steps must be fed in order. The same stage helpers
// back every scenario so the degenerate-cap reductions (zero line == stor,
// zero storage == trans, zero everything == no-flex) hold bit for bit.
class DispatchEngine {
public:
    DispatchEngine(const FlexSpec& flex, Scenario scenario, std::size_t n_nodes)
        : flex_(flex), scenario_(scenario), d_(n_nodes) {
        if (n_nodes == 0)
            throw ShapeMismatch("DispatchEngine: need at least one node");
        if ((scenario == Scenario::trans || scenario == Scenario::full_flex) && n_nodes != 2)
            throw ShapeMismatch("DispatchEngine: line scenarios require exactly two nodes");
        if (scenario != Scenario::no_flex)
            flex_.validate(n_nodes);
        level_.assign(d_, 0.0);
        imp_.assign(d_, 0.0);
        exp_.assign(d_, 0.0);
        ch_.assign(d_, 0.0);
        dis_.assign(d_, 0.0);
        residual_.assign(d_, 0.0);
    }

    void reset() { std::fill(level_.begin(), level_.end(), 0.0); }

    void step(std::span<const double> production, std::span<const double> demand) {
        if (production.size() != d_ || demand.size() != d_)
            throw ShapeMismatch("DispatchEngine: step width != node count");
        std::fill(imp_.begin(), imp_.end(), 0.0);
        std::fill(exp_.begin(), exp_.end(), 0.0);
        std::fill(ch_.begin(), ch_.end(), 0.0);
        std::fill(dis_.begin(), dis_.end(), 0.0);
        for (std::size_t i = 0; i < d_; ++i) residual_[i] = production[i] - demand[i];

        switch (scenario_) {
            case Scenario::no_flex:
                break;
            case Scenario::trans:
                line_transfer(flex_.transmission_mw);
                break;
            case Scenario::stor:
                local_storage();
                break;
            case Scenario::full_flex: {
                double line = flex_.transmission_mw;
                line -= line_transfer(line);
                local_storage();
                for (std::size_t i = 0; i < d_ && line > 0.0; ++i)
                    line -= cross_charge(i, 1 - i, line);
                for (std::size_t i = 0; i < d_ && line > 0.0; ++i)
                    line -= remote_discharge(i, 1 - i, line);
                break;
            }
        }
    }

    std::span<const double> residual() const { return residual_; }
    std::span<const double> import_mw() const { return imp_; }
    std::span<const double> export_mw() const { return exp_; }
    std::span<const double> charge_mw() const { return ch_; }
    std::span<const double> discharge_mw() const { return dis_; }
    std::span<const double> storage_level() const { return level_; }
    std::size_t nodes() const { return d_; }

private:
    // Surplus node sends min(surplus, deficit, budget) to the deficit node.
    // Returns the scheduled flow.
    double line_transfer(double budget) {
        if (budget <= 0.0) return 0.0;
        std::size_t from, to;
        if (residual_[0] > 0.0 && residual_[1] < 0.0) {
            from = 0;
            to = 1;
        } else if (residual_[1] > 0.0 && residual_[0] < 0.0) {
            from = 1;
            to = 0;
        } else {
            return 0.0;
        }
        const double f = std::min({residual_[from], -residual_[to], budget});
        exp_[from] += f;
        imp_[to] += f;
        residual_[from] -= f;
        residual_[to] += f;
        return f;
    }

    // Largest admissible charge (MW) into node i's storage right now, never
    // exceeding `want`. Bounded by the per-step charge cap already used and
    // by remaining headroom.
    double charge_limit(std::size_t i, double want) const {
        const double headroom_mw = (flex_.storage_energy_mwh[i] - level_[i]) /
                                   (flex_.eta_charge * flex_.step_hours);
        const double c = std::min({want, flex_.charge_mw[i] - ch_[i], headroom_mw});
        return std::max(c, 0.0);
    }

    double discharge_limit(std::size_t i, double want) const {
        const double available_mw =
            flex_.eta_discharge * level_[i] / flex_.step_hours;
        const double x = std::min({want, flex_.discharge_mw[i] - dis_[i], available_mw});
        return std::max(x, 0.0);
    }

    void apply_charge(std::size_t i, double amount) {
        ch_[i] += amount;
        const double stored = std::min(flex_.eta_charge * amount * flex_.step_hours,
                                       flex_.storage_energy_mwh[i] - level_[i]);
        level_[i] = std::min(level_[i] + stored, flex_.storage_energy_mwh[i]);
    }

    void apply_discharge(std::size_t i, double amount) {
        dis_[i] += amount;
        const double drained =
            std::min(amount * flex_.step_hours / flex_.eta_discharge, level_[i]);
        level_[i] = std::max(level_[i] - drained, 0.0);
    }

    // Each node charges its own surplus or discharges against its own
    // deficit, independently of the other node.
    void local_storage() {
        for (std::size_t i = 0; i < d_; ++i) {
            if (residual_[i] > 0.0) {
                const double c = charge_limit(i, residual_[i]);
                if (c > 0.0) {
                    apply_charge(i, c);
                    residual_[i] -= c;
                }
            } else if (residual_[i] < 0.0) {
                const double x = discharge_limit(i, -residual_[i]);
                if (x > 0.0) {
                    apply_discharge(i, x);
                    residual_[i] += x;
                }
            }
        }
    }

    // Remaining surplus at `from` charges the storage at `to` through the
    // line. Never runs toward a node that still holds surplus of its own: its
    // store is saturated for this step, and rounding residue in the headroom
    // must not schedule a dust flow against the one-direction-per-node rule.
    // Returns the scheduled flow.
    double cross_charge(std::size_t from, std::size_t to, double budget) {
        if (residual_[from] <= 0.0 || residual_[to] > 0.0) return 0.0;
        const double c = charge_limit(to, std::min(residual_[from], budget));
        if (c <= 0.0) return 0.0;
        apply_charge(to, c);
        exp_[from] += c;
        imp_[to] += c;
        residual_[from] -= c;
        return c;
    }

    // A node still in deficit pulls from the other node's storage through the
    // line; the discharging node exports what it releases. A source that is
    // itself still short never exports: its store is drained for this step,
    // and rounding residue in the level must not schedule a dust flow against
    // the one-direction-per-node rule. Returns the flow.
    double remote_discharge(std::size_t needy, std::size_t source, double budget) {
        if (residual_[needy] >= 0.0 || residual_[source] < 0.0) return 0.0;
        const double x = discharge_limit(source, std::min(-residual_[needy], budget));
        if (x <= 0.0) return 0.0;
        apply_discharge(source, x);
        exp_[source] += x;
        imp_[needy] += x;
        residual_[needy] += x;
        return x;
    }

    FlexSpec flex_;
    Scenario scenario_;
    std::size_t d_;
    std::vector<double> level_, imp_, exp_, ch_, dis_, residual_;
};

namespace detail {

inline void check_inputs(const Matrix& production, const Matrix& demand) {
    require_same_shape(production, demand, "dispatch: production vs demand");
    if (production.rows() == 0 || production.cols() == 0)
        throw ShapeMismatch("dispatch: empty input");
    for (std::size_t t = 0; t < production.rows(); ++t)
        for (std::size_t i = 0; i < production.cols(); ++i)
            if (production(t, i) < 0.0 || demand(t, i) < 0.0)
                throw RangeViolation("dispatch: production and demand must be nonnegative");
}

inline DispatchTrace run_trace(const Matrix& production, const Matrix& demand,
                               const FlexSpec& flex, Scenario scenario) {
    check_inputs(production, demand);
    const std::size_t n = production.rows();
    const std::size_t d = production.cols();
    DispatchEngine engine(flex, scenario, d);

    DispatchTrace trace;
    trace.scenario = scenario;
    trace.production = production;
    trace.demand = demand;
    trace.import_mw = Matrix(n, d);
    trace.export_mw = Matrix(n, d);
    trace.charge_mw = Matrix(n, d);
    trace.discharge_mw = Matrix(n, d);
    trace.storage_level = Matrix(n, d);
    trace.loss = Matrix(n, d);
    std::vector<double> p(d), dm(d);
    for (std::size_t t = 0; t < n; ++t) {
        for (std::size_t i = 0; i < d; ++i) {
            p[i] = production(t, i);
            dm[i] = demand(t, i);
        }
        engine.step(p, dm);
        for (std::size_t i = 0; i < d; ++i) {
            trace.import_mw(t, i) = engine.import_mw()[i];
            trace.export_mw(t, i) = engine.export_mw()[i];
            trace.charge_mw(t, i) = engine.charge_mw()[i];
            trace.discharge_mw(t, i) = engine.discharge_mw()[i];
            trace.storage_level(t, i) = engine.storage_level()[i];
            const double r = engine.residual()[i];
            trace.loss(t, i) = r * r;
        }
    }
    return trace;
}

} // namespace detail

inline DispatchTrace dispatch_no_flex(const Matrix& production, const Matrix& demand) {
    return detail::run_trace(production, demand, FlexSpec{}, Scenario::no_flex);
}

inline DispatchTrace dispatch_trans(const Matrix& production, const Matrix& demand,
                                    const FlexSpec& flex) {
    return detail::run_trace(production, demand, flex, Scenario::trans);
}

inline DispatchTrace dispatch_stor(const Matrix& production, const Matrix& demand,
                                   const FlexSpec& flex) {
    return detail::run_trace(production, demand, flex, Scenario::stor);
}

inline DispatchTrace dispatch_full_flex(const Matrix& production, const Matrix& demand,
                                        const FlexSpec& flex) {
    return detail::run_trace(production, demand, flex, Scenario::full_flex);
}

inline DispatchTrace run_dispatch(const Matrix& production, const Matrix& demand,
                                  const FlexSpec& flex, Scenario scenario) {
    return detail::run_trace(production, demand, flex, scenario);
}

struct PenaltyReport {
    std::vector<double> per_node;
    double total = 0.0;
};

// Sums per-node losses over one 365-step year.
inline PenaltyReport aggregate_penalty(const DispatchTrace& trace) {
    if (trace.loss.rows() != 365)
        throw WrongHorizon("aggregate_penalty: trace must cover exactly 365 steps, got " +
                           std::to_string(trace.loss.rows()));
    PenaltyReport report;
    report.per_node.assign(trace.loss.cols(), 0.0);
    KahanSum total;
    for (std::size_t i = 0; i < trace.loss.cols(); ++i) {
        KahanSum s;
        for (std::size_t t = 0; t < trace.loss.rows(); ++t) s.add(trace.loss(t, i));
        report.per_node[i] = s.value();
        total.add(s.value());
    }
    report.total = total.value();
    return report;
}

// Trace sanity: mutually exclusive flow directions, balanced line, caps and
// storage bounds respected. Throws RangeViolation on the first violation.
inline void validate_trace(const DispatchTrace& trace, const FlexSpec& flex,
                           double tol = 1e-9) {
    const std::size_t n = trace.loss.rows();
    const std::size_t d = trace.loss.cols();
    const bool has_storage = flex.storage_energy_mwh.size() == d;
    for (std::size_t t = 0; t < n; ++t) {
        double total_imp = 0.0, total_exp = 0.0;
        for (std::size_t i = 0; i < d; ++i) {
            const double imp = trace.import_mw(t, i);
            const double exp = trace.export_mw(t, i);
            const double ch = trace.charge_mw(t, i);
            const double dis = trace.discharge_mw(t, i);
            const double level = trace.storage_level(t, i);
            if (imp < 0.0 || exp < 0.0 || ch < 0.0 || dis < 0.0)
                throw RangeViolation("trace: negative flow at step " + std::to_string(t));
            if (imp > 0.0 && exp > 0.0)
                throw RangeViolation("trace: simultaneous import and export at step " +
                                     std::to_string(t));
            if (ch > 0.0 && dis > 0.0)
                throw RangeViolation("trace: simultaneous charge and discharge at step " +
                                     std::to_string(t));
            if (imp > flex.transmission_mw + tol || exp > flex.transmission_mw + tol)
                throw RangeViolation("trace: line cap exceeded at step " + std::to_string(t));
            if (has_storage) {
                if (ch > flex.charge_mw[i] + tol)
                    throw RangeViolation("trace: charge cap exceeded at step " +
                                         std::to_string(t));
                if (dis > flex.discharge_mw[i] + tol)
                    throw RangeViolation("trace: discharge cap exceeded at step " +
                                         std::to_string(t));
                if (level < -tol || level > flex.storage_energy_mwh[i] + tol)
                    throw RangeViolation("trace: storage level out of bounds at step " +
                                         std::to_string(t));
                const double prev = t == 0 ? 0.0 : trace.storage_level(t - 1, i);
                const double expected = prev + flex.eta_charge * ch * flex.step_hours -
                                        dis * flex.step_hours / flex.eta_discharge;
                if (std::abs(level - expected) > tol)
                    throw RangeViolation("trace: storage accounting violated at step " +
                                         std::to_string(t));
            }
            total_imp += imp;
            total_exp += exp;
        }
        if (std::abs(total_imp - total_exp) > tol)
            throw RangeViolation("trace: imports != exports at step " + std::to_string(t));
    }
}

} // namespace windflex::dispatch
