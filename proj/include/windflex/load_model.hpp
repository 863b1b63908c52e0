#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "windflex/common.hpp"
#include "windflex/errors.hpp"
#include "windflex/stats.hpp"
#include "windflex/temperature_model.hpp"

namespace windflex::demand {

enum class Weekday : int {
    monday = 0,
    tuesday,
    wednesday,
    thursday,
    friday,
    saturday,
    sunday
};

inline const char* weekday_name(Weekday w) {
    static constexpr const char* names[] = {"monday", "tuesday",  "wednesday", "thursday",
                                            "friday", "saturday", "sunday"};
    return names[static_cast<int>(w)];
}

struct Calendar {
    std::vector<Weekday> weekday;
    std::vector<bool> holiday; // holidays take the Sunday coefficient

    std::size_t size() const { return weekday.size(); }

    Weekday effective(std::size_t t) const {
        return holiday[t] ? Weekday::sunday : weekday[t];
    }

    void validate() const {
        if (holiday.size() != weekday.size())
            throw ShapeMismatch("Calendar: holiday flags length != weekday length");
    }
};

// Plain repeating week starting on start_weekday, no holidays unless flagged
// afterwards. Simulated years use this directly; ingested series build their
// calendar from real dates instead.
inline Calendar make_calendar(std::size_t n_days, Weekday start_weekday = Weekday::monday) {
    Calendar cal;
    cal.weekday.resize(n_days);
    cal.holiday.assign(n_days, false);
    for (std::size_t t = 0; t < n_days; ++t)
        cal.weekday[t] = static_cast<Weekday>((static_cast<int>(start_weekday) + t) % 7);
    return cal;
}

struct LoadNodeRegression {
    std::vector<double> beta_weekday = std::vector<double>(7, 0.0); // MW, Monday..Sunday
    double beta_heating = 0.0;  // MW per heating degree day
    double beta_cooling = 0.0;  // MW per cooling degree day
    double threshold = 15.5;    // deg C
    bool cooling_insignificant = false;
};

struct LoadRegressionParams {
    std::vector<std::string> nodes;
    std::vector<LoadNodeRegression> node_params;

    void validate() const {
        if (nodes.size() != node_params.size())
            throw ShapeMismatch("LoadRegressionParams: node count mismatch");
        for (const auto& p : node_params) {
            if (p.beta_weekday.size() != 7)
                throw ShapeMismatch("LoadRegressionParams: beta_weekday must have 7 entries");
            for (double b : p.beta_weekday)
                if (!(b > 0.0))
                    throw RangeViolation("LoadRegressionParams: weekday bases must be positive");
            if (p.beta_heating < 0.0)
                throw RangeViolation("LoadRegressionParams: beta_heating must be >= 0");
        }
    }
};

struct LoadSeries {
    std::vector<std::string> nodes;
    Matrix values; // T x d, MW daily average, >= 0
    Calendar calendar;
    double coverage_share = 1.0;
    std::size_t floored_count = 0; // steps where the regression went negative

    void validate() const {
        calendar.validate();
        if (values.cols() != nodes.size())
            throw ShapeMismatch("LoadSeries: node count != columns");
        if (values.rows() != calendar.size())
            throw ShapeMismatch("LoadSeries: calendar length != rows");
        for (std::size_t t = 0; t < values.rows(); ++t)
            for (std::size_t i = 0; i < values.cols(); ++i)
                if (values(t, i) < 0.0)
                    throw RangeViolation("LoadSeries: negative load");
    }
};

// The two halves of the demand side travel together: temperatures drive the
// regression, the regression produces load.
struct DemandModelParams {
    TemperatureModelParams temperature;
    LoadRegressionParams load_regression;

    void validate() const {
        temperature.validate();
        load_regression.validate();
        if (temperature.nodes != load_regression.nodes)
            throw ShapeMismatch("DemandModelParams: temperature and load node lists differ");
    }
};

inline double heating_degree_days(double temp, double threshold) {
    return std::max(threshold - temp, 0.0);
}

inline double cooling_degree_days(double temp, double threshold) {
    return std::max(temp - threshold, 0.0);
}

// Least squares of load on weekday indicators plus heating/cooling degree
// days, per node. If cooling is never active in the sample the column is
// dropped (it would be identically zero) and the coefficient reported as 0
// with the insignificance flag set.
inline LoadRegressionParams fit_load_regression(const Matrix& load,
                                                const TemperatureSeries& temps,
                                                const Calendar& calendar,
                                                double threshold = 15.5) {
    temps.validate();
    calendar.validate();
    require_same_shape(load, temps.values, "fit_load_regression: load vs temperatures");
    if (load.rows() != calendar.size())
        throw ShapeMismatch("fit_load_regression: calendar length != rows");
    const std::size_t n = load.rows();
    const std::size_t d = load.cols();
    if (n < 365)
        throw InsufficientData("fit_load_regression: need at least one year of data, got " +
                               std::to_string(n) + " days");

    std::vector<std::size_t> class_count(7, 0);
    for (std::size_t t = 0; t < n; ++t)
        ++class_count[static_cast<int>(calendar.effective(t))];
    for (int w = 0; w < 7; ++w)
        if (class_count[w] == 0)
            throw RankDeficient(std::string("fit_load_regression: no observations for ") +
                                weekday_name(static_cast<Weekday>(w)));

    LoadRegressionParams out;
    out.nodes = temps.nodes;
    for (std::size_t i = 0; i < d; ++i) {
        bool any_cooling = false;
        for (std::size_t t = 0; t < n; ++t)
            if (temps.values(t, i) > threshold) any_cooling = true;

        const std::size_t k = any_cooling ? 9 : 8;
        Matrix design(n, k);
        std::vector<double> target(n);
        for (std::size_t t = 0; t < n; ++t) {
            design(t, static_cast<int>(calendar.effective(t))) = 1.0;
            design(t, 7) = heating_degree_days(temps.values(t, i), threshold);
            if (any_cooling) design(t, 8) = cooling_degree_days(temps.values(t, i), threshold);
            target[t] = load(t, i);
        }
        const std::vector<double> beta = ols(design, target);

        LoadNodeRegression p;
        p.threshold = threshold;
        for (int w = 0; w < 7; ++w) p.beta_weekday[w] = beta[w];
        p.beta_heating = beta[7];
        p.beta_cooling = any_cooling ? beta[8] : 0.0;
        p.cooling_insignificant = !any_cooling;
        out.node_params.push_back(p);
    }
    return out;
}

// D_i(t) = share * (weekday base + heating beta * HDD + cooling beta * CDD),
// floored at zero. Deterministic given temperatures and calendar.
inline LoadSeries synthesize_load(const LoadRegressionParams& reg, const TemperatureSeries& temps,
                                  const Calendar& calendar, double coverage_share) {
    reg.validate();
    temps.validate();
    calendar.validate();
    if (!(coverage_share > 0.0 && coverage_share <= 1.0))
        throw RangeViolation("synthesize_load: coverage_share must lie in (0,1]");
    if (reg.node_params.size() != temps.values.cols())
        throw ShapeMismatch("synthesize_load: regression node count != temperature columns");
    if (temps.values.rows() != calendar.size())
        throw ShapeMismatch("synthesize_load: calendar length != temperature rows");

    LoadSeries out;
    out.nodes = temps.nodes;
    out.values = Matrix(temps.values.rows(), temps.values.cols());
    out.calendar = calendar;
    out.coverage_share = coverage_share;
    for (std::size_t t = 0; t < temps.values.rows(); ++t) {
        const int w = static_cast<int>(calendar.effective(t));
        for (std::size_t i = 0; i < temps.values.cols(); ++i) {
            const auto& p = reg.node_params[i];
            const double temp = temps.values(t, i);
            const double raw = p.beta_weekday[w] +
                               p.beta_heating * heating_degree_days(temp, p.threshold) +
                               p.beta_cooling * cooling_degree_days(temp, p.threshold);
            if (raw < 0.0) ++out.floored_count;
            out.values(t, i) = coverage_share * std::max(raw, 0.0);
        }
    }
    return out;
}

} // namespace windflex::demand
