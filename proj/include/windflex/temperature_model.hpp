#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "windflex/common.hpp"
#include "windflex/errors.hpp"
#include "windflex/rng.hpp"
#include "windflex/seasonality.hpp"
#include "windflex/stats.hpp"

namespace windflex::demand {

struct TemperatureNodeParams {
    SeasonalityParams seasonal_mean; // deg C
    std::array<double, 3> ar_coeffs{0.0, 0.0, 0.0};
    double innovation_std = 0.0; // deg C
};

struct TemperatureModelParams {
    std::vector<std::string> nodes;
    std::vector<TemperatureNodeParams> node_params;

    void validate() const {
        if (nodes.size() != node_params.size())
            throw ShapeMismatch("TemperatureModelParams: node count mismatch");
        for (const auto& p : node_params) {
            if (p.innovation_std < 0.0)
                throw RangeViolation("TemperatureModelParams: innovation_std must be >= 0");
            if (!ar_is_stationary(p.ar_coeffs))
                throw NonStationaryFit("TemperatureModelParams: AR(3) roots inside unit circle");
        }
    }
};

struct TemperatureSeries {
    std::vector<std::string> nodes;
    Matrix values; // T x d, deg C
    std::vector<int> day_of_year;

    void validate() const {
        if (values.cols() != nodes.size())
            throw ShapeMismatch("TemperatureSeries: node count != columns");
        if (values.rows() != day_of_year.size())
            throw ShapeMismatch("TemperatureSeries: day index length != rows");
    }
};

// Fits, per node, a single-harmonic seasonal mean by least squares and an
// AR(3) on the deseasonalised residuals. A residual series with (numerically)
// zero variance short-circuits to zero AR coefficients and zero innovation
// noise rather than feeding a singular system to the solver.
inline TemperatureModelParams fit_temperature_model(const TemperatureSeries& temps) {
    temps.validate();
    const std::size_t n = temps.values.rows();
    const std::size_t d = temps.values.cols();
    if (n < 3650)
        throw InsufficientData("fit_temperature_model: need at least 10 years (3650 days), got " +
                               std::to_string(n));

    TemperatureModelParams model;
    model.nodes = temps.nodes;
    for (std::size_t i = 0; i < d; ++i) {
        TemperatureNodeParams p;
        const std::vector<double> col = temps.values.column(i);
        p.seasonal_mean = fit_seasonality(col, temps.day_of_year, /*require_positive=*/false);

        std::vector<double> resid(n);
        for (std::size_t t = 0; t < n; ++t)
            resid[t] = col[t] - seasonal_value(p.seasonal_mean, temps.day_of_year[t]);

        const double resid_var = variance(resid);
        if (resid_var < 1e-18) {
            p.ar_coeffs = {0.0, 0.0, 0.0};
            p.innovation_std = std::sqrt(std::max(resid_var, 0.0));
            model.node_params.push_back(p);
            continue;
        }

        // OLS of resid(t) on its three lags, no intercept.
        const std::size_t m = n - 3;
        Matrix design(m, 3);
        std::vector<double> target(m);
        for (std::size_t t = 0; t < m; ++t) {
            design(t, 0) = resid[t + 2];
            design(t, 1) = resid[t + 1];
            design(t, 2) = resid[t];
            target[t] = resid[t + 3];
        }
        const std::vector<double> beta = ols(design, target);
        p.ar_coeffs = {beta[0], beta[1], beta[2]};
        if (!ar_is_stationary(p.ar_coeffs))
            throw NonStationaryFit("fit_temperature_model: fitted AR(3) is nonstationary for node " +
                                   temps.nodes[i]);

        KahanSum sq;
        for (std::size_t t = 0; t < m; ++t) {
            const double pred =
                beta[0] * design(t, 0) + beta[1] * design(t, 1) + beta[2] * design(t, 2);
            const double e = target[t] - pred;
            sq.add(e * e);
        }
        p.innovation_std = std::sqrt(sq.value() / static_cast<double>(m));
        model.node_params.push_back(p);
    }
    return model;
}

// Simulates n_years independent 365-day years: per year the anomaly AR(3)
// restarts at zero and a burn-in is discarded before recording, then the
// seasonal mean is added back. One shared stream, node-major draw order
// within each step.
inline TemperatureSeries simulate_temperature(const TemperatureModelParams& params,
                                              std::size_t n_years, RngStream& stream,
                                              std::size_t burn_in = 200) {
    params.validate();
    if (n_years < 1)
        throw RangeViolation("simulate_temperature: n_years must be >= 1");
    const std::size_t d = params.node_params.size();

    TemperatureSeries out;
    out.nodes = params.nodes;
    out.values = Matrix(n_years * 365, d);
    out.day_of_year.resize(n_years * 365);

    std::vector<std::array<double, 3>> hist(d); // y(t-1), y(t-2), y(t-3)
    std::vector<double> anomaly(d);
    for (std::size_t year = 0; year < n_years; ++year) {
        for (auto& h : hist) h = {0.0, 0.0, 0.0};
        for (std::size_t step = 0; step < burn_in + 365; ++step) {
            for (std::size_t i = 0; i < d; ++i) {
                const auto& p = params.node_params[i];
                const double y = p.ar_coeffs[0] * hist[i][0] + p.ar_coeffs[1] * hist[i][1] +
                                 p.ar_coeffs[2] * hist[i][2] +
                                 stream.normal(0.0, p.innovation_std);
                hist[i] = {y, hist[i][0], hist[i][1]};
                anomaly[i] = y;
            }
            if (step >= burn_in) {
                const std::size_t t = year * 365 + (step - burn_in);
                const int day = static_cast<int>(step - burn_in) + 1;
                out.day_of_year[t] = day;
                for (std::size_t i = 0; i < d; ++i)
                    out.values(t, i) =
                        seasonal_value(params.node_params[i].seasonal_mean, day) + anomaly[i];
            }
        }
    }
    return out;
}

} // namespace windflex::demand
