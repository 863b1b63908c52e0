#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <vector>

#include "windflex/errors.hpp"
#include "windflex/stats.hpp"

namespace windflex {

// Single-harmonic seasonal profile with a fixed 365-day period:
// s(t) = a + b sin(2 pi t / 365) + c cos(2 pi t / 365).
struct SeasonalityParams {
    double a = 0.0;
    double b = 0.0;
    double c = 0.0;
};

inline double seasonal_value(const SeasonalityParams& p, int day_of_year) {
    const double w = 2.0 * std::numbers::pi * static_cast<double>(day_of_year) / 365.0;
    return p.a + p.b * std::sin(w) + p.c * std::cos(w);
}

// True iff s(t) > 0 on every day 1..365 (required wherever the profile
// multiplies a nonnegative latent state inside an exponential).
inline bool seasonality_positive(const SeasonalityParams& p) {
    for (int day = 1; day <= 365; ++day)
        if (seasonal_value(p, day) <= 0.0) return false;
    return true;
}

// Least-squares fit of the single-harmonic profile. Requires at least two
// full years so the harmonic is identified against noise.
inline SeasonalityParams fit_seasonality(std::span<const double> z,
                                         std::span<const int> day_of_year,
                                         bool require_positive = true) {
    if (z.size() != day_of_year.size())
        throw ShapeMismatch("fit_seasonality: series and day index lengths differ");
    if (z.size() < 2 * 365)
        throw InsufficientData("fit_seasonality: need at least two years of daily data, got " +
                               std::to_string(z.size()));
    for (double v : z)
        if (!std::isfinite(v)) throw DomainError("fit_seasonality: non-finite observation");

    Matrix design(z.size(), 3);
    for (std::size_t i = 0; i < z.size(); ++i) {
        const double w = 2.0 * std::numbers::pi * static_cast<double>(day_of_year[i]) / 365.0;
        design(i, 0) = 1.0;
        design(i, 1) = std::sin(w);
        design(i, 2) = std::cos(w);
    }
    const std::vector<double> beta = ols(design, z);
    SeasonalityParams p{beta[0], beta[1], beta[2]};
    if (require_positive && !seasonality_positive(p))
        throw NonPositiveSeasonality("fit_seasonality: fitted profile is nonpositive somewhere");
    return p;
}

} // namespace windflex
