// Simulates one year of capacity factors, temperatures, and load with the
// shipped model parameters and prints monthly summaries. A quick way to see
// what the generators produce without touching any files.

#include "windflex/windflex.hpp"

#include <cstdio>

using namespace windflex;

int main() {
    const wind::WindModelParams weather = defaults::default_wind_params();
    const demand::DemandModelParams dem = defaults::default_demand_params();
    const io::ProjectConfig project = defaults::shipped_project_config();

    const sweep::Realization real =
        sweep::make_realization(weather, dem, project.coverage_share, project.master_seed, 0);

    std::printf("one simulated year, realization 0, seed %llu\n",
                static_cast<unsigned long long>(project.master_seed));
    std::printf("%5s  %8s %8s  %10s %10s\n", "month", "cf NO-N", "cf NO-S", "load NO-N",
                "load NO-S");

    static const int days_in_month[12] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    std::size_t day = 0;
    for (int m = 0; m < 12; ++m) {
        double cf[2] = {0.0, 0.0};
        double load[2] = {0.0, 0.0};
        for (int d = 0; d < days_in_month[m]; ++d, ++day) {
            for (int i = 0; i < 2; ++i) {
                cf[i] += real.capacity_factor(day, i);
                load[i] += real.demand_mw(day, i);
            }
        }
        const double n = days_in_month[m];
        std::printf("%5d  %8.3f %8.3f  %10.1f %10.1f\n", m + 1, cf[0] / n, cf[1] / n, load[0] / n,
                    load[1] / n);
    }

    const std::vector<double> cf0 = real.capacity_factor.column(0);
    const std::vector<double> cf1 = real.capacity_factor.column(1);
    std::printf("\nannual capacity factor: %.3f / %.3f, cross-correlation %.3f\n", mean(cf0),
                mean(cf1), correlation(cf0, cf1));
    return 0;
}
