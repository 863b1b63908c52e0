#pragma once

#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "windflex/errors.hpp"
#include "windflex/load_model.hpp"
#include "windflex/temperature_model.hpp"
#include "windflex/wind_model.hpp"

namespace windflex::io {

namespace detail {

inline nlohmann::json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in.is_open()) throw IoError("cannot open " + path);
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(path + ": " + e.what());
    }
}

inline void save_json(const std::string& path, const nlohmann::json& j) {
    std::ofstream out(path, std::ios::trunc);
    if (!out.is_open()) throw IoError("cannot write " + path);
    out << j.dump(2) << '\n';
}

template <typename T>
T get(const nlohmann::json& j, const std::string& key, const std::string& path) {
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(path + ": field '" + key + "': " + e.what());
    }
}

} // namespace detail

inline wind::WindModelParams read_wind_params(const std::string& path) {
    const nlohmann::json j = detail::load_json(path);
    wind::WindModelParams params;
    for (const auto& s : detail::get<std::vector<nlohmann::json>>(j, "seasonality", path)) {
        SeasonalityParams sp;
        sp.a = detail::get<double>(s, "a", path);
        sp.b = detail::get<double>(s, "b", path);
        sp.c = detail::get<double>(s, "c", path);
        params.seasonality.push_back(sp);
    }
    params.ou.lambda = detail::get<std::vector<double>>(j, "lambda", path);
    params.ou.dims = params.ou.lambda.size();
    const std::vector<double> sigma_flat = detail::get<std::vector<double>>(j, "sigma", path);
    if (sigma_flat.size() != params.ou.dims * params.ou.dims)
        throw ParseError(path + ": field 'sigma': expected " +
                         std::to_string(params.ou.dims * params.ou.dims) +
                         " row-major entries, got " + std::to_string(sigma_flat.size()));
    params.ou.sigma = Matrix(params.ou.dims, params.ou.dims);
    params.ou.sigma.data() = sigma_flat;
    params.ou.jump_intensity = detail::get<std::vector<double>>(j, "jump_intensity", path);
    params.ou.jump_mean = detail::get<std::vector<double>>(j, "jump_mean", path);
    try {
        params.validate();
    } catch (const Error& e) {
        throw ParseError(path + ": " + e.what());
    }
    return params;
}

inline void write_wind_params(const std::string& path, const wind::WindModelParams& params) {
    params.validate();
    nlohmann::json j;
    j["seasonality"] = nlohmann::json::array();
    for (const auto& s : params.seasonality)
        j["seasonality"].push_back({{"a", s.a}, {"b", s.b}, {"c", s.c}});
    j["lambda"] = params.ou.lambda;
    j["sigma"] = params.ou.sigma.data(); // row-major
    j["jump_intensity"] = params.ou.jump_intensity;
    j["jump_mean"] = params.ou.jump_mean;
    detail::save_json(path, j);
}

inline demand::DemandModelParams read_demand_params(const std::string& path) {
    const nlohmann::json j = detail::load_json(path);
    demand::DemandModelParams params;

    const nlohmann::json jt = detail::get<nlohmann::json>(j, "temperature", path);
    params.temperature.nodes = detail::get<std::vector<std::string>>(jt, "nodes", path);
    const auto seasonal = detail::get<std::vector<nlohmann::json>>(jt, "seasonality", path);
    const auto ar = detail::get<std::vector<std::vector<double>>>(jt, "ar_coeffs", path);
    const auto innov = detail::get<std::vector<double>>(jt, "innovation_std", path);
    if (seasonal.size() != params.temperature.nodes.size() ||
        ar.size() != params.temperature.nodes.size() ||
        innov.size() != params.temperature.nodes.size())
        throw ParseError(path + ": temperature sections disagree on node count");
    for (std::size_t i = 0; i < params.temperature.nodes.size(); ++i) {
        demand::TemperatureNodeParams p;
        p.seasonal_mean.a = detail::get<double>(seasonal[i], "a", path);
        p.seasonal_mean.b = detail::get<double>(seasonal[i], "b", path);
        p.seasonal_mean.c = detail::get<double>(seasonal[i], "c", path);
        if (ar[i].size() != 3)
            throw ParseError(path + ": ar_coeffs entries must have exactly 3 values");
        p.ar_coeffs = {ar[i][0], ar[i][1], ar[i][2]};
        p.innovation_std = innov[i];
        params.temperature.node_params.push_back(p);
    }

    const nlohmann::json jl = detail::get<nlohmann::json>(j, "load_regression", path);
    params.load_regression.nodes = params.temperature.nodes;
    const auto beta_wd = detail::get<std::vector<std::vector<double>>>(jl, "beta_weekday", path);
    const auto beta_h = detail::get<std::vector<double>>(jl, "beta_heating", path);
    const auto beta_c = detail::get<std::vector<double>>(jl, "beta_cooling", path);
    const double threshold = detail::get<double>(jl, "threshold_degc", path);
    std::vector<bool> insignificant(params.temperature.nodes.size(), false);
    if (jl.contains("cooling_insignificant"))
        insignificant = detail::get<std::vector<bool>>(jl, "cooling_insignificant", path);
    if (beta_wd.size() != params.temperature.nodes.size() ||
        beta_h.size() != params.temperature.nodes.size() ||
        beta_c.size() != params.temperature.nodes.size() ||
        insignificant.size() != params.temperature.nodes.size())
        throw ParseError(path + ": load_regression sections disagree on node count");
    for (std::size_t i = 0; i < params.temperature.nodes.size(); ++i) {
        demand::LoadNodeRegression p;
        if (beta_wd[i].size() != 7)
            throw ParseError(path + ": beta_weekday entries must have exactly 7 values");
        p.beta_weekday = beta_wd[i];
        p.beta_heating = beta_h[i];
        p.beta_cooling = beta_c[i];
        p.threshold = threshold;
        p.cooling_insignificant = insignificant[i];
        params.load_regression.node_params.push_back(p);
    }
    try {
        params.validate();
    } catch (const Error& e) {
        throw ParseError(path + ": " + e.what());
    }
    return params;
}

inline void write_demand_params(const std::string& path,
                                const demand::DemandModelParams& params) {
    params.validate();
    nlohmann::json jt;
    jt["nodes"] = params.temperature.nodes;
    jt["seasonality"] = nlohmann::json::array();
    jt["ar_coeffs"] = nlohmann::json::array();
    jt["innovation_std"] = nlohmann::json::array();
    for (const auto& p : params.temperature.node_params) {
        jt["seasonality"].push_back(
            {{"a", p.seasonal_mean.a}, {"b", p.seasonal_mean.b}, {"c", p.seasonal_mean.c}});
        jt["ar_coeffs"].push_back(std::vector<double>{p.ar_coeffs[0], p.ar_coeffs[1],
                                                      p.ar_coeffs[2]});
        jt["innovation_std"].push_back(p.innovation_std);
    }

    nlohmann::json jl;
    jl["beta_weekday"] = nlohmann::json::array();
    jl["beta_heating"] = nlohmann::json::array();
    jl["beta_cooling"] = nlohmann::json::array();
    jl["cooling_insignificant"] = nlohmann::json::array();
    jl["threshold_degc"] = params.load_regression.node_params.empty()
                               ? 15.5
                               : params.load_regression.node_params[0].threshold;
    for (const auto& p : params.load_regression.node_params) {
        jl["beta_weekday"].push_back(p.beta_weekday);
        jl["beta_heating"].push_back(p.beta_heating);
        jl["beta_cooling"].push_back(p.beta_cooling);
        jl["cooling_insignificant"].push_back(p.cooling_insignificant);
    }

    nlohmann::json j;
    j["temperature"] = jt;
    j["load_regression"] = jl;
    detail::save_json(path, j);
}

} // namespace windflex::io
