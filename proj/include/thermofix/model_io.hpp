#pragma once

// =============================================================================
// Model serialization: JSON schema, validation on load
// =============================================================================
//
// Schema (all temperatures in the file are celsius; the in-memory model is
// kelvin):
//
//   {
//     "hotspots":        ["big0", ...],          N names
//     "resources":       ["little", ...],        M names
//     "A":               [[...], ...],           N rows of N
//     "B":               [[...], ...],           N rows of M
//     "leakage":         [{"V":..,"kappa1":..,"kappa2":..,
//                          "driving_hotspot":..,"active":..}, ...],  M entries
//     "domain_celsius":  [min, max],
//     "ambient_celsius": value,
//     "sample_period_s": value
//   }

#include <fstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "thermofix/model.hpp"

namespace thermofix {

namespace detail {

inline const nlohmann::json& require_key(const nlohmann::json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end()) throw std::runtime_error(std::string("model file missing key: ") + key);
    return *it;
}

inline Matrix parse_matrix(const nlohmann::json& j, const char* key, Eigen::Index cols_expected) {
    if (!j.is_array() || j.empty() || !j.front().is_array())
        throw std::runtime_error(std::string("model key ") + key + " must be an array of rows");
    const auto rows = static_cast<Eigen::Index>(j.size());
    const auto cols = static_cast<Eigen::Index>(j.front().size());
    if (cols_expected >= 0 && cols != cols_expected)
        throw std::runtime_error(std::string("model key ") + key + " has wrong column count");
    Matrix out(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        const auto& row = j[static_cast<std::size_t>(i)];
        if (static_cast<Eigen::Index>(row.size()) != cols)
            throw std::runtime_error(std::string("model key ") + key + " has ragged rows");
        for (Eigen::Index k = 0; k < cols; ++k)
            out(i, k) = row[static_cast<std::size_t>(k)].get<double>();
    }
    return out;
}

}  // namespace detail

[[nodiscard]] inline ThermalModel model_from_json(const nlohmann::json& j) {
    ThermalModel model;
    model.hotspot_names = detail::require_key(j, "hotspots").get<std::vector<std::string>>();
    model.resource_names = detail::require_key(j, "resources").get<std::vector<std::string>>();
    const auto n = static_cast<Eigen::Index>(model.hotspot_names.size());
    const auto m = static_cast<Eigen::Index>(model.resource_names.size());

    model.a = detail::parse_matrix(detail::require_key(j, "A"), "A", n);
    if (model.a.rows() != n) throw std::runtime_error("model key A has wrong row count");
    model.b = detail::parse_matrix(detail::require_key(j, "B"), "B", m);
    if (model.b.rows() != n) throw std::runtime_error("model key B has wrong row count");

    const auto& leak = detail::require_key(j, "leakage");
    if (static_cast<Eigen::Index>(leak.size()) != m)
        throw std::runtime_error("model key leakage must have one entry per resource");
    for (const auto& entry : leak) {
        LeakageParams p;
        p.v = detail::require_key(entry, "V").get<double>();
        p.kappa1 = detail::require_key(entry, "kappa1").get<double>();
        p.kappa2 = detail::require_key(entry, "kappa2").get<double>();
        p.driving_hotspot = detail::require_key(entry, "driving_hotspot").get<int>();
        p.active = detail::require_key(entry, "active").get<bool>();
        model.leakage.push_back(p);
    }

    const auto& dom = detail::require_key(j, "domain_celsius");
    if (!dom.is_array() || dom.size() != 2)
        throw std::runtime_error("model key domain_celsius must be [min, max]");
    model.t_min = to_kelvin(dom[0].get<double>());
    model.t_max = to_kelvin(dom[1].get<double>());
    model.ambient = to_kelvin(detail::require_key(j, "ambient_celsius").get<double>());
    model.sample_period = detail::require_key(j, "sample_period_s").get<double>();

    validate_model(model);
    return model;
}

/// Loads and validates a model file; throws naming the failed invariant.
[[nodiscard]] inline ThermalModel load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open model file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("model file is not valid JSON: " + path + " (" + e.what() + ")");
    }
    return model_from_json(j);
}

[[nodiscard]] inline nlohmann::ordered_json model_to_json(const ThermalModel& model) {
    nlohmann::ordered_json j;
    j["hotspots"] = model.hotspot_names;
    j["resources"] = model.resource_names;
    auto rows = [](const Matrix& mat) {
        std::vector<std::vector<double>> out;
        for (Eigen::Index i = 0; i < mat.rows(); ++i) {
            std::vector<double> row(static_cast<std::size_t>(mat.cols()));
            for (Eigen::Index k = 0; k < mat.cols(); ++k) row[static_cast<std::size_t>(k)] = mat(i, k);
            out.push_back(std::move(row));
        }
        return out;
    };
    j["A"] = rows(model.a);
    j["B"] = rows(model.b);
    j["leakage"] = nlohmann::ordered_json::array();
    for (const auto& p : model.leakage)
        j["leakage"].push_back({{"V", p.v},
                                {"kappa1", p.kappa1},
                                {"kappa2", p.kappa2},
                                {"driving_hotspot", p.driving_hotspot},
                                {"active", p.active}});
    j["domain_celsius"] = {to_celsius(model.t_min), to_celsius(model.t_max)};
    j["ambient_celsius"] = to_celsius(model.ambient);
    j["sample_period_s"] = model.sample_period;
    return j;
}

}  // namespace thermofix
