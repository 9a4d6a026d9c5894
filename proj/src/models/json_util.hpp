#pragma once

#include "missinfo/model_api.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace missinfo::detail {

inline void check_schema(const json& j, const std::string& expected, std::vector<std::string>& out) {
    if (!j.is_object()) {
        out.push_back("unit is not a JSON object");
        return;
    }
    if (j.contains("schema") && (!j["schema"].is_string() || j["schema"] != expected))
        out.push_back("schema must be \"" + expected + "\"");
}

inline bool is_count(const json& v) {
    return v.is_number_integer() || (v.is_number() && std::floor(v.get<double>()) == v.get<double>());
}

inline bool need_count(const json& j, const char* key, std::vector<std::string>& out) {
    if (!j.contains(key)) {
        out.push_back(std::string("missing field \"") + key + "\"");
        return false;
    }
    if (!is_count(j[key]) || j[key].get<double>() < 0) {
        out.push_back(std::string("field \"") + key + "\" must be a nonnegative integer");
        return false;
    }
    return true;
}

inline bool need_array(const json& j, const char* key, std::vector<std::string>& out) {
    if (!j.contains(key) || !j[key].is_array()) {
        out.push_back(std::string("field \"") + key + "\" must be an array");
        return false;
    }
    return true;
}

inline void throw_if_any(const std::vector<std::string>& v, const std::string& what) {
    if (v.empty()) return;
    std::string msg = what + ": ";
    for (std::size_t i = 0; i < v.size(); ++i) msg += (i ? "; " : "") + v[i];
    throw ValidationError(msg);
}

// x log y with 0 log 0 = 0
inline double xlogy(double x, double y) { return x == 0.0 ? 0.0 : x * std::log(y); }

inline double log_expit(double x) { return x >= 0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x)); }
inline double expit(double x) { return x >= 0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x)); }

}  // namespace missinfo::detail
