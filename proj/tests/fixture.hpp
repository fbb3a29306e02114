#pragma once

#include <fstream>
#include <stdexcept>
#include <string>

#include "json.hpp"

/// Reference scalar from the frozen oracle fixture.
inline double expected(const std::string& key) {
    static nlohmann::json j = [] {
        std::ifstream in(std::string(FIXTURE_DIR) + "/expected_values.json");
        if (!in) throw std::runtime_error("fixture file missing; run scripts/compute_expected_values.py");
        return nlohmann::json::parse(in);
    }();
    return j.at(key).get<double>();
}
