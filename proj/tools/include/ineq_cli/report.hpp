#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace ineq::cli {

/// A point estimate with optional bootstrap standard error.
struct Estimate {
    double value = 0.0;
    std::optional<double> se;
    std::string stars;

    std::optional<double> t_stat() const
    {
        if (!se || !(*se > 0.0)) return std::nullopt;
        return value / *se;
    }
};

/// Settings echoed into machine output. Worker counts are deliberately absent
/// so that output does not depend on them.
struct RunEcho {
    std::string data;
    std::string wage;
    std::string education;
    std::vector<std::string> controls;
    bool wage_levels = false;
    std::string grid;
    double eps = 0.01;
    std::size_t bootstrap = 0;
    unsigned long long seed = 0;
    std::string mode;
    std::string convention;
};

struct DecomposeReport {
    std::size_t n = 0;
    std::size_t dropped_rows = 0;
    double gini = 0.0;
    double var_logs = 0.0;
    double inequality_level = 0.0;
    Estimate simulation;
    Estimate rif;
    Estimate between;
    Estimate within;
    Estimate total;
    std::optional<double> share_between;
    std::optional<double> share_within;
    RunEcho config;
};

/// One column of the coefficient table: OLS or QR at one quantile.
struct CoefficientColumn {
    std::string label;
    Estimate education;
    Estimate education_sq;
};

struct CoefficientTable {
    std::size_t n = 0;
    std::size_t dropped_rows = 0;
    std::vector<CoefficientColumn> columns;
    RunEcho config;
};

struct BaselineReport {
    std::string name;  // "simulation" or "rif"
    std::size_t n = 0;
    std::size_t dropped_rows = 0;
    Estimate value;
    RunEcho config;
};

nlohmann::ordered_json to_json(const DecomposeReport& report);
nlohmann::ordered_json to_json(const CoefficientTable& table);
nlohmann::ordered_json to_json(const BaselineReport& report);

/// Five-block inequality report; indices and effects are printed x100.
std::string render_text(const DecomposeReport& report);
std::string render_text(const CoefficientTable& table);
std::string render_text(const BaselineReport& report);

}  // namespace ineq::cli
