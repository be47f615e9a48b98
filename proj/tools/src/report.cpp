#include "ineq_cli/report.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace ineq::cli {

namespace {

using json = nlohmann::ordered_json;

constexpr int label_width = 46;

std::string fmt(const char* pattern, double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, pattern, v);
    return buf;
}

std::string pad_right(std::string s, std::size_t width)
{
    if (s.size() < width) s.append(width - s.size(), ' ');
    return s;
}

std::string pad_left(const std::string& s, std::size_t width)
{
    return s.size() < width ? std::string(width - s.size(), ' ') + s : s;
}

// Value right-aligned in a 10-wide field followed by up to three stars.
std::string value_cell(double v, const std::string& stars, const char* pattern)
{
    return pad_left(fmt(pattern, v), 10) + pad_right(stars, 3);
}

// Parenthesised t statistic whose closing bracket sits after the last digit.
std::string t_cell(const Estimate& e)
{
    const auto t = e.t_stat();
    if (!t) return {};
    return pad_left("(" + fmt("%.2f", *t) + ")", 11) + "  ";
}

void estimate_rows(std::ostream& os, const std::string& label, const Estimate& e, double scale)
{
    os << pad_right(label, label_width) << value_cell(e.value * scale, e.se ? e.stars : "", "%.2f") << '\n';
    if (const auto t = t_cell(e); !t.empty()) os << pad_right("", label_width - 1) << t << '\n';
}

std::string share_cell(const std::optional<double>& share)
{
    return share ? pad_left(fmt("%.1f", *share * 100.0) + "%", 11) : pad_left("n/a", 11);
}

json estimate_json(const Estimate& e)
{
    json j;
    j["value"] = e.value;
    if (e.se) {
        j["se"] = *e.se;
        j["t_stat"] = *e.t_stat();
        j["stars"] = e.stars;
    }
    return j;
}

json config_json(const RunEcho& c)
{
    json j;
    j["data"] = c.data;
    j["wage"] = c.wage;
    j["education"] = c.education;
    j["controls"] = c.controls;
    j["wage_levels"] = c.wage_levels;
    j["grid"] = c.grid;
    j["eps"] = c.eps;
    j["bootstrap"] = c.bootstrap;
    j["seed"] = c.seed;
    j["mode"] = c.mode;
    j["convention"] = c.convention;
    return j;
}

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

void bootstrap_note(std::ostream& os, const RunEcho& c, bool have_se)
{
    if (have_se) {
        os << "Notes: t statistics in parentheses; * significant at 10%, ** at 5%, *** at 1%.\n"
           << "Bootstrap: " << c.bootstrap << ' ' << c.mode << " replications, seed " << c.seed << ".\n";
    } else {
        os << "Notes: standard errors not computed (bootstrap disabled).\n";
    }
}

}  // namespace

json to_json(const DecomposeReport& r)
{
    json j;
    j["n"] = r.n;
    j["dropped_rows"] = r.dropped_rows;
    j["scale"] = "raw values; the text report multiplies indices and effects by 100";
    j["gini"] = r.gini;
    j["var_logs"] = r.var_logs;
    j["inequality_level"] = r.inequality_level;
    j["simulation"] = r.simulation.value;
    j["rif"] = r.rif.value;
    j["between"] = r.between.value;
    j["within"] = r.within.value;
    j["total"] = r.total.value;
    j["shares"] = {{"between", optional_json(r.share_between)}, {"within", optional_json(r.share_within)}};
    if (r.total.se) {
        const std::pair<const char*, const Estimate*> items[] = {
            {"simulation", &r.simulation}, {"rif", &r.rif}, {"between", &r.between},
            {"within", &r.within},         {"total", &r.total}};
        json se, t, stars;
        for (const auto& [name, e] : items) {
            se[name] = *e->se;
            t[name] = *e->t_stat();
            stars[name] = e->stars;
        }
        j["se"] = se;
        j["t_stats"] = t;
        j["stars"] = stars;
    }
    j["config"] = config_json(r.config);
    return j;
}

json to_json(const CoefficientTable& t)
{
    json j;
    j["n"] = t.n;
    j["dropped_rows"] = t.dropped_rows;
    json cols = json::array();
    for (const auto& c : t.columns)
        cols.push_back({{"label", c.label}, {"education", estimate_json(c.education)},
                        {"education_sq", estimate_json(c.education_sq)}});
    j["columns"] = cols;
    j["config"] = config_json(t.config);
    return j;
}

json to_json(const BaselineReport& r)
{
    json j;
    j["n"] = r.n;
    j["dropped_rows"] = r.dropped_rows;
    j["scale"] = "raw values; the text report multiplies effects by 100";
    j[r.name] = r.value.value;
    if (r.value.se) {
        j["se"] = *r.value.se;
        j["t_stat"] = *r.value.t_stat();
        j["stars"] = r.value.stars;
    }
    j["config"] = config_json(r.config);
    return j;
}

std::string render_text(const DecomposeReport& r)
{
    std::ostringstream os;
    os << "Marginal effect of education on inequality (x100)\n"
       << "Sample: n = " << r.n << ", dropped rows = " << r.dropped_rows << "\n\n";

    os << "1. Inequality\n"
       << pad_right("     Gini index", label_width) << value_cell(r.gini * 100.0, "", "%.1f") << '\n'
       << pad_right("     Variance of logarithms", label_width) << value_cell(r.var_logs * 100.0, "", "%.1f")
       << "\n\n";

    estimate_rows(os, "2. Numerical simulation (location shift)", r.simulation, 100.0);
    estimate_rows(os, "3. RIF estimate", r.rif, 100.0);
    os << '\n';

    os << "4. Quantile decomposition (levels)\n";
    estimate_rows(os, "     Between effect (convexity)", r.between, 100.0);
    estimate_rows(os, "     Within effect (heterogeneity)", r.within, 100.0);
    estimate_rows(os, "     Total change", r.total, 100.0);
    os << '\n';

    os << "5. Quantile decomposition (percentage)\n"
       << pad_right("     Between effect (convexity)", label_width) << share_cell(r.share_between) << '\n'
       << pad_right("     Within effect (heterogeneity)", label_width) << share_cell(r.share_within) << '\n'
       << pad_right("     Total change", label_width);
    if (r.share_between && r.share_within)
        os << pad_left(fmt("%.0f", (*r.share_between + *r.share_within) * 100.0) + "%", 11) << '\n';
    else
        os << pad_left("n/a", 11) << '\n';
    os << '\n';

    bootstrap_note(os, r.config, r.total.se.has_value());
    os << "Quantile grid " << r.config.grid << ", eps = " << r.config.eps << ", " << r.config.convention
       << " moments.\n";
    return os.str();
}

std::string render_text(const CoefficientTable& t)
{
    std::ostringstream os;
    constexpr std::size_t row_label = 20;
    constexpr std::size_t cell = 13;
    os << "Partial relationship between log wage and education\n"
       << "Sample: n = " << t.n << ", dropped rows = " << t.dropped_rows << "\n\n";
    os << pad_right("", row_label);
    for (const auto& c : t.columns) os << pad_left(c.label, cell - 3) << "   ";
    os << '\n';

    auto row = [&](const char* label, Estimate CoefficientColumn::*member) {
        os << pad_right(label, row_label);
        for (const auto& c : t.columns) {
            const Estimate& e = c.*member;
            os << value_cell(e.value, e.se ? e.stars : "", "%.4f");
        }
        os << '\n';
        if (t.columns.empty() || !(t.columns.front().*member).se) return;
        os << pad_right("", row_label - 1);
        for (const auto& c : t.columns) os << t_cell(c.*member);
        os << '\n';
    };
    row("Education", &CoefficientColumn::education);
    row("Education Squared", &CoefficientColumn::education_sq);
    os << '\n';
    bootstrap_note(os, t.config, !t.columns.empty() && t.columns.front().education.se.has_value());
    return os.str();
}

std::string render_text(const BaselineReport& r)
{
    std::ostringstream os;
    os << (r.name == "rif" ? "RIF estimate of the variance effect (x100)\n"
                           : "Numerical simulation of a location shift (x100)\n")
       << "Sample: n = " << r.n << ", dropped rows = " << r.dropped_rows << "\n\n";
    estimate_rows(os, r.name == "rif" ? "RIF estimate" : "Numerical simulation (location shift)", r.value, 100.0);
    os << '\n';
    bootstrap_note(os, r.config, r.value.se.has_value());
    if (r.name != "rif") os << "eps = " << r.config.eps << ".\n";
    return os.str();
}

}  // namespace ineq::cli
