#include "ineq_cli/cli.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "ineq/decomposition.hpp"
#include "ineq/error.hpp"
#include "ineq/estimators.hpp"
#include "ineq/inference.hpp"
#include "ineq/model_frame.hpp"
#include "ineq/parallel.hpp"
#include "ineq/pipeline.hpp"
#include "ineq/quantile_solver.hpp"
#include "ineq/validation.hpp"
#include "ineq_cli/report.hpp"

namespace ineq::cli {

namespace {

using json = nlohmann::ordered_json;

struct RunConfig {
    std::string data;
    std::string wage = "w";
    std::string education = "h";
    std::vector<std::string> controls;
    bool wage_levels = false;
    unsigned threads = 0;
    std::string grid = "0.005:0.995:0.005";
    double eps = 0.01;
    std::size_t bootstrap = 200;
    unsigned long long seed = 42;
    std::string mode = "pairs";
    std::string convention = "population";
    std::string format = "text";
    std::string out;

    // synth
    int case_id = 0;
    std::size_t n = 10000;
    std::string beta;
    std::string gamma;
    std::string education_law = "uniform_int:0:17";
    std::vector<std::string> control_laws;
};

unsigned workers(const RunConfig& c) { return c.threads == 0 ? default_worker_count() : c.threads; }

CovariateSpec covariate_spec(const RunConfig& c)
{
    CovariateSpec s{c.wage, c.education, c.controls, !c.wage_levels};
    s.validate();
    return s;
}

ObservationTable load(const RunConfig& c)
{
    if (c.data.empty()) throw DataError("cli", "--data is required");
    return load_table(c.data, covariate_spec(c));
}

PipelineConfig pipeline_config(const RunConfig& c)
{
    PipelineConfig p;
    p.grid = QuantileGrid::parse(c.grid);
    p.convention = c.convention == "sample" ? MomentConvention::sample : MomentConvention::population;
    p.workers = workers(c);
    return p;
}

BootstrapConfig bootstrap_config(const RunConfig& c)
{
    BootstrapConfig b;
    b.replications = c.bootstrap;
    b.seed = c.seed;
    b.mode = c.mode == "wild" ? BootstrapMode::wild : BootstrapMode::pairs;
    b.pipeline = pipeline_config(c);
    b.pipeline.workers = 1;
    b.workers = workers(c);
    return b;
}

RunEcho echo(const RunConfig& c)
{
    return RunEcho{c.data, c.wage, c.education, c.controls, c.wage_levels, c.grid,
                   c.eps, c.bootstrap, c.seed, c.mode, c.convention};
}

// Fills se and stars of each estimate from the replicate columns in order.
void attach_standard_errors(const Matrix& replicates, const std::vector<Estimate*>& estimates)
{
    for (std::size_t j = 0; j < estimates.size(); ++j) {
        const double se = replicate_standard_error(replicates, static_cast<Eigen::Index>(j));
        estimates[j]->se = se;
        estimates[j]->stars = se > 0.0 ? significance_stars(estimates[j]->value, se) : "";
    }
}

bool want_standard_errors(const RunConfig& c, std::ostream& err)
{
    if (c.bootstrap == 1) {
        err << "note: standard errors need at least two bootstrap replications; omitted\n";
        return false;
    }
    return c.bootstrap >= 2;
}

void emit(const RunConfig& c, const json& j, const std::string& text, std::ostream& out)
{
    const std::string body = c.format == "json" ? j.dump(2) + "\n" : text;
    if (c.out.empty()) {
        out << body;
        return;
    }
    std::ofstream file(c.out);
    if (!file) throw DataError("cli", "cannot write " + c.out);
    file << body;
}

Vector exp_levels(const Vector& w) { return w.array().exp().matrix(); }

int cmd_decompose(const RunConfig& c, std::ostream& out, std::ostream& err)
{
    const auto table = load(c);
    const auto design = build_design(table);
    const auto pc = pipeline_config(c);
    const auto res = run_pipeline(design, pc);

    DecomposeReport r;
    r.n = table.rows();
    r.dropped_rows = table.dropped_rows;
    r.gini = gini(exp_levels(design.response()));
    r.var_logs = variance_of_logs(design.response());
    r.inequality_level = res.decomposition.inequality_level;
    r.simulation.value = simulate_location_shift(design, res.mean_fit, c.eps);
    r.rif.value = rif_variance_effect(design);
    r.between.value = res.decomposition.between;
    r.within.value = res.decomposition.within;
    r.total.value = res.decomposition.total;
    r.share_between = res.decomposition.share_between;
    r.share_within = res.decomposition.share_within;
    r.config = echo(c);

    if (want_standard_errors(c, err)) {
        const auto bc = bootstrap_config(c);
        const double eps = c.eps;
        const auto reps = bootstrap_replicates(table, bc, 5, [&bc, eps](const DesignMatrix& d) {
            const auto rep = run_pipeline(d, bc.pipeline);
            Vector s(5);
            s << rep.decomposition.between, rep.decomposition.within, rep.decomposition.total,
                simulate_location_shift(d, rep.mean_fit, eps), rif_variance_effect(d);
            return s;
        });
        attach_standard_errors(reps, {&r.between, &r.within, &r.total, &r.simulation, &r.rif});
    }
    emit(c, to_json(r), render_text(r), out);
    return ok;
}

int cmd_baseline(const RunConfig& c, const std::string& name, std::ostream& out, std::ostream& err)
{
    const auto table = load(c);
    const auto design = build_design(table);
    const double eps = c.eps;
    auto statistic = [&name, eps](const DesignMatrix& d) {
        return name == "rif" ? rif_variance_effect(d) : simulate_location_shift(d, fit_ols(d), eps);
    };

    BaselineReport r;
    r.name = name;
    r.n = table.rows();
    r.dropped_rows = table.dropped_rows;
    r.value.value = statistic(design);
    r.config = echo(c);
    if (want_standard_errors(c, err)) {
        const auto reps = bootstrap_replicates(table, bootstrap_config(c), 1,
                                               [&](const DesignMatrix& d) { return Vector::Constant(1, statistic(d)); });
        attach_standard_errors(reps, {&r.value});
    }
    emit(c, to_json(r), render_text(r), out);
    return ok;
}

int cmd_table(const RunConfig& c, std::ostream& out, std::ostream& err)
{
    static constexpr double taus[] = {0.10, 0.25, 0.50, 0.75, 0.90};
    const auto table = load(c);
    const auto design = build_design(table);

    auto coefficients = [](const DesignMatrix& d) {
        Vector s(12);
        const Vector beta = fit_ols(d).beta;
        s(0) = beta(DesignMatrix::education_col);
        s(1) = beta(DesignMatrix::education_sq_col);
        for (int k = 0; k < 5; ++k) {
            const Vector a = fit_quantile(d, taus[k]);
            s(2 + 2 * k) = a(DesignMatrix::education_col);
            s(3 + 2 * k) = a(DesignMatrix::education_sq_col);
        }
        return s;
    };

    CoefficientTable t;
    t.n = table.rows();
    t.dropped_rows = table.dropped_rows;
    t.config = echo(c);
    t.config.grid = "0.10,0.25,0.50,0.75,0.90";
    const Vector point = coefficients(design);
    t.columns.push_back({"OLS", {point(0), {}, {}}, {point(1), {}, {}}});
    for (int k = 0; k < 5; ++k) {
        char label[16];
        std::snprintf(label, sizeof label, "QR(%.2f)", taus[k]);
        t.columns.push_back({label, {point(2 + 2 * k), {}, {}}, {point(3 + 2 * k), {}, {}}});
    }
    if (want_standard_errors(c, err)) {
        const auto reps = bootstrap_replicates(table, bootstrap_config(c), 12, coefficients);
        std::vector<Estimate*> slots;
        for (auto& col : t.columns) {
            slots.push_back(&col.education);
            slots.push_back(&col.education_sq);
        }
        attach_standard_errors(reps, slots);
    }
    emit(c, to_json(t), render_text(t), out);
    return ok;
}

Vector parse_vector(const std::string& text, const char* flag)
{
    std::vector<double> values;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            values.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw DataError("cli", std::string(flag) + " expects comma-separated numbers, got '" + text + "'");
        }
    }
    return Eigen::Map<Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
}

std::vector<double> parse_law(const std::string& text, std::string& kind)
{
    std::stringstream ss(text);
    std::getline(ss, kind, ':');
    std::vector<double> params;
    std::string item;
    while (std::getline(ss, item, ':')) {
        try {
            params.push_back(std::stod(item));
        } catch (const std::exception&) {
            throw DataError("cli", "bad distribution parameter in '" + text + "'");
        }
    }
    return params;
}

EducationLaw parse_education_law(const std::string& text)
{
    std::string kind;
    const auto p = parse_law(text, kind);
    if (kind == "uniform_int" && p.size() == 2) return EducationLaw::uniform_int(p[0], p[1]);
    if (kind == "uniform_real" && p.size() == 2) return EducationLaw::uniform_real(p[0], p[1]);
    if (kind == "triangular" && p.size() == 3) return EducationLaw::triangular(p[0], p[1], p[2]);
    throw DataError("cli", "education law must be uniform_int:lo:hi, uniform_real:lo:hi or triangular:lo:mode:hi");
}

ControlLaw parse_control_law(const std::string& text)
{
    std::string kind;
    const auto p = parse_law(text, kind);
    if (kind == "normal" && p.size() == 2) return {ControlLaw::Kind::normal, p[0], p[1]};
    if (kind == "uniform" && p.size() == 2) return {ControlLaw::Kind::uniform, p[0], p[1]};
    if (kind == "bernoulli" && p.size() == 1) return {ControlLaw::Kind::bernoulli, p[0], 0.0};
    throw DataError("cli", "control law must be normal:mean:sd, uniform:lo:hi or bernoulli:p");
}

int cmd_synth(const RunConfig& c, std::ostream& out)
{
    SyntheticSpec spec;
    if (c.case_id != 0) {
        spec = case_preset(c.case_id, c.n, c.seed);
    } else {
        if (c.beta.empty() || c.gamma.empty()) throw DataError("cli", "synth needs --case or both --beta and --gamma");
        spec.n = c.n;
        spec.seed = c.seed;
        spec.education = parse_education_law(c.education_law);
        for (const auto& law : c.control_laws) spec.controls.push_back(parse_control_law(law));
    }
    if (!c.beta.empty()) spec.beta = parse_vector(c.beta, "--beta");
    if (!c.gamma.empty()) spec.gamma = parse_vector(c.gamma, "--gamma");

    const auto table = generate_synthetic(spec);
    CovariateSpec names{c.wage, c.education, {}, true};
    for (std::size_t j = 0; j < table.control_count(); ++j) names.control_columns.push_back("z" + std::to_string(j + 1));
    std::ostringstream csv;
    write_table(csv, table, names);
    RunConfig text_only = c;
    text_only.format = "text";
    emit(text_only, json{}, csv.str(), out);
    return ok;
}

int cmd_oracle(const RunConfig& c, std::ostream& out)
{
    const auto table = load(c);
    const auto design = build_design(table);
    const auto res = run_pipeline(design, pipeline_config(c));
    const Vector& beta = res.mean_fit.beta;
    const Matrix& omega = res.omega.omega;
    const auto conv = res.moments.convention;

    const double h = 1e-4;
    const double up = inequality_level(beta, omega, compute_moments(shift_education(design, h), conv));
    const double dn = inequality_level(beta, omega, compute_moments(shift_education(design, -h), conv));
    const double fd = (up - dn) / (2.0 * h);
    const auto& dec = res.decomposition;
    double scale = std::abs(dec.between) + std::abs(dec.within);
    if (scale == 0.0) scale = std::max(std::abs(dec.inequality_level), 1e-300);
    const double rel = std::abs(dec.total - fd) / scale;
    const bool fd_pass = rel <= 1e-5;

    json j;
    j["finite_difference"] = {{"total", dec.total}, {"fd", fd}, {"relative_error", rel}, {"pass", fd_pass}};

    const Eigen::Index m = std::min<Eigen::Index>(12, design.rows());
    std::vector<std::size_t> head(static_cast<std::size_t>(m));
    for (std::size_t i = 0; i < head.size(); ++i) head[i] = i;
    json qr = json::array();
    bool qr_pass = true;
    std::string qr_skip;
    if (design.cols() > 4) {
        qr_skip = "more than 4 regressors";
    } else {
        try {
            const auto small = build_design(table.select(head));
            for (int k = 1; k <= 9; ++k) {
                const double tau = 0.1 * k;
                const double oracle = qr_oracle_smalln(small, tau).objective;
                const double solver = solve_quantile(small.regressors(), small.response(), tau).objective;
                const bool pass = solver <= oracle + 1e-8;
                qr_pass = qr_pass && pass;
                qr.push_back({{"tau", tau}, {"solver", solver}, {"oracle", oracle}, {"pass", pass}});
            }
        } catch (const NumericalError& e) {
            qr_skip = e.what();
        }
    }
    j["quantile_oracle"] = {{"rows", m}, {"checks", qr}};
    if (!qr_skip.empty()) j["quantile_oracle"]["skipped"] = qr_skip;
    j["pass"] = fd_pass && qr_pass;

    std::ostringstream text;
    text.precision(10);
    text << "finite-difference oracle: total = " << dec.total << ", central difference = " << fd
         << ", relative error = " << rel << (fd_pass ? "  PASS" : "  FAIL") << '\n';
    if (!qr_skip.empty()) {
        text << "quantile oracle: skipped (" << qr_skip << ")\n";
    } else {
        for (const auto& row : qr)
            text << "quantile oracle tau=" << row["tau"].get<double>() << ": solver " << row["solver"].get<double>()
                 << " vs exact " << row["oracle"].get<double>() << (row["pass"].get<bool>() ? "  PASS" : "  FAIL")
                 << '\n';
    }
    emit(c, j, text.str(), out);
    return fd_pass && qr_pass ? ok : numerical_error;
}

void add_data_options(CLI::App* sub, RunConfig& c)
{
    sub->add_option("--data", c.data, "CSV file with a header row")->required();
    sub->add_option("--wage", c.wage, "wage column (log wages unless --wage-levels)")->capture_default_str();
    sub->add_option("--education", c.education, "years-of-education column")->capture_default_str();
    sub->add_option("--controls", c.controls, "control columns, comma separated")->delimiter(',');
    sub->add_flag("--wage-levels", c.wage_levels, "wage column holds levels; logs are taken at load");
    sub->add_option("--threads", c.threads, "worker threads (0: INEQ_NUM_THREADS or hardware)")->capture_default_str();
    sub->add_option("--format", c.format, "output format")->check(CLI::IsMember({"text", "json"}))->capture_default_str();
    sub->add_option("--out", c.out, "write output to this file instead of stdout");
}

void add_bootstrap_options(CLI::App* sub, RunConfig& c)
{
    sub->add_option("--bootstrap", c.bootstrap, "bootstrap replications (0 disables)")->capture_default_str();
    sub->add_option("--seed", c.seed, "bootstrap seed")->capture_default_str();
    sub->add_option("--mode", c.mode, "bootstrap scheme")->check(CLI::IsMember({"pairs", "wild"}))->capture_default_str();
}

void add_model_options(CLI::App* sub, RunConfig& c)
{
    sub->add_option("--grid", c.grid, "quantile grid min:max:step")->capture_default_str();
    sub->add_option("--convention", c.convention, "covariate moment denominator")
        ->check(CLI::IsMember({"population", "sample"}))
        ->capture_default_str();
}

void add_eps_option(CLI::App* sub, RunConfig& c)
{
    sub->add_option("--eps", c.eps, "location shift for the simulation baseline")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Between/within decomposition of the effect of education on wage inequality", "ineq"};
    app.require_subcommand(1);
    RunConfig c;

    auto* decompose = app.add_subcommand("decompose", "full decomposition report");
    add_data_options(decompose, c);
    add_model_options(decompose, c);
    add_bootstrap_options(decompose, c);
    add_eps_option(decompose, c);

    auto* simulate = app.add_subcommand("simulate", "OLS-residual location-shift simulation");
    add_data_options(simulate, c);
    add_bootstrap_options(simulate, c);
    add_eps_option(simulate, c);

    auto* rif = app.add_subcommand("rif", "RIF regression estimate of the variance effect");
    add_data_options(rif, c);
    add_bootstrap_options(rif, c);

    auto* table = app.add_subcommand("table", "OLS and quantile coefficients on education");
    add_data_options(table, c);
    add_bootstrap_options(table, c);

    auto* synth = app.add_subcommand("synth", "write a synthetic CSV");
    synth->add_option("--case", c.case_id, "preset 1, 2 or 3")->check(CLI::Range(1, 3));
    synth->add_option("--n", c.n, "rows")->capture_default_str();
    synth->add_option("--seed", c.seed, "generator seed")->capture_default_str();
    synth->add_option("--beta", c.beta, "mean coefficients, comma separated");
    synth->add_option("--gamma", c.gamma, "heterogeneity loadings c, comma separated");
    synth->add_option("--education-law", c.education_law, "uniform_int:lo:hi | uniform_real:lo:hi | triangular:lo:mode:hi")
        ->capture_default_str();
    synth->add_option("--control", c.control_laws, "control law normal:mean:sd | uniform:lo:hi | bernoulli:p");
    synth->add_option("--wage", c.wage, "wage column name")->capture_default_str();
    synth->add_option("--education", c.education, "education column name")->capture_default_str();
    synth->add_option("--out", c.out, "output file (default stdout)");

    auto* oracle = app.add_subcommand("oracle", "finite-difference and exact quantile oracles");
    add_data_options(oracle, c);
    add_model_options(oracle, c);

    std::vector<std::string> argv_store{"ineq"};
    argv_store.insert(argv_store.end(), args.begin(), args.end());
    std::vector<const char*> argv;
    for (const auto& a : argv_store) argv.push_back(a.c_str());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? ok : usage_error;
    }

    try {
        if (decompose->parsed()) return cmd_decompose(c, out, err);
        if (simulate->parsed()) return cmd_baseline(c, "simulation", out, err);
        if (rif->parsed()) return cmd_baseline(c, "rif", out, err);
        if (table->parsed()) return cmd_table(c, out, err);
        if (synth->parsed()) return cmd_synth(c, out);
        if (oracle->parsed()) return cmd_oracle(c, out);
    } catch (const DataError& e) {
        err << "error: " << e.what() << '\n';
        return usage_error;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return numerical_error;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return numerical_error;
    }
    return usage_error;
}

}  // namespace ineq::cli
