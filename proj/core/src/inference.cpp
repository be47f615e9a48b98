#include "ineq/inference.hpp"

#include <cmath>
#include <random>
#include <vector>

#include "ineq/error.hpp"
#include "ineq/parallel.hpp"

namespace ineq {
namespace {

constexpr const char* kModule = "inference";

std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index, std::uint64_t attempt)
{
    return splitmix64(splitmix64(splitmix64(seed) ^ index) ^ (attempt * 0xD1B54A32D192ED03ULL));
}

Matrix bootstrap_replicates(const ObservationTable& table, const BootstrapConfig& config,
                            Eigen::Index statistic_count, const ReplicateStatistic& statistic)
{
    const std::size_t reps = config.replications;
    if (reps < 1) throw DataError(kModule, "bootstrap needs at least one replication");
    const std::size_t n = table.rows();
    if (n == 0) throw DataError(kModule, "empty table");

    // The wild scheme keeps X fixed and perturbs the OLS residuals.
    std::optional<DesignMatrix> base;
    std::optional<MeanFit> base_fit;
    if (config.mode == BootstrapMode::wild) {
        base.emplace(build_design(table));
        base_fit.emplace(fit_ols(*base));
    }

    // Each replicate may use at most what would remain if every other
    // replicate succeeded first time; the total is checked afterwards so the
    // outcome does not depend on scheduling.
    const std::size_t total_budget = 5 * reps;
    const std::size_t per_replicate_budget = total_budget - (reps - 1);

    Matrix out(static_cast<Eigen::Index>(reps), statistic_count);
    std::vector<std::size_t> attempts(reps, 0);

    const unsigned workers = config.workers == 0 ? default_worker_count() : config.workers;
    parallel_for(reps, workers, [&](std::size_t r) {
        std::vector<std::size_t> index(n);
        for (std::size_t attempt = 0; attempt < per_replicate_budget; ++attempt) {
            attempts[r] = attempt + 1;
            std::mt19937_64 rng(derive_seed(config.seed, r, attempt));
            try {
                Vector value;
                if (config.mode == BootstrapMode::pairs) {
                    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
                    for (auto& i : index) i = pick(rng);
                    value = statistic(build_design(table.select(index)));
                } else {
                    std::bernoulli_distribution coin(0.5);
                    Vector w = base_fit->fitted;
                    for (Eigen::Index i = 0; i < w.size(); ++i)
                        w(i) += coin(rng) ? base_fit->residuals(i) : -base_fit->residuals(i);
                    value = statistic(base->with_response(std::move(w)));
                }
                if (value.size() != statistic_count || !value.allFinite())
                    throw NumericalError(kModule, "replicate statistic has wrong size or is not finite");
                out.row(static_cast<Eigen::Index>(r)) = value.transpose();
                return;
            } catch (const Error&) {
                // redraw
            }
        }
        throw NumericalError(kModule, "replicate " + std::to_string(r) + " failed on every redraw");
    });

    std::size_t used = 0;
    for (const auto a : attempts) used += a;
    if (used > total_budget)
        throw NumericalError(kModule, "bootstrap needed " + std::to_string(used) + " draws, more than the cap of " +
                                          std::to_string(total_budget));
    return out;
}

double replicate_standard_error(const Matrix& replicates, Eigen::Index column)
{
    const Eigen::Index b = replicates.rows();
    if (b < 2) throw DataError(kModule, "standard errors need at least two bootstrap replications");
    const auto col = replicates.col(column).array();
    const double mean = col.mean();
    return std::sqrt((col - mean).square().sum() / static_cast<double>(b - 1));
}

std::string significance_stars(double estimate, double se)
{
    if (!(se > 0.0)) throw DataError(kModule, "standard error must be positive");
    const double t = std::abs(estimate / se);
    if (t >= 2.576) return "***";
    if (t >= 1.96) return "**";
    if (t >= 1.645) return "*";
    return "";
}

BootstrapReport bootstrap_decomposition(const ObservationTable& table, const BootstrapConfig& config)
{
    PipelineConfig point_config = config.pipeline;
    point_config.workers = config.workers;

    BootstrapReport report;
    report.point = run_pipeline(build_design(table), point_config).decomposition;

    PipelineConfig replicate_config = config.pipeline;
    replicate_config.workers = 1;
    report.replicates = bootstrap_replicates(table, config, 3, [&](const DesignMatrix& design) {
        const auto d = run_pipeline(design, replicate_config).decomposition;
        return Vector{{d.between, d.within, d.total}};
    });

    if (report.replicates.rows() >= 2) {
        report.se_between = replicate_standard_error(report.replicates, 0);
        report.se_within = replicate_standard_error(report.replicates, 1);
        report.se_total = replicate_standard_error(report.replicates, 2);
        auto stars = [](double est, double se) { return se > 0.0 ? significance_stars(est, se) : std::string{}; };
        report.stars_between = stars(report.point.between, *report.se_between);
        report.stars_within = stars(report.point.within, *report.se_within);
        report.stars_total = stars(report.point.total, *report.se_total);
    }
    return report;
}

}  // namespace ineq
