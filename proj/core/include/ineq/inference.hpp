#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>

#include "ineq/decomposition.hpp"
#include "ineq/model_frame.hpp"
#include "ineq/pipeline.hpp"

namespace ineq {

enum class BootstrapMode {
    pairs,  ///< resample observations with replacement
    wild,   ///< fixed X, w* = fitted + v * residual with Rademacher v (approximate for the quantile stage)
};

struct BootstrapConfig {
    std::size_t replications = 200;
    std::uint64_t seed = 0;
    BootstrapMode mode = BootstrapMode::pairs;
    /// Grid and moment convention for each replicate. Its worker count is
    /// ignored: replicates run in parallel and each one fits serially.
    PipelineConfig pipeline;
    unsigned workers = 0;
};

/// Statistic evaluated on each replicate design.
using ReplicateStatistic = std::function<Vector(const DesignMatrix&)>;

/// B x k matrix of replicate statistics. Replicate r draws from a stream
/// seeded by (seed, r, attempt); a replicate whose statistic throws an
/// ineq::Error is redrawn, up to 5 B attempts in total. Results are
/// independent of the worker count.
Matrix bootstrap_replicates(const ObservationTable& table, const BootstrapConfig& config,
                            Eigen::Index statistic_count, const ReplicateStatistic& statistic);

struct BootstrapReport {
    DecompositionResult point;
    Matrix replicates;  // B x 3: between, within, total
    std::optional<double> se_between;
    std::optional<double> se_within;
    std::optional<double> se_total;
    std::string stars_between;
    std::string stars_within;
    std::string stars_total;
};

/// Full-pipeline bootstrap of the decomposition. With B = 1 the standard
/// errors and stars are left empty.
BootstrapReport bootstrap_decomposition(const ObservationTable& table, const BootstrapConfig& config);

/// Standard deviation (denominator B - 1) of one replicate column. Throws
/// DataError with fewer than two replicates.
double replicate_standard_error(const Matrix& replicates, Eigen::Index column);

/// "***" for |t| >= 2.576, "**" for >= 1.96, "*" for >= 1.645, else "".
std::string significance_stars(double estimate, double se);

/// Independent 64-bit seed for stream (seed, index, attempt).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index, std::uint64_t attempt = 0);

}  // namespace ineq
