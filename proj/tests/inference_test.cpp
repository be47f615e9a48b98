#include <cmath>

#include <gtest/gtest.h>

#include "ineq/error.hpp"
#include "ineq/inference.hpp"
#include "ineq/validation.hpp"

using namespace ineq;

namespace {

BootstrapConfig small_config(std::size_t reps, unsigned workers)
{
    BootstrapConfig c;
    c.replications = reps;
    c.seed = 42;
    c.workers = workers;
    c.pipeline.grid = QuantileGrid(0.1, 0.1);
    return c;
}

ObservationTable case_table(int which, std::size_t n, std::uint64_t seed)
{
    return generate_synthetic(case_preset(which, n, seed));
}

}  // namespace

TEST(SignificanceStars, Thresholds)
{
    EXPECT_EQ(significance_stars(2.6, 1.0), "***");
    EXPECT_EQ(significance_stars(-2.0, 1.0), "**");
    EXPECT_EQ(significance_stars(1.7, 1.0), "*");
    EXPECT_EQ(significance_stars(1.0, 1.0), "");
    EXPECT_THROW(significance_stars(1.0, 0.0), DataError);
    EXPECT_THROW(significance_stars(1.0, -1.0), DataError);
}

TEST(DeriveSeed, DistinctStreams)
{
    EXPECT_NE(derive_seed(1, 0), derive_seed(1, 1));
    EXPECT_NE(derive_seed(1, 0, 0), derive_seed(1, 0, 1));
    EXPECT_NE(derive_seed(1, 0), derive_seed(2, 0));
    EXPECT_EQ(derive_seed(7, 3, 2), derive_seed(7, 3, 2));
}

TEST(BootstrapDecomposition, DeterministicAcrossRunsAndWorkers)
{
    auto table = case_table(3, 600, 5);
    auto a = bootstrap_decomposition(table, small_config(12, 1));
    auto b = bootstrap_decomposition(table, small_config(12, 1));
    auto c = bootstrap_decomposition(table, small_config(12, 3));
    EXPECT_EQ(a.replicates, b.replicates);
    EXPECT_EQ(a.replicates, c.replicates);
    EXPECT_EQ(a.se_within, c.se_within);
    EXPECT_EQ(a.point.total, c.point.total);
}

TEST(BootstrapDecomposition, StandardErrorsAreColumnDeviations)
{
    auto table = case_table(2, 500, 6);
    auto r = bootstrap_decomposition(table, small_config(15, 0));
    ASSERT_EQ(r.replicates.rows(), 15);
    ASSERT_EQ(r.replicates.cols(), 3);
    const std::optional<double>* se[3] = {&r.se_between, &r.se_within, &r.se_total};
    for (Eigen::Index j = 0; j < 3; ++j) {
        const Vector col = r.replicates.col(j);
        const double sd = std::sqrt((col.array() - col.mean()).square().sum() / 14.0);
        ASSERT_TRUE(se[j]->has_value());
        EXPECT_NEAR(**se[j], sd, 1e-12 * (1 + sd));
        EXPECT_NEAR(replicate_standard_error(r.replicates, j), sd, 1e-12 * (1 + sd));
    }
    EXPECT_EQ(r.stars_between, significance_stars(r.point.between, *r.se_between));
    for (Eigen::Index b = 0; b < 15; ++b)
        EXPECT_EQ(r.replicates(b, 2), r.replicates(b, 0) + r.replicates(b, 1));
}

TEST(BootstrapDecomposition, SingleReplicateHasNoStandardErrors)
{
    auto table = case_table(2, 300, 7);
    auto r = bootstrap_decomposition(table, small_config(1, 1));
    EXPECT_EQ(r.replicates.rows(), 1);
    EXPECT_FALSE(r.se_between.has_value());
    EXPECT_TRUE(r.stars_total.empty());
    EXPECT_THROW(replicate_standard_error(r.replicates, 0), DataError);
}

TEST(BootstrapDecomposition, WildModeKeepsDesign)
{
    auto table = case_table(3, 400, 8);
    auto cfg = small_config(4, 1);
    cfg.mode = BootstrapMode::wild;
    const Vector h = table.education;
    auto reps = bootstrap_replicates(table, cfg, 2, [&](const DesignMatrix& d) {
        Vector out(2);
        out << (d.education() - h).cwiseAbs().maxCoeff(), d.response().sum();
        return out;
    });
    for (Eigen::Index b = 0; b < 4; ++b) EXPECT_EQ(reps(b, 0), 0.0);
    EXPECT_NE(reps(0, 1), reps(1, 1));
    auto full = bootstrap_decomposition(table, cfg);
    EXPECT_TRUE(full.se_within.has_value());
}

TEST(BootstrapReplicates, FailedReplicatesAreRedrawn)
{
    auto table = case_table(1, 200, 9);
    const double cut = table.wage_log.mean();
    auto cfg = small_config(20, 2);
    auto reps = bootstrap_replicates(table, cfg, 1, [&](const DesignMatrix& d) {
        if (d.response()(0) < cut) throw NumericalError("test", "rejected draw");
        return Vector::Constant(1, d.response()(0));
    });
    for (Eigen::Index b = 0; b < 20; ++b) EXPECT_GE(reps(b, 0), cut);
    auto again = bootstrap_replicates(table, small_config(20, 1), 1, [&](const DesignMatrix& d) {
        if (d.response()(0) < cut) throw NumericalError("test", "rejected draw");
        return Vector::Constant(1, d.response()(0));
    });
    EXPECT_EQ(reps, again);
}

TEST(BootstrapReplicates, AttemptCapIsEnforced)
{
    auto table = case_table(1, 100, 10);
    EXPECT_THROW(bootstrap_replicates(table, small_config(5, 1), 1,
                                      [](const DesignMatrix&) -> Vector {
                                          throw NumericalError("test", "always fails");
                                      }),
                 NumericalError);
}

TEST(BootstrapDecomposition, InvariantToWageScale)
{
    auto table = case_table(3, 800, 11);
    auto shifted = table;
    shifted.wage_log.array() += std::log(3.0);
    auto a = bootstrap_decomposition(table, small_config(6, 1));
    auto b = bootstrap_decomposition(shifted, small_config(6, 1));
    for (Eigen::Index r = 0; r < 6; ++r)
        for (Eigen::Index j = 0; j < 2; ++j)
            EXPECT_NEAR(a.replicates(r, j), b.replicates(r, j), 1e-10 * (1 + std::abs(a.replicates(r, j))));
}

double ols_between(const DesignMatrix& d)
{
    const auto fit = fit_ols(d);
    return decompose(fit.beta, Matrix::Zero(d.cols(), d.cols()), compute_moments(d)).between;
}

TEST(BootstrapDecomposition, BetweenReplicatesDependOnlyOnTheMeanStage)
{
    auto table = case_table(2, 700, 12);
    auto cfg = small_config(5, 1);
    auto full = bootstrap_decomposition(table, cfg);
    auto reps = bootstrap_replicates(table, cfg, 1, [](const DesignMatrix& d) { return Vector::Constant(1, ols_between(d)); });
    for (Eigen::Index r = 0; r < 5; ++r) EXPECT_EQ(full.replicates(r, 0), reps(r, 0));
}

// Monte Carlo coverage of the pairs bootstrap (n = 5000, B = 200) for the
// between effect on quadratic homoskedastic data, whose true value is
// 4 beta2^2 V12 in the population of h ~ U{0..17}. The between replicates do
// not involve the quantile stage (checked above), so the study resamples the
// mean stage only, which makes 1000 trials affordable.
TEST(BootstrapDecomposition, CoverageOfBetweenEffect)
{
    const auto proto = case_preset(2, 5000, 0);
    double e1 = 0, e2 = 0, e3 = 0;
    for (int k = 0; k <= 17; ++k) {
        e1 += k / 18.0;
        e2 += double(k) * k / 18.0;
        e3 += double(k) * k * k / 18.0;
    }
    const double truth = 4.0 * proto.beta(2) * proto.beta(2) * (e3 - e1 * e2);
    const int trials = 1000;
    int covered = 0;
    for (int trial = 0; trial < trials; ++trial) {
        auto table = case_table(2, 5000, 1000 + static_cast<std::uint64_t>(trial));
        auto cfg = small_config(200, 1);
        cfg.seed = 7 + static_cast<std::uint64_t>(trial);
        auto reps = bootstrap_replicates(table, cfg, 1, [](const DesignMatrix& d) { return Vector::Constant(1, ols_between(d)); });
        const double point = ols_between(build_design(table));
        if (std::abs(point - truth) <= 1.96 * replicate_standard_error(reps, 0)) ++covered;
    }
    EXPECT_GE(covered, 930) << covered << " of " << trials;
}
