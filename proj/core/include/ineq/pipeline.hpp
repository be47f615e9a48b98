#pragma once

#include "ineq/decomposition.hpp"
#include "ineq/estimators.hpp"
#include "ineq/model_frame.hpp"

namespace ineq {

struct PipelineConfig {
    QuantileGrid grid = QuantileGrid::standard();
    MomentConvention convention = MomentConvention::population;
    QuantileSolverOptions solver;
    /// Workers for the quantile grid; zero selects default_worker_count().
    unsigned workers = 0;
};

/// Everything estimated from one sample: OLS, the quantile profile, Omega,
/// covariate moments and the between/within decomposition.
struct PipelineResult {
    MeanFit mean_fit;
    QuantileProfile profile;
    GammaCovariance omega;
    MomentSet moments;
    DecompositionResult decomposition;
};

PipelineResult run_pipeline(const DesignMatrix& design, const PipelineConfig& config = {});

}  // namespace ineq
