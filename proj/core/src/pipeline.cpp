#include "ineq/pipeline.hpp"

namespace ineq {

PipelineResult run_pipeline(const DesignMatrix& design, const PipelineConfig& config)
{
    MeanFit mean_fit = fit_ols(design);
    QuantileProfile profile = fit_profile(design, config.grid, ProfileOptions{config.solver, config.workers});
    GammaCovariance omega = estimate_omega(profile, mean_fit);
    MomentSet moments = compute_moments(design, config.convention);
    DecompositionResult decomposition = decompose(mean_fit.beta, omega.omega, moments);
    return PipelineResult{std::move(mean_fit), std::move(profile), std::move(omega), std::move(moments),
                          decomposition};
}

}  // namespace ineq
