#pragma once

#include <cstddef>
#include <vector>

#include "ineq/model_frame.hpp"
#include "ineq/quantile_solver.hpp"
#include "ineq/types.hpp"

namespace ineq {

/// Least-squares fit of the conditional mean.
struct MeanFit {
    Vector beta;
    Vector fitted;
    Vector residuals;  // response - fitted
};

MeanFit fit_ols(const DesignMatrix& design);
MeanFit fit_ols(const Matrix& x, const Vector& w);

/// Uniform grid of quantile indices {t, t + psi, ..., 1 - t}.
class QuantileGrid {
public:
    /// Throws DataError unless 0 < trim < 0.5, mesh > 0 and (1 - 2 trim) is a
    /// whole multiple of mesh (within 1e-9 of the mesh).
    QuantileGrid(double trim, double mesh);

    /// t = 0.005, psi = 0.005, 199 points.
    static QuantileGrid standard() { return QuantileGrid(0.005, 0.005); }

    /// Parses "min:max:step"; requires max == 1 - min.
    static QuantileGrid parse(const std::string& text);

    const std::vector<double>& taus() const { return taus_; }
    std::size_t size() const { return taus_.size(); }
    double trim() const { return trim_; }
    double mesh() const { return mesh_; }

private:
    double trim_;
    double mesh_;
    std::vector<double> taus_;
};

/// Quantile-regression coefficients over a grid; row m is alpha(tau_m).
struct QuantileProfile {
    QuantileGrid grid;
    Matrix alpha;  // M x p
};

struct ProfileOptions {
    QuantileSolverOptions solver;
    /// Zero selects default_worker_count().
    unsigned workers = 0;
};

/// Fits every grid point independently. Rows are assembled by index, so the
/// result does not depend on the worker count.
QuantileProfile fit_profile(const DesignMatrix& design, const QuantileGrid& grid,
                            const ProfileOptions& options = {});

/// Omega = Var[alpha(U) - beta], symmetric positive semidefinite.
struct GammaCovariance {
    Matrix omega;
};

/// Grid estimator M^-1 sum_m (alpha_m - beta)(alpha_m - beta)'. Eigenvalues in
/// (-1e-10 trace, 0) are clipped to zero; more negative ones are an error.
GammaCovariance estimate_omega(const QuantileProfile& profile, const MeanFit& mean_fit);
GammaCovariance estimate_omega(const Matrix& alpha, const Vector& beta);

}  // namespace ineq
