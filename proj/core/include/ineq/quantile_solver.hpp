#pragma once

#include "ineq/model_frame.hpp"
#include "ineq/types.hpp"

namespace ineq {

/// Check loss sum_i r_i * (tau - 1{r_i < 0}).
double check_loss(const Vector& residuals, double tau);

struct QuantileSolverOptions {
    int max_iterations = 200;
    /// Stop when (objective - dual bound) <= gap_tolerance * (1 + |objective|).
    double gap_tolerance = 1e-9;
    /// Above this many rows, solve on a subsample first and collapse the
    /// observations whose residual sign is settled into two pseudo-rows. The
    /// signs are verified afterwards, so the optimum is unchanged.
    bool preprocess = true;
    Eigen::Index preprocess_min_rows = 4000;
};

struct QuantileSolution {
    Vector coef;
    double objective = 0.0;
    /// Certified optimality gap: objective minus the best dual lower bound.
    double gap = 0.0;
    int iterations = 0;
};

/// Minimises the check loss of y - X a over a by a primal-dual interior
/// point method on the bounded dual LP
///
///     max y'a  s.t.  X'a = (1 - tau) X'1,  0 <= a <= 1,
///
/// with Mehrotra predictor-corrector steps. The returned coefficients are
/// polished to an exact-fit basis when that does not increase the loss.
/// Large problems go through the sign-globbing preprocessing step described
/// in QuantileSolverOptions; the subsample is seeded from (n, tau) only.
/// Throws NumericalError when the gap is not closed within the budget.
QuantileSolution solve_quantile(const Matrix& x, const Vector& y, double tau,
                                const QuantileSolverOptions& options = {});

Vector fit_quantile(const DesignMatrix& design, double tau, const QuantileSolverOptions& options = {});

/// Exact small-sample oracle: enumerates every p-subset of observations,
/// solves the interpolation system and keeps the minimum-loss candidate.
/// Limited to n <= 15 and p <= 4.
QuantileSolution qr_oracle_smalln(const Matrix& x, const Vector& y, double tau);
QuantileSolution qr_oracle_smalln(const DesignMatrix& design, double tau);

}  // namespace ineq
