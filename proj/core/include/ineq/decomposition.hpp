#pragma once

#include <optional>

#include "ineq/estimators.hpp"
#include "ineq/model_frame.hpp"
#include "ineq/types.hpp"

namespace ineq {

/// Covariate means and covariances and their derivatives under a location
/// shift of education.
struct MomentSet {
    Vector mean;         // E, with E_0 = 1
    Matrix cov;          // V, zero in row/column 0
    Vector mean_shift;   // dE = (0, 1, 2 E_1, 0...)
    Matrix cov_shift;    // dV
    MomentConvention convention = MomentConvention::population;
};

/// dV has nonzero entries only at (1,2), (2,2) and the education-squared
/// row/column against the controls:
///   dV_12 = 2 V_11,  dV_22 = 4 V_12,  dV_2z = 2 Cov(h, z).
MomentSet compute_moments(const DesignMatrix& design, MomentConvention convention = MomentConvention::population);

/// I = beta' V beta + tr(Omega V) + E' Omega E, kept term by term.
struct InequalityLevel {
    double between = 0.0;     // beta' V beta
    double within_trace = 0.0;  // tr(Omega V)
    double within_mean = 0.0;   // E' Omega E

    double total() const { return between + within_trace + within_mean; }
};

InequalityLevel inequality_terms(const Vector& beta, const Matrix& omega, const MomentSet& moments);
double inequality_level(const Vector& beta, const Matrix& omega, const MomentSet& moments);

struct DecompositionResult {
    double inequality_level = 0.0;
    double between = 0.0;
    double within = 0.0;
    double total = 0.0;  // always between + within
    /// Component over total, so the two sum to one; empty when
    /// |total| < 1e-12. A negative total flips the sign of each share.
    std::optional<double> share_between;
    std::optional<double> share_within;
};

/// between = beta' dV beta, within = tr(Omega dV) + 2 E' Omega dE.
DecompositionResult decompose(const Vector& beta, const Matrix& omega, const MomentSet& moments);

/// Between and within effects of the no-controls model X = [1, h, h^2].
struct EffectPair {
    double between = 0.0;
    double within = 0.0;
};

/// E_1..E_3 are raw moments of h; V_11 = Var(h), V_12 = Cov(h, h^2).
struct ScalarMoments {
    double e1 = 0.0;
    double e2 = 0.0;
    double e3 = 0.0;
    double v11 = 0.0;
    double v12 = 0.0;
};

/// Scalar moments of an education sample under the 1/n convention.
ScalarMoments scalar_moments(const Vector& education);

/// Closed-form scalar expressions for the no-controls model:
///   between = 4 (b1 V11 + b2 V12) b2
///   within  = 2 [O01 + 2 O02 E1 + 3 O12 E2 + O11 E1 + 2 O22 E3]
/// Valid for population-convention moments.
EffectPair closed_form_simple(const Vector& beta, const Matrix& omega, const ScalarMoments& moments);

/// Inputs to the three textbook cases of the quadratic model. Only the
/// entries each case allows may be nonzero.
struct CaseParams {
    double beta1 = 0.0;
    double beta2 = 0.0;
    Matrix omega = Matrix::Zero(3, 3);
    ScalarMoments moments;
};

/// Case 1: linear homoskedastic, returns (0, 0).
/// Case 2: quadratic homoskedastic, returns (4 V12 b2^2, 0); requires b1 = 0
///         because the general between term also carries 4 b1 b2 V11.
/// Case 3: linear heteroskedastic with diagonal Omega, returns
///         (0, 2 O11 E1 + 4 O22 E3).
/// Throws DataError when params violate the case's zero restrictions.
EffectPair case_formulas(int which, const CaseParams& params);

}  // namespace ineq
