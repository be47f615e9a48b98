#pragma once

#include <cstdint>
#include <vector>

#include "ineq/estimators.hpp"
#include "ineq/model_frame.hpp"
#include "ineq/types.hpp"

namespace ineq {

/// Distribution of years of education in synthetic samples.
struct EducationLaw {
    enum class Kind { uniform_int, uniform_real, triangular };
    Kind kind = Kind::uniform_int;
    double lo = 0.0;
    double hi = 17.0;
    double mode = 8.5;  // triangular only

    static EducationLaw uniform_int(double lo, double hi) { return {Kind::uniform_int, lo, hi, 0.5 * (lo + hi)}; }
    static EducationLaw uniform_real(double lo, double hi) { return {Kind::uniform_real, lo, hi, 0.5 * (lo + hi)}; }
    static EducationLaw triangular(double lo, double mode, double hi) { return {Kind::triangular, lo, hi, mode}; }
};

/// Distribution of one synthetic control column.
struct ControlLaw {
    enum class Kind { normal, uniform, bernoulli };
    Kind kind = Kind::normal;
    double a = 0.0;  // mean | lower bound | success probability
    double b = 1.0;  // sd   | upper bound | unused
};

/// Population model w = x'beta + x'c (u - 1/2) with u ~ U(0,1) independent
/// of x = [1, h, h^2, z...]. Omega is then c c' / 12.
struct SyntheticSpec {
    std::size_t n = 1000;
    std::uint64_t seed = 1;
    Vector beta;
    Vector gamma;  // loadings c
    EducationLaw education;
    std::vector<ControlLaw> controls;

    /// Throws DataError on bad dimensions or law parameters, and when
    /// x'c < 0 somewhere on the support (quantiles would cross).
    void validate() const;

    Matrix implied_omega() const { return gamma * gamma.transpose() / 12.0; }
};

ObservationTable generate_synthetic(const SyntheticSpec& spec);

/// Presets used by the CLI and the tests: case 1 (linear homoskedastic),
/// case 2 (quadratic homoskedastic, beta1 = 0), case 3 (linear
/// heteroskedastic). Education is uniform on the integers 0..17.
SyntheticSpec case_preset(int which, std::size_t n, std::uint64_t seed);

/// Counterfactual of shifting education by eps under the OLS mean with the
/// original residuals kept: [Var(w_s) - Var(w)] / eps, population variances.
double simulate_location_shift(const DesignMatrix& design, const MeanFit& fit, double eps);

/// Location-shift effect on the variance from a regression of (w - mean w)^2
/// on X. The effect of moving h also moves the constructed h^2 column, so the
/// result is g_h + 2 mean(h) g_h2.
double rif_variance_effect(const DesignMatrix& design);

/// Population variance.
double variance_of_logs(const Vector& w);

/// Mean absolute pairwise difference over twice the mean (sorted-rank form).
double gini(const Vector& levels);

/// Data-generating processes for the monotonicity experiments.
struct A1Process {
    enum class Kind {
        convex_mean,    ///< Y = f(X + eps), f increasing and convex
        hetero_linear,  ///< Y = a0 + a1 (X + eps) + b(X + eps) (U - 1/2), b(x) = b0 + b1 x
    };
    Kind kind = Kind::convex_mean;
    std::vector<double> poly;  // f coefficients, ascending powers (convex_mean)
    double a0 = 0.0, a1 = 0.0, b0 = 0.0, b1 = 0.0;  // hetero_linear
    double x_lo = 1.0, x_hi = 2.0;                   // X ~ U(x_lo, x_hi)
};

/// Population variance of Y at each eps, reusing the same draws of X and U
/// for every eps. Throws DataError if f is not increasing and convex (or b
/// not positive and nondecreasing) on the shifted support.
std::vector<double> a1_variance_curve(const A1Process& process, const std::vector<double>& eps_list,
                                      std::size_t n, std::uint64_t seed);

}  // namespace ineq
