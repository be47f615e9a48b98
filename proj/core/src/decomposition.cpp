#include "ineq/decomposition.hpp"

#include <cmath>
#include <string>

#include "ineq/error.hpp"

namespace ineq {
namespace {

constexpr const char* kModule = "decomposition";

constexpr Eigen::Index kH = DesignMatrix::education_col;
constexpr Eigen::Index kH2 = DesignMatrix::education_sq_col;
constexpr Eigen::Index kZ = DesignMatrix::first_control_col;

void check_dimensions(const Vector& beta, const Matrix& omega, const MomentSet& moments)
{
    const Eigen::Index p = moments.mean.size();
    if (beta.size() != p || omega.rows() != p || omega.cols() != p || moments.cov.rows() != p ||
        moments.cov_shift.rows() != p || moments.mean_shift.size() != p) {
        throw DataError(kModule, "dimension mismatch: moments have p=" + std::to_string(p) + ", beta has " +
                                     std::to_string(beta.size()) + ", omega is " + std::to_string(omega.rows()) +
                                     "x" + std::to_string(omega.cols()));
    }
}

bool is_zero(double v) { return v == 0.0; }

}  // namespace

MomentSet compute_moments(const DesignMatrix& design, MomentConvention convention)
{
    const Matrix& x = design.regressors();
    const Eigen::Index n = x.rows();
    const Eigen::Index p = x.cols();
    if (convention == MomentConvention::sample && n < 2)
        throw DataError(kModule, "sample-convention moments need at least two rows");

    MomentSet m;
    m.convention = convention;
    m.mean = x.colwise().mean().transpose();
    const Matrix centered = x.rowwise() - m.mean.transpose();
    const double denom = convention == MomentConvention::population ? static_cast<double>(n)
                                                                     : static_cast<double>(n - 1);
    m.cov = (centered.transpose() * centered) / denom;
    m.cov = 0.5 * (m.cov + m.cov.transpose()).eval();
    m.cov.row(0).setZero();
    m.cov.col(0).setZero();
    m.mean(0) = 1.0;

    m.mean_shift = Vector::Zero(p);
    m.mean_shift(kH) = 1.0;
    m.mean_shift(kH2) = 2.0 * m.mean(kH);

    // d Cov(h^j, h^k) = k Cov(h^j, h^(k-1)) + j Cov(h^(j-1), h^k);
    // d Cov(h^k, z) = k Cov(h^(k-1), z); control-only blocks do not move.
    m.cov_shift = Matrix::Zero(p, p);
    m.cov_shift(kH, kH2) = m.cov_shift(kH2, kH) = 2.0 * m.cov(kH, kH);
    m.cov_shift(kH2, kH2) = 4.0 * m.cov(kH, kH2);
    for (Eigen::Index j = kZ; j < p; ++j) {
        m.cov_shift(kH2, j) = m.cov_shift(j, kH2) = 2.0 * m.cov(kH, j);
    }
    return m;
}

InequalityLevel inequality_terms(const Vector& beta, const Matrix& omega, const MomentSet& moments)
{
    check_dimensions(beta, omega, moments);
    InequalityLevel level;
    level.between = beta.dot(moments.cov * beta);
    level.within_trace = (omega * moments.cov).trace();
    level.within_mean = moments.mean.dot(omega * moments.mean);
    return level;
}

double inequality_level(const Vector& beta, const Matrix& omega, const MomentSet& moments)
{
    return inequality_terms(beta, omega, moments).total();
}

DecompositionResult decompose(const Vector& beta, const Matrix& omega, const MomentSet& moments)
{
    check_dimensions(beta, omega, moments);
    DecompositionResult r;
    r.inequality_level = inequality_level(beta, omega, moments);
    r.between = beta.dot(moments.cov_shift * beta);
    r.within = (omega * moments.cov_shift).trace() + 2.0 * moments.mean.dot(omega * moments.mean_shift);
    r.total = r.between + r.within;
    if (std::abs(r.total) >= 1e-12) {
        r.share_between = r.between / r.total;
        r.share_within = r.within / r.total;
    }
    return r;
}

ScalarMoments scalar_moments(const Vector& education)
{
    if (education.size() == 0) throw DataError(kModule, "empty education sample");
    const Eigen::ArrayXd h = education.array();
    ScalarMoments m;
    m.e1 = h.mean();
    m.e2 = h.square().mean();
    m.e3 = h.cube().mean();
    const Eigen::ArrayXd hc = h - m.e1;
    const Eigen::ArrayXd h2c = h.square() - m.e2;
    m.v11 = hc.square().mean();
    m.v12 = (hc * h2c).mean();
    return m;
}

EffectPair closed_form_simple(const Vector& beta, const Matrix& omega, const ScalarMoments& mo)
{
    if (beta.size() != 3 || omega.rows() != 3 || omega.cols() != 3)
        throw DataError(kModule, "closed form applies to the three-regressor model only");
    EffectPair e;
    e.between = 4.0 * (beta(1) * mo.v11 + beta(2) * mo.v12) * beta(2);
    e.within = 2.0 * (omega(0, 1) + 2.0 * omega(0, 2) * mo.e1 + 3.0 * omega(1, 2) * mo.e2 +
                      omega(1, 1) * mo.e1 + 2.0 * omega(2, 2) * mo.e3);
    return e;
}

EffectPair case_formulas(int which, const CaseParams& params)
{
    const Matrix& o = params.omega;
    if (o.rows() != 3 || o.cols() != 3) throw DataError(kModule, "case parameters need a 3x3 omega");
    auto only_intercept_dispersion = [&] {
        for (Eigen::Index i = 0; i < 3; ++i)
            for (Eigen::Index j = 0; j < 3; ++j)
                if ((i != 0 || j != 0) && !is_zero(o(i, j))) return false;
        return true;
    };
    auto diagonal = [&] {
        for (Eigen::Index i = 0; i < 3; ++i)
            for (Eigen::Index j = 0; j < 3; ++j)
                if (i != j && !is_zero(o(i, j))) return false;
        return true;
    };

    switch (which) {
    case 1:
        if (!is_zero(params.beta2) || !only_intercept_dispersion())
            throw DataError(kModule, "case 1 requires beta2 = 0 and omega zero outside (0,0)");
        return {0.0, 0.0};
    case 2:
        if (!(params.beta2 > 0.0) || !only_intercept_dispersion())
            throw DataError(kModule, "case 2 requires beta2 > 0 and omega zero outside (0,0)");
        if (!is_zero(params.beta1))
            throw DataError(kModule, "case 2 closed form holds only with beta1 = 0");
        return {4.0 * params.moments.v12 * params.beta2 * params.beta2, 0.0};
    case 3:
        if (!is_zero(params.beta2) || !diagonal())
            throw DataError(kModule, "case 3 requires beta2 = 0 and a diagonal omega");
        return {0.0, 2.0 * o(1, 1) * params.moments.e1 + 4.0 * o(2, 2) * params.moments.e3};
    default:
        throw DataError(kModule, "case must be 1, 2 or 3");
    }
}

}  // namespace ineq
