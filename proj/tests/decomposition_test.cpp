#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "ineq/decomposition.hpp"
#include "ineq/error.hpp"
#include "ineq/validation.hpp"
#include "oracles.hpp"

using namespace ineq;
namespace t = ineq::oracle;

namespace {

DesignMatrix fixture_012(Vector w = Vector::Zero(3))
{
    Vector h(3);
    h << 0, 1, 2;
    return DesignMatrix(std::move(w), h, Matrix(3, 0));
}

Vector vec3(double a, double b, double c)
{
    Vector v(3);
    v << a, b, c;
    return v;
}

// Raw sample for the oracle: education plus controls correlated with it.
struct Sample {
    Vector h;
    Matrix z;
};

Sample random_sample(Eigen::Index n, Eigen::Index q, std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> u(0.0, 17.0);
    std::normal_distribution<double> g;
    Sample s{Vector(n), Matrix(n, q)};
    for (Eigen::Index i = 0; i < n; ++i) {
        s.h(i) = u(rng);
        for (Eigen::Index j = 0; j < q; ++j) s.z(i, j) = 0.1 * (j + 1) * s.h(i) + g(rng);
    }
    return s;
}

double shifted_level(const Sample& s, double eps, const Vector& beta, const Matrix& omega)
{
    return t::level_ref(beta, omega, t::moments_ref(t::layout_ref(s.h, s.z, eps)));
}

}  // namespace

TEST(ComputeMoments, ThreePointFixture)
{
    auto m = compute_moments(fixture_012());
    EXPECT_NEAR(m.mean(0), 1.0, 1e-15);
    EXPECT_NEAR(m.mean(1), 1.0, 1e-15);
    EXPECT_NEAR(m.mean(2), 5.0 / 3.0, 1e-15);
    EXPECT_NEAR(m.cov(1, 1), 2.0 / 3.0, 1e-14);
    EXPECT_NEAR(m.cov(1, 2), 4.0 / 3.0, 1e-14);
    EXPECT_NEAR(m.cov(2, 2), 26.0 / 9.0, 1e-14);
    EXPECT_EQ(m.mean_shift, vec3(0, 1, 2));
    Matrix dv = Matrix::Zero(3, 3);
    dv(1, 2) = dv(2, 1) = 4.0 / 3.0;
    dv(2, 2) = 16.0 / 3.0;
    EXPECT_TRUE(m.cov_shift.isApprox(dv, 1e-14));
}

TEST(ComputeMoments, ShiftDerivativesMatchFiniteDifference)
{
    Vector h(3);
    h << 0, 1, 2;
    const double eps = 1e-5;
    auto up = t::moments_ref(t::layout_ref(h, Matrix(3, 0), eps));
    auto dn = t::moments_ref(t::layout_ref(h, Matrix(3, 0), -eps));
    auto m = compute_moments(fixture_012());
    EXPECT_LT(((up.mean - dn.mean) / (2 * eps) - m.mean_shift).cwiseAbs().maxCoeff(), 1e-6);
    EXPECT_LT(((up.cov - dn.cov) / (2 * eps) - m.cov_shift).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(ComputeMoments, StructuralZerosWithControls)
{
    std::mt19937_64 rng(3);
    auto s = random_sample(50, 3, rng);
    auto m = compute_moments(DesignMatrix(Vector::Zero(50), s.h, s.z));
    EXPECT_TRUE(m.cov.row(0).isZero(0.0));
    EXPECT_TRUE(m.cov.col(0).isZero(0.0));
    EXPECT_TRUE(m.cov_shift.row(0).isZero(0.0));
    EXPECT_TRUE(m.cov_shift.bottomRightCorner(3, 3).isZero(0.0));
    EXPECT_TRUE(m.cov_shift.block(1, 3, 1, 3).isZero(0.0));
    EXPECT_EQ(m.cov_shift, m.cov_shift.transpose());
    EXPECT_TRUE(m.mean_shift.tail(3).isZero(0.0));
    for (Eigen::Index j = 0; j < 3; ++j) EXPECT_NEAR(m.cov_shift(2, 3 + j), 2.0 * m.cov(1, 3 + j), 1e-12);
}

TEST(ComputeMoments, PopulationIdentities)
{
    std::mt19937_64 rng(5);
    auto s = random_sample(40, 0, rng);
    auto m = compute_moments(DesignMatrix(Vector::Zero(40), s.h, s.z));
    auto raw = [&](int k) { return s.h.array().pow(k).mean(); };
    for (int j = 0; j <= 2; ++j)
        for (int k = 0; k <= 2; ++k) {
            if (j == 0 || k == 0) continue;
            const double expect = raw(j + k) - raw(j) * raw(k);
            EXPECT_NEAR(m.cov(j, k), expect, 1e-10 * std::abs(expect));
        }
}

TEST(ComputeMoments, SampleConventionRescalesCovariance)
{
    std::mt19937_64 rng(6);
    auto s = random_sample(30, 1, rng);
    DesignMatrix d(Vector::Zero(30), s.h, s.z);
    auto pop = compute_moments(d, MomentConvention::population);
    auto smp = compute_moments(d, MomentConvention::sample);
    EXPECT_TRUE((pop.cov * 30.0 / 29.0).isApprox(smp.cov, 1e-13));
    EXPECT_TRUE((pop.cov_shift * 30.0 / 29.0).isApprox(smp.cov_shift, 1e-13));
    EXPECT_EQ(pop.mean_shift, smp.mean_shift);
}

TEST(ComputeMoments, TranslationOfEducation)
{
    std::mt19937_64 rng(7);
    auto s = random_sample(25, 1, rng);
    DesignMatrix d(Vector::Zero(25), s.h, s.z);
    auto a = compute_moments(shift_education(d, 3.0));
    auto b = t::moments_ref(t::layout_ref(s.h, s.z, 3.0));
    EXPECT_NEAR(a.mean_shift(2), 2.0 * b.mean(1), 1e-12);
    EXPECT_NEAR(a.cov_shift(1, 2), 2.0 * b.cov(1, 1), 1e-10);
    EXPECT_NEAR(a.cov_shift(2, 2), 4.0 * b.cov(1, 2), 1e-8);
}

TEST(InequalityLevel, Examples)
{
    auto m = compute_moments(fixture_012());
    EXPECT_NEAR(inequality_level(vec3(0, 1, 0), Matrix::Zero(3, 3), m), 2.0 / 3.0, 1e-14);
    Matrix om = Matrix::Zero(3, 3);
    om(0, 0) = 0.49;
    auto terms = inequality_terms(Vector::Zero(3), om, m);
    EXPECT_DOUBLE_EQ(terms.within_trace, 0.0);
    EXPECT_NEAR(terms.within_mean, 0.49, 1e-15);
    EXPECT_NEAR(terms.total(), 0.49, 1e-15);
}

TEST(InequalityLevel, MatchesVarianceOfGeneratedWages)
{
    SyntheticSpec spec = case_preset(3, 100000, 77);
    auto table = generate_synthetic(spec);
    auto m = compute_moments(build_design(table));
    const double level = inequality_level(spec.beta, spec.implied_omega(), m);
    EXPECT_NEAR(variance_of_logs(table.wage_log) / level, 1.0, 0.02);
}

TEST(Decompose, QuadraticFixture)
{
    auto r = decompose(vec3(0, 0, 1), Matrix::Zero(3, 3), compute_moments(fixture_012()));
    EXPECT_NEAR(r.between, 16.0 / 3.0, 1e-13);
    EXPECT_DOUBLE_EQ(r.within, 0.0);
    EXPECT_EQ(r.total, r.between + r.within);
    ASSERT_TRUE(r.share_between.has_value());
    EXPECT_DOUBLE_EQ(*r.share_between, 1.0);
}

TEST(Decompose, HeteroskedasticFixture)
{
    Matrix om = Matrix::Zero(3, 3);
    om(1, 1) = om(2, 2) = 1.0;
    auto r = decompose(vec3(0.3, 0.7, 0), om, compute_moments(fixture_012()));
    EXPECT_NEAR(r.within, 14.0, 1e-12);
    EXPECT_NEAR(r.between, 4.0 * 0.7 * 0.0, 1e-15);
}

TEST(Decompose, LinearHomoskedasticIsZero)
{
    Matrix om = Matrix::Zero(3, 3);
    om(0, 0) = 0.8;
    auto r = decompose(vec3(1, 0.1, 0), om, compute_moments(fixture_012()));
    EXPECT_DOUBLE_EQ(r.between, 0.0);
    EXPECT_DOUBLE_EQ(r.within, 0.0);
    EXPECT_FALSE(r.share_between.has_value());
    EXPECT_FALSE(r.share_within.has_value());
}

TEST(Decompose, SharesSumToOneForNegativeTotal)
{
    Matrix om = Matrix::Zero(3, 3);
    om(1, 1) = 1.0;
    auto r = decompose(vec3(0, -3, 1), om, compute_moments(fixture_012()));
    EXPECT_NEAR(r.total, -2.0 / 3.0, 1e-13);
    ASSERT_LT(r.total, 0.0);
    ASSERT_TRUE(r.share_between.has_value());
    EXPECT_NEAR(*r.share_between + *r.share_within, 1.0, 1e-14);
    EXPECT_NEAR(*r.share_between, r.between / r.total, 1e-15);
}

TEST(Decompose, DimensionMismatchIsError)
{
    auto m = compute_moments(fixture_012());
    EXPECT_THROW(decompose(Vector::Zero(4), Matrix::Zero(3, 3), m), DataError);
    EXPECT_THROW(decompose(Vector::Zero(3), Matrix::Zero(4, 4), m), DataError);
}

TEST(Decompose, AgreesWithFiniteDifferenceOracle)
{
    std::mt19937_64 rng(2024);
    std::normal_distribution<double> g(0.0, 0.1);
    for (int trial = 0; trial < 30; ++trial) {
        const Eigen::Index q = trial % 3;
        auto s = random_sample(200, q, rng);
        DesignMatrix d(Vector::Zero(200), s.h, s.z);
        Vector beta(3 + q);
        for (Eigen::Index j = 0; j < beta.size(); ++j) beta(j) = g(rng);
        Matrix omega = t::random_psd(3 + q, rng, 0.05);
        auto r = decompose(beta, omega, compute_moments(d));
        const double eps = 1e-4;
        const double fd = (shifted_level(s, eps, beta, omega) - shifted_level(s, -eps, beta, omega)) / (2 * eps);
        EXPECT_NEAR(r.total, fd, 1e-5 * std::abs(fd)) << "trial " << trial;
    }
}

TEST(Decompose, UncorrelatedControlIsInert)
{
    // z is orthogonal to h and h^2 on this balanced fixture.
    Vector h(6);
    h << 0, 1, 2, 0, 1, 2;
    Matrix z(6, 1);
    z << 2, 2, 2, 0, 0, 0;
    DesignMatrix with(Vector::Zero(6), h, z);
    DesignMatrix without(Vector::Zero(6), h, Matrix(6, 0));
    Vector b3 = vec3(0.2, 0.5, 0.1);
    Vector b4(4);
    b4 << b3, 0.9;
    Matrix o3 = Matrix::Identity(3, 3) * 0.1;
    Matrix o4 = Matrix::Zero(4, 4);
    o4.topLeftCorner(3, 3) = o3;
    auto a = decompose(b3, o3, compute_moments(without));
    auto b = decompose(b4, o4, compute_moments(with));
    EXPECT_NEAR(a.between, b.between, 1e-13);
    EXPECT_NEAR(a.within, b.within, 1e-13);
    // Omega(h, z) enters through 2 E_z Omega_hz dE_h with E_z = 1, dE_h = 1.
    o4(1, 3) = o4(3, 1) = 0.05;
    auto c = decompose(b4, o4, compute_moments(with));
    EXPECT_NEAR(c.between, a.between, 1e-13);
    EXPECT_NEAR(c.within - a.within, 2.0 * 0.05, 1e-13);
}

TEST(ClosedFormSimple, Examples)
{
    auto sm = scalar_moments(fixture_012().education());
    EXPECT_NEAR(sm.e3, 3.0, 1e-15);
    auto a = closed_form_simple(vec3(0, 0, 1), Matrix::Zero(3, 3), sm);
    EXPECT_NEAR(a.between, 16.0 / 3.0, 1e-14);
    Matrix om = Matrix::Zero(3, 3);
    om(1, 1) = om(2, 2) = 1.0;
    auto b = closed_form_simple(vec3(0, 0, 0), om, sm);
    EXPECT_NEAR(b.within, 14.0, 1e-14);
    auto c = closed_form_simple(Vector::Zero(3), Matrix::Zero(3, 3), ScalarMoments{});
    EXPECT_EQ(c.between, 0.0);
    EXPECT_EQ(c.within, 0.0);
}

TEST(ClosedFormSimple, AgreesWithMatrixForm)
{
    std::mt19937_64 rng(99);
    std::normal_distribution<double> g;
    std::uniform_real_distribution<double> u(0.0, 20.0);
    for (int trial = 0; trial < 200; ++trial) {
        Vector h(12);
        for (Eigen::Index i = 0; i < 12; ++i) h(i) = u(rng);
        DesignMatrix d(Vector::Zero(12), h, Matrix(12, 0));
        Vector beta = vec3(g(rng), g(rng), g(rng));
        Matrix omega = t::random_psd(3, rng);
        auto m = decompose(beta, omega, compute_moments(d));
        auto c = closed_form_simple(beta, omega, scalar_moments(h));
        EXPECT_NEAR(c.between, m.between, 1e-10 * (1 + std::abs(m.between)));
        EXPECT_NEAR(c.within, m.within, 1e-10 * (1 + std::abs(m.within)));
    }
}

TEST(CaseFormulas, Examples)
{
    CaseParams p;
    p.moments = scalar_moments(fixture_012().education());
    auto c1 = case_formulas(1, p);
    EXPECT_EQ(c1.between, 0.0);
    EXPECT_EQ(c1.within, 0.0);

    p.beta2 = 1.0;
    auto c2 = case_formulas(2, p);
    EXPECT_NEAR(c2.between, 16.0 / 3.0, 1e-14);
    EXPECT_EQ(c2.within, 0.0);

    p.beta2 = 0.0;
    p.omega(1, 1) = p.omega(2, 2) = 1.0;
    auto c3 = case_formulas(3, p);
    EXPECT_EQ(c3.between, 0.0);
    EXPECT_NEAR(c3.within, 14.0, 1e-14);
}

TEST(CaseFormulas, RestrictionsEnforced)
{
    CaseParams p;
    p.beta2 = 0.5;
    EXPECT_THROW(case_formulas(1, p), DataError);
    EXPECT_THROW(case_formulas(3, p), DataError);
    p.beta1 = 0.2;
    EXPECT_THROW(case_formulas(2, p), DataError);
    p = CaseParams{};
    p.omega(0, 1) = p.omega(1, 0) = 0.1;
    EXPECT_THROW(case_formulas(3, p), DataError);
    EXPECT_THROW(case_formulas(4, CaseParams{}), DataError);
}
