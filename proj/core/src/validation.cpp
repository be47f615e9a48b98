#include "ineq/validation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "ineq/error.hpp"

namespace ineq {
namespace {

constexpr const char* kModule = "validation";

// Smallest value of c0 + c1 h + c2 h^2 on [lo, hi].
double quadratic_min(double c0, double c1, double c2, double lo, double hi)
{
    auto f = [&](double h) { return c0 + c1 * h + c2 * h * h; };
    double m = std::min(f(lo), f(hi));
    if (c2 != 0.0) {
        const double vertex = -c1 / (2.0 * c2);
        if (vertex > lo && vertex < hi) m = std::min(m, f(vertex));
    }
    return m;
}

double draw_education(const EducationLaw& law, std::mt19937_64& rng)
{
    switch (law.kind) {
    case EducationLaw::Kind::uniform_int: {
        std::uniform_int_distribution<long long> d(static_cast<long long>(law.lo), static_cast<long long>(law.hi));
        return static_cast<double>(d(rng));
    }
    case EducationLaw::Kind::uniform_real:
        return std::uniform_real_distribution<double>(law.lo, law.hi)(rng);
    case EducationLaw::Kind::triangular: {
        const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
        const double span = law.hi - law.lo;
        const double cut = (law.mode - law.lo) / span;
        return u < cut ? law.lo + std::sqrt(u * span * (law.mode - law.lo))
                       : law.hi - std::sqrt((1.0 - u) * span * (law.hi - law.mode));
    }
    }
    return 0.0;
}

double draw_control(const ControlLaw& law, std::mt19937_64& rng)
{
    switch (law.kind) {
    case ControlLaw::Kind::normal:
        return std::normal_distribution<double>(law.a, law.b)(rng);
    case ControlLaw::Kind::uniform:
        return std::uniform_real_distribution<double>(law.a, law.b)(rng);
    case ControlLaw::Kind::bernoulli:
        return std::bernoulli_distribution(law.a)(rng) ? 1.0 : 0.0;
    }
    return 0.0;
}

double polynomial(const std::vector<double>& coef, double x, int derivative)
{
    double sum = 0.0;
    for (std::size_t k = static_cast<std::size_t>(derivative); k < coef.size(); ++k) {
        double factor = 1.0;
        for (int d = 0; d < derivative; ++d) factor *= static_cast<double>(k - static_cast<std::size_t>(d));
        sum += coef[k] * factor * std::pow(x, static_cast<double>(k) - derivative);
    }
    return sum;
}

}  // namespace

void SyntheticSpec::validate() const
{
    const auto p = static_cast<Eigen::Index>(3 + controls.size());
    if (n < 1) throw DataError(kModule, "synthetic sample size must be positive");
    if (beta.size() != p || gamma.size() != p)
        throw DataError(kModule, "beta and gamma need " + std::to_string(p) + " entries");
    if (!beta.allFinite() || !gamma.allFinite()) throw DataError(kModule, "non-finite coefficients");

    const auto& e = education;
    if (!(std::isfinite(e.lo) && std::isfinite(e.hi) && e.lo < e.hi))
        throw DataError(kModule, "education law needs lo < hi");
    if (e.kind == EducationLaw::Kind::triangular && !(e.mode >= e.lo && e.mode <= e.hi))
        throw DataError(kModule, "triangular mode must lie in [lo, hi]");
    if (e.kind == EducationLaw::Kind::uniform_int && (e.lo != std::floor(e.lo) || e.hi != std::floor(e.hi)))
        throw DataError(kModule, "integer education law needs integer bounds");

    double lowest = quadratic_min(gamma(0), gamma(1), gamma(2), e.lo, e.hi);
    for (std::size_t j = 0; j < controls.size(); ++j) {
        const auto& law = controls[j];
        const double c = gamma(static_cast<Eigen::Index>(3 + j));
        switch (law.kind) {
        case ControlLaw::Kind::normal:
            if (!(law.b > 0.0)) throw DataError(kModule, "normal control needs a positive sd");
            if (c != 0.0) lowest = -std::numeric_limits<double>::infinity();
            break;
        case ControlLaw::Kind::uniform:
            if (!(law.a < law.b)) throw DataError(kModule, "uniform control needs a < b");
            lowest += std::min(c * law.a, c * law.b);
            break;
        case ControlLaw::Kind::bernoulli:
            if (!(law.a > 0.0 && law.a < 1.0)) throw DataError(kModule, "bernoulli control needs 0 < p < 1");
            lowest += std::min(0.0, c);
            break;
        }
    }
    if (lowest < -1e-12)
        throw DataError(kModule, "heterogeneity loadings give x'c < 0 on the support (quantiles would cross)");
}

ObservationTable generate_synthetic(const SyntheticSpec& spec)
{
    spec.validate();
    const auto n = static_cast<Eigen::Index>(spec.n);
    const auto q = static_cast<Eigen::Index>(spec.controls.size());
    std::mt19937_64 rng(spec.seed);
    std::uniform_real_distribution<double> uniform(0.0, 1.0);

    ObservationTable t;
    t.wage_log.resize(n);
    t.education.resize(n);
    t.controls.resize(n, q);
    Vector x(3 + q);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double h = draw_education(spec.education, rng);
        x(0) = 1.0;
        x(1) = h;
        x(2) = h * h;
        for (Eigen::Index j = 0; j < q; ++j) {
            x(3 + j) = draw_control(spec.controls[static_cast<std::size_t>(j)], rng);
            t.controls(i, j) = x(3 + j);
        }
        const double u = uniform(rng);
        t.education(i) = h;
        t.wage_log(i) = x.dot(spec.beta) + x.dot(spec.gamma) * (u - 0.5);
    }
    return t;
}

SyntheticSpec case_preset(int which, std::size_t n, std::uint64_t seed)
{
    SyntheticSpec s;
    s.n = n;
    s.seed = seed;
    s.education = EducationLaw::uniform_int(0.0, 17.0);
    switch (which) {
    case 1:
        s.beta = Vector{{1.0, 0.08, 0.0}};
        s.gamma = Vector{{0.5, 0.0, 0.0}};
        break;
    case 2:
        s.beta = Vector{{1.0, 0.0, 0.01}};
        s.gamma = Vector{{0.5, 0.0, 0.0}};
        break;
    case 3:
        s.beta = Vector{{1.0, 0.01, 0.0}};
        s.gamma = Vector{{0.1, 0.05, 0.003}};
        break;
    default:
        throw DataError(kModule, "case must be 1, 2 or 3");
    }
    return s;
}

double variance_of_logs(const Vector& w)
{
    if (w.size() == 0) throw DataError(kModule, "variance of an empty sample");
    const double mean = w.mean();
    return (w.array() - mean).square().mean();
}

double gini(const Vector& levels)
{
    if (levels.size() == 0) throw DataError(kModule, "gini of an empty sample");
    if ((levels.array() <= 0.0).any()) throw DataError(kModule, "gini requires positive values");
    std::vector<double> sorted(levels.data(), levels.data() + levels.size());
    std::sort(sorted.begin(), sorted.end());
    const auto n = static_cast<double>(sorted.size());
    double weighted = 0.0;
    double total = 0.0;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        weighted += (2.0 * static_cast<double>(i + 1) - n - 1.0) * sorted[i];
        total += sorted[i];
    }
    // sum_i sum_j |x_i - x_j| = 2 sum_i (2i - n - 1) x_(i); mean = total / n.
    return weighted / (n * total);
}

double simulate_location_shift(const DesignMatrix& design, const MeanFit& fit, double eps)
{
    if (!(eps > 0.0)) throw DataError(kModule, "location shift must be positive");
    const DesignMatrix shifted = shift_education(design, eps);
    const Vector ws = shifted.regressors() * fit.beta + fit.residuals;
    return (variance_of_logs(ws) - variance_of_logs(design.response())) / eps;
}

double rif_variance_effect(const DesignMatrix& design)
{
    const Vector& w = design.response();
    const Vector rif = (w.array() - w.mean()).square().matrix();
    const MeanFit fit = fit_ols(design.with_response(rif));
    const double mean_h = design.education().mean();
    return fit.beta(DesignMatrix::education_col) + 2.0 * mean_h * fit.beta(DesignMatrix::education_sq_col);
}

std::vector<double> a1_variance_curve(const A1Process& process, const std::vector<double>& eps_list,
                                      std::size_t n, std::uint64_t seed)
{
    if (n < 2) throw DataError(kModule, "need at least two draws");
    if (eps_list.empty()) return {};
    if (!(process.x_lo < process.x_hi)) throw DataError(kModule, "X support needs x_lo < x_hi");

    const auto [eps_min, eps_max] = std::minmax_element(eps_list.begin(), eps_list.end());
    const double lo = process.x_lo + *eps_min;
    const double hi = process.x_hi + *eps_max;

    if (process.kind == A1Process::Kind::convex_mean) {
        if (process.poly.empty()) throw DataError(kModule, "convex_mean needs polynomial coefficients");
        constexpr int checks = 1025;
        for (int k = 0; k < checks; ++k) {
            const double x = lo + (hi - lo) * k / (checks - 1);
            const double slope = polynomial(process.poly, x, 1);
            const double curvature = polynomial(process.poly, x, 2);
            if (slope < -1e-12 || curvature < -1e-12)
                throw DataError(kModule, "f must be increasing and convex on the shifted support");
        }
    } else {
        if (process.b1 < 0.0 || process.b0 + process.b1 * lo <= 0.0 || process.b0 + process.b1 * hi <= 0.0)
            throw DataError(kModule, "b must be positive and nondecreasing on the shifted support");
    }

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<double> xs(n), us(n);
    for (std::size_t i = 0; i < n; ++i) {
        xs[i] = process.x_lo + (process.x_hi - process.x_lo) * unit(rng);
        us[i] = unit(rng);
    }

    std::vector<double> out;
    out.reserve(eps_list.size());
    Vector y(static_cast<Eigen::Index>(n));
    for (const double eps : eps_list) {
        for (std::size_t i = 0; i < n; ++i) {
            const double x = xs[i] + eps;
            const auto idx = static_cast<Eigen::Index>(i);
            if (process.kind == A1Process::Kind::convex_mean) {
                y(idx) = polynomial(process.poly, x, 0);
            } else {
                y(idx) = process.a0 + process.a1 * x + (process.b0 + process.b1 * x) * (us[i] - 0.5);
            }
        }
        out.push_back(variance_of_logs(y));
    }
    return out;
}

}  // namespace ineq
