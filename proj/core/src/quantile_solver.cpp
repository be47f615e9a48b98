#include "ineq/quantile_solver.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>
#include <vector>

#include "ineq/error.hpp"

namespace ineq {
namespace {

constexpr const char* kModule = "estimators";

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

void check_tau(double tau)
{
    if (!(tau > 0.0 && tau < 1.0)) {
        std::ostringstream msg;
        msg << "quantile index must lie in (0,1), got " << tau;
        throw DataError(kModule, msg.str());
    }
}

bool gap_closed(double gap, double objective, const QuantileSolverOptions& options)
{
    return gap <= options.gap_tolerance * (1.0 + std::abs(objective));
}

// Ratio bound for v + step * dv >= 0.
inline void limit_step(double v, double dv, double& step)
{
    if (dv < 0.0) step = std::min(step, -v / dv);
}

// Picks p rows with the smallest absolute residuals that span R^p and solves
// the interpolation system through them.
bool vertex_from_residuals(const Matrix& x, const Vector& y, const Vector& residuals, Vector& coef)
{
    const Eigen::Index n = x.rows();
    const Eigen::Index p = x.cols();
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    const auto take = std::min<std::size_t>(order.size(), static_cast<std::size_t>(8 * p + 32));
    auto by_residual = [&](Eigen::Index a, Eigen::Index b) { return std::abs(residuals(a)) < std::abs(residuals(b)); };
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(take), order.end(), by_residual);

    Matrix basis(p, p);
    Matrix ortho(p, p);
    Vector rhs(p);
    Eigen::Index chosen = 0;
    for (std::size_t k = 0; k < order.size() && chosen < p; ++k) {
        if (k == take) std::sort(order.begin() + static_cast<std::ptrdiff_t>(take), order.end(), by_residual);
        const Eigen::Index i = order[k];
        Vector v = x.row(i).transpose();
        const double norm = v.norm();
        if (norm == 0.0) continue;
        for (Eigen::Index j = 0; j < chosen; ++j) v -= ortho.col(j).dot(v) * ortho.col(j);
        if (v.norm() <= 1e-8 * norm) continue;
        ortho.col(chosen) = v.normalized();
        basis.row(chosen) = x.row(i);
        rhs(chosen) = y(i);
        ++chosen;
    }
    if (chosen < p) return false;
    coef = basis.partialPivLu().solve(rhs);
    return coef.allFinite();
}

// Interior point iterations on the bounded LP
//   min c'a  s.t.  X'a = b,  a + s = 1,  a, s >= 0,   c = -y, b = (1 - tau) X'1
// with dual X d + z - w = c. The QR coefficients are -d.
QuantileSolution interior_point(const Matrix& x, const Vector& y, double tau, const QuantileSolverOptions& options)
{
    const Eigen::Index n = x.rows();
    const Eigen::Index p = x.cols();
    const auto np = static_cast<std::size_t>(p);
    constexpr double damping = 0.99995;
    const double inv_2n = 1.0 / (2.0 * static_cast<double>(n));

    const RowMatrix xr = x;
    const double* X = xr.data();
    const double* Y = y.data();
    const Vector b = (1.0 - tau) * x.colwise().sum().transpose();

    Eigen::LDLT<Matrix> gram(x.transpose() * x);
    if (gram.info() != Eigen::Success) throw NumericalError(kModule, "singular design in quantile solver");
    Vector dual = -gram.solve(x.transpose() * y);

    std::vector<double> a(static_cast<std::size_t>(n), 1.0 - tau), s(static_cast<std::size_t>(n), tau);
    std::vector<double> z(a.size()), w(a.size()), theta(a.size()), rd(a.size());
    std::vector<double> da(a.size()), dz(a.size()), dw(a.size()), inv_a(a.size()), inv_s(a.size());

    double abs_mean = 0.0, y_abs = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double* xi = X + i * p;
        double fit = 0.0;
        for (std::size_t j = 0; j < np; ++j) fit += xi[j] * dual(static_cast<Eigen::Index>(j));
        rd[static_cast<std::size_t>(i)] = -Y[i] - fit;  // c - X d
        abs_mean += std::abs(rd[static_cast<std::size_t>(i)]);
        y_abs += std::abs(Y[i]);
    }
    abs_mean /= static_cast<double>(n);
    y_abs /= static_cast<double>(n);
    const double shift = std::max(0.1 * abs_mean, 1e-3 * (1.0 + y_abs));
    for (std::size_t i = 0; i < a.size(); ++i) {
        z[i] = std::max(rd[i], 0.0) + shift;
        w[i] = std::max(-rd[i], 0.0) + shift;
    }

    const double y_sum = y.sum();
    auto evaluate = [&](const Vector& coef, double& objective, double& bound) {
        objective = 0.0;
        bound = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            const double* xi = X + i * p;
            double fit = 0.0;
            for (std::size_t j = 0; j < np; ++j) fit += xi[j] * coef(static_cast<Eigen::Index>(j));
            const double r = Y[i] - fit;
            objective += r < 0.0 ? (tau - 1.0) * r : tau * r;
            bound += Y[i] * a[static_cast<std::size_t>(i)];
        }
        bound -= (1.0 - tau) * y_sum;
    };

    QuantileSolution best;
    best.coef = -dual;
    {
        double bound = 0.0;
        evaluate(best.coef, best.objective, bound);
        best.gap = best.objective - bound;
    }

    Matrix normal(p, p);
    Vector rhs(p), rhs_sigma(p), primal_res(p), ddual(p);
    Eigen::LDLT<Matrix> ldlt(p);

    int iter = 0;
    bool converged = gap_closed(best.gap, best.objective, options);
    for (; iter < options.max_iterations && !converged; ++iter) {
        // Residuals, scaling and the predictor right-hand side.
        normal.setZero();
        rhs.setZero();
        primal_res = b;
        double comp = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            const auto k = static_cast<std::size_t>(i);
            const double* xi = X + i * p;
            double fit = 0.0;
            for (std::size_t j = 0; j < np; ++j) fit += xi[j] * dual(static_cast<Eigen::Index>(j));
            rd[k] = -Y[i] - fit - z[k] + w[k];
            inv_a[k] = 1.0 / a[k];
            inv_s[k] = 1.0 / s[k];
            theta[k] = 1.0 / (z[k] * inv_a[k] + w[k] * inv_s[k]);
            comp += a[k] * z[k] + s[k] * w[k];
            const double tr = theta[k] * (w[k] - z[k] - rd[k]);
            for (std::size_t j = 0; j < np; ++j) {
                const double tx = theta[k] * xi[j];
                primal_res(static_cast<Eigen::Index>(j)) -= xi[j] * a[k];
                rhs(static_cast<Eigen::Index>(j)) += xi[j] * tr;
                for (std::size_t l = j; l < np; ++l) normal(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(l)) += tx * xi[l];
            }
        }
        normal.triangularView<Eigen::StrictlyLower>() = normal.transpose();
        ldlt.compute(normal);
        if (ldlt.info() != Eigen::Success) break;
        const double mu = comp * inv_2n;

        // Predictor direction and its step lengths.
        ddual = ldlt.solve(primal_res - rhs);
        double step_p = std::numeric_limits<double>::infinity(), step_d = step_p;
        for (Eigen::Index i = 0; i < n; ++i) {
            const auto k = static_cast<std::size_t>(i);
            const double* xi = X + i * p;
            double xd = 0.0;
            for (std::size_t j = 0; j < np; ++j) xd += xi[j] * ddual(static_cast<Eigen::Index>(j));
            da[k] = theta[k] * (xd + w[k] - z[k] - rd[k]);
            dz[k] = -z[k] - z[k] * da[k] * inv_a[k];
            dw[k] = -w[k] + w[k] * da[k] * inv_s[k];
            limit_step(a[k], da[k], step_p);
            limit_step(s[k], -da[k], step_p);
            limit_step(z[k], dz[k], step_d);
            limit_step(w[k], dw[k], step_d);
        }
        step_p = std::min(1.0, step_p);
        step_d = std::min(1.0, step_d);

        // Affine complementarity and the corrector right-hand side, which is
        // linear in sigma: rhs = sigma * mu * rhs_sigma + rhs.
        rhs.setZero();
        rhs_sigma.setZero();
        double comp_aff = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            const auto k = static_cast<std::size_t>(i);
            const double* xi = X + i * p;
            const double ds = -da[k];
            comp_aff += (a[k] + step_p * da[k]) * (z[k] + step_d * dz[k]) +
                        (s[k] + step_p * ds) * (w[k] + step_d * dw[k]);
            const double fixed = -z[k] - da[k] * dz[k] * inv_a[k] + w[k] + ds * dw[k] * inv_s[k] - rd[k];
            const double scaled = inv_a[k] - inv_s[k];
            for (std::size_t j = 0; j < np; ++j) {
                rhs(static_cast<Eigen::Index>(j)) += theta[k] * xi[j] * fixed;
                rhs_sigma(static_cast<Eigen::Index>(j)) += theta[k] * xi[j] * scaled;
            }
        }
        const double mu_aff = comp_aff * inv_2n;
        const double sigma = std::pow(mu_aff / mu, 3);
        const double smu = sigma * mu;

        // Corrector direction.
        ddual = ldlt.solve(primal_res - smu * rhs_sigma - rhs);
        step_p = std::numeric_limits<double>::infinity();
        step_d = step_p;
        for (Eigen::Index i = 0; i < n; ++i) {
            const auto k = static_cast<std::size_t>(i);
            const double* xi = X + i * p;
            double xd = 0.0;
            for (std::size_t j = 0; j < np; ++j) xd += xi[j] * ddual(static_cast<Eigen::Index>(j));
            const double ds_aff = -da[k];
            const double t_az = smu - a[k] * z[k] - da[k] * dz[k];
            const double t_sw = smu - s[k] * w[k] - ds_aff * dw[k];
            const double rho = t_az * inv_a[k] - t_sw * inv_s[k] - rd[k];
            const double dak = theta[k] * (xd + rho);
            da[k] = dak;
            dz[k] = (t_az - z[k] * dak) * inv_a[k];
            dw[k] = (t_sw + w[k] * dak) * inv_s[k];
            limit_step(a[k], dak, step_p);
            limit_step(s[k], -dak, step_p);
            limit_step(z[k], dz[k], step_d);
            limit_step(w[k], dw[k], step_d);
        }
        step_p = std::min(1.0, damping * step_p);
        step_d = std::min(1.0, damping * step_d);

        dual += step_d * ddual;
        for (std::size_t k = 0; k < a.size(); ++k) {
            a[k] += step_p * da[k];
            s[k] -= step_p * da[k];
            z[k] += step_d * dz[k];
            w[k] += step_d * dw[k];
        }

        const Vector coef = -dual;
        double objective = 0.0, bound = 0.0;
        evaluate(coef, objective, bound);
        if (objective < best.objective) {
            best.coef = coef;
            best.objective = objective;
        }
        best.gap = best.objective - bound;
        converged = gap_closed(best.gap, best.objective, options);
    }
    best.iterations = iter;
    return best;
}

// Replaces the coefficients by an exact-fit basis when that is no worse.
void polish(const Matrix& x, const Vector& y, double tau, QuantileSolution& sol)
{
    Vector vertex;
    if (vertex_from_residuals(x, y, y - x * sol.coef, vertex)) {
        const double objective = check_loss(y - x * vertex, tau);
        if (objective <= sol.objective) {
            sol.gap -= sol.objective - objective;
            sol.coef = vertex;
            sol.objective = objective;
        }
    }
    sol.gap = std::max(sol.gap, 0.0);
}

QuantileSolution solve_direct(const Matrix& x, const Vector& y, double tau, const QuantileSolverOptions& options)
{
    QuantileSolution sol = interior_point(x, y, tau, options);
    polish(x, y, tau, sol);
    return sol;
}

std::uint64_t subsample_seed(Eigen::Index n, double tau)
{
    std::uint64_t h = std::bit_cast<std::uint64_t>(tau) ^ (static_cast<std::uint64_t>(n) * 0x9E3779B97F4A7C15ULL);
    h ^= h >> 33;
    h *= 0xFF51AFD7ED558CCDULL;
    h ^= h >> 33;
    return h;
}

double order_statistic(std::vector<double> v, double q)
{
    const auto k = std::min(v.size() - 1, static_cast<std::size_t>(std::floor(q * static_cast<double>(v.size()))));
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(k), v.end());
    return v[k];
}

// Portnoy-Koenker preprocessing: fit on a subsample, predict which
// observations lie clearly above or below the tau-quantile plane, replace
// each group by a single summed pseudo-observation, solve the reduced problem
// and accept it once every predicted sign is confirmed. A confirmed reduced
// solution is optimal for the full problem and its duality gap carries over.
QuantileSolution solve_preprocessed(const Matrix& x, const Vector& y, double tau,
                                    const QuantileSolverOptions& options)
{
    const Eigen::Index n = x.rows();
    const Eigen::Index p = x.cols();
    const double dn = static_cast<double>(n);
    auto m = static_cast<Eigen::Index>(std::round(std::pow(static_cast<double>(p + 1) * dn, 2.0 / 3.0)));
    std::mt19937_64 rng(subsample_seed(n, tau));
    std::vector<Eigen::Index> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), Eigen::Index{0});

    constexpr int max_fixups = 3;
    while (m < n) {
        // Partial Fisher-Yates for a subsample of size m.
        for (Eigen::Index k = 0; k < m; ++k) {
            std::uniform_int_distribution<Eigen::Index> pick(k, n - 1);
            std::swap(perm[static_cast<std::size_t>(k)], perm[static_cast<std::size_t>(pick(rng))]);
        }
        Matrix xs(m, p);
        Vector ys(m);
        for (Eigen::Index k = 0; k < m; ++k) {
            xs.row(k) = x.row(perm[static_cast<std::size_t>(k)]);
            ys(k) = y(perm[static_cast<std::size_t>(k)]);
        }
        Eigen::LLT<Matrix> chol(xs.transpose() * xs);
        if (chol.info() != Eigen::Success) {
            m *= 2;
            continue;
        }
        const Vector pilot = solve_direct(xs, ys, tau, options).coef;

        // Band: standard-error proxy |L^-1 x_i| from the subsample Gram matrix.
        const Matrix scaled = chol.matrixL().solve(x.transpose());
        const Vector band = scaled.colwise().norm().transpose();
        Vector r = y - x * pilot;
        std::vector<double> standardized(static_cast<std::size_t>(n));
        for (Eigen::Index i = 0; i < n; ++i)
            standardized[static_cast<std::size_t>(i)] = r(i) / std::max(1e-12, band(i));
        const double kept = 0.8 * static_cast<double>(m);
        const double lo_q = std::max(1.0 / dn, tau - kept / (2.0 * dn));
        const double hi_q = std::min(tau + kept / (2.0 * dn), (dn - 1.0) / dn);
        const double kappa_lo = order_statistic(standardized, lo_q);
        const double kappa_hi = order_statistic(standardized, hi_q);

        std::vector<char> below(static_cast<std::size_t>(n)), above(static_cast<std::size_t>(n));
        for (Eigen::Index i = 0; i < n; ++i) {
            below[static_cast<std::size_t>(i)] = r(i) < band(i) * kappa_lo;
            above[static_cast<std::size_t>(i)] = r(i) > band(i) * kappa_hi;
        }

        bool grow = false;
        for (int fixup = 0; fixup <= max_fixups; ++fixup) {
            Eigen::Index middle = 0;
            bool any_below = false, any_above = false;
            for (Eigen::Index i = 0; i < n; ++i) {
                const auto k = static_cast<std::size_t>(i);
                any_below |= below[k] != 0;
                any_above |= above[k] != 0;
                if (!below[k] && !above[k]) ++middle;
            }
            const Eigen::Index rows = middle + (any_below ? 1 : 0) + (any_above ? 1 : 0);
            Matrix xr = Matrix::Zero(rows, p);
            Vector yr = Vector::Zero(rows);
            Eigen::Index next = 0;
            const Eigen::Index glob_lo = any_below ? middle : -1;
            const Eigen::Index glob_hi = any_above ? middle + (any_below ? 1 : 0) : -1;
            for (Eigen::Index i = 0; i < n; ++i) {
                const auto k = static_cast<std::size_t>(i);
                const Eigen::Index target = below[k] ? glob_lo : above[k] ? glob_hi : next++;
                xr.row(target) += x.row(i);
                yr(target) += y(i);
            }

            QuantileSolution reduced = interior_point(xr, yr, tau, options);
            r = y - x * reduced.coef;
            Eigen::Index bad = 0;
            for (Eigen::Index i = 0; i < n; ++i) {
                const auto k = static_cast<std::size_t>(i);
                if ((below[k] && r(i) > 0.0) || (above[k] && r(i) < 0.0)) {
                    below[k] = above[k] = 0;
                    ++bad;
                }
            }
            if (bad == 0) {
                reduced.objective = check_loss(r, tau);
                polish(x, y, tau, reduced);
                return reduced;
            }
            if (static_cast<double>(bad) > 0.1 * kept) {
                grow = true;
                break;
            }
        }
        if (!grow) break;  // fixups exhausted: fall back to the full problem
        m *= 2;
    }
    return solve_direct(x, y, tau, options);
}

}  // namespace

double check_loss(const Vector& residuals, double tau)
{
    double sum = 0.0;
    for (Eigen::Index i = 0; i < residuals.size(); ++i) {
        const double r = residuals(i);
        sum += r < 0.0 ? (tau - 1.0) * r : tau * r;
    }
    return sum;
}

QuantileSolution solve_quantile(const Matrix& x, const Vector& y, double tau, const QuantileSolverOptions& options)
{
    check_tau(tau);
    const Eigen::Index n = x.rows();
    const Eigen::Index p = x.cols();
    if (y.size() != n) throw DataError(kModule, "response length does not match design");
    if (n < p || p == 0) throw NumericalError(kModule, "quantile regression needs n >= p >= 1");

    QuantileSolution sol = options.preprocess && n >= options.preprocess_min_rows
                               ? solve_preprocessed(x, y, tau, options)
                               : solve_direct(x, y, tau, options);

    if (!gap_closed(sol.gap, sol.objective, options)) {
        std::ostringstream msg;
        msg << "quantile solver did not converge at tau=" << tau << " after " << sol.iterations
            << " iterations (gap " << sol.gap << ")";
        throw NumericalError(kModule, msg.str());
    }
    return sol;
}

Vector fit_quantile(const DesignMatrix& design, double tau, const QuantileSolverOptions& options)
{
    return solve_quantile(design.regressors(), design.response(), tau, options).coef;
}

QuantileSolution qr_oracle_smalln(const Matrix& x, const Vector& y, double tau)
{
    check_tau(tau);
    const Eigen::Index n = x.rows();
    const Eigen::Index p = x.cols();
    if (n > 15 || p > 4) throw DataError(kModule, "exact oracle is limited to n <= 15 and p <= 4");
    if (p == 0 || n < p) throw DataError(kModule, "exact oracle needs n >= p >= 1");
    if (y.size() != n) throw DataError(kModule, "response length does not match design");

    QuantileSolution best;
    best.objective = std::numeric_limits<double>::infinity();

    std::vector<Eigen::Index> subset(static_cast<std::size_t>(p));
    std::iota(subset.begin(), subset.end(), Eigen::Index{0});
    Matrix basis(p, p);
    Vector rhs(p);
    for (;;) {
        for (Eigen::Index j = 0; j < p; ++j) {
            basis.row(j) = x.row(subset[static_cast<std::size_t>(j)]);
            rhs(j) = y(subset[static_cast<std::size_t>(j)]);
        }
        Eigen::FullPivLU<Matrix> lu(basis);
        lu.setThreshold(1e-12);
        if (lu.isInvertible()) {
            const Vector coef = lu.solve(rhs);
            const double objective = check_loss(y - x * coef, tau);
            if (objective < best.objective) {
                best.objective = objective;
                best.coef = coef;
            }
        }
        // Next combination in lexicographic order.
        Eigen::Index k = p - 1;
        while (k >= 0 && subset[static_cast<std::size_t>(k)] == n - p + k) --k;
        if (k < 0) break;
        ++subset[static_cast<std::size_t>(k)];
        for (Eigen::Index j = k + 1; j < p; ++j)
            subset[static_cast<std::size_t>(j)] = subset[static_cast<std::size_t>(j - 1)] + 1;
    }
    if (!std::isfinite(best.objective)) throw NumericalError(kModule, "every candidate basis is singular");
    return best;
}

QuantileSolution qr_oracle_smalln(const DesignMatrix& design, double tau)
{
    return qr_oracle_smalln(design.regressors(), design.response(), tau);
}

}  // namespace ineq
