#include "ineq/estimators.hpp"

#include <cmath>
#include <sstream>
#include <string>

#include "ineq/error.hpp"
#include "ineq/parallel.hpp"

namespace ineq {
namespace {

constexpr const char* kModule = "estimators";

}  // namespace

MeanFit fit_ols(const DesignMatrix& design)
{
    return fit_ols(design.regressors(), design.response());
}

MeanFit fit_ols(const Matrix& x, const Vector& w)
{
    if (w.size() != x.rows()) throw DataError(kModule, "response length does not match design");
    if (x.rows() < x.cols()) throw NumericalError(kModule, "least-squares system has fewer rows than columns");
    Eigen::ColPivHouseholderQR<Matrix> qr(x);
    qr.setThreshold(rank_tolerance);
    if (qr.rank() < x.cols()) throw NumericalError(kModule, "least-squares system is numerically singular");

    MeanFit fit;
    fit.beta = qr.solve(w);
    fit.fitted = x * fit.beta;
    fit.residuals = w - fit.fitted;
    return fit;
}

QuantileGrid::QuantileGrid(double trim, double mesh) : trim_(trim), mesh_(mesh)
{
    if (!(trim > 0.0 && trim < 0.5)) throw DataError(kModule, "grid trim must lie in (0, 0.5)");
    if (!(mesh > 0.0)) throw DataError(kModule, "grid mesh must be positive");
    const double span = 1.0 - 2.0 * trim;
    const double steps = std::round(span / mesh);
    if (std::abs(steps * mesh - span) > 1e-9 * std::max(1.0, mesh)) {
        std::ostringstream msg;
        msg << "grid span " << span << " is not a multiple of the mesh " << mesh;
        throw DataError(kModule, msg.str());
    }
    const auto count = static_cast<std::size_t>(steps) + 1;
    taus_.resize(count);
    // Build symmetrically from both ends so that tau_m + tau_{M-1-m} = 1.
    for (std::size_t m = 0; m < count; ++m) {
        const std::size_t k = std::min(m, count - 1 - m);
        const double lo = trim + static_cast<double>(k) * mesh;
        taus_[m] = m == k ? lo : 1.0 - lo;
    }
    if (count % 2 == 1) taus_[count / 2] = 0.5;
}

QuantileGrid QuantileGrid::parse(const std::string& text)
{
    double lo = 0.0, hi = 0.0, step = 0.0;
    char c1 = 0, c2 = 0;
    std::istringstream in(text);
    if (!(in >> lo >> c1 >> hi >> c2 >> step) || c1 != ':' || c2 != ':' || !(in >> std::ws).eof())
        throw DataError(kModule, "grid must be written as min:max:step, got '" + text + "'");
    if (std::abs(lo + hi - 1.0) > 1e-12)
        throw DataError(kModule, "grid endpoints must be symmetric (max = 1 - min)");
    return QuantileGrid(lo, step);
}

QuantileProfile fit_profile(const DesignMatrix& design, const QuantileGrid& grid, const ProfileOptions& options)
{
    const auto& taus = grid.taus();
    Matrix alpha(static_cast<Eigen::Index>(taus.size()), design.cols());
    const unsigned workers = options.workers == 0 ? default_worker_count() : options.workers;
    parallel_for(taus.size(), workers, [&](std::size_t m) {
        alpha.row(static_cast<Eigen::Index>(m)) =
            solve_quantile(design.regressors(), design.response(), taus[m], options.solver).coef.transpose();
    });
    if (!alpha.allFinite()) throw NumericalError(kModule, "non-finite quantile coefficients");
    return QuantileProfile{grid, std::move(alpha)};
}

GammaCovariance estimate_omega(const Matrix& alpha, const Vector& beta)
{
    if (alpha.cols() != beta.size())
        throw DataError(kModule, "profile has " + std::to_string(alpha.cols()) + " columns but beta has " +
                                     std::to_string(beta.size()) + " entries");
    if (alpha.rows() == 0) throw DataError(kModule, "empty quantile profile");

    const Matrix dev = alpha.rowwise() - beta.transpose();
    Matrix omega = (dev.transpose() * dev) / static_cast<double>(alpha.rows());
    omega = 0.5 * (omega + omega.transpose()).eval();

    const double trace = omega.trace();
    Eigen::SelfAdjointEigenSolver<Matrix> eig(omega);
    const double min_eig = eig.eigenvalues().minCoeff();
    if (min_eig < 0.0) {
        if (min_eig < -1e-10 * trace) {
            std::ostringstream msg;
            msg << "dispersion matrix is not positive semidefinite (min eigenvalue " << min_eig << ")";
            throw NumericalError(kModule, msg.str());
        }
        const Vector clipped = eig.eigenvalues().cwiseMax(0.0);
        omega = eig.eigenvectors() * clipped.asDiagonal() * eig.eigenvectors().transpose();
        omega = 0.5 * (omega + omega.transpose()).eval();
    }
    return GammaCovariance{std::move(omega)};
}

GammaCovariance estimate_omega(const QuantileProfile& profile, const MeanFit& mean_fit)
{
    return estimate_omega(profile.alpha, mean_fit.beta);
}

}  // namespace ineq
