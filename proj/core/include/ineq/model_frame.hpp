#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "ineq/types.hpp"

namespace ineq {

/// Which CSV columns hold the wage, the years of education and the controls.
struct CovariateSpec {
    std::string wage_column;
    std::string education_column;
    std::vector<std::string> control_columns;
    /// When false the wage column holds levels and is log-transformed at load.
    bool wage_is_log = true;

    /// Throws DataError if names repeat or education appears among controls.
    void validate() const;
};

/// Cleaned microdata. All stored values are finite.
struct ObservationTable {
    Vector wage_log;
    Vector education;
    Matrix controls;  // n x Q
    std::size_t dropped_rows = 0;

    std::size_t rows() const { return static_cast<std::size_t>(wage_log.size()); }
    std::size_t control_count() const { return static_cast<std::size_t>(controls.cols()); }

    /// Rows selected by index, in the given order (used by resampling).
    ObservationTable select(const std::vector<std::size_t>& index) const;
};

/// Response plus regressors with layout [1, h, h^2, z_1..z_Q].
class DesignMatrix {
public:
    static constexpr Eigen::Index intercept_col = 0;
    static constexpr Eigen::Index education_col = 1;
    static constexpr Eigen::Index education_sq_col = 2;
    static constexpr Eigen::Index first_control_col = 3;

    /// Assembles the layout and checks full column rank.
    DesignMatrix(Vector wage_log, const Vector& education, const Matrix& controls);

    const Vector& response() const { return w_; }
    const Matrix& regressors() const { return x_; }
    Eigen::Index rows() const { return x_.rows(); }
    Eigen::Index cols() const { return x_.cols(); }
    Eigen::Index control_count() const { return x_.cols() - first_control_col; }
    auto education() const { return x_.col(education_col); }

    /// Same regressors, different response (wild bootstrap, rescaling).
    DesignMatrix with_response(Vector w) const;

private:
    struct Unchecked {};
    DesignMatrix(Unchecked, Vector w, Matrix x) : w_(std::move(w)), x_(std::move(x)) {}
    friend DesignMatrix shift_education(const DesignMatrix&, double);

    Vector w_;
    Matrix x_;
};

/// Relative pivot tolerance for the rank check.
inline constexpr double rank_tolerance = 1e-10;

/// Reads a comma-separated file with a header row. Rows with a missing,
/// non-numeric or non-finite value in any selected column are dropped and
/// counted, as are rows with a non-positive wage when the log is requested.
ObservationTable load_table(const std::filesystem::path& path, const CovariateSpec& spec);
ObservationTable read_table(std::istream& in, const CovariateSpec& spec);

/// Writes the table with columns [wage, education, controls...] using the
/// names in `spec`, in a form read_table accepts. Wages are written as logs.
void write_table(std::ostream& out, const ObservationTable& table, const CovariateSpec& spec);

DesignMatrix build_design(const ObservationTable& table);

/// Location shift of education: h -> h + eps and h^2 -> (h + eps)^2.
DesignMatrix shift_education(const DesignMatrix& design, double eps);

}  // namespace ineq
