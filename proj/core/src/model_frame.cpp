#include "ineq/model_frame.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string_view>
#include <unordered_map>

#include "ineq/error.hpp"

namespace ineq {
namespace {

constexpr const char* kModule = "model_frame";

std::string_view trim(std::string_view s)
{
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
    return s;
}

std::vector<std::string_view> split_fields(std::string_view line)
{
    std::vector<std::string_view> out;
    std::size_t start = 0;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        if (line[i] == '"') quoted = !quoted;
        else if (line[i] == ',' && !quoted) {
            out.push_back(trim(line.substr(start, i - start)));
            start = i + 1;
        }
    }
    out.push_back(trim(line.substr(start)));
    return out;
}

std::optional<double> parse_number(std::string_view s)
{
    if (s.empty()) return std::nullopt;
    if (s.front() == '+') s.remove_prefix(1);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
    return v;
}

}  // namespace

void CovariateSpec::validate() const
{
    if (wage_column.empty() || education_column.empty())
        throw DataError(kModule, "wage and education column names are required");
    std::set<std::string> seen{wage_column};
    if (!seen.insert(education_column).second)
        throw DataError(kModule, "wage and education columns must differ");
    for (const auto& c : control_columns) {
        if (c == education_column)
            throw DataError(kModule, "education column '" + c + "' listed among controls");
        if (!seen.insert(c).second) throw DataError(kModule, "duplicate column name '" + c + "'");
    }
}

ObservationTable ObservationTable::select(const std::vector<std::size_t>& index) const
{
    ObservationTable out;
    const auto m = static_cast<Eigen::Index>(index.size());
    out.wage_log.resize(m);
    out.education.resize(m);
    out.controls.resize(m, controls.cols());
    for (Eigen::Index i = 0; i < m; ++i) {
        const auto src = static_cast<Eigen::Index>(index[static_cast<std::size_t>(i)]);
        out.wage_log(i) = wage_log(src);
        out.education(i) = education(src);
        out.controls.row(i) = controls.row(src);
    }
    return out;
}

ObservationTable read_table(std::istream& in, const CovariateSpec& spec)
{
    spec.validate();

    std::string line;
    if (!std::getline(in, line)) throw DataError(kModule, "input has no header row");
    if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);

    std::unordered_map<std::string, std::size_t> position;
    {
        const auto header = split_fields(line);
        for (std::size_t i = 0; i < header.size(); ++i) position.emplace(std::string(header[i]), i);
    }
    auto column = [&](const std::string& name) {
        const auto it = position.find(name);
        if (it == position.end()) throw DataError(kModule, "missing column '" + name + "'");
        return it->second;
    };

    const std::size_t wage_pos = column(spec.wage_column);
    const std::size_t educ_pos = column(spec.education_column);
    std::vector<std::size_t> control_pos;
    for (const auto& c : spec.control_columns) control_pos.push_back(column(c));
    const std::size_t q = control_pos.size();

    std::vector<double> wages, educ, ctrl;
    std::size_t dropped = 0;
    std::vector<double> row_controls(q);

    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        const auto fields = split_fields(line);
        auto field = [&](std::size_t pos) -> std::optional<double> {
            if (pos >= fields.size()) return std::nullopt;
            return parse_number(fields[pos]);
        };

        auto wage = field(wage_pos);
        const auto h = field(educ_pos);
        bool ok = wage && h;
        for (std::size_t j = 0; ok && j < q; ++j) {
            const auto z = field(control_pos[j]);
            if (!z) ok = false;
            else row_controls[j] = *z;
        }
        if (ok && !spec.wage_is_log) {
            if (*wage <= 0.0) ok = false;
            else wage = std::log(*wage);
        }
        if (!ok) {
            ++dropped;
            continue;
        }
        wages.push_back(*wage);
        educ.push_back(*h);
        ctrl.insert(ctrl.end(), row_controls.begin(), row_controls.end());
    }

    if (wages.empty()) throw DataError(kModule, "no usable rows after filtering");

    ObservationTable t;
    const auto n = static_cast<Eigen::Index>(wages.size());
    t.wage_log = Eigen::Map<const Vector>(wages.data(), n);
    t.education = Eigen::Map<const Vector>(educ.data(), n);
    t.controls = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
        ctrl.data(), n, static_cast<Eigen::Index>(q));
    t.dropped_rows = dropped;
    return t;
}

ObservationTable load_table(const std::filesystem::path& path, const CovariateSpec& spec)
{
    std::ifstream in(path);
    if (!in) throw DataError(kModule, "cannot open '" + path.string() + "'");
    return read_table(in, spec);
}

void write_table(std::ostream& out, const ObservationTable& table, const CovariateSpec& spec)
{
    if (spec.control_columns.size() != table.control_count())
        throw DataError(kModule, "control column names do not match the table");
    out << spec.wage_column << ',' << spec.education_column;
    for (const auto& c : spec.control_columns) out << ',' << c;
    out << '\n';

    std::ostringstream line;
    line.precision(17);
    for (Eigen::Index i = 0; i < table.wage_log.size(); ++i) {
        line.str({});
        line << table.wage_log(i) << ',' << table.education(i);
        for (Eigen::Index j = 0; j < table.controls.cols(); ++j) line << ',' << table.controls(i, j);
        out << line.str() << '\n';
    }
}

DesignMatrix::DesignMatrix(Vector wage_log, const Vector& education, const Matrix& controls)
    : w_(std::move(wage_log))
{
    const Eigen::Index n = w_.size();
    if (n == 0) throw DataError(kModule, "empty design");
    if (education.size() != n || controls.rows() != n)
        throw DataError(kModule, "response, education and controls differ in length");

    x_.resize(n, first_control_col + controls.cols());
    x_.col(intercept_col).setOnes();
    x_.col(education_col) = education;
    x_.col(education_sq_col) = education.array().square();
    x_.rightCols(controls.cols()) = controls;

    if (n < x_.cols())
        throw NumericalError(kModule, "design is rank deficient: fewer rows than columns");

    // Unit-norm columns so the relative pivot tolerance does not depend on units.
    Matrix scaled = x_;
    for (Eigen::Index j = 0; j < scaled.cols(); ++j) {
        const double norm = scaled.col(j).norm();
        if (norm > 0.0) scaled.col(j) /= norm;
    }
    Eigen::ColPivHouseholderQR<Matrix> qr(scaled);
    qr.setThreshold(rank_tolerance);
    if (qr.rank() < x_.cols()) {
        throw NumericalError(kModule, "design is rank deficient (rank " + std::to_string(qr.rank()) +
                                          " of " + std::to_string(x_.cols()) + " columns)");
    }
}

DesignMatrix DesignMatrix::with_response(Vector w) const
{
    if (w.size() != x_.rows()) throw DataError(kModule, "response length does not match design");
    return DesignMatrix(Unchecked{}, std::move(w), x_);
}

DesignMatrix build_design(const ObservationTable& table)
{
    return DesignMatrix(table.wage_log, table.education, table.controls);
}

DesignMatrix shift_education(const DesignMatrix& design, double eps)
{
    Matrix x = design.regressors();
    x.col(DesignMatrix::education_col).array() += eps;
    x.col(DesignMatrix::education_sq_col) = x.col(DesignMatrix::education_col).array().square();
    return DesignMatrix(DesignMatrix::Unchecked{}, design.response(), std::move(x));
}

}  // namespace ineq
