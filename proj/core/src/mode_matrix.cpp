#include "oblique/mode_matrix.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "oblique/errors.hpp"

namespace oblique {

ModeMatrix::ModeMatrix(std::initializer_list<std::initializer_list<double>> rows) {
    rows_ = rows.size();
    cols_ = rows_ == 0 ? 0 : rows.begin()->size();
    data_.reserve(rows_ * cols_);
    for (const auto& row : rows) {
        if (row.size() != cols_) throw UsageError("ModeMatrix: ragged initializer");
        data_.insert(data_.end(), row.begin(), row.end());
    }
}

ModeMatrix ModeMatrix::from_row_major(std::size_t rows, std::size_t cols,
                                      std::span<const double> values) {
    if (values.size() != rows * cols)
        throw UsageError("ModeMatrix: expected " + std::to_string(rows * cols) +
                         " values, got " + std::to_string(values.size()));
    ModeMatrix m(rows, cols);
    std::copy(values.begin(), values.end(), m.data_.begin());
    return m;
}

bool ModeMatrix::all_finite() const noexcept {
    return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

double ModeMatrix::max_abs() const noexcept {
    double r = 0.0;
    for (double v : data_) r = std::max(r, std::abs(v));
    return r;
}

double ModeMatrix::min_value() const noexcept {
    double r = std::numeric_limits<double>::infinity();
    for (double v : data_) r = std::min(r, v);
    return r;
}

double ModeMatrix::max_value() const noexcept {
    double r = -std::numeric_limits<double>::infinity();
    for (double v : data_) r = std::max(r, v);
    return r;
}

ModeMatrix& ModeMatrix::operator+=(double shift) noexcept {
    for (double& v : data_) v += shift;
    return *this;
}

double max_abs_diff(const ModeMatrix& a, const ModeMatrix& b) {
    if (!a.same_shape(b)) throw UsageError("max_abs_diff: shape mismatch");
    double r = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k)
        r = std::max(r, std::abs(a.values()[k] - b.values()[k]));
    return r;
}

}  // namespace oblique
