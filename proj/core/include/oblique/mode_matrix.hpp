#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace oblique {

/// Dense row-major m1 x m2 table: one scalar per (Player-I mode, Player-II mode).
class ModeMatrix {
public:
    ModeMatrix() = default;
    ModeMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
    ModeMatrix(std::initializer_list<std::initializer_list<double>> rows);

    static ModeMatrix from_row_major(std::size_t rows, std::size_t cols,
                                     std::span<const double> values);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::size_t size() const noexcept { return data_.size(); }

    double& operator()(std::size_t i, std::size_t j) noexcept { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const noexcept { return data_[i * cols_ + j]; }

    std::span<double> values() noexcept { return data_; }
    std::span<const double> values() const noexcept { return data_; }

    bool same_shape(const ModeMatrix& other) const noexcept {
        return rows_ == other.rows_ && cols_ == other.cols_;
    }
    bool all_finite() const noexcept;

    double max_abs() const noexcept;
    double min_value() const noexcept;
    double max_value() const noexcept;

    ModeMatrix& operator+=(double shift) noexcept;

    friend bool operator==(const ModeMatrix&, const ModeMatrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

/// Max-norm distance; matrices must share a shape.
double max_abs_diff(const ModeMatrix& a, const ModeMatrix& b);

}  // namespace oblique
