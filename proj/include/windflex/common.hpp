#pragma once

#include <cstddef>
#include <cstdio>
#include <string>
#include <vector>

#include "windflex/errors.hpp"

namespace windflex {

// Doubles are always written with enough digits to round-trip exactly, so
// persisted values (checkpoints, CSV output) reload bit for bit.
inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// Minimal dense row-major matrix of doubles. Used for time series ([T x d])
// and small parameter matrices; nothing fancy on purpose.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool empty() const { return data_.empty(); }

    std::vector<double>& data() { return data_; }
    const std::vector<double>& data() const { return data_; }

    std::vector<double> column(std::size_t j) const {
        std::vector<double> out(rows_);
        for (std::size_t i = 0; i < rows_; ++i) out[i] = (*this)(i, j);
        return out;
    }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

inline void require_same_shape(const Matrix& a, const Matrix& b, const std::string& what) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw ShapeMismatch(what + ": shapes " + std::to_string(a.rows()) + "x" +
                            std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                            std::to_string(b.cols()));
}

// Compensated (Kahan) accumulator; keeps reductions bit-stable so results do
// not depend on how work was scheduled.
class KahanSum {
public:
    void add(double x) {
        const double y = x - carry_;
        const double t = sum_ + y;
        carry_ = (t - sum_) - y;
        sum_ = t;
    }
    double value() const { return sum_; }

private:
    double sum_ = 0.0;
    double carry_ = 0.0;
};

} // namespace windflex
