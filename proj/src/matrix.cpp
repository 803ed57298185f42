#include "replay/matrix.hpp"

#include <cmath>
#include <string>

#include "replay/errors.hpp"

namespace replay {

DenseMatrix::DenseMatrix(std::size_t r, std::size_t c, std::vector<double> v)
    : rows(r), cols(c), values(std::move(v)) {
    if (values.size() != rows * cols) {
        throw DimensionError("DenseMatrix: " + std::to_string(values.size()) +
                             " values for shape " + std::to_string(rows) +
                             "x" + std::to_string(cols));
    }
}

DenseMatrix DenseMatrix::identity(std::size_t n) {
    DenseMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m.at(i, i) = 1.0;
    return m;
}

bool DenseMatrix::all_finite() const {
    for (double v : values) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.cols != b.rows) {
        throw DimensionError(
            "matmul: inner dimensions differ, " + std::to_string(a.rows) +
            "x" + std::to_string(a.cols) + " times " + std::to_string(b.rows) +
            "x" + std::to_string(b.cols));
    }
    DenseMatrix out(a.rows, b.cols);
    for (std::size_t i = 0; i < a.rows; ++i) {
        for (std::size_t k = 0; k < a.cols; ++k) {
            const double aik = a.at(i, k);
            if (aik == 0.0) continue;
            for (std::size_t j = 0; j < b.cols; ++j) {
                out.at(i, j) += aik * b.at(k, j);
            }
        }
    }
    return out;
}

void gemv_acc(std::span<const double> a, std::size_t rows, std::size_t cols,
              std::span<const double> x, std::span<double> y) {
    for (std::size_t r = 0; r < rows; ++r) {
        double acc = 0.0;
        const double* row = a.data() + r * cols;
        for (std::size_t c = 0; c < cols; ++c) acc += row[c] * x[c];
        y[r] += acc;
    }
}

void gemv_transpose_acc(std::span<const double> a, std::size_t rows,
                        std::size_t cols, std::span<const double> x,
                        std::span<double> y) {
    for (std::size_t r = 0; r < rows; ++r) {
        const double xr = x[r];
        if (xr == 0.0) continue;
        const double* row = a.data() + r * cols;
        for (std::size_t c = 0; c < cols; ++c) y[c] += row[c] * xr;
    }
}

void outer_acc(std::span<double> a, std::span<const double> u,
               std::span<const double> v) {
    for (std::size_t r = 0; r < u.size(); ++r) {
        const double ur = u[r];
        if (ur == 0.0) continue;
        double* row = a.data() + r * v.size();
        for (std::size_t c = 0; c < v.size(); ++c) row[c] += ur * v[c];
    }
}

}  // namespace replay
