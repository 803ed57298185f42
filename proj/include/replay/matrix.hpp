// Minimal dense linear algebra, 64-bit reals, row-major. The model is
// tiny (dims around 10) so plain loops are all we need.

#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace replay {

struct DenseMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> values;  // row-major, rows * cols entries

    DenseMatrix() = default;
    DenseMatrix(std::size_t r, std::size_t c)
        : rows(r), cols(c), values(r * c, 0.0) {}
    DenseMatrix(std::size_t r, std::size_t c, std::vector<double> v);

    double& at(std::size_t r, std::size_t c) { return values[r * cols + c]; }
    double at(std::size_t r, std::size_t c) const {
        return values[r * cols + c];
    }

    static DenseMatrix identity(std::size_t n);

    /// True when every entry is finite (no NaN/Inf).
    bool all_finite() const;
};

/// Standard matrix product. Throws DimensionError on a.cols != b.rows.
DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b);

// Span-based kernels used by the recurrent cells and the output head.
// All of them accumulate into the output.

/// y += A x, A is (rows x cols) row-major, x has cols entries.
void gemv_acc(std::span<const double> a, std::size_t rows, std::size_t cols,
              std::span<const double> x, std::span<double> y);

/// y += A^T x, A is (rows x cols) row-major, x has rows entries.
void gemv_transpose_acc(std::span<const double> a, std::size_t rows,
                        std::size_t cols, std::span<const double> x,
                        std::span<double> y);

/// A += u v^T, A is (rows x cols) row-major.
void outer_acc(std::span<double> a, std::span<const double> u,
               std::span<const double> v);

}  // namespace replay
