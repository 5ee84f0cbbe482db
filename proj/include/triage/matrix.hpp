#pragma once

#include <cassert>
#include <cstddef>
#include <vector>

namespace triage {

// Dense row-major matrix of doubles. All model math is 64-bit.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

    double& operator()(std::size_t i, std::size_t j) {
        assert(i < rows && j < cols);
        return data[i * cols + j];
    }
    double operator()(std::size_t i, std::size_t j) const {
        assert(i < rows && j < cols);
        return data[i * cols + j];
    }

    double* row(std::size_t i) { return data.data() + i * cols; }
    const double* row(std::size_t i) const { return data.data() + i * cols; }

    std::size_t size() const { return data.size(); }

    void fill(double value) { data.assign(rows * cols, value); }
};

// C = A * B
inline Matrix matmul(const Matrix& a, const Matrix& b) {
    assert(a.cols == b.rows);
    Matrix c(a.rows, b.cols);
    for (std::size_t i = 0; i < a.rows; ++i) {
        const double* arow = a.row(i);
        double* crow = c.row(i);
        for (std::size_t k = 0; k < a.cols; ++k) {
            const double aik = arow[k];
            if (aik == 0.0) {
                continue;
            }
            const double* brow = b.row(k);
            for (std::size_t j = 0; j < b.cols; ++j) {
                crow[j] += aik * brow[j];
            }
        }
    }
    return c;
}

// C += A^T * B
inline void accumulate_at_b(const Matrix& a, const Matrix& b, Matrix& c) {
    assert(a.rows == b.rows && a.cols == c.rows && b.cols == c.cols);
    for (std::size_t k = 0; k < a.rows; ++k) {
        const double* arow = a.row(k);
        const double* brow = b.row(k);
        for (std::size_t i = 0; i < a.cols; ++i) {
            const double aki = arow[i];
            if (aki == 0.0) {
                continue;
            }
            double* crow = c.row(i);
            for (std::size_t j = 0; j < b.cols; ++j) {
                crow[j] += aki * brow[j];
            }
        }
    }
}

// C = A * B^T
inline Matrix matmul_bt(const Matrix& a, const Matrix& b) {
    assert(a.cols == b.cols);
    Matrix c(a.rows, b.rows);
    for (std::size_t i = 0; i < a.rows; ++i) {
        const double* arow = a.row(i);
        double* crow = c.row(i);
        for (std::size_t j = 0; j < b.rows; ++j) {
            const double* brow = b.row(j);
            double sum = 0.0;
            for (std::size_t k = 0; k < a.cols; ++k) {
                sum += arow[k] * brow[k];
            }
            crow[j] = sum;
        }
    }
    return c;
}

inline void add_inplace(Matrix& a, const Matrix& b) {
    assert(a.rows == b.rows && a.cols == b.cols);
    for (std::size_t i = 0; i < a.data.size(); ++i) {
        a.data[i] += b.data[i];
    }
}

} // namespace triage
