// Dense row-major double matrix with Eigen-backed products.
#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace amclab {

using EigenRowMajor =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using EigenMap = Eigen::Map<EigenRowMajor>;
using EigenConstMap = Eigen::Map<const EigenRowMajor>;

struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;  // row-major

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, double fill = 0.0)
        : rows(r), cols(c), data(r * c, fill) {}

    static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rws) {
        Matrix m(rws.size(), rws.size() ? rws.begin()->size() : 0);
        std::size_t i = 0;
        for (const auto& row : rws) {
            if (row.size() != m.cols)
                throw std::invalid_argument("Matrix::from_rows: ragged rows");
            std::size_t j = 0;
            for (double v : row) m(i, j++) = v;
            ++i;
        }
        return m;
    }

    double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

    std::size_t size() const { return data.size(); }
    bool empty() const { return data.empty(); }

    EigenMap map() { return EigenMap(data.data(), static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols)); }
    EigenConstMap map() const { return EigenConstMap(data.data(), static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols)); }

    bool all_finite() const {
        for (double v : data)
            if (!std::isfinite(v)) return false;
        return true;
    }

    Matrix row_slice(const std::vector<std::size_t>& idx) const {
        Matrix out(idx.size(), cols);
        for (std::size_t i = 0; i < idx.size(); ++i) {
            if (idx[i] >= rows) throw std::out_of_range("Matrix::row_slice: index out of range");
            for (std::size_t j = 0; j < cols; ++j) out(i, j) = (*this)(idx[i], j);
        }
        return out;
    }
};

inline void check_same_shape(const Matrix& a, const Matrix& b, const std::string& where) {
    if (a.rows != b.rows || a.cols != b.cols)
        throw std::invalid_argument(where + ": shape mismatch (" + std::to_string(a.rows) + "x" +
                                    std::to_string(a.cols) + " vs " + std::to_string(b.rows) +
                                    "x" + std::to_string(b.cols) + ")");
}

// C = A * B
inline Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols != b.rows) throw std::invalid_argument("matmul: inner dimension mismatch");
    Matrix c(a.rows, b.cols);
    c.map().noalias() = a.map() * b.map();
    return c;
}

// C = A^T * B
inline Matrix matmul_tn(const Matrix& a, const Matrix& b) {
    if (a.rows != b.rows) throw std::invalid_argument("matmul_tn: dimension mismatch");
    Matrix c(a.cols, b.cols);
    c.map().noalias() = a.map().transpose() * b.map();
    return c;
}

// C = A * B^T
inline Matrix matmul_nt(const Matrix& a, const Matrix& b) {
    if (a.cols != b.cols) throw std::invalid_argument("matmul_nt: dimension mismatch");
    Matrix c(a.rows, b.rows);
    c.map().noalias() = a.map() * b.map().transpose();
    return c;
}

}  // namespace amclab
