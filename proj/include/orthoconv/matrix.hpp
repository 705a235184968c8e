#pragma once

#include <cstddef>
#include <initializer_list>
#include <vector>

namespace orthoconv {

/// Dense real matrix, row-major storage.
class Matrix {
public:
    Matrix() : rows_(0), cols_(0) {}
    Matrix(int rows, int cols);
    Matrix(std::initializer_list<std::initializer_list<double>> rows);

    static Matrix identity(int n);
    static Matrix zero(int rows, int cols) { return Matrix(rows, cols); }
    /// diag(values) as a square matrix.
    static Matrix diagonal(const std::vector<double>& values);

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }

    double& operator()(int i, int j) { return data_[static_cast<std::size_t>(i) * cols_ + j]; }
    double operator()(int i, int j) const { return data_[static_cast<std::size_t>(i) * cols_ + j]; }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }
    double* row(int i) { return data_.data() + static_cast<std::size_t>(i) * cols_; }
    const double* row(int i) const { return data_.data() + static_cast<std::size_t>(i) * cols_; }

    bool same_shape(const Matrix& other) const {
        return rows_ == other.rows_ && cols_ == other.cols_;
    }
    bool finite() const;

    Matrix& operator+=(const Matrix& other);
    Matrix& operator-=(const Matrix& other);
    Matrix& operator*=(double a);

private:
    int rows_;
    int cols_;
    std::vector<double> data_;
};

Matrix operator+(Matrix a, const Matrix& b);
Matrix operator-(Matrix a, const Matrix& b);
Matrix operator*(Matrix a, double s);
Matrix operator*(double s, Matrix a);
/// Matrix product (uses the simd kernels).
Matrix operator*(const Matrix& a, const Matrix& b);

Matrix transpose(const Matrix& m);
double frobenius_norm(const Matrix& m);
double max_abs(const Matrix& m);
double max_abs_diff(const Matrix& a, const Matrix& b);
double trace(const Matrix& m);

/// y = M x
std::vector<double> matvec(const Matrix& m, const std::vector<double>& x);
/// y = M^T x
std::vector<double> matvec_transposed(const Matrix& m, const std::vector<double>& x);

/// ||M^T M - I||_F, the column-orthonormality residual.
double orthogonality_residual(const Matrix& m);
/// ||M M^T - I||_F, the row-orthonormality residual.
double row_orthogonality_residual(const Matrix& m);

/// Determinant sign (+1/-1/0) via LU with partial pivoting.
int det_sign(const Matrix& m);

/// Throws DataError if the matrix holds NaN/Inf.
void require_finite(const Matrix& m, const char* what);

} // namespace orthoconv
