#include "orthoconv/matrix.hpp"

#include "orthoconv/errors.hpp"
#include "orthoconv/simd.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace orthoconv {

Matrix::Matrix(int rows, int cols) : rows_(rows), cols_(cols) {
    if (rows < 0 || cols < 0) throw ShapeError("matrix dimensions must be non-negative");
    data_.assign(static_cast<std::size_t>(rows) * cols, 0.0);
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
    rows_ = static_cast<int>(rows.size());
    cols_ = rows_ > 0 ? static_cast<int>(rows.begin()->size()) : 0;
    data_.reserve(static_cast<std::size_t>(rows_) * cols_);
    for (const auto& r : rows) {
        if (static_cast<int>(r.size()) != cols_) throw ShapeError("ragged initializer list");
        data_.insert(data_.end(), r.begin(), r.end());
    }
}

Matrix Matrix::identity(int n) {
    Matrix m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Matrix Matrix::diagonal(const std::vector<double>& values) {
    Matrix m(static_cast<int>(values.size()), static_cast<int>(values.size()));
    for (int i = 0; i < m.rows(); ++i) m(i, i) = values[i];
    return m;
}

bool Matrix::finite() const {
    return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

Matrix& Matrix::operator+=(const Matrix& other) {
    if (!same_shape(other)) throw ShapeError("matrix addition shape mismatch");
    simd::axpy(1.0, other.data(), data(), size());
    return *this;
}

Matrix& Matrix::operator-=(const Matrix& other) {
    if (!same_shape(other)) throw ShapeError("matrix subtraction shape mismatch");
    simd::axpy(-1.0, other.data(), data(), size());
    return *this;
}

Matrix& Matrix::operator*=(double a) {
    simd::scale(a, data(), size());
    return *this;
}

Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
Matrix operator*(Matrix a, double s) { return a *= s; }
Matrix operator*(double s, Matrix a) { return a *= s; }

Matrix operator*(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) {
        throw ShapeError("matrix product shape mismatch: " + std::to_string(a.rows()) + "x" +
                         std::to_string(a.cols()) + " * " + std::to_string(b.rows()) + "x" +
                         std::to_string(b.cols()));
    }
    Matrix c(a.rows(), b.cols());
    const std::size_t w = static_cast<std::size_t>(b.cols());
    for (int i = 0; i < a.rows(); ++i) {
        double* ci = c.row(i);
        for (int k = 0; k < a.cols(); ++k) {
            const double aik = a(i, k);
            if (aik != 0.0) simd::axpy(aik, b.row(k), ci, w);
        }
    }
    return c;
}

Matrix transpose(const Matrix& m) {
    Matrix t(m.cols(), m.rows());
    for (int i = 0; i < m.rows(); ++i)
        for (int j = 0; j < m.cols(); ++j) t(j, i) = m(i, j);
    return t;
}

double frobenius_norm(const Matrix& m) {
    return std::sqrt(simd::nrm2_sq(m.data(), m.size()));
}

double max_abs(const Matrix& m) {
    double v = 0.0;
    for (std::size_t i = 0; i < m.size(); ++i) v = std::max(v, std::abs(m.data()[i]));
    return v;
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
    if (!a.same_shape(b)) throw ShapeError("max_abs_diff shape mismatch");
    double v = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        v = std::max(v, std::abs(a.data()[i] - b.data()[i]));
    return v;
}

double trace(const Matrix& m) {
    double t = 0.0;
    const int n = std::min(m.rows(), m.cols());
    for (int i = 0; i < n; ++i) t += m(i, i);
    return t;
}

std::vector<double> matvec(const Matrix& m, const std::vector<double>& x) {
    if (static_cast<int>(x.size()) != m.cols()) throw ShapeError("matvec shape mismatch");
    std::vector<double> y(m.rows());
    for (int i = 0; i < m.rows(); ++i) y[i] = simd::dot(m.row(i), x.data(), x.size());
    return y;
}

std::vector<double> matvec_transposed(const Matrix& m, const std::vector<double>& x) {
    if (static_cast<int>(x.size()) != m.rows()) throw ShapeError("matvec_transposed shape mismatch");
    std::vector<double> y(m.cols(), 0.0);
    for (int i = 0; i < m.rows(); ++i) simd::axpy(x[i], m.row(i), y.data(), y.size());
    return y;
}

double orthogonality_residual(const Matrix& m) {
    return frobenius_norm(transpose(m) * m - Matrix::identity(m.cols()));
}

double row_orthogonality_residual(const Matrix& m) {
    return frobenius_norm(m * transpose(m) - Matrix::identity(m.rows()));
}

int det_sign(const Matrix& m) {
    if (m.rows() != m.cols()) throw ShapeError("det_sign requires a square matrix");
    Matrix a = m;
    const int n = a.rows();
    int sign = 1;
    for (int k = 0; k < n; ++k) {
        int pivot = k;
        for (int i = k + 1; i < n; ++i)
            if (std::abs(a(i, k)) > std::abs(a(pivot, k))) pivot = i;
        if (a(pivot, k) == 0.0) return 0;
        if (pivot != k) {
            for (int j = 0; j < n; ++j) std::swap(a(k, j), a(pivot, j));
            sign = -sign;
        }
        if (a(k, k) < 0.0) sign = -sign;
        for (int i = k + 1; i < n; ++i) {
            const double f = a(i, k) / a(k, k);
            if (f != 0.0) simd::axpy(-f, a.row(k) + k, a.row(i) + k, static_cast<std::size_t>(n - k));
        }
    }
    return sign;
}

void require_finite(const Matrix& m, const char* what) {
    if (!m.finite()) throw DataError(std::string(what) + ": non-finite entries");
}

} // namespace orthoconv
