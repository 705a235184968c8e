#pragma once

#include "orthoconv/kernel.hpp"
#include "orthoconv/matrix.hpp"

#include <complex>
#include <vector>

namespace orthoconv::conv {

/// Dense complex matrix, row-major; just enough surface for the per-frequency
/// spectral work (DFT symbol matrices are small: c_out x c_in).
struct CMatrix {
    int rows = 0;
    int cols = 0;
    std::vector<std::complex<double>> data;

    CMatrix() = default;
    CMatrix(int r, int c) : rows(r), cols(c), data(static_cast<std::size_t>(r) * c) {}
    std::complex<double>& at(int i, int j) { return data[static_cast<std::size_t>(i) * cols + j]; }
    const std::complex<double>& at(int i, int j) const {
        return data[static_cast<std::size_t>(i) * cols + j];
    }
};

/// Singular values of a complex matrix by one-sided Jacobi, descending.
std::vector<double> csvd_values(const CMatrix& m);

/// Clips all singular values of m to at most `limit` (SVD-domain projection).
CMatrix csvd_clip(const CMatrix& m, double limit);

/// DFT symbol of the cyclic operator at frequency (f1, f2) over an s x s
/// grid: sum_{r,c} A_{r,c} * omega^(r*f1 + c*f2), omega = exp(-2*pi*i/s).
CMatrix dft_symbol(const Kernel2D& k, int spatial, int f1, int f2);

/// All c*S singular values of the cyclic operator, computed per frequency
/// pair and merged, sorted descending. Matches the SVD of
/// operator_matrix_cyclic as a multiset. Frequencies run in parallel.
std::vector<double> conv_singular_values_dft(const Kernel2D& k, int spatial);

} // namespace orthoconv::conv
