#pragma once

#include "orthoconv/matrix.hpp"

#include <vector>

namespace orthoconv::conv {

/// 1-D convolution kernel: taps A_0..A_{K-1}, each c_out x c_in. Offsets run
/// along the height axis of a SpatialTensor (width 1 for 1-D signals).
struct Kernel1D {
    int c_out = 0;
    int c_in = 0;
    std::vector<Matrix> taps;

    int size() const { return static_cast<int>(taps.size()); }
    void validate() const;
};

/// 2-D convolution kernel: blocks A_{r,c}, r < k_h, c < k_w, row-major.
struct Kernel2D {
    int c_out = 0;
    int c_in = 0;
    int k_h = 0;
    int k_w = 0;
    std::vector<Matrix> blocks;

    const Matrix& block(int r, int c) const { return blocks[static_cast<std::size_t>(r) * k_w + c]; }
    Matrix& block(int r, int c) { return blocks[static_cast<std::size_t>(r) * k_w + c]; }
    void validate() const;
};

Kernel1D make_kernel1d(int c_out, int c_in, std::vector<Matrix> taps);
Kernel2D make_kernel2d(int c_out, int c_in, int k_h, int k_w, std::vector<Matrix> blocks);
/// Single-block kernels (the identity element of the block convolution).
Kernel1D single_tap_kernel(const Matrix& block);
Kernel2D single_block_kernel2d(const Matrix& block);

/// A 1-D kernel viewed as a K x 1 (vertical) 2-D kernel.
Kernel2D as_kernel2d(const Kernel1D& k);
/// Inverse view; requires k_h == 1 or k_w == 1.
Kernel1D as_kernel1d(const Kernel2D& k);

/// Dense signal: channels x height x width, channel-major then row then
/// column (vec(t)[c*H*W + h*W + w]); width = 1 for 1-D signals.
struct SpatialTensor {
    int channels = 0;
    int height = 0;
    int width = 0;
    std::vector<double> data;

    double& at(int c, int h, int w) {
        return data[(static_cast<std::size_t>(c) * height + h) * width + w];
    }
    double at(int c, int h, int w) const {
        return data[(static_cast<std::size_t>(c) * height + h) * width + w];
    }
    const double* plane(int c) const {
        return data.data() + static_cast<std::size_t>(c) * height * width;
    }
    double* plane(int c) { return data.data() + static_cast<std::size_t>(c) * height * width; }
    std::size_t size() const { return data.size(); }
};

SpatialTensor make_tensor(int channels, int height, int width);
double tensor_norm(const SpatialTensor& t);

/// Block convolution Z_i = sum_j X_j Y_{i-j}; requires X.c_in == Y.c_out.
/// Composes kernel operators: (X # Y) * v = X * (Y * v).
Kernel1D block_conv_1d(const Kernel1D& x, const Kernel1D& y);
/// 2-D block convolution Z_{ij} = sum_{i',j'} X_{i',j'} Y_{i-i',j-j'}.
Kernel2D block_conv_2d(const Kernel2D& x, const Kernel2D& y);

/// Cyclic convolution: out(o) = sum_d A_d in(o + d mod dims).
SpatialTensor apply_conv_cyclic(const Kernel1D& k, const SpatialTensor& in);
SpatialTensor apply_conv_cyclic(const Kernel2D& k, const SpatialTensor& in);
/// Adjoint (transposed) cyclic convolution, used by the operator-norm power
/// iteration: out(o) = sum_d A_d^T in(o - d mod dims).
SpatialTensor apply_conv_cyclic_adjoint(const Kernel2D& k, const SpatialTensor& in);

/// Dense (c_out*S) x (c_in*S) operator of the cyclic convolution, S = total
/// sites, vec ordering channel-major then row then column.
Matrix operator_matrix_cyclic(const Kernel1D& k, int spatial);
Matrix operator_matrix_cyclic(const Kernel2D& k, int height, int width);

/// Zero-padded (Toeplitz) operator; the kernel is centered at tap
/// floor((K-1)/2) and out-of-range taps are dropped.
Matrix operator_matrix_zero_pad(const Kernel1D& k, int spatial);
Matrix operator_matrix_zero_pad(const Kernel2D& k, int height, int width);

/// True iff every singular value of the zero-padded operator is within tol
/// of 1. Requires spatial >= 2*K so the Toeplitz boundary rows exist.
bool is_zero_pad_orthogonal(const Kernel1D& k, int spatial, double tol);

/// Scales every block in place.
Kernel2D scale_kernel(Kernel2D k, double factor);

} // namespace orthoconv::conv
