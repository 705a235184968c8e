#include "orthoconv/kernel.hpp"

#include "orthoconv/errors.hpp"
#include "orthoconv/linalg.hpp"
#include "orthoconv/simd.hpp"

#include <cmath>
#include <string>

namespace orthoconv::conv {

void Kernel1D::validate() const {
    if (taps.empty()) throw ShapeError("Kernel1D: at least one tap required");
    for (const auto& t : taps) {
        if (t.rows() != c_out || t.cols() != c_in)
            throw ShapeError("Kernel1D: tap shape mismatch");
        require_finite(t, "Kernel1D");
    }
}

void Kernel2D::validate() const {
    if (k_h < 1 || k_w < 1) throw ShapeError("Kernel2D: spatial extents must be >= 1");
    if (static_cast<int>(blocks.size()) != k_h * k_w)
        throw ShapeError("Kernel2D: block count mismatch");
    for (const auto& b : blocks) {
        if (b.rows() != c_out || b.cols() != c_in)
            throw ShapeError("Kernel2D: block shape mismatch");
        require_finite(b, "Kernel2D");
    }
}

Kernel1D make_kernel1d(int c_out, int c_in, std::vector<Matrix> taps) {
    Kernel1D k{c_out, c_in, std::move(taps)};
    k.validate();
    return k;
}

Kernel2D make_kernel2d(int c_out, int c_in, int k_h, int k_w, std::vector<Matrix> blocks) {
    Kernel2D k{c_out, c_in, k_h, k_w, std::move(blocks)};
    k.validate();
    return k;
}

Kernel1D single_tap_kernel(const Matrix& block) {
    return make_kernel1d(block.rows(), block.cols(), {block});
}

Kernel2D single_block_kernel2d(const Matrix& block) {
    return make_kernel2d(block.rows(), block.cols(), 1, 1, {block});
}

Kernel2D as_kernel2d(const Kernel1D& k) {
    return make_kernel2d(k.c_out, k.c_in, k.size(), 1, k.taps);
}

Kernel1D as_kernel1d(const Kernel2D& k) {
    if (k.k_h != 1 && k.k_w != 1)
        throw ShapeError("as_kernel1d: kernel has two non-trivial spatial extents");
    return make_kernel1d(k.c_out, k.c_in, k.blocks);
}

SpatialTensor make_tensor(int channels, int height, int width) {
    if (channels < 1 || height < 1 || width < 1)
        throw ShapeError("SpatialTensor: dimensions must be >= 1");
    SpatialTensor t;
    t.channels = channels;
    t.height = height;
    t.width = width;
    t.data.assign(static_cast<std::size_t>(channels) * height * width, 0.0);
    return t;
}

double tensor_norm(const SpatialTensor& t) {
    return std::sqrt(simd::nrm2_sq(t.data.data(), t.data.size()));
}

Kernel1D block_conv_1d(const Kernel1D& x, const Kernel1D& y) {
    x.validate();
    y.validate();
    if (x.c_in != y.c_out)
        throw ShapeError("block_conv_1d: X.c_in (" + std::to_string(x.c_in) +
                         ") != Y.c_out (" + std::to_string(y.c_out) + ")");
    const int kz = x.size() + y.size() - 1;
    std::vector<Matrix> taps(kz, Matrix::zero(x.c_out, y.c_in));
    for (int i = 0; i < x.size(); ++i)
        for (int j = 0; j < y.size(); ++j) taps[i + j] += x.taps[i] * y.taps[j];
    return make_kernel1d(x.c_out, y.c_in, std::move(taps));
}

Kernel2D block_conv_2d(const Kernel2D& x, const Kernel2D& y) {
    x.validate();
    y.validate();
    if (x.c_in != y.c_out)
        throw ShapeError("block_conv_2d: X.c_in (" + std::to_string(x.c_in) +
                         ") != Y.c_out (" + std::to_string(y.c_out) + ")");
    const int kh = x.k_h + y.k_h - 1;
    const int kw = x.k_w + y.k_w - 1;
    std::vector<Matrix> blocks(static_cast<std::size_t>(kh) * kw, Matrix::zero(x.c_out, y.c_in));
    for (int r1 = 0; r1 < x.k_h; ++r1)
        for (int c1 = 0; c1 < x.k_w; ++c1)
            for (int r2 = 0; r2 < y.k_h; ++r2)
                for (int c2 = 0; c2 < y.k_w; ++c2)
                    blocks[static_cast<std::size_t>(r1 + r2) * kw + (c1 + c2)] +=
                        x.block(r1, c1) * y.block(r2, c2);
    return make_kernel2d(x.c_out, y.c_in, kh, kw, std::move(blocks));
}

namespace {

// Accumulates a*src into dst where dst rows are the cyclic shift of src rows
// by (dr, dc): dst(h, w) += a * src((h+dr) mod H, (w+dc) mod W).
void accumulate_shifted_plane(double a, const double* src, double* dst, int height, int width,
                              int dr, int dc) {
    if (a == 0.0) return;
    for (int h = 0; h < height; ++h) {
        const double* srow = src + static_cast<std::size_t>((h + dr) % height) * width;
        double* drow = dst + static_cast<std::size_t>(h) * width;
        const int head = width - dc;
        simd::axpy(a, srow + dc, drow, static_cast<std::size_t>(head));
        simd::axpy(a, srow, drow + head, static_cast<std::size_t>(dc));
    }
}

} // namespace

SpatialTensor apply_conv_cyclic(const Kernel2D& k, const SpatialTensor& in) {
    k.validate();
    if (in.channels != k.c_in) throw ShapeError("apply_conv_cyclic: channel mismatch");
    if (in.height < k.k_h || in.width < k.k_w)
        throw ShapeError("apply_conv_cyclic: input smaller than kernel support");
    SpatialTensor out = make_tensor(k.c_out, in.height, in.width);
    for (int dr = 0; dr < k.k_h; ++dr)
        for (int dc = 0; dc < k.k_w; ++dc) {
            const Matrix& a = k.block(dr, dc);
            for (int co = 0; co < k.c_out; ++co)
                for (int ci = 0; ci < k.c_in; ++ci)
                    accumulate_shifted_plane(a(co, ci), in.plane(ci), out.plane(co), in.height,
                                             in.width, dr % in.height, dc % in.width);
        }
    return out;
}

SpatialTensor apply_conv_cyclic(const Kernel1D& k, const SpatialTensor& in) {
    return apply_conv_cyclic(as_kernel2d(k), in);
}

SpatialTensor apply_conv_cyclic_adjoint(const Kernel2D& k, const SpatialTensor& in) {
    k.validate();
    if (in.channels != k.c_out) throw ShapeError("apply_conv_cyclic_adjoint: channel mismatch");
    if (in.height < k.k_h || in.width < k.k_w)
        throw ShapeError("apply_conv_cyclic_adjoint: input smaller than kernel support");
    SpatialTensor out = make_tensor(k.c_in, in.height, in.width);
    for (int dr = 0; dr < k.k_h; ++dr)
        for (int dc = 0; dc < k.k_w; ++dc) {
            const Matrix& a = k.block(dr, dc);
            // shift by -d mod dims
            const int sr = (in.height - dr % in.height) % in.height;
            const int sc = (in.width - dc % in.width) % in.width;
            for (int co = 0; co < k.c_out; ++co)
                for (int ci = 0; ci < k.c_in; ++ci)
                    accumulate_shifted_plane(a(co, ci), in.plane(co), out.plane(ci), in.height,
                                             in.width, sr, sc);
        }
    return out;
}

Matrix operator_matrix_cyclic(const Kernel2D& k, int height, int width) {
    k.validate();
    if (height < k.k_h || width < k.k_w)
        throw ShapeError("operator_matrix_cyclic: spatial dims smaller than kernel");
    const int sites = height * width;
    Matrix m(k.c_out * sites, k.c_in * sites);
    for (int dr = 0; dr < k.k_h; ++dr)
        for (int dc = 0; dc < k.k_w; ++dc) {
            const Matrix& a = k.block(dr, dc);
            for (int oh = 0; oh < height; ++oh)
                for (int ow = 0; ow < width; ++ow) {
                    const int in_site = ((oh + dr) % height) * width + (ow + dc) % width;
                    const int out_site = oh * width + ow;
                    for (int co = 0; co < k.c_out; ++co)
                        for (int ci = 0; ci < k.c_in; ++ci)
                            m(co * sites + out_site, ci * sites + in_site) += a(co, ci);
                }
        }
    return m;
}

Matrix operator_matrix_cyclic(const Kernel1D& k, int spatial) {
    return operator_matrix_cyclic(as_kernel2d(k), spatial, 1);
}

Matrix operator_matrix_zero_pad(const Kernel2D& k, int height, int width) {
    k.validate();
    if (height < k.k_h || width < k.k_w)
        throw ShapeError("operator_matrix_zero_pad: spatial dims smaller than kernel");
    const int sites = height * width;
    const int center_r = (k.k_h - 1) / 2;
    const int center_c = (k.k_w - 1) / 2;
    Matrix m(k.c_out * sites, k.c_in * sites);
    for (int dr = 0; dr < k.k_h; ++dr)
        for (int dc = 0; dc < k.k_w; ++dc) {
            const Matrix& a = k.block(dr, dc);
            for (int oh = 0; oh < height; ++oh) {
                const int ih = oh + dr - center_r;
                if (ih < 0 || ih >= height) continue;
                for (int ow = 0; ow < width; ++ow) {
                    const int iw = ow + dc - center_c;
                    if (iw < 0 || iw >= width) continue;
                    const int in_site = ih * width + iw;
                    const int out_site = oh * width + ow;
                    for (int co = 0; co < k.c_out; ++co)
                        for (int ci = 0; ci < k.c_in; ++ci)
                            m(co * sites + out_site, ci * sites + in_site) += a(co, ci);
                }
            }
        }
    return m;
}

Matrix operator_matrix_zero_pad(const Kernel1D& k, int spatial) {
    return operator_matrix_zero_pad(as_kernel2d(k), spatial, 1);
}

bool is_zero_pad_orthogonal(const Kernel1D& k, int spatial, double tol) {
    k.validate();
    if (spatial < 2 * k.size())
        throw PreconditionError("is_zero_pad_orthogonal: spatial must be >= 2*K");
    const Matrix m = operator_matrix_zero_pad(k, spatial);
    for (double s : linalg::singular_values(m))
        if (std::abs(s - 1.0) > tol) return false;
    return true;
}

Kernel2D scale_kernel(Kernel2D k, double factor) {
    for (auto& b : k.blocks) b *= factor;
    return k;
}

} // namespace orthoconv::conv
