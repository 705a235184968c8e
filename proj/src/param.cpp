#include "orthoconv/param.hpp"

#include "orthoconv/errors.hpp"
#include "orthoconv/rng.hpp"
#include "orthoconv/simd.hpp"
#include "orthoconv/spectra.hpp"

#include <cmath>
#include <string>
#include <utility>

namespace orthoconv::param {

using conv::Kernel1D;
using conv::Kernel2D;
using conv::SpatialTensor;

void BcopParams::validate() const {
    if (n < 1 || c_out < 1 || k < 1) throw ShapeError("BcopParams: positive dimensions required");
    if (c_out > n) throw ShapeError("BcopParams: c_out must not exceed n");
    if (raw_h.rows() != c_out || raw_h.cols() != n)
        throw ShapeError("BcopParams: raw_h must be c_out x n");
    if (static_cast<int>(raw_m.size()) != k - 1 || static_cast<int>(raw_n.size()) != k - 1)
        throw ShapeError("BcopParams: need K-1 raw factor pairs");
    const int half = n / 2;
    for (const auto& m : raw_m)
        if (m.rows() != n || m.cols() != half) throw ShapeError("BcopParams: raw_m must be n x floor(n/2)");
    for (const auto& m : raw_n)
        if (m.rows() != n || m.cols() != half) throw ShapeError("BcopParams: raw_n must be n x floor(n/2)");
    require_finite(raw_h, "BcopParams");
    for (const auto& m : raw_m) require_finite(m, "BcopParams");
    for (const auto& m : raw_n) require_finite(m, "BcopParams");
}

BcopParams random_bcop_params(int n, int c_out, int k, std::uint64_t seed) {
    Rng rng(seed);
    BcopParams p;
    p.n = n;
    p.c_out = c_out;
    p.k = k;
    p.raw_h = random_matrix(c_out, n, rng);
    const int half = n / 2;
    for (int i = 0; i + 1 < k; ++i) {
        p.raw_m.push_back(random_matrix(n, half, rng));
        p.raw_n.push_back(random_matrix(n, half, rng));
    }
    p.validate();
    return p;
}

BcopFactors bcop_factors(const BcopParams& params, const linalg::OrthoOptions& opts) {
    params.validate();
    BcopFactors f;
    f.h = linalg::orthogonalize(params.raw_h, opts);
    for (const auto& m : params.raw_m) f.p.push_back(linalg::projector_from_raw(m, opts));
    for (const auto& m : params.raw_n) f.q.push_back(linalg::projector_from_raw(m, opts));
    return f;
}

Kernel2D bcop_from_factors(const BcopFactors& f) {
    const int n = f.h.cols();
    const Matrix eye = Matrix::identity(n);
    Kernel2D w = conv::single_block_kernel2d(f.h);
    for (std::size_t i = 0; i < f.p.size(); ++i) {
        const Kernel2D vertical =
            conv::make_kernel2d(n, n, 2, 1, {f.p[i], eye - f.p[i]});
        const Kernel2D horizontal =
            conv::make_kernel2d(n, n, 1, 2, {f.q[i], eye - f.q[i]});
        w = conv::block_conv_2d(conv::block_conv_2d(w, vertical), horizontal);
    }
    return w;
}

Kernel2D bcop(const BcopParams& params, const linalg::OrthoOptions& opts) {
    return bcop_from_factors(bcop_factors(params, opts));
}

Kernel1D bcop_1d(const Matrix& h, const std::vector<Matrix>& projectors) {
    if (row_orthogonality_residual(h) > 1e-8)
        throw PreconditionError("bcop_1d: H is not orthogonal within 1e-8");
    for (const auto& p : projectors) {
        if (p.rows() != h.cols() || p.cols() != h.cols())
            throw ShapeError("bcop_1d: projector shape mismatch");
        if (linalg::projector_residual(p) > 1e-8)
            throw PreconditionError("bcop_1d: input is not a symmetric projector within 1e-8");
    }
    const Matrix eye = Matrix::identity(h.cols());
    Kernel1D w = conv::single_tap_kernel(h);
    for (const auto& p : projectors)
        w = conv::block_conv_1d(w, conv::make_kernel1d(h.cols(), h.cols(), {p, eye - p}));
    return w;
}

SockSample sock_with_ranks(int n, const std::vector<int>& ranks, std::uint64_t seed) {
    if (n < 1) throw ShapeError("sock_with_ranks: n must be >= 1");
    for (int r : ranks)
        if (r < 0 || r > n)
            throw PreconditionError("sock_with_ranks: rank " + std::to_string(r) +
                                    " infeasible for n = " + std::to_string(n));
    Rng rng(seed);
    SockSample sample;
    sample.ranks = ranks;
    Matrix h = linalg::orthogonalize(random_matrix(n, n, rng));
    if (det_sign(h) < 0) {
        // negate one row to land in SO(n)
        for (int j = 0; j < n; ++j) h(0, j) = -h(0, j);
    }
    sample.h = h;
    for (int r : ranks) {
        if (r == 0) {
            sample.projectors.push_back(Matrix::zero(n, n));
        } else if (r == n) {
            sample.projectors.push_back(Matrix::identity(n));
        } else {
            sample.projectors.push_back(
                linalg::projector_from_raw(random_matrix(n, r, rng)));
        }
    }
    sample.kernel = bcop_1d(sample.h, sample.projectors);
    return sample;
}

conv::Kernel2D rko(const Kernel2D& raw, const RkoOptions& opts) {
    raw.validate();
    if (raw.k_h != raw.k_w)
        throw ShapeError("rko: square kernels only (k_h == k_w)");
    const int k = raw.k_h;
    if (raw.c_out > k * k * raw.c_in)
        throw ShapeError("rko: c_out exceeds K^2 * c_in, reshape cannot be orthogonalized");

    // reshape to (c_out, K^2 c_in): column index = (tap_r, tap_c, c_in)
    Matrix reshaped(raw.c_out, k * k * raw.c_in);
    for (int r = 0; r < k; ++r)
        for (int c = 0; c < k; ++c) {
            const Matrix& b = raw.block(r, c);
            for (int co = 0; co < raw.c_out; ++co)
                for (int ci = 0; ci < raw.c_in; ++ci)
                    reshaped(co, (r * k + c) * raw.c_in + ci) = b(co, ci);
        }
    const Matrix ortho = linalg::orthogonalize(reshaped, opts.ortho);
    const double scale = opts.scale > 0.0 ? opts.scale : 1.0 / static_cast<double>(k);

    Kernel2D out = raw;
    for (int r = 0; r < k; ++r)
        for (int c = 0; c < k; ++c) {
            Matrix& b = out.block(r, c);
            for (int co = 0; co < raw.c_out; ++co)
                for (int ci = 0; ci < raw.c_in; ++ci)
                    b(co, ci) = scale * ortho(co, (r * k + c) * raw.c_in + ci);
        }
    return out;
}

OssnResult ossn_normalize(const Kernel2D& kernel, int spatial, int iters, std::uint64_t seed) {
    kernel.validate();
    if (iters < 1) throw PreconditionError("ossn_normalize: iters must be >= 1");
    if (spatial < kernel.k_h || spatial < kernel.k_w)
        throw ShapeError("ossn_normalize: spatial smaller than kernel support");

    Rng rng(seed);
    SpatialTensor v = conv::make_tensor(kernel.c_in, spatial, spatial);
    for (auto& x : v.data) x = rng.normal();
    double nrm = conv::tensor_norm(v);
    if (nrm == 0.0) {
        v.data[0] = 1.0;
        nrm = 1.0;
    }
    simd::scale(1.0 / nrm, v.data.data(), v.data.size());

    double sigma = 0.0;
    double prev = 0.0;
    for (int it = 0; it < iters; ++it) {
        SpatialTensor u = conv::apply_conv_cyclic(kernel, v);
        const double un = conv::tensor_norm(u);
        if (un == 0.0) {
            sigma = 0.0;
            break;
        }
        prev = sigma;
        sigma = un; // Rayleigh estimate ||K v|| for unit v
        SpatialTensor w = conv::apply_conv_cyclic_adjoint(kernel, u);
        const double wn = conv::tensor_norm(w);
        if (wn == 0.0) break;
        simd::scale(1.0 / wn, w.data.data(), w.data.size());
        v = std::move(w);
    }

    OssnResult res;
    res.sigma_est = sigma;
    res.converged = std::abs(sigma - prev) <= 1e-6 * std::max(sigma, 1e-300);
    const double denom = std::max(1.0, sigma);
    res.kernel = conv::scale_kernel(kernel, 1.0 / denom);
    return res;
}

Kernel2D svcm_clip(const Kernel2D& kernel, int spatial, int outer_iters) {
    kernel.validate();
    if (spatial < kernel.k_h || spatial < kernel.k_w)
        throw ShapeError("svcm_clip: spatial smaller than kernel support");
    constexpr double kPi = 3.14159265358979323846;
    // The alternation converges linearly; ending on a mask step can leave a
    // small overshoot, so after the requested count keep alternating until
    // the operator norm contract (<= 1 + 1e-4) holds with margin.
    const int max_iters = std::max(outer_iters, std::max(200, 4 * outer_iters));
    Kernel2D work = kernel;
    const int s = spatial;
    for (int outer = 0; outer < max_iters; ++outer) {
        if (outer >= outer_iters) {
            double sigma_max = 0.0;
            for (int f1 = 0; f1 < s && sigma_max <= 1.0 + 1e-5; ++f1)
                for (int f2 = 0; f2 < s; ++f2)
                    sigma_max = std::max(sigma_max,
                                         csvd_values(dft_symbol(work, s, f1, f2)).front());
            if (sigma_max <= 1.0 + 1e-5) break;
        }
        // (a) clip the spectrum in the DFT domain
        std::vector<conv::CMatrix> clipped(static_cast<std::size_t>(s) * s);
        for (int f1 = 0; f1 < s; ++f1)
            for (int f2 = 0; f2 < s; ++f2)
                clipped[static_cast<std::size_t>(f1) * s + f2] =
                    csvd_clip(conv::dft_symbol(work, s, f1, f2), 1.0);
        // (b) inverse DFT, keeping only the K x K support (the mask step)
        for (int r = 0; r < work.k_h; ++r)
            for (int c = 0; c < work.k_w; ++c) {
                Matrix& b = work.block(r, c);
                for (int i = 0; i < work.c_out; ++i)
                    for (int j = 0; j < work.c_in; ++j) {
                        std::complex<double> acc = 0.0;
                        for (int f1 = 0; f1 < s; ++f1)
                            for (int f2 = 0; f2 < s; ++f2) {
                                const double angle =
                                    2.0 * kPi *
                                    (static_cast<double>(r) * f1 + static_cast<double>(c) * f2) / s;
                                acc += clipped[static_cast<std::size_t>(f1) * s + f2].at(i, j) *
                                       std::complex<double>(std::cos(angle), std::sin(angle));
                            }
                        b(i, j) = acc.real() / (static_cast<double>(s) * s);
                    }
            }
    }
    return work;
}

BcopParams double_channels(const BcopFactors& f) {
    const int n = f.h.cols();
    if (f.h.rows() != n) throw ShapeError("double_channels: square case (c_out == n) required");

    // Orthonormal range basis of a numerically exact projector.
    auto range_basis = [n](const Matrix& p) {
        const linalg::SvdResult s = linalg::svd(p);
        int k = 0;
        while (k < n && s.singular_values[static_cast<std::size_t>(k)] > 0.5) ++k;
        Matrix basis(n, k);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < k; ++j) basis(i, j) = s.u(i, j);
        return basis;
    };

    // Doubled raw factor [[R, 0], [0, E_k]] where E_k spans the first n-k
    // auxiliary coordinates, so the generated projector is diag(P, S_k).
    auto doubled_factor = [n, &range_basis](const Matrix& p) {
        const Matrix basis = range_basis(p);
        const int k = basis.cols();
        Matrix raw(2 * n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < k; ++j) raw(i, j) = basis(i, j);
        for (int j = k; j < n; ++j) raw(n + (j - k), j) = 1.0;
        return raw;
    };

    BcopParams out;
    out.n = 2 * n;
    out.c_out = 2 * n;
    out.k = static_cast<int>(f.p.size()) + 1;
    out.raw_h = Matrix::zero(2 * n, 2 * n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) out.raw_h(i, j) = f.h(i, j);
        out.raw_h(n + i, n + i) = 1.0;
    }
    for (const auto& p : f.p) out.raw_m.push_back(doubled_factor(p));
    for (const auto& q : f.q) out.raw_n.push_back(doubled_factor(q));
    out.validate();
    return out;
}

} // namespace orthoconv::param
