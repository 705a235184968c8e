#pragma once

#include "orthoconv/kernel.hpp"
#include "orthoconv/linalg.hpp"
#include "orthoconv/matrix.hpp"

#include <cstdint>
#include <vector>

namespace orthoconv::param {

/// Unconstrained BCOP parameters: raw_h is c_out x n and each raw projector
/// factor is n x floor(n/2), one (m, n) pair per kernel step.
struct BcopParams {
    int n = 0;     ///< input channels
    int c_out = 0; ///< output channels, c_out <= n
    int k = 1;     ///< kernel size (K x K)
    Matrix raw_h;
    std::vector<Matrix> raw_m; ///< vertical-step factors, size K-1
    std::vector<Matrix> raw_n; ///< horizontal-step factors, size K-1

    void validate() const;
};

/// Constructed (constrained) BCOP factors.
struct BcopFactors {
    Matrix h;                ///< c_out x n, orthonormal rows
    std::vector<Matrix> p;   ///< vertical projectors, n x n
    std::vector<Matrix> q;   ///< horizontal projectors, n x n
};

BcopParams random_bcop_params(int n, int c_out, int k, std::uint64_t seed);

/// Orthogonalizes raw_h and builds the symmetric projectors.
BcopFactors bcop_factors(const BcopParams& params, const linalg::OrthoOptions& opts = {});

/// W = H # [P;I-P] # [Q,I-Q] # ... from already-constrained factors.
conv::Kernel2D bcop_from_factors(const BcopFactors& f);

/// Full Algorithm-1 pipeline: K x K kernel whose cyclic operator has
/// orthonormal rows for any spatial size >= K. Deterministic in params.
conv::Kernel2D bcop(const BcopParams& params, const linalg::OrthoOptions& opts = {});

/// H # [P_1, I-P_1] # ... for pre-validated factors: H with orthonormal rows
/// within 1e-8 and each P a symmetric projector within 1e-8.
conv::Kernel1D bcop_1d(const Matrix& h, const std::vector<Matrix>& projectors);

struct SockSample {
    conv::Kernel1D kernel;
    Matrix h;                      ///< special orthogonal (det +1)
    std::vector<Matrix> projectors;
    std::vector<int> ranks;
};

/// 1-D kernel built from random projectors of exactly the requested ranks
/// and a random special-orthogonal H.
SockSample sock_with_ranks(int n, const std::vector<int>& ranks, std::uint64_t seed);

struct RkoOptions {
    linalg::OrthoOptions ortho;
    /// Scale applied after orthogonalizing the reshape; <= 0 means 1/K.
    double scale = 0.0;
};

/// Reshaped-kernel orthogonalization: Björck on the (c_out, K^2 c_in)
/// reshape, then scale the kernel by 1/K. Square kernels only.
conv::Kernel2D rko(const conv::Kernel2D& raw, const RkoOptions& opts = {});

struct OssnResult {
    conv::Kernel2D kernel;
    double sigma_est = 0.0;
    bool converged = true; ///< estimate change <= 1e-6 * sigma at the last iteration
};

/// One-sided spectral normalization: power iteration on the cyclic operator
/// at the given spatial size, then scale by 1/max(1, sigma_est).
OssnResult ossn_normalize(const conv::Kernel2D& kernel, int spatial, int iters,
                          std::uint64_t seed);

/// Singular value clipping and masking: alternate a DFT-domain clip of the
/// operator spectrum to <= 1 with masking back to the K x K support.
conv::Kernel2D svcm_clip(const conv::Kernel2D& kernel, int spatial, int outer_iters);

/// Channel-doubling embedding: factors over n channels become raw parameters
/// over 2n channels whose projectors all have rank exactly n, with
/// C'(x)_{1:n} = C(x_{1:n}). Requires c_out == n.
BcopParams double_channels(const BcopFactors& f);

} // namespace orthoconv::param
