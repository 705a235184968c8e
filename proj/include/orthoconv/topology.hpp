#pragma once

#include "orthoconv/kernel.hpp"
#include "orthoconv/matrix.hpp"

#include <cstdint>
#include <vector>

namespace orthoconv::topo {

/// Coefficient a_{K,j,i} = (-1)^(j-i) * binom((K-1)-i, j-i) for i <= j,
/// 0 for i > j. Indices must lie in [0, K).
long long decomposition_coefficient(int k, int j, int i);

/// B_k = sum over binary tuples of weight k of H * prod[(1-d_i) P_i + d_i I].
Matrix b_direct(const Matrix& h, const std::vector<Matrix>& projectors, int k);

/// Recovers B_0..B_{K-1} from the kernel taps by the triangular recursion
/// B_j = A_j - sum_{k<j} (-1)^(j-k) binom((K-1)-k, j-k) B_k.
std::vector<Matrix> b_sequence_from_kernel(const conv::Kernel1D& kernel);

/// H = sum of all taps. Throws InvalidKernelError when the sum is far from
/// orthogonal (residual > 1e-3).
Matrix recover_h(const conv::Kernel1D& kernel);

/// Separating invariant g = Tr(H^T B_{K-2}) = sum of projector ranks for any
/// kernel constructed from projectors; 0 for K = 1. Validates orthogonality
/// of the kernel operator first and fails loudly otherwise.
double sock_invariant(const conv::Kernel1D& kernel, double tol = 1e-6);

struct Signature2x2 {
    int det_sign = 0; ///< sign of det(sum of blocks)
    int p = 0;        ///< rank(A~_1 + A~_2)
    int q = 0;        ///< rank(A~_1 + A~_3)
    bool reliable = true; ///< false when a singular value sits near the rank threshold
};

/// Connected-component signature of a 2 x 2 orthogonal kernel: with
/// H = (sum blocks)^T and A~_i = H A_i, returns the sign of det(sum blocks)
/// and the ranks of the two projector sums.
Signature2x2 component_signature_2x2(const conv::Kernel2D& kernel, double tol = 1e-6);

/// max |sigma - 1| over the cyclic operator spectrum (the orthogonality
/// defect used by the validation paths).
double operator_orthogonality_defect(const conv::Kernel1D& kernel, int spatial = 0);
double operator_orthogonality_defect(const conv::Kernel2D& kernel, int spatial = 0);

} // namespace orthoconv::topo
