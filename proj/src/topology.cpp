#include "orthoconv/topology.hpp"

#include "orthoconv/errors.hpp"
#include "orthoconv/linalg.hpp"
#include "orthoconv/spectra.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <string>

namespace orthoconv::topo {

using conv::Kernel1D;
using conv::Kernel2D;

namespace {

long long binom(int n, int r) {
    if (r < 0 || r > n) return 0;
    long long result = 1;
    for (int i = 1; i <= r; ++i) result = result * (n - r + i) / i;
    return result;
}

} // namespace

long long decomposition_coefficient(int k, int j, int i) {
    if (k < 1) throw PreconditionError("decomposition_coefficient: K must be >= 1");
    if (i < 0 || j < 0 || i >= k || j >= k)
        throw PreconditionError("decomposition_coefficient: indices must be in [0, K)");
    if (i > j) return 0;
    const long long c = binom((k - 1) - i, j - i);
    return ((j - i) % 2 == 0) ? c : -c;
}

Matrix b_direct(const Matrix& h, const std::vector<Matrix>& projectors, int k) {
    const int steps = static_cast<int>(projectors.size());
    if (k < 0 || k > steps)
        throw PreconditionError("b_direct: k must be in [0, K-1]");
    Matrix sum = Matrix::zero(h.rows(), h.cols());
    for (std::uint32_t mask = 0; mask < (1u << steps); ++mask) {
        if (std::popcount(mask) != k) continue;
        Matrix product = h;
        for (int i = 0; i < steps; ++i)
            if (!(mask & (1u << i))) product = product * projectors[static_cast<std::size_t>(i)];
        sum += product;
    }
    return sum;
}

std::vector<Matrix> b_sequence_from_kernel(const Kernel1D& kernel) {
    kernel.validate();
    const int k = kernel.size();
    std::vector<Matrix> b;
    b.reserve(static_cast<std::size_t>(k));
    for (int j = 0; j < k; ++j) {
        Matrix bj = kernel.taps[static_cast<std::size_t>(j)];
        for (int i = 0; i < j; ++i) {
            const long long coeff = decomposition_coefficient(k, j, i);
            if (coeff != 0) bj -= static_cast<double>(coeff) * b[static_cast<std::size_t>(i)];
        }
        b.push_back(std::move(bj));
    }
    return b;
}

Matrix recover_h(const Kernel1D& kernel) {
    kernel.validate();
    Matrix h = Matrix::zero(kernel.c_out, kernel.c_in);
    for (const auto& tap : kernel.taps) h += tap;
    if (row_orthogonality_residual(h) > 1e-3)
        throw InvalidKernelError("recover_h: tap sum is not orthogonal (residual " +
                                 std::to_string(row_orthogonality_residual(h)) + ")");
    return h;
}

double operator_orthogonality_defect(const Kernel1D& kernel, int spatial) {
    if (spatial <= 0) spatial = std::max(2 * kernel.size(), 2);
    double defect = 0.0;
    for (double s : linalg::singular_values(conv::operator_matrix_cyclic(kernel, spatial)))
        defect = std::max(defect, std::abs(s - 1.0));
    return defect;
}

double operator_orthogonality_defect(const Kernel2D& kernel, int spatial) {
    if (spatial <= 0) spatial = std::max({2 * kernel.k_h, 2 * kernel.k_w, 2});
    double defect = 0.0;
    for (double s : conv::conv_singular_values_dft(kernel, spatial))
        defect = std::max(defect, std::abs(s - 1.0));
    return defect;
}

double sock_invariant(const Kernel1D& kernel, double tol) {
    kernel.validate();
    if (kernel.size() < 2) return 0.0;
    const double defect = operator_orthogonality_defect(kernel);
    if (defect > tol)
        throw InvalidKernelError("sock_invariant: kernel operator not orthogonal (defect " +
                                 std::to_string(defect) + ")");
    const Matrix h = recover_h(kernel);
    const std::vector<Matrix> b = b_sequence_from_kernel(kernel);
    return trace(transpose(h) * b[static_cast<std::size_t>(kernel.size() - 2)]);
}

Signature2x2 component_signature_2x2(const Kernel2D& kernel, double tol) {
    kernel.validate();
    if (kernel.k_h != 2 || kernel.k_w != 2)
        throw ShapeError("component_signature_2x2: 2x2 kernel required");
    if (kernel.c_out != kernel.c_in)
        throw ShapeError("component_signature_2x2: square channel case required");
    const double defect = operator_orthogonality_defect(kernel);
    if (defect > tol)
        throw InvalidKernelError("component_signature_2x2: kernel operator not orthogonal (defect " +
                                 std::to_string(defect) + ")");

    Matrix sum = kernel.block(0, 0) + kernel.block(0, 1) + kernel.block(1, 0) + kernel.block(1, 1);
    const Matrix ht = transpose(sum);
    const Matrix a1 = ht * kernel.block(0, 0);
    const Matrix a2 = ht * kernel.block(0, 1);
    const Matrix a3 = ht * kernel.block(1, 0);

    const Matrix p = a1 + a2;
    const Matrix q = a1 + a3;
    const double p_res = linalg::projector_residual(p);
    const double q_res = linalg::projector_residual(q);
    if (std::max(p_res, q_res) > 1e-4)
        throw InvalidKernelError("component_signature_2x2: block sums are not projectors (residual " +
                                 std::to_string(std::max(p_res, q_res)) + ")");

    Signature2x2 sig;
    sig.det_sign = det_sign(sum);
    const double rank_tol = 1e-6;
    auto rank_with_margin = [&](const Matrix& m) {
        const std::vector<double> sv = linalg::singular_values(m);
        const double sigma_max = sv.empty() ? 0.0 : sv.front();
        int rank = 0;
        if (sigma_max == 0.0) return rank;
        for (double s : sv) {
            if (s > rank_tol * sigma_max) ++rank;
            // near-threshold singular values make the rank call unreliable
            if (s > rank_tol * sigma_max * 0.1 && s < rank_tol * sigma_max * 10.0)
                sig.reliable = false;
        }
        return rank;
    };
    sig.p = rank_with_margin(p);
    sig.q = rank_with_margin(q);
    return sig;
}

} // namespace orthoconv::topo
