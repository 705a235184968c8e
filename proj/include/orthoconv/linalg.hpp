#pragma once

#include "orthoconv/matrix.hpp"

#include <cstdint>
#include <vector>

namespace orthoconv::linalg {

// Iteration defaults for the orthogonalization pipeline: 20 first-order
// Björck iterations and 10 power iterations.
inline constexpr int kDefaultBjorckIters = 20;
inline constexpr int kDefaultPowerIters = 10;
/// Safety factor applied to the power-iteration estimate before Björck.
inline constexpr double kPrescaleMargin = 1e-3;

struct SvdResult {
    Matrix u;                            ///< left singular vectors, orthonormal columns
    std::vector<double> singular_values; ///< descending, non-negative
    Matrix v;                            ///< right singular vectors, orthonormal columns
};

/// Full SVD by one-sided Jacobi. M = U diag(s) V^T.
SvdResult svd(const Matrix& m);

/// Singular values only, sorted descending. Length = min(rows, cols).
std::vector<double> singular_values(const Matrix& m);

struct PowerIterationResult {
    double sigma;          ///< Rayleigh estimate, never above sigma_max
    std::vector<double> u; ///< left vector estimate (unit)
    std::vector<double> v; ///< right vector estimate (unit)
};

/// Power iteration on M^T M starting from a seeded random vector.
PowerIterationResult power_iteration(const Matrix& m, int iters, std::uint64_t seed);

/// First-order Björck orthogonalization A <- A(I + Q/2), Q = I - A^T A.
/// Requires rows >= cols and spectral norm at most 1 (+1e-9 slack).
Matrix bjorck(const Matrix& a, int iters = kDefaultBjorckIters);

struct OrthoOptions {
    int bjorck_iters = kDefaultBjorckIters;
    int power_iters = kDefaultPowerIters;
};

/// Orthonormalizes any full-rank matrix: power-iteration prescale then
/// Björck. Wide inputs are transposed internally, so the result has
/// orthonormal rows when cols > rows and orthonormal columns otherwise.
Matrix orthogonalize(const Matrix& m, const OrthoOptions& opts = {});

/// P = R~ R~^T with R~ = Björck(R / (sigma_est * (1 + margin))).
/// R must be n x k with k <= n. If achieved_rank is given it receives
/// matrix_rank(P); a rank below k indicates a rank-deficient input.
Matrix projector_from_raw(const Matrix& r, const OrthoOptions& opts = {},
                          int* achieved_rank = nullptr);

/// Number of singular values above rel_tol * sigma_max.
int matrix_rank(const Matrix& m, double rel_tol = 1e-6);

/// max(|P - P^T|_F, |P^2 - P|_F): distance from the symmetric-projector set.
double projector_residual(const Matrix& p);

} // namespace orthoconv::linalg
