#include "orthoconv/linalg.hpp"

#include "orthoconv/errors.hpp"
#include "orthoconv/rng.hpp"
#include "orthoconv/simd.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace orthoconv::linalg {

namespace {

// One-sided Jacobi on the rows of W (the columns of the input, transposed so
// sweeps touch contiguous memory). V accumulates the same rotations.
void jacobi_sweeps(Matrix& w, Matrix& v) {
    const int n = w.rows();
    const std::size_t len = static_cast<std::size_t>(w.cols());
    const double tol = 1e-15;
    const int max_sweeps = 60;
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        bool rotated = false;
        for (int p = 0; p < n - 1; ++p) {
            for (int q = p + 1; q < n; ++q) {
                const double alpha = simd::nrm2_sq(w.row(p), len);
                const double beta = simd::nrm2_sq(w.row(q), len);
                const double gamma = simd::dot(w.row(p), w.row(q), len);
                if (std::abs(gamma) <= tol * std::sqrt(alpha * beta) || gamma == 0.0) continue;
                rotated = true;
                const double zeta = (beta - alpha) / (2.0 * gamma);
                const double t = (zeta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = c * t;
                simd::rot(w.row(p), w.row(q), len, c, s);
                simd::rot(v.row(p), v.row(q), static_cast<std::size_t>(v.cols()), c, s);
            }
        }
        if (!rotated) break;
    }
}

// Orthonormal completion for zero columns of U (rank-deficient inputs).
void complete_columns(Matrix& u, const std::vector<int>& missing) {
    const int m = u.rows();
    for (int idx : missing) {
        for (int cand = 0; cand < m; ++cand) {
            std::vector<double> col(m, 0.0);
            col[cand] = 1.0;
            // Gram-Schmidt against all current columns.
            for (int j = 0; j < u.cols(); ++j) {
                if (j == idx) continue;
                double proj = 0.0;
                for (int i = 0; i < m; ++i) proj += u(i, j) * col[i];
                for (int i = 0; i < m; ++i) col[i] -= proj * u(i, j);
            }
            const double nrm = std::sqrt(simd::nrm2_sq(col.data(), col.size()));
            if (nrm > 1e-6) {
                for (int i = 0; i < m; ++i) u(i, idx) = col[i] / nrm;
                break;
            }
        }
    }
}

} // namespace

SvdResult svd(const Matrix& m) {
    require_finite(m, "svd");
    const bool wide = m.cols() > m.rows();
    const Matrix a = wide ? transpose(m) : m; // a: rows >= cols
    const int rows = a.rows();
    const int cols = a.cols();

    Matrix w = transpose(a);           // cols x rows; row i of w = column i of a
    Matrix vt = Matrix::identity(cols); // row i of vt = column i of V
    jacobi_sweeps(w, vt);

    std::vector<double> sigma(cols);
    for (int i = 0; i < cols; ++i)
        sigma[i] = std::sqrt(simd::nrm2_sq(w.row(i), static_cast<std::size_t>(rows)));

    std::vector<int> order(cols);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&sigma](int x, int y) { return sigma[x] > sigma[y]; });

    Matrix u(rows, cols);
    Matrix v(cols, cols);
    std::vector<double> s(cols);
    std::vector<int> missing;
    const double sigma_max = sigma.empty() ? 0.0 : sigma[order.empty() ? 0 : order[0]];
    for (int j = 0; j < cols; ++j) {
        const int src = order[j];
        s[j] = sigma[src];
        for (int i = 0; i < cols; ++i) v(i, j) = vt(src, i);
        if (sigma[src] > sigma_max * 1e-14 && sigma[src] > 0.0) {
            for (int i = 0; i < rows; ++i) u(i, j) = w(src, i) / sigma[src];
        } else {
            missing.push_back(j);
        }
    }
    complete_columns(u, missing);

    SvdResult result;
    if (wide) {
        result.u = std::move(v);
        result.v = std::move(u);
    } else {
        result.u = std::move(u);
        result.v = std::move(v);
    }
    result.singular_values = std::move(s);
    return result;
}

std::vector<double> singular_values(const Matrix& m) {
    require_finite(m, "singular_values");
    const Matrix a = m.cols() > m.rows() ? transpose(m) : m;
    const int rows = a.rows();
    const int cols = a.cols();
    Matrix w = transpose(a);
    Matrix vt = Matrix::identity(cols);
    jacobi_sweeps(w, vt);
    std::vector<double> sigma(cols);
    for (int i = 0; i < cols; ++i)
        sigma[i] = std::sqrt(simd::nrm2_sq(w.row(i), static_cast<std::size_t>(rows)));
    std::sort(sigma.begin(), sigma.end(), std::greater<double>());
    return sigma;
}

PowerIterationResult power_iteration(const Matrix& m, int iters, std::uint64_t seed) {
    require_finite(m, "power_iteration");
    if (iters < 1) throw PreconditionError("power_iteration: iters must be >= 1");
    Rng rng(seed);
    std::vector<double> v = random_vector(static_cast<std::size_t>(m.cols()), rng);
    auto normalize = [](std::vector<double>& x) {
        const double nrm = std::sqrt(simd::nrm2_sq(x.data(), x.size()));
        if (nrm == 0.0) return false;
        simd::scale(1.0 / nrm, x.data(), x.size());
        return true;
    };
    if (!normalize(v)) v[0] = 1.0;

    for (int it = 0; it < iters; ++it) {
        std::vector<double> w = matvec_transposed(m, matvec(m, v));
        if (!normalize(w)) {
            // M v vanished: zero (or nilpotent-direction) matrix.
            PowerIterationResult res;
            res.sigma = 0.0;
            res.u.assign(static_cast<std::size_t>(m.rows()), 0.0);
            if (!res.u.empty()) res.u[0] = 1.0;
            res.v = v;
            return res;
        }
        v = std::move(w);
    }

    std::vector<double> mv = matvec(m, v);
    const double sigma = std::sqrt(simd::nrm2_sq(mv.data(), mv.size()));
    PowerIterationResult res;
    res.sigma = sigma;
    res.v = std::move(v);
    if (sigma > 0.0) {
        simd::scale(1.0 / sigma, mv.data(), mv.size());
        res.u = std::move(mv);
    } else {
        res.u.assign(static_cast<std::size_t>(m.rows()), 0.0);
        if (!res.u.empty()) res.u[0] = 1.0;
    }
    return res;
}

Matrix bjorck(const Matrix& a, int iters) {
    require_finite(a, "bjorck");
    if (a.rows() < a.cols()) throw ShapeError("bjorck: requires rows >= cols");
    if (iters < 0) throw PreconditionError("bjorck: iters must be >= 0");
    const std::vector<double> sv = singular_values(a);
    if (!sv.empty() && sv.front() > 1.0 + 1e-9) {
        throw PreconditionError("bjorck: spectral norm " + std::to_string(sv.front()) +
                                " exceeds 1; pre-scale the input");
    }
    Matrix x = a;
    const Matrix eye = Matrix::identity(a.cols());
    for (int it = 0; it < iters; ++it) {
        const Matrix q = eye - transpose(x) * x;
        const double residual = frobenius_norm(q);
        if (residual < 1e-15) break;
        x = x + 0.5 * (x * q);
    }
    return x;
}

namespace {

// At least `iters` Björck iterations, extended in rounds until the
// orthogonality residual stops mattering. Ill-conditioned inputs need more
// than the configured count to meet the 1e-8 preconditions downstream.
Matrix bjorck_to_convergence(const Matrix& a, int iters) {
    Matrix o = bjorck(a, iters);
    for (int round = 0; round < 10; ++round) {
        if (orthogonality_residual(o) < 1e-12) break;
        o = bjorck(o, iters);
    }
    return o;
}

} // namespace

Matrix orthogonalize(const Matrix& m, const OrthoOptions& opts) {
    require_finite(m, "orthogonalize");
    const bool wide = m.cols() > m.rows();
    Matrix a = wide ? transpose(m) : m;
    const PowerIterationResult pi = power_iteration(a, std::max(1, opts.power_iters), 1);
    const double sigma = pi.sigma;
    if (sigma <= 0.0) throw PreconditionError("orthogonalize: zero matrix");
    // Exact norm guard: the power estimate can lag on tight spectra.
    const double sigma_exact = singular_values(a).front();
    const double s = std::max(sigma, sigma_exact) * (1.0 + kPrescaleMargin);
    a *= 1.0 / s;
    Matrix o = bjorck_to_convergence(a, opts.bjorck_iters);
    return wide ? transpose(o) : o;
}

Matrix projector_from_raw(const Matrix& r, const OrthoOptions& opts, int* achieved_rank) {
    require_finite(r, "projector_from_raw");
    if (r.cols() > r.rows())
        throw ShapeError("projector_from_raw: R must be n x k with k <= n");

    // Power iteration for the prescale: at least the configured count, then
    // continue until the estimate stalls so the 1e-3 margin is honest.
    Rng rng(1);
    std::vector<double> v = random_vector(static_cast<std::size_t>(r.cols()), rng);
    double nrm = std::sqrt(simd::nrm2_sq(v.data(), v.size()));
    simd::scale(1.0 / nrm, v.data(), v.size());
    double sigma = 0.0;
    const int min_iters = std::max(1, opts.power_iters);
    for (int it = 0; it < 512; ++it) {
        std::vector<double> w = matvec_transposed(r, matvec(r, v));
        const double wn = std::sqrt(simd::nrm2_sq(w.data(), w.size()));
        if (wn == 0.0) break;
        simd::scale(1.0 / wn, w.data(), w.size());
        v = std::move(w);
        std::vector<double> rv = matvec(r, v);
        const double est = std::sqrt(simd::nrm2_sq(rv.data(), rv.size()));
        const bool stalled = std::abs(est - sigma) <= 1e-9 * std::max(est, 1e-300);
        sigma = est;
        if (it + 1 >= min_iters && stalled) break;
    }
    if (sigma <= 0.0) {
        // Zero input: projector onto the zero subspace.
        if (achieved_rank) *achieved_rank = 0;
        return Matrix::zero(r.rows(), r.rows());
    }

    Matrix scaled = r;
    scaled *= 1.0 / (sigma * (1.0 + kPrescaleMargin));
    const Matrix rt = bjorck_to_convergence(scaled, opts.bjorck_iters);
    Matrix p = rt * transpose(rt);
    // Exact symmetrization: R~ R~^T is symmetric up to rounding.
    for (int i = 0; i < p.rows(); ++i)
        for (int j = i + 1; j < p.cols(); ++j) {
            const double m = 0.5 * (p(i, j) + p(j, i));
            p(i, j) = m;
            p(j, i) = m;
        }
    if (achieved_rank) *achieved_rank = matrix_rank(p);
    return p;
}

int matrix_rank(const Matrix& m, double rel_tol) {
    if (!(rel_tol > 0.0 && rel_tol < 1.0))
        throw PreconditionError("matrix_rank: rel_tol must be in (0, 1)");
    const std::vector<double> sv = singular_values(m);
    if (sv.empty() || sv.front() == 0.0) return 0;
    const double threshold = rel_tol * sv.front();
    int rank = 0;
    for (double s : sv)
        if (s > threshold) ++rank;
    return rank;
}

double projector_residual(const Matrix& p) {
    if (p.rows() != p.cols()) throw ShapeError("projector_residual: square matrix required");
    const double sym = frobenius_norm(p - transpose(p));
    const double idem = frobenius_norm(p * p - p);
    return std::max(sym, idem);
}

} // namespace orthoconv::linalg
