#include "orthoconv/spectra.hpp"

#include "orthoconv/errors.hpp"
#include "orthoconv/parallel.hpp"

#include <algorithm>
#include <cmath>

namespace orthoconv::conv {

namespace {

constexpr double kPi = 3.14159265358979323846;

struct CJacobi {
    // columns[j] holds the j-th column of the working matrix
    std::vector<std::vector<std::complex<double>>> u_cols;
    std::vector<std::vector<std::complex<double>>> v_cols;
};

double col_norm_sq(const std::vector<std::complex<double>>& c) {
    double s = 0.0;
    for (const auto& z : c) s += std::norm(z);
    return s;
}

std::complex<double> col_dot(const std::vector<std::complex<double>>& a,
                             const std::vector<std::complex<double>>& b) {
    std::complex<double> s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += std::conj(a[i]) * b[i];
    return s;
}

// One-sided Jacobi with Hermitian inner products. After convergence the
// working columns are mutually orthogonal; their norms are the singular
// values and v_cols accumulates the right factor.
CJacobi cjacobi(const CMatrix& m) {
    CJacobi j;
    j.u_cols.assign(m.cols, std::vector<std::complex<double>>(m.rows));
    j.v_cols.assign(m.cols, std::vector<std::complex<double>>(m.cols, 0.0));
    for (int c = 0; c < m.cols; ++c) {
        for (int r = 0; r < m.rows; ++r) j.u_cols[c][static_cast<std::size_t>(r)] = m.at(r, c);
        j.v_cols[c][static_cast<std::size_t>(c)] = 1.0;
    }
    const double tol = 1e-15;
    const int max_sweeps = 60;
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        bool rotated = false;
        for (int p = 0; p < m.cols - 1; ++p) {
            for (int q = p + 1; q < m.cols; ++q) {
                const double alpha = col_norm_sq(j.u_cols[p]);
                const double beta = col_norm_sq(j.u_cols[q]);
                const std::complex<double> gamma = col_dot(j.u_cols[p], j.u_cols[q]);
                const double g = std::abs(gamma);
                if (g <= tol * std::sqrt(alpha * beta) || g == 0.0) continue;
                rotated = true;
                const std::complex<double> phase = gamma / g;
                const double zeta = (beta - alpha) / (2.0 * g);
                const double t =
                    (zeta >= 0.0 ? 1.0 : -1.0) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = c * t;
                auto rotate = [&](std::vector<std::complex<double>>& cp,
                                  std::vector<std::complex<double>>& cq) {
                    for (std::size_t i = 0; i < cp.size(); ++i) {
                        const std::complex<double> a = cp[i];
                        const std::complex<double> b = cq[i];
                        cp[i] = c * a - s * (std::conj(phase) * b);
                        cq[i] = s * (phase * a) + c * b;
                    }
                };
                rotate(j.u_cols[p], j.u_cols[q]);
                rotate(j.v_cols[p], j.v_cols[q]);
            }
        }
        if (!rotated) break;
    }
    return j;
}

} // namespace

std::vector<double> csvd_values(const CMatrix& m) {
    const CJacobi j = cjacobi(m);
    std::vector<double> sv(static_cast<std::size_t>(m.cols));
    for (int c = 0; c < m.cols; ++c) sv[static_cast<std::size_t>(c)] = std::sqrt(col_norm_sq(j.u_cols[c]));
    std::sort(sv.begin(), sv.end(), std::greater<double>());
    if (m.rows < m.cols) sv.resize(static_cast<std::size_t>(m.rows));
    return sv;
}

CMatrix csvd_clip(const CMatrix& m, double limit) {
    const CJacobi j = cjacobi(m);
    CMatrix out(m.rows, m.cols);
    for (int c = 0; c < m.cols; ++c) {
        const double sigma = std::sqrt(col_norm_sq(j.u_cols[c]));
        if (sigma == 0.0) continue;
        const double clipped = std::min(sigma, limit);
        // contribution clipped * u * v^H with u = col/sigma
        const double f = clipped / sigma;
        for (int r = 0; r < m.rows; ++r)
            for (int cc = 0; cc < m.cols; ++cc)
                out.at(r, cc) += f * j.u_cols[c][static_cast<std::size_t>(r)] *
                                 std::conj(j.v_cols[c][static_cast<std::size_t>(cc)]);
    }
    return out;
}

CMatrix dft_symbol(const Kernel2D& k, int spatial, int f1, int f2) {
    CMatrix m(k.c_out, k.c_in);
    for (int r = 0; r < k.k_h; ++r)
        for (int c = 0; c < k.k_w; ++c) {
            const double angle = -2.0 * kPi * (static_cast<double>(r) * f1 +
                                               static_cast<double>(c) * f2) / spatial;
            const std::complex<double> w(std::cos(angle), std::sin(angle));
            const Matrix& a = k.block(r, c);
            for (int i = 0; i < k.c_out; ++i)
                for (int jx = 0; jx < k.c_in; ++jx) m.at(i, jx) += w * a(i, jx);
        }
    return m;
}

std::vector<double> conv_singular_values_dft(const Kernel2D& k, int spatial) {
    k.validate();
    if (spatial < k.k_h || spatial < k.k_w)
        throw ShapeError("conv_singular_values_dft: spatial smaller than kernel support");
    const std::size_t freqs = static_cast<std::size_t>(spatial) * spatial;
    std::vector<std::vector<double>> per_freq(freqs);
    parallel_for(freqs, [&](std::size_t f) {
        const int f1 = static_cast<int>(f) / spatial;
        const int f2 = static_cast<int>(f) % spatial;
        per_freq[f] = csvd_values(dft_symbol(k, spatial, f1, f2));
    });
    std::vector<double> all;
    all.reserve(freqs * static_cast<std::size_t>(std::min(k.c_out, k.c_in)));
    for (const auto& sv : per_freq) all.insert(all.end(), sv.begin(), sv.end());
    std::sort(all.begin(), all.end(), std::greater<double>());
    return all;
}

} // namespace orthoconv::conv
