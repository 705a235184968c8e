#include "orthoconv/optim.hpp"

#include "orthoconv/linalg.hpp"
#include "orthoconv/topology.hpp"

#include <cmath>
#include <string>

namespace orthoconv::optim {

using conv::Kernel2D;
using param::BcopParams;

std::vector<double> fd_gradient(const std::function<double(const std::vector<double>&)>& loss,
                                const std::vector<double>& params, double h) {
    if (!(h > 0.0)) throw PreconditionError("fd_gradient: step h must be > 0");
    std::vector<double> grad(params.size());
    std::vector<double> probe = params;
    for (std::size_t i = 0; i < params.size(); ++i) {
        probe[i] = params[i] + h;
        const double plus = loss(probe);
        probe[i] = params[i] - h;
        const double minus = loss(probe);
        probe[i] = params[i];
        if (!std::isfinite(plus) || !std::isfinite(minus))
            throw DataError("fd_gradient: non-finite loss evaluation");
        grad[i] = (plus - minus) / (2.0 * h);
    }
    return grad;
}

std::vector<double> pack_params(const BcopParams& p) {
    std::vector<double> theta;
    theta.reserve(p.raw_h.size() + (p.raw_m.empty() ? 0 : p.raw_m.size() * p.raw_m[0].size() * 2));
    auto append = [&theta](const Matrix& m) {
        theta.insert(theta.end(), m.data(), m.data() + m.size());
    };
    append(p.raw_h);
    for (const auto& m : p.raw_m) append(m);
    for (const auto& m : p.raw_n) append(m);
    return theta;
}

BcopParams unpack_params(const std::vector<double>& theta, const BcopParams& shape) {
    BcopParams p = shape;
    std::size_t pos = 0;
    auto take = [&theta, &pos](Matrix& m) {
        if (pos + m.size() > theta.size()) throw ShapeError("unpack_params: vector too short");
        std::copy(theta.begin() + static_cast<std::ptrdiff_t>(pos),
                  theta.begin() + static_cast<std::ptrdiff_t>(pos + m.size()), m.data());
        pos += m.size();
    };
    take(p.raw_h);
    for (auto& m : p.raw_m) take(m);
    for (auto& m : p.raw_n) take(m);
    if (pos != theta.size()) throw ShapeError("unpack_params: vector too long");
    return p;
}

namespace {

double kernel_sq_distance(const Kernel2D& a, const Kernel2D& b) {
    if (a.c_out != b.c_out || a.c_in != b.c_in || a.k_h != b.k_h || a.k_w != b.k_w)
        throw ShapeError("kernel distance: shape mismatch");
    double sum = 0.0;
    for (std::size_t i = 0; i < a.blocks.size(); ++i) {
        const double d = frobenius_norm(a.blocks[i] - b.blocks[i]);
        sum += d * d;
    }
    return sum;
}

// Topology invariant of the current parameter point: the sum of the sock
// invariants of the two 1-D factor chains (H with the vertical projectors,
// identity with the horizontal ones). Constant along continuous paths.
double factor_chain_invariant(const BcopParams& params) {
    if (params.k < 2) return 0.0;
    const param::BcopFactors f = param::bcop_factors(params);
    const Matrix eye = Matrix::identity(params.n);
    double g = topo::sock_invariant(param::bcop_1d(eye, f.p), 1e-4);
    g += topo::sock_invariant(param::bcop_1d(eye, f.q), 1e-4);
    return g;
}

} // namespace

FitResult fit_bcop_to_target(const Kernel2D& target, const BcopParams& init, int steps,
                             double lr) {
    init.validate();
    if (!(lr > 0.0)) throw PreconditionError("fit_bcop_to_target: lr must be > 0");
    auto loss_of = [&target, &init](const std::vector<double>& theta) {
        return kernel_sq_distance(param::bcop(unpack_params(theta, init)), target);
    };

    std::vector<double> theta = pack_params(init);
    double loss = loss_of(theta);
    const double initial_loss = loss;

    FitResult result;
    result.trajectory.push_back({0, loss, factor_chain_invariant(init)});

    int divergence_streak = 0;
    double step_size = lr;
    for (int step = 1; step <= steps; ++step) {
        const std::vector<double> grad = fd_gradient(loss_of, theta, 1e-6);
        // backtracking: halve the step while it would increase the loss
        double trial_lr = step_size;
        std::vector<double> trial(theta.size());
        double trial_loss = loss;
        for (int attempt = 0; attempt < 20; ++attempt) {
            for (std::size_t i = 0; i < theta.size(); ++i) trial[i] = theta[i] - trial_lr * grad[i];
            trial_loss = loss_of(trial);
            if (trial_loss <= loss || loss == 0.0) break;
            trial_lr *= 0.5;
        }
        theta = trial;
        loss = trial_loss;
        result.trajectory.push_back(
            {step, loss, factor_chain_invariant(unpack_params(theta, init))});

        if (initial_loss > 0.0 && loss > 10.0 * initial_loss) {
            if (++divergence_streak >= 10)
                throw DivergenceError("fit_bcop_to_target: loss diverged", result.trajectory);
        } else {
            divergence_streak = 0;
        }
    }
    result.params = unpack_params(theta, init);
    return result;
}

AscentResult sn_projected_ascent(const Matrix& d, int steps, double lr, AscentMode mode) {
    require_finite(d, "sn_projected_ascent");
    if (d.rows() != d.cols()) throw ShapeError("sn_projected_ascent: D must be square");
    if (steps < 1) throw PreconditionError("sn_projected_ascent: steps must be >= 1");
    if (!(lr > 0.0)) throw PreconditionError("sn_projected_ascent: lr must be > 0");

    const int n = d.rows();
    Matrix a = Matrix::zero(n, n);
    const Matrix grad = transpose(d); // d/dA Tr(A D) = D^T

    AscentResult result;
    result.trajectory.reserve(static_cast<std::size_t>(steps) + 1);
    result.trajectory.push_back({0, trace(a * d), std::nullopt});

    Matrix direction = grad;
    if (mode == AscentMode::two_norm) {
        // gradient with all non-zero singular values rescaled to 1
        const linalg::SvdResult s = linalg::svd(grad);
        const double lead = s.singular_values.empty() ? 0.0 : s.singular_values.front();
        std::vector<double> flat(s.singular_values.size());
        for (std::size_t i = 0; i < flat.size(); ++i)
            flat[i] = s.singular_values[i] > 1e-10 * lead ? 1.0 : 0.0;
        direction = s.u * Matrix::diagonal(flat) * transpose(s.v);
    }

    for (int step = 1; step <= steps; ++step) {
        a += lr * direction;
        const double sigma = linalg::singular_values(a).front();
        if (sigma > 1.0) a *= 1.0 / sigma;
        result.trajectory.push_back({step, trace(a * d), std::nullopt});
    }
    result.a = std::move(a);
    return result;
}

} // namespace orthoconv::optim
