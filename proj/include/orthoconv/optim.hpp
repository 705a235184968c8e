#pragma once

#include "orthoconv/errors.hpp"
#include "orthoconv/kernel.hpp"
#include "orthoconv/matrix.hpp"
#include "orthoconv/param.hpp"

#include <functional>
#include <optional>
#include <vector>

namespace orthoconv::optim {

struct TrajectoryPoint {
    int step = 0;
    double loss = 0.0;
    std::optional<double> invariant;
};

using Trajectory = std::vector<TrajectoryPoint>;

class DivergenceError : public Error {
public:
    DivergenceError(const std::string& msg, Trajectory trajectory)
        : Error(msg), trajectory(std::move(trajectory)) {}
    Trajectory trajectory;
};

/// Central-difference gradient; exact to O(h^2) on quadratics.
std::vector<double> fd_gradient(const std::function<double(const std::vector<double>&)>& loss,
                                const std::vector<double>& params, double h = 1e-5);

/// Flat parameter vector <-> BcopParams (raw_h, then raw_m, then raw_n,
/// all row-major).
std::vector<double> pack_params(const param::BcopParams& p);
param::BcopParams unpack_params(const std::vector<double>& theta, const param::BcopParams& shape);

struct FitResult {
    param::BcopParams params;
    Trajectory trajectory;
};

/// Gradient descent with finite-difference gradients on
/// L(theta) = ||bcop(theta) - target||_F^2, with backtracking when a step
/// would increase the loss. The trajectory records the loss and the
/// topology invariant (sum of the factor-chain sock invariants) per step.
FitResult fit_bcop_to_target(const conv::Kernel2D& target, const param::BcopParams& init,
                             int steps, double lr);

enum class AscentMode { euclidean, two_norm };

struct AscentResult {
    Matrix a;
    Trajectory trajectory; ///< loss column holds the objective Tr(A D)
};

/// Projected ascent on Tr(A D) over the spectral-norm ball, from A = 0.
/// euclidean: step along the raw gradient, then divide by max(1, sigma_max).
/// two_norm: step along U P(Lambda) V^T of the gradient (all non-zero
/// singular values rescaled to 1), then project.
AscentResult sn_projected_ascent(const Matrix& d, int steps, double lr, AscentMode mode);

} // namespace orthoconv::optim
