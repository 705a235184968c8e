#include "orthoconv/lipnet.hpp"

#include "orthoconv/errors.hpp"
#include "orthoconv/linalg.hpp"
#include "orthoconv/topology.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>

namespace orthoconv::lipnet {

using conv::SpatialTensor;

Shape spatial_shape(int channels, int height, int width) {
    Shape s;
    s.channels = channels;
    s.height = height;
    s.width = width;
    return s;
}

Shape flat_shape(int dim) {
    Shape s;
    s.flat = true;
    s.flat_dim = dim;
    return s;
}

BcopConvLayer make_bcop_conv(const param::BcopParams& params) {
    BcopConvLayer layer{params, param::bcop(params)};
    const double defect = topo::operator_orthogonality_defect(layer.kernel);
    if (defect > 1e-6)
        throw InvalidKernelError("BcopConv: constructed kernel not orthogonal (defect " +
                                 std::to_string(defect) + ")");
    return layer;
}

OrthoDenseLayer make_ortho_dense(const Matrix& raw, double scale) {
    OrthoDenseLayer layer{linalg::orthogonalize(raw), scale};
    const Matrix& w = layer.w;
    const double res = w.rows() <= w.cols() ? row_orthogonality_residual(w)
                                            : orthogonality_residual(w);
    if (res > 1e-6)
        throw InvalidKernelError("OrthoDense: weight not orthonormal (residual " +
                                 std::to_string(res) + ")");
    return layer;
}

namespace {

Shape layer_output_shape(const Layer& layer, const Shape& in) {
    return std::visit(
        [&in](const auto& l) -> Shape {
            using T = std::decay_t<decltype(l)>;
            if constexpr (std::is_same_v<T, BcopConvLayer>) {
                if (in.flat) throw ShapeError("BcopConv requires a spatial input");
                if (in.channels != l.kernel.c_in)
                    throw ShapeError("BcopConv: channel mismatch");
                if (in.height < l.kernel.k_h || in.width < l.kernel.k_w)
                    throw ShapeError("BcopConv: input smaller than kernel");
                return spatial_shape(l.kernel.c_out, in.height, in.width);
            } else if constexpr (std::is_same_v<T, OrthoDenseLayer>) {
                if (l.w.cols() != in.dims())
                    throw ShapeError("OrthoDense: input dimension mismatch");
                return flat_shape(l.w.rows());
            } else if constexpr (std::is_same_v<T, GroupSortLayer>) {
                if (l.group_size < 1) throw ShapeError("GroupSort: group size must be >= 1");
                const int c = in.flat ? in.flat_dim : in.channels;
                if (c % l.group_size != 0)
                    throw ShapeError("GroupSort: group size does not divide channels");
                return in;
            } else {
                if (in.flat) throw ShapeError("InvertibleDownsample requires a spatial input");
                if (l.stride < 1 || in.height % l.stride != 0 || in.width % l.stride != 0)
                    throw ShapeError("InvertibleDownsample: stride does not divide dims");
                return spatial_shape(in.channels * l.stride * l.stride, in.height / l.stride,
                                     in.width / l.stride);
            }
        },
        layer);
}

} // namespace

LipNetwork::LipNetwork(Shape input, std::vector<Layer> layers)
    : input_(input), layers_(std::move(layers)) {
    Shape s = input_;
    for (const auto& layer : layers_) s = layer_output_shape(layer, s);
    output_ = s;
}

std::vector<double> group_sort(const std::vector<double>& x, int group_size) {
    if (group_size < 1 || x.size() % static_cast<std::size_t>(group_size) != 0)
        throw ShapeError("group_sort: group size must divide the vector length");
    std::vector<double> out = x;
    for (std::size_t g = 0; g < out.size(); g += static_cast<std::size_t>(group_size))
        std::sort(out.begin() + static_cast<std::ptrdiff_t>(g),
                  out.begin() + static_cast<std::ptrdiff_t>(g + static_cast<std::size_t>(group_size)),
                  std::greater<double>());
    return out;
}

SpatialTensor invertible_downsample(const SpatialTensor& x, int stride) {
    if (stride < 1 || x.height % stride != 0 || x.width % stride != 0)
        throw ShapeError("invertible_downsample: stride does not divide dims");
    SpatialTensor out = conv::make_tensor(x.channels * stride * stride, x.height / stride,
                                          x.width / stride);
    for (int c = 0; c < x.channels; ++c)
        for (int h = 0; h < out.height; ++h)
            for (int w = 0; w < out.width; ++w)
                for (int di = 0; di < stride; ++di)
                    for (int dj = 0; dj < stride; ++dj)
                        out.at(c * stride * stride + di * stride + dj, h, w) =
                            x.at(c, h * stride + di, w * stride + dj);
    return out;
}

SpatialTensor invertible_upsample(const SpatialTensor& x, int stride) {
    if (stride < 1 || x.channels % (stride * stride) != 0)
        throw ShapeError("invertible_upsample: channels not divisible by stride^2");
    SpatialTensor out =
        conv::make_tensor(x.channels / (stride * stride), x.height * stride, x.width * stride);
    for (int c = 0; c < out.channels; ++c)
        for (int h = 0; h < x.height; ++h)
            for (int w = 0; w < x.width; ++w)
                for (int di = 0; di < stride; ++di)
                    for (int dj = 0; dj < stride; ++dj)
                        out.at(c, h * stride + di, w * stride + dj) =
                            x.at(c * stride * stride + di * stride + dj, h, w);
    return out;
}

namespace {

struct Activation {
    bool flat = false;
    SpatialTensor tensor;
    std::vector<double> vec;

    std::vector<double> flattened() const { return flat ? vec : tensor.data; }
};

// Channel-wise group sort at every spatial site (channel-major layout means
// the per-site channel vector is strided).
SpatialTensor group_sort_spatial(const SpatialTensor& x, int group_size) {
    if (x.channels % group_size != 0)
        throw ShapeError("group_sort: group size does not divide channels");
    SpatialTensor out = x;
    const int sites = x.height * x.width;
    std::vector<double> channel(static_cast<std::size_t>(x.channels));
    for (int s = 0; s < sites; ++s) {
        for (int c = 0; c < x.channels; ++c)
            channel[static_cast<std::size_t>(c)] =
                x.data[static_cast<std::size_t>(c) * sites + s];
        const std::vector<double> sorted = group_sort(channel, group_size);
        for (int c = 0; c < x.channels; ++c)
            out.data[static_cast<std::size_t>(c) * sites + s] = sorted[static_cast<std::size_t>(c)];
    }
    return out;
}

Activation apply_layer(const Layer& layer, Activation act) {
    return std::visit(
        [&act](const auto& l) -> Activation {
            using T = std::decay_t<decltype(l)>;
            if constexpr (std::is_same_v<T, BcopConvLayer>) {
                if (act.flat) throw ShapeError("BcopConv requires a spatial input");
                act.tensor = conv::apply_conv_cyclic(l.kernel, act.tensor);
                return act;
            } else if constexpr (std::is_same_v<T, OrthoDenseLayer>) {
                std::vector<double> x = act.flattened();
                std::vector<double> y = matvec(l.w, x);
                if (l.scale != 1.0)
                    for (auto& v : y) v *= l.scale;
                Activation out;
                out.flat = true;
                out.vec = std::move(y);
                return out;
            } else if constexpr (std::is_same_v<T, GroupSortLayer>) {
                if (act.flat) {
                    act.vec = group_sort(act.vec, l.group_size);
                } else {
                    act.tensor = group_sort_spatial(act.tensor, l.group_size);
                }
                return act;
            } else {
                if (act.flat) throw ShapeError("InvertibleDownsample requires a spatial input");
                act.tensor = invertible_downsample(act.tensor, l.stride);
                return act;
            }
        },
        layer);
}

Activation run_network(const LipNetwork& net, const SpatialTensor& x) {
    const Shape& in = net.input_shape();
    if (in.flat || x.channels != in.channels || x.height != in.height || x.width != in.width)
        throw ShapeError("forward: input shape mismatch");
    Activation act;
    act.tensor = x;
    for (const auto& layer : net.layers()) act = apply_layer(layer, act);
    return act;
}

} // namespace

std::vector<double> forward(const LipNetwork& net, const SpatialTensor& x) {
    return run_network(net, x).flattened();
}

double lipschitz_bound(const LipNetwork& net) {
    double bound = 1.0;
    for (const auto& layer : net.layers())
        if (const auto* dense = std::get_if<OrthoDenseLayer>(&layer))
            bound *= std::abs(dense->scale);
    return bound;
}

double margin(const std::vector<double>& logits, int t) {
    if (logits.size() < 2) throw PreconditionError("margin: at least two classes required");
    if (t < 0 || static_cast<std::size_t>(t) >= logits.size())
        throw PreconditionError("margin: label out of range");
    double best_other = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < logits.size(); ++i)
        if (static_cast<int>(i) != t) best_other = std::max(best_other, logits[i]);
    return std::max(0.0, logits[static_cast<std::size_t>(t)] - best_other);
}

double certification_threshold(double epsilon, double p, double lipschitz) {
    return std::pow(2.0, (p - 1.0) / p) * lipschitz * epsilon;
}

bool certify(const LipNetwork& net, const CertificationQuery& q) {
    if (q.epsilon < 0.0) throw PreconditionError("certify: epsilon must be >= 0");
    if (q.p < 1.0) throw PreconditionError("certify: norm order p must be >= 1");
    if (q.lipschitz <= 0.0) throw PreconditionError("certify: lipschitz must be > 0");
    const double bound = lipschitz_bound(net);
    if (q.lipschitz < bound * (1.0 - 1e-12))
        throw PreconditionError("certify: declared Lipschitz constant " +
                                std::to_string(q.lipschitz) + " is below the network bound " +
                                std::to_string(bound) + " (unsound certificate)");
    const double m = margin(forward(net, q.x), q.label);
    return certification_threshold(q.epsilon, q.p, q.lipschitz) < m;
}

Matrix jacobian_fd(const LipNetwork& net, const SpatialTensor& x, double h) {
    if (!(h > 0.0)) throw PreconditionError("jacobian_fd: step h must be > 0");

    // Tie pre-check: GroupSort is non-differentiable where group values meet.
    Activation act;
    act.tensor = x;
    for (const auto& layer : net.layers()) {
        if (const auto* gs = std::get_if<GroupSortLayer>(&layer)) {
            auto check_groups = [&](const std::vector<double>& v) {
                for (std::size_t g = 0; g < v.size(); g += static_cast<std::size_t>(gs->group_size))
                    for (int a = 0; a < gs->group_size; ++a)
                        for (int b = a + 1; b < gs->group_size; ++b)
                            if (std::abs(v[g + static_cast<std::size_t>(a)] -
                                         v[g + static_cast<std::size_t>(b)]) < 10.0 * h)
                                throw PreconditionError(
                                    "jacobian_fd: GroupSort tie within 10h of x "
                                    "(non-differentiable point)");
            };
            if (act.flat) {
                check_groups(act.vec);
            } else {
                const int sites = act.tensor.height * act.tensor.width;
                std::vector<double> channel(static_cast<std::size_t>(act.tensor.channels));
                for (int s = 0; s < sites; ++s) {
                    for (int c = 0; c < act.tensor.channels; ++c)
                        channel[static_cast<std::size_t>(c)] =
                            act.tensor.data[static_cast<std::size_t>(c) * sites + s];
                    check_groups(channel);
                }
            }
        }
        act = apply_layer(layer, act);
    }

    const std::size_t in_dim = x.data.size();
    const std::size_t out_dim = act.flattened().size();
    Matrix jac(static_cast<int>(out_dim), static_cast<int>(in_dim));
    SpatialTensor probe = x;
    for (std::size_t j = 0; j < in_dim; ++j) {
        const double orig = probe.data[j];
        probe.data[j] = orig + h;
        const std::vector<double> plus = forward(net, probe);
        probe.data[j] = orig - h;
        const std::vector<double> minus = forward(net, probe);
        probe.data[j] = orig;
        for (std::size_t i = 0; i < out_dim; ++i)
            jac(static_cast<int>(i), static_cast<int>(j)) = (plus[i] - minus[i]) / (2.0 * h);
    }
    return jac;
}

} // namespace orthoconv::lipnet
