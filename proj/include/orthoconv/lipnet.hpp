#pragma once

#include "orthoconv/kernel.hpp"
#include "orthoconv/matrix.hpp"
#include "orthoconv/param.hpp"

#include <variant>
#include <vector>

namespace orthoconv::lipnet {

struct Shape {
    int channels = 0;
    int height = 0;
    int width = 0;
    bool flat = false; ///< true once the signal is a plain vector
    int flat_dim = 0;

    int dims() const { return flat ? flat_dim : channels * height * width; }
    bool operator==(const Shape&) const = default;
};

Shape spatial_shape(int channels, int height, int width);
Shape flat_shape(int dim);

/// BCOP convolution layer, cyclic padding; the kernel is constructed from
/// the raw parameters once and validated orthogonal within 1e-6.
struct BcopConvLayer {
    param::BcopParams params;
    conv::Kernel2D kernel;
};

/// Orthogonal dense layer y = scale * (W x); W = Björck(raw), validated
/// within 1e-6. Lipschitz constant = scale.
struct OrthoDenseLayer {
    Matrix w;
    double scale = 1.0;
};

struct GroupSortLayer {
    int group_size = 2;
};

struct InvertibleDownsampleLayer {
    int stride = 2;
};

using Layer = std::variant<BcopConvLayer, OrthoDenseLayer, GroupSortLayer,
                           InvertibleDownsampleLayer>;

BcopConvLayer make_bcop_conv(const param::BcopParams& params);
OrthoDenseLayer make_ortho_dense(const Matrix& raw, double scale = 1.0);

/// Immutable after construction; forward/certify are pure.
class LipNetwork {
public:
    LipNetwork(Shape input, std::vector<Layer> layers);

    const Shape& input_shape() const { return input_; }
    const std::vector<Layer>& layers() const { return layers_; }
    const Shape& output_shape() const { return output_; }

private:
    Shape input_;
    Shape output_;
    std::vector<Layer> layers_;
};

/// Sorts each contiguous group descending (MaxMin convention for size 2).
/// Exactly norm-preserving: a per-group permutation.
std::vector<double> group_sort(const std::vector<double>& x, int group_size);

/// Rearranges stride x stride pixel blocks into channels (sub-pixel
/// row-major order): out channel c*stride^2 + di*stride + dj holds
/// in(c, h*stride+di, w*stride+dj). Exactly norm-preserving and invertible.
conv::SpatialTensor invertible_downsample(const conv::SpatialTensor& x, int stride);
conv::SpatialTensor invertible_upsample(const conv::SpatialTensor& x, int stride);

/// Runs the network; the result is the final activation flattened to logits.
std::vector<double> forward(const LipNetwork& net, const conv::SpatialTensor& x);

/// Product of per-layer Lipschitz constants (1 for every GNP layer).
double lipschitz_bound(const LipNetwork& net);

/// max(0, y_t - max_{i != t} y_i); needs at least two classes.
double margin(const std::vector<double>& logits, int t);

struct CertificationQuery {
    conv::SpatialTensor x;
    int label = 0;
    double epsilon = 0.0;
    double p = 2.0;       ///< norm order, >= 1
    double lipschitz = 1.0;
};

/// True iff 2^((p-1)/p) * l * epsilon < margin (strict). Throws when the
/// declared l is below the network's composition bound (unsound).
bool certify(const LipNetwork& net, const CertificationQuery& q);
/// The theorem's threshold 2^((p-1)/p) * l * epsilon.
double certification_threshold(double epsilon, double p, double lipschitz);

/// Central-difference Jacobian of the network at x; columns index input
/// coordinates. Throws when x sits within 10h of a GroupSort tie.
Matrix jacobian_fd(const LipNetwork& net, const conv::SpatialTensor& x, double h = 1e-5);

} // namespace orthoconv::lipnet
