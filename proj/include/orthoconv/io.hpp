#pragma once

#include "orthoconv/kernel.hpp"
#include "orthoconv/lipnet.hpp"
#include "orthoconv/optim.hpp"
#include "orthoconv/param.hpp"

#include <string>

namespace orthoconv::io {

// File formats (all JSON):
//   orthoconv-kernel-v1  {format, c_out, c_in, k_h, k_w, data}
//     data: flat array ordered tap-row, tap-col, out-channel, in-channel.
//   orthoconv-params-v1  {format, n, c_out, K, raw_h, raw_m, raw_n}
//     raw matrices as flat row-major arrays.
//   orthoconv-net-v1     {format, input_shape, layers}
//   orthoconv-tensor-v1  {format, channels, height, width, data}
// Doubles round-trip bit-exactly (shortest-round-trip printing).

std::string kernel_to_json(const conv::Kernel2D& k);
conv::Kernel2D kernel_from_json(const std::string& text);
void write_kernel(const std::string& path, const conv::Kernel2D& k);
conv::Kernel2D read_kernel(const std::string& path);

std::string params_to_json(const param::BcopParams& p);
param::BcopParams params_from_json(const std::string& text);
void write_params(const std::string& path, const param::BcopParams& p);
param::BcopParams read_params(const std::string& path);

std::string tensor_to_json(const conv::SpatialTensor& t);
conv::SpatialTensor tensor_from_json(const std::string& text);
void write_tensor(const std::string& path, const conv::SpatialTensor& t);
conv::SpatialTensor read_tensor(const std::string& path);

std::string network_to_json(const lipnet::LipNetwork& net);
lipnet::LipNetwork network_from_json(const std::string& text);
void write_network(const std::string& path, const lipnet::LipNetwork& net);
lipnet::LipNetwork read_network(const std::string& path);

/// CSV with header "step,loss,invariant"; invariant column empty when absent.
void write_trajectory_csv(const std::string& path, const optim::Trajectory& t);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& contents);

} // namespace orthoconv::io
