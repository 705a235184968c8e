#include "orthoconv/io.hpp"

#include "orthoconv/errors.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>

namespace orthoconv::io {

using nlohmann::json;

namespace {

json parse(const std::string& text) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded()) throw FileFormatError("invalid JSON");
    return j;
}

void expect_format(const json& j, const std::string& format) {
    if (!j.is_object() || !j.contains("format") || j["format"] != format)
        throw FileFormatError("expected format \"" + format + "\"");
}

std::vector<double> numbers(const json& arr, const char* what) {
    if (!arr.is_array()) throw FileFormatError(std::string(what) + ": array expected");
    std::vector<double> out;
    out.reserve(arr.size());
    for (const auto& v : arr) {
        if (!v.is_number()) throw FileFormatError(std::string(what) + ": non-numeric entry");
        out.push_back(v.get<double>());
    }
    return out;
}

std::vector<double> number_array(const json& j, const char* field) {
    if (!j.contains(field))
        throw FileFormatError(std::string("missing array field \"") + field + "\"");
    return numbers(j[field], field);
}

int int_field(const json& j, const char* field) {
    if (!j.contains(field) || !j[field].is_number_integer())
        throw FileFormatError(std::string("missing integer field \"") + field + "\"");
    return j[field].get<int>();
}

Matrix matrix_from_flat(const std::vector<double>& flat, int rows, int cols, const char* what) {
    if (static_cast<int>(flat.size()) != rows * cols)
        throw FileFormatError(std::string(what) + ": flat array length mismatch");
    Matrix m(rows, cols);
    std::copy(flat.begin(), flat.end(), m.data());
    return m;
}

std::vector<double> matrix_to_flat(const Matrix& m) {
    return std::vector<double>(m.data(), m.data() + m.size());
}

} // namespace

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FileFormatError("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& contents) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FileFormatError("cannot write file: " + path);
    out << contents;
}

std::string kernel_to_json(const conv::Kernel2D& k) {
    k.validate();
    json j;
    j["format"] = "orthoconv-kernel-v1";
    j["c_out"] = k.c_out;
    j["c_in"] = k.c_in;
    j["k_h"] = k.k_h;
    j["k_w"] = k.k_w;
    std::vector<double> data;
    data.reserve(static_cast<std::size_t>(k.k_h) * k.k_w * k.c_out * k.c_in);
    for (int r = 0; r < k.k_h; ++r)
        for (int c = 0; c < k.k_w; ++c) {
            const Matrix& b = k.block(r, c);
            data.insert(data.end(), b.data(), b.data() + b.size());
        }
    j["data"] = data;
    return j.dump(2) + "\n";
}

conv::Kernel2D kernel_from_json(const std::string& text) {
    const json j = parse(text);
    expect_format(j, "orthoconv-kernel-v1");
    const int c_out = int_field(j, "c_out");
    const int c_in = int_field(j, "c_in");
    const int k_h = int_field(j, "k_h");
    const int k_w = int_field(j, "k_w");
    const std::vector<double> data = number_array(j, "data");
    if (c_out < 1 || c_in < 1 || k_h < 1 || k_w < 1)
        throw FileFormatError("kernel dimensions must be positive");
    const std::size_t expected =
        static_cast<std::size_t>(k_h) * k_w * c_out * c_in;
    if (data.size() != expected) throw FileFormatError("kernel data length mismatch");
    std::vector<Matrix> blocks;
    blocks.reserve(static_cast<std::size_t>(k_h) * k_w);
    std::size_t pos = 0;
    for (int r = 0; r < k_h; ++r)
        for (int c = 0; c < k_w; ++c) {
            Matrix b(c_out, c_in);
            std::copy(data.begin() + static_cast<std::ptrdiff_t>(pos),
                      data.begin() + static_cast<std::ptrdiff_t>(pos + b.size()), b.data());
            pos += b.size();
            blocks.push_back(std::move(b));
        }
    try {
        return conv::make_kernel2d(c_out, c_in, k_h, k_w, std::move(blocks));
    } catch (const Error& e) {
        throw FileFormatError(std::string("invalid kernel: ") + e.what());
    }
}

void write_kernel(const std::string& path, const conv::Kernel2D& k) {
    write_file(path, kernel_to_json(k));
}

conv::Kernel2D read_kernel(const std::string& path) { return kernel_from_json(read_file(path)); }

std::string params_to_json(const param::BcopParams& p) {
    p.validate();
    json j;
    j["format"] = "orthoconv-params-v1";
    j["n"] = p.n;
    j["c_out"] = p.c_out;
    j["K"] = p.k;
    j["raw_h"] = matrix_to_flat(p.raw_h);
    json m = json::array();
    for (const auto& r : p.raw_m) m.push_back(matrix_to_flat(r));
    json nn = json::array();
    for (const auto& r : p.raw_n) nn.push_back(matrix_to_flat(r));
    j["raw_m"] = std::move(m);
    j["raw_n"] = std::move(nn);
    return j.dump(2) + "\n";
}

param::BcopParams params_from_json(const std::string& text) {
    const json j = parse(text);
    expect_format(j, "orthoconv-params-v1");
    param::BcopParams p;
    p.n = int_field(j, "n");
    p.c_out = int_field(j, "c_out");
    p.k = int_field(j, "K");
    if (p.n < 1 || p.c_out < 1 || p.k < 1) throw FileFormatError("params dimensions must be positive");
    const int half = p.n / 2;
    p.raw_h = matrix_from_flat(number_array(j, "raw_h"), p.c_out, p.n, "raw_h");
    if (!j.contains("raw_m") || !j["raw_m"].is_array() || !j.contains("raw_n") ||
        !j["raw_n"].is_array())
        throw FileFormatError("missing raw_m/raw_n arrays");
    for (const auto& arr : j["raw_m"])
        p.raw_m.push_back(matrix_from_flat(numbers(arr, "raw_m"), p.n, half, "raw_m"));
    for (const auto& arr : j["raw_n"])
        p.raw_n.push_back(matrix_from_flat(numbers(arr, "raw_n"), p.n, half, "raw_n"));
    try {
        p.validate();
    } catch (const Error& e) {
        throw FileFormatError(std::string("invalid params: ") + e.what());
    }
    return p;
}

void write_params(const std::string& path, const param::BcopParams& p) {
    write_file(path, params_to_json(p));
}

param::BcopParams read_params(const std::string& path) {
    return params_from_json(read_file(path));
}

std::string tensor_to_json(const conv::SpatialTensor& t) {
    json j;
    j["format"] = "orthoconv-tensor-v1";
    j["channels"] = t.channels;
    j["height"] = t.height;
    j["width"] = t.width;
    j["data"] = t.data;
    return j.dump(2) + "\n";
}

conv::SpatialTensor tensor_from_json(const std::string& text) {
    const json j = parse(text);
    expect_format(j, "orthoconv-tensor-v1");
    const int channels = int_field(j, "channels");
    const int height = int_field(j, "height");
    const int width = int_field(j, "width");
    if (channels < 1 || height < 1 || width < 1)
        throw FileFormatError("tensor dimensions must be positive");
    conv::SpatialTensor t = conv::make_tensor(channels, height, width);
    const std::vector<double> data = number_array(j, "data");
    if (data.size() != t.data.size()) throw FileFormatError("tensor data length mismatch");
    t.data = data;
    return t;
}

void write_tensor(const std::string& path, const conv::SpatialTensor& t) {
    write_file(path, tensor_to_json(t));
}

conv::SpatialTensor read_tensor(const std::string& path) {
    return tensor_from_json(read_file(path));
}

std::string network_to_json(const lipnet::LipNetwork& net) {
    json j;
    j["format"] = "orthoconv-net-v1";
    const lipnet::Shape& in = net.input_shape();
    j["input_shape"] = {{"channels", in.channels}, {"height", in.height}, {"width", in.width}};
    json layers = json::array();
    for (const auto& layer : net.layers()) {
        json l;
        if (const auto* conv_layer = std::get_if<lipnet::BcopConvLayer>(&layer)) {
            l["type"] = "bcop_conv";
            l["params"] = json::parse(params_to_json(conv_layer->params));
        } else if (const auto* dense = std::get_if<lipnet::OrthoDenseLayer>(&layer)) {
            l["type"] = "ortho_dense";
            l["rows"] = dense->w.rows();
            l["cols"] = dense->w.cols();
            l["weight"] = matrix_to_flat(dense->w);
            l["scale"] = dense->scale;
        } else if (const auto* gs = std::get_if<lipnet::GroupSortLayer>(&layer)) {
            l["type"] = "group_sort";
            l["group_size"] = gs->group_size;
        } else if (const auto* ds = std::get_if<lipnet::InvertibleDownsampleLayer>(&layer)) {
            l["type"] = "invertible_downsample";
            l["stride"] = ds->stride;
        }
        layers.push_back(std::move(l));
    }
    j["layers"] = std::move(layers);
    return j.dump(2) + "\n";
}

lipnet::LipNetwork network_from_json(const std::string& text) {
    const json j = parse(text);
    expect_format(j, "orthoconv-net-v1");
    if (!j.contains("input_shape") || !j["input_shape"].is_object())
        throw FileFormatError("missing input_shape");
    const json& in = j["input_shape"];
    const lipnet::Shape input = lipnet::spatial_shape(
        int_field(in, "channels"), int_field(in, "height"), int_field(in, "width"));
    if (!j.contains("layers") || !j["layers"].is_array()) throw FileFormatError("missing layers");

    std::vector<lipnet::Layer> layers;
    for (const auto& l : j["layers"]) {
        if (!l.is_object() || !l.contains("type") || !l["type"].is_string())
            throw FileFormatError("layer entry missing type");
        const std::string type = l["type"].get<std::string>();
        if (type == "bcop_conv") {
            if (!l.contains("params")) throw FileFormatError("bcop_conv layer missing params");
            layers.push_back(lipnet::make_bcop_conv(params_from_json(l["params"].dump())));
        } else if (type == "ortho_dense") {
            const int rows = int_field(l, "rows");
            const int cols = int_field(l, "cols");
            const Matrix w = matrix_from_flat(number_array(l, "weight"), rows, cols, "weight");
            double scale = 1.0;
            if (l.contains("scale")) {
                if (!l["scale"].is_number()) throw FileFormatError("scale must be a number");
                scale = l["scale"].get<double>();
            }
            // Weights are stored post-orthogonalization; construction re-runs
            // Björck, which is a no-op on an already-orthonormal matrix.
            layers.push_back(lipnet::make_ortho_dense(w, scale));
        } else if (type == "group_sort") {
            layers.push_back(lipnet::GroupSortLayer{int_field(l, "group_size")});
        } else if (type == "invertible_downsample") {
            layers.push_back(lipnet::InvertibleDownsampleLayer{int_field(l, "stride")});
        } else {
            throw FileFormatError("unknown layer type: " + type);
        }
    }
    try {
        return lipnet::LipNetwork(input, std::move(layers));
    } catch (const Error& e) {
        throw FileFormatError(std::string("invalid network: ") + e.what());
    }
}

void write_network(const std::string& path, const lipnet::LipNetwork& net) {
    write_file(path, network_to_json(net));
}

lipnet::LipNetwork read_network(const std::string& path) {
    return network_from_json(read_file(path));
}

void write_trajectory_csv(const std::string& path, const optim::Trajectory& t) {
    std::ostringstream out;
    out << "step,loss,invariant\n";
    out.precision(17);
    for (const auto& pt : t) {
        out << pt.step << "," << pt.loss << ",";
        if (pt.invariant) out << *pt.invariant;
        out << "\n";
    }
    write_file(path, out.str());
}

} // namespace orthoconv::io
