#include "roikit/tensor.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

namespace roikit {
namespace {

size_t shape_numel(const std::vector<size_t>& shape) {
    size_t n = 1;
    for (size_t d : shape) n *= d;
    return n;
}

std::string shape_string(const std::vector<size_t>& shape) {
    std::string s = "[";
    for (size_t i = 0; i < shape.size(); ++i) {
        if (i) s += ",";
        s += std::to_string(shape[i]);
    }
    return s + "]";
}

}  // namespace

Tensor::Tensor(std::vector<size_t> shape)
    : shape_(std::move(shape)), data_(shape_numel(shape_), 0.0) {}

Tensor::Tensor(std::vector<size_t> shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
    if (data_.size() != shape_numel(shape_)) {
        throw ShapeError("data length " + std::to_string(data_.size()) +
                         " does not match shape " + shape_string(shape_));
    }
}

Tensor Tensor::full(std::vector<size_t> shape, double value) {
    Tensor t(std::move(shape));
    std::fill(t.data_.begin(), t.data_.end(), value);
    return t;
}

Tensor Tensor::from_values(std::vector<size_t> shape, std::initializer_list<double> values) {
    return Tensor(std::move(shape), std::vector<double>(values));
}

bool Tensor::all_finite() const {
    for (double v : data_) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

void WeightBundle::insert(std::string name, Tensor t) {
    if (tensors_.count(name)) throw BundleError("duplicate bundle entry: " + name);
    tensors_.emplace(std::move(name), std::move(t));
}

bool WeightBundle::contains(const std::string& name) const { return tensors_.count(name) > 0; }

const Tensor& WeightBundle::at(const std::string& name) const {
    const auto it = tensors_.find(name);
    if (it == tensors_.end()) throw BundleError("bundle is missing entry: " + name);
    return it->second;
}

std::vector<std::string> WeightBundle::names() const {
    std::vector<std::string> out;
    out.reserve(tensors_.size());
    for (const auto& [name, t] : tensors_) out.push_back(name);
    return out;
}

void WeightBundle::save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw BundleError("cannot open " + path.string() + " for writing");
    out << "WBND1\n";
    for (const auto& [name, t] : tensors_) {
        out << name << " f32";
        for (size_t d : t.shape()) out << " " << d;
        out << "\n";
    }
    out << "end\n";
    for (const auto& [name, t] : tensors_) {
        for (double v : t.values()) {
            const float f = float(v);
            out.write(reinterpret_cast<const char*>(&f), sizeof(float));
        }
    }
    if (!out) throw BundleError("write failed on " + path.string());
}

WeightBundle WeightBundle::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw BundleError("cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line) || line != "WBND1") {
        throw BundleError(path.string() + ": missing WBND1 header");
    }

    std::vector<TensorSpec> manifest;
    while (std::getline(in, line)) {
        if (line == "end") break;
        std::istringstream iss(line);
        TensorSpec spec;
        std::string dtype;
        if (!(iss >> spec.name >> dtype) || dtype != "f32") {
            throw BundleError(path.string() + ": bad manifest line '" + line + "'");
        }
        size_t d = 0;
        while (iss >> d) spec.shape.push_back(d);
        manifest.push_back(std::move(spec));
    }

    WeightBundle bundle;
    for (const TensorSpec& spec : manifest) {
        Tensor t(spec.shape);
        for (size_t i = 0; i < t.numel(); ++i) {
            float f = 0.0f;
            in.read(reinterpret_cast<char*>(&f), sizeof(float));
            if (!in) throw BundleError(path.string() + ": truncated payload for " + spec.name);
            t[i] = double(f);
        }
        bundle.insert(spec.name, std::move(t));
    }
    return bundle;
}

}  // namespace roikit
