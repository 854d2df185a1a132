#pragma once

#include <cstdint>
#include <filesystem>
#include <initializer_list>
#include <map>
#include <string>
#include <vector>

#include "roikit/errors.hpp"

namespace roikit {

// Dense row-major tensor. Values are held in double precision; file
// interchange narrows to f32. Shapes are immutable after construction.
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(std::vector<size_t> shape);
    Tensor(std::vector<size_t> shape, std::vector<double> data);
    Tensor(std::initializer_list<size_t> shape) : Tensor(std::vector<size_t>(shape)) {}

    static Tensor full(std::vector<size_t> shape, double value);
    static Tensor from_values(std::vector<size_t> shape, std::initializer_list<double> values);

    const std::vector<size_t>& shape() const { return shape_; }
    size_t ndim() const { return shape_.size(); }
    size_t numel() const { return data_.size(); }
    size_t dim(size_t i) const { return shape_[i]; }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }
    std::vector<double>& values() { return data_; }
    const std::vector<double>& values() const { return data_; }

    double operator[](size_t i) const { return data_[i]; }
    double& operator[](size_t i) { return data_[i]; }

    double at(size_t i, size_t j) const { return data_[i * shape_[1] + j]; }
    double& at(size_t i, size_t j) { return data_[i * shape_[1] + j]; }
    double at(size_t i, size_t j, size_t k) const {
        return data_[(i * shape_[1] + j) * shape_[2] + k];
    }
    double& at(size_t i, size_t j, size_t k) {
        return data_[(i * shape_[1] + j) * shape_[2] + k];
    }

    bool all_finite() const;
    bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }

private:
    std::vector<size_t> shape_;
    std::vector<double> data_;
};

// Shape entry of a weight manifest.
struct TensorSpec {
    std::string name;
    std::vector<size_t> shape;
};

// Named forward-only weights. Entries are kept in name order; the file
// format is a text manifest followed by concatenated f32 LE payloads:
//
//   WBND1
//   <name> f32 <d0> <d1> ...     (one line per tensor, name order)
//   end
//   <payloads>
//
// Values are quantized to f32 at creation, so save/load round-trips
// bit-exactly.
class WeightBundle {
public:
    void insert(std::string name, Tensor t);  // BundleError on duplicate name
    bool contains(const std::string& name) const;
    const Tensor& at(const std::string& name) const;  // BundleError if absent
    size_t size() const { return tensors_.size(); }
    std::vector<std::string> names() const;
    const std::map<std::string, Tensor>& tensors() const { return tensors_; }

    void save(const std::filesystem::path& path) const;
    static WeightBundle load(const std::filesystem::path& path);

private:
    std::map<std::string, Tensor> tensors_;
};

}  // namespace roikit
