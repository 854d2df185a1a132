#pragma once

#include <stdexcept>
#include <string>

namespace roikit {

// File or record does not match the documented format.
class FormatError : public std::runtime_error {
public:
    explicit FormatError(const std::string& what) : std::runtime_error(what) {}
};

// A required calibration key is absent.
class MissingCalibError : public FormatError {
public:
    explicit MissingCalibError(const std::string& key)
        : FormatError("missing calibration key: " + key), key_(key) {}
    const std::string& key() const { return key_; }

private:
    std::string key_;
};

// Projection requested for a point with nonpositive camera depth.
class BehindCameraError : public std::runtime_error {
public:
    explicit BehindCameraError(double depth)
        : std::runtime_error("point behind camera, depth = " + std::to_string(depth)) {}
};

// Tensor shapes incompatible with the requested operation.
class ShapeError : public std::runtime_error {
public:
    explicit ShapeError(const std::string& what) : std::runtime_error(what) {}
};

// Weight bundle is missing an entry or is internally inconsistent.
class BundleError : public std::runtime_error {
public:
    explicit BundleError(const std::string& what) : std::runtime_error(what) {}
};

// An index refers outside the addressed container.
class IndexError : public std::out_of_range {
public:
    explicit IndexError(const std::string& what) : std::out_of_range(what) {}
};

}  // namespace roikit
