#include "roikit/types.hpp"

#include <numbers>
#include <stdexcept>

#include "roikit/errors.hpp"

namespace roikit {

double normalize_angle(double a) {
    const double two_pi = 2.0 * std::numbers::pi;
    a = std::fmod(a, two_pi);
    if (a <= -std::numbers::pi) a += two_pi;
    if (a > std::numbers::pi) a -= two_pi;
    return a;
}

Box3D::Box3D(const Vec3& c, double l_, double w_, double h_, double yaw_)
    : center(c), l(l_), w(w_), h(h_), yaw(normalize_angle(yaw_)) {
    if (!(l > 0.0 && w > 0.0 && h > 0.0)) {
        throw std::invalid_argument("Box3D dimensions must be strictly positive");
    }
    if (!std::isfinite(yaw_)) {
        throw std::invalid_argument("Box3D yaw must be finite");
    }
}

CalibrationSet CalibrationSet::identity() {
    CalibrationSet c;
    c.P.setZero();
    c.P(0, 0) = c.P(1, 1) = c.P(2, 2) = 1.0;
    c.R0.setIdentity();
    c.Tr.setZero();
    c.Tr(0, 0) = c.Tr(1, 1) = c.Tr(2, 2) = 1.0;
    return c;
}

void CalibrationSet::validate() const {
    const Mat3 gram = R0.transpose() * R0;
    if ((gram - Mat3::Identity()).cwiseAbs().maxCoeff() > 1e-3) {
        throw FormatError("R0_rect is not orthonormal within 1e-3");
    }
    if (P(2, 2) == 0.0) {
        throw FormatError("projection matrix has P[2][2] == 0");
    }
}

const char* to_string(ClassLabel c) {
    switch (c) {
        case ClassLabel::Car: return "Car";
        case ClassLabel::Pedestrian: return "Pedestrian";
        case ClassLabel::Cyclist: return "Cyclist";
        case ClassLabel::Other: return "Other";
    }
    return "Other";
}

}  // namespace roikit
