#pragma once

#include <Eigen/Dense>

#include "autoland/errors.hpp"

namespace autoland {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// ZYX (yaw-pitch-roll) intrinsic Euler angles, radians. World frame is
/// ENU, gravity along -z; body frame is front-left-up.
struct EulerAngles {
    double roll = 0.0;
    double pitch = 0.0;
    double yaw = 0.0;
};

/// Rigid transform: p_out = rotation * p_in + translation.
struct FramePose {
    Mat3 rotation = Mat3::Identity();
    Vec3 translation = Vec3::Zero();

    FramePose() = default;
    FramePose(const Mat3& r, const Vec3& t) : rotation(r), translation(t) {}

    FramePose compose(const FramePose& other) const {
        return {rotation * other.rotation,
                rotation * other.translation + translation};
    }

    FramePose inverse() const {
        Mat3 rt = rotation.transpose();
        return {rt, -(rt * translation)};
    }
};

/// Body-to-world rotation for ZYX intrinsic angles: R = Rz(yaw) Ry(pitch) Rx(roll).
Mat3 rotation_from_euler(const EulerAngles& angles);

/// Inverse of rotation_from_euler. Throws GimbalLock when |R(2,0)| >= 1 - 1e-9
/// (pitch at +-90 deg), where roll and yaw are no longer separable.
EulerAngles euler_from_rotation(const Mat3& r);

/// Maps body angular velocity to Euler-angle rates for the current attitude.
/// Throws GimbalLock when |cos(pitch)| <= 1e-6.
Vec3 euler_rates_from_body_rates(const EulerAngles& angles, const Vec3& body_rates);

inline Vec3 transform_point(const FramePose& pose, const Vec3& p) {
    return pose.rotation * p + pose.translation;
}

/// Rodrigues formula; small-angle series below 1e-12 rad.
Mat3 rotation_from_axis_angle(const Vec3& axis_angle);

/// Smallest rotation angle between two rotation matrices, radians.
double rotation_angle_between(const Mat3& a, const Mat3& b);

/// Wraps an angle to (-pi, pi].
double wrap_angle(double a);

}  // namespace autoland
