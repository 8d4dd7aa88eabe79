#include "autoland/geometry.hpp"

#include <cmath>

namespace autoland {

namespace {
constexpr double kGimbalCos = 1e-6;     // |cos(pitch)| guard for rate mapping
constexpr double kGimbalSin = 1e-9;     // 1 - |sin(pitch)| guard for decomposition
}  // namespace

Mat3 rotation_from_euler(const EulerAngles& angles) {
    const double cr = std::cos(angles.roll), sr = std::sin(angles.roll);
    const double cp = std::cos(angles.pitch), sp = std::sin(angles.pitch);
    const double cy = std::cos(angles.yaw), sy = std::sin(angles.yaw);

    Mat3 r;
    r << cp * cy, sr * sp * cy - cr * sy, cr * sp * cy + sr * sy,
         cp * sy, sr * sp * sy + cr * cy, cr * sp * sy - sr * cy,
         -sp,     sr * cp,                cr * cp;
    return r;
}

EulerAngles euler_from_rotation(const Mat3& r) {
    if (std::abs(r(2, 0)) >= 1.0 - kGimbalSin) {
        throw GimbalLock("euler_from_rotation: pitch at singularity");
    }
    EulerAngles e;
    e.pitch = std::asin(-r(2, 0));
    e.roll = std::atan2(r(2, 1), r(2, 2));
    e.yaw = std::atan2(r(1, 0), r(0, 0));
    return e;
}

Vec3 euler_rates_from_body_rates(const EulerAngles& angles, const Vec3& w) {
    const double cp = std::cos(angles.pitch);
    if (std::abs(cp) <= kGimbalCos) {
        throw GimbalLock("euler_rates_from_body_rates: cos(pitch) ~ 0");
    }
    const double cr = std::cos(angles.roll), sr = std::sin(angles.roll);
    const double tp = std::tan(angles.pitch);

    Vec3 rates;
    rates.x() = w.x() + sr * tp * w.y() + cr * tp * w.z();
    rates.y() = cr * w.y() - sr * w.z();
    rates.z() = (sr * w.y() + cr * w.z()) / cp;
    return rates;
}

Mat3 rotation_from_axis_angle(const Vec3& axis_angle) {
    const double theta = axis_angle.norm();
    if (theta < 1e-12) {
        Mat3 skew;
        skew << 0, -axis_angle.z(), axis_angle.y(),
                axis_angle.z(), 0, -axis_angle.x(),
                -axis_angle.y(), axis_angle.x(), 0;
        return Mat3::Identity() + skew;
    }
    return Eigen::AngleAxisd(theta, axis_angle / theta).toRotationMatrix();
}

double rotation_angle_between(const Mat3& a, const Mat3& b) {
    const double tr = (a.transpose() * b).trace();
    const double c = std::min(1.0, std::max(-1.0, (tr - 1.0) / 2.0));
    return std::acos(c);
}

double wrap_angle(double a) {
    a = std::fmod(a + M_PI, 2.0 * M_PI);
    if (a <= 0.0) a += 2.0 * M_PI;
    return a - M_PI;
}

}  // namespace autoland
