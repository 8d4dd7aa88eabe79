#include "autoland/perception.hpp"

#include <algorithm>
#include <cmath>

namespace autoland {

void CameraIntrinsics::validate() const {
    if (!(fx > 0) || !(fy > 0)) throw ConfigInvalid("camera.f: focal lengths must be > 0");
    if (cx < 0 || cx > width || cy < 0 || cy > height)
        throw ConfigInvalid("camera.c: principal point outside image");
    if (width <= 0 || height <= 0) throw ConfigInvalid("camera.size: must be > 0");
}

std::array<Vec3, 4> MarkerSpec::corners_in_pad() const {
    const double h = edge / 2.0;
    const std::array<Vec3, 4> local = {Vec3(-h, -h, 0), Vec3(h, -h, 0), Vec3(h, h, 0),
                                       Vec3(-h, h, 0)};
    std::array<Vec3, 4> out;
    for (int i = 0; i < 4; ++i) out[i] = transform_point(pose_in_pad, local[i]);
    return out;
}

void PadLayout::validate() const {
    if (markers.empty()) throw ConfigInvalid("pad.markers: empty layout");
    for (std::size_t i = 0; i < markers.size(); ++i) {
        const MarkerSpec& m = markers[i];
        if (!(m.edge > 0)) throw ConfigInvalid("pad.markers.edge: must be > 0");
        if (m.max_z_lo > m.max_z_hi || m.active_z_lo > m.active_z_hi)
            throw ConfigInvalid("pad.markers: z range lo > hi");
        for (std::size_t j = i + 1; j < markers.size(); ++j) {
            if (markers[j].id == m.id) throw ConfigInvalid("pad.markers: duplicate id");
            // Footprint overlap check via axis-aligned bounds in the pad plane.
            const auto ca = m.corners_in_pad();
            const auto cb = markers[j].corners_in_pad();
            auto bounds = [](const std::array<Vec3, 4>& c, Vec3& lo, Vec3& hi) {
                lo = hi = c[0];
                for (const Vec3& p : c) {
                    lo = lo.cwiseMin(p);
                    hi = hi.cwiseMax(p);
                }
            };
            Vec3 alo, ahi, blo, bhi;
            bounds(ca, alo, ahi);
            bounds(cb, blo, bhi);
            const bool overlap = alo.x() < bhi.x() && blo.x() < ahi.x() &&
                                 alo.y() < bhi.y() && blo.y() < ahi.y();
            if (overlap) throw ConfigInvalid("pad.markers: overlapping footprints");
        }
    }
}

const MarkerSpec* PadLayout::find(int id) const {
    for (const MarkerSpec& m : markers) {
        if (m.id == id) return &m;
    }
    return nullptr;
}

PadLayout default_pad_layout() {
    PadLayout layout;
    auto add = [&](int id, double edge, double x, double y, double mz_hi, double moff,
                   double az_lo, double az_hi, std::optional<double> aoff) {
        MarkerSpec m;
        m.id = id;
        m.edge = edge;
        m.pose_in_pad = {Mat3::Identity(), Vec3(x, y, 0.0)};
        m.max_z_lo = 0.0;
        m.max_z_hi = mz_hi;
        m.max_offset = moff;
        m.active_z_lo = az_lo;
        m.active_z_hi = az_hi;
        m.active_offset = aoff;
        layout.markers.push_back(m);
    };

    // 2.5 cm center marker (pad frame origin).
    add(43, 0.025, 0.0, 0.0, 0.15, 0.15, 0.0, 0.15, 0.15);
    // 6.4 cm inner ring.
    add(5, 0.064, 0.06, 0.06, 0.50, 0.39, 0.20, 0.30, 0.39);
    add(6, 0.064, -0.06, 0.06, 0.50, 0.39, 0.20, 0.30, 0.39);
    add(7, 0.064, -0.06, -0.06, 0.50, 0.39, 0.20, 0.30, 0.39);
    add(8, 0.064, 0.06, -0.06, 0.50, 0.39, 0.20, 0.30, 0.39);
    // 9.5 cm outer ring.
    add(1, 0.095, 0.14, 0.14, 1.15, 0.90, 0.40, 1.00, 0.70);
    add(2, 0.095, -0.14, 0.14, 1.15, 0.90, 0.40, 1.00, 0.70);
    add(3, 0.095, -0.14, -0.14, 1.15, 0.90, 0.40, 1.00, 0.70);
    add(4, 0.095, 0.14, -0.14, 1.15, 0.90, 0.40, 1.00, 0.70);
    // 25.7 cm far marker behind the cluster.
    add(68, 0.257, 0.0, -0.35, 3.00, 1.42, 1.00, 3.00, std::nullopt);

    layout.validate();
    return layout;
}

Eigen::Vector2d project_point(const CameraIntrinsics& intr,
                              const FramePose& camera_in_world, const Vec3& p_world) {
    const Vec3 p_cam = transform_point(camera_in_world.inverse(), p_world);
    if (p_cam.z() <= 1e-9) throw BehindCamera("point at or behind the image plane");
    const double inv_z = 1.0 / p_cam.z();
    return {intr.fx * p_cam.x() * inv_z + intr.skew * p_cam.y() * inv_z + intr.cx,
            intr.fy * p_cam.y() * inv_z + intr.cy};
}

bool marker_range_gate(const MarkerSpec& marker, const Vec3& camera_in_pad) {
    const Vec3 rel = camera_in_pad - marker.pose_in_pad.translation;
    return rel.z() >= marker.max_z_lo - 1e-12 && rel.z() <= marker.max_z_hi + 1e-12 &&
           std::abs(rel.x()) <= marker.max_offset + 1e-12 &&
           std::abs(rel.y()) <= marker.max_offset + 1e-12;
}

bool marker_active_gate(const MarkerSpec& marker, const Vec3& camera_in_pad) {
    const Vec3 rel = camera_in_pad - marker.pose_in_pad.translation;
    if (rel.z() < marker.active_z_lo - 1e-12 || rel.z() > marker.active_z_hi + 1e-12)
        return false;
    if (marker.active_offset) {
        if (std::abs(rel.x()) > *marker.active_offset + 1e-12 ||
            std::abs(rel.y()) > *marker.active_offset + 1e-12)
            return false;
    }
    return true;
}

std::vector<Detection> detect_markers(const PadLayout& layout,
                                      const PlatformState& platform,
                                      const RigidBodyState& uav,
                                      const CameraMount& mount,
                                      const CameraIntrinsics& intr,
                                      const OccupancyGrid* grid,
                                      double pixel_noise_std, Rng& rng) {
    std::vector<Detection> detections;
    const FramePose cam_world = mount.camera_in_world(uav);
    const FramePose pad_world = platform.pad_pose();
    const Vec3 cam_in_pad = transform_point(pad_world.inverse(), cam_world.translation);

    for (const MarkerSpec& marker : layout.markers) {
        if (!marker_range_gate(marker, cam_in_pad)) continue;

        const Vec3 center_world =
            transform_point(pad_world, marker.pose_in_pad.translation);
        if (grid) {
            if (raycast(*grid, cam_world.translation, center_world)) continue;
        }

        Detection det;
        det.marker_id = marker.id;
        det.corners_pad = marker.corners_in_pad();
        bool visible = true;
        for (int i = 0; i < 4; ++i) {
            const Vec3 corner_world = transform_point(pad_world, det.corners_pad[i]);
            Eigen::Vector2d px;
            try {
                px = project_point(intr, cam_world, corner_world);
            } catch (const BehindCamera&) {
                visible = false;
                break;
            }
            if (px.x() < 0.0 || px.x() > intr.width || px.y() < 0.0 ||
                px.y() > intr.height) {
                visible = false;
                break;
            }
            det.corners_px[i] = px + Eigen::Vector2d(rng.gaussian(0.0, pixel_noise_std),
                                                     rng.gaussian(0.0, pixel_noise_std));
        }
        if (visible) detections.push_back(std::move(det));
    }
    return detections;
}

Vec3 apply_body_transform(const Vec3& p_pad, const Mat3& r_pad_to_cam,
                          const Vec3& t_pad_to_cam, const CameraMount& mount) {
    return mount.rotation * ((r_pad_to_cam * p_pad + t_pad_to_cam) + mount.offset);
}

FramePose default_pose_guess(double distance) {
    // Pad straight ahead of the camera with its z axis toward the lens.
    Mat3 r;
    r << 1, 0, 0, 0, -1, 0, 0, 0, -1;
    return {r, Vec3(0.0, 0.0, distance)};
}

namespace {

struct Correspondence {
    Vec3 point_pad;
    Eigen::Vector2d observed;
};

// One Gauss-Newton/Levenberg pass over the given correspondences. Returns
// false when the solve breaks down (point behind camera that damping cannot
// fix, or singular normal equations).
bool solve_pnp(const std::vector<Correspondence>& corr, const CameraIntrinsics& intr,
               FramePose& pose, double& rms_out, bool& converged) {
    constexpr int kMaxIterations = 50;
    constexpr double kStepTol = 1e-10;

    auto residuals = [&](const FramePose& p, Eigen::VectorXd& r) {
        for (std::size_t k = 0; k < corr.size(); ++k) {
            const Vec3 pc = p.rotation * corr[k].point_pad + p.translation;
            if (pc.z() <= 1e-9) return false;
            const double inv_z = 1.0 / pc.z();
            const double u = intr.fx * pc.x() * inv_z + intr.skew * pc.y() * inv_z + intr.cx;
            const double v = intr.fy * pc.y() * inv_z + intr.cy;
            r[2 * k] = corr[k].observed.x() - u;
            r[2 * k + 1] = corr[k].observed.y() - v;
        }
        return true;
    };

    const int m = static_cast<int>(corr.size()) * 2;
    Eigen::VectorXd r(m), r_new(m);
    if (!residuals(pose, r)) return false;
    double cost = r.squaredNorm();

    double damping = 1e-8;
    converged = false;
    for (int iter = 0; iter < kMaxIterations; ++iter) {
        Eigen::Matrix<double, Eigen::Dynamic, 6> jac(m, 6);
        for (std::size_t k = 0; k < corr.size(); ++k) {
            const Vec3 pc = pose.rotation * corr[k].point_pad + pose.translation;
            const double inv_z = 1.0 / pc.z();
            Eigen::Matrix<double, 2, 3> proj;
            proj << intr.fx * inv_z, intr.skew * inv_z,
                -(intr.fx * pc.x() + intr.skew * pc.y()) * inv_z * inv_z,
                0.0, intr.fy * inv_z, -intr.fy * pc.y() * inv_z * inv_z;

            Mat3 skew_rp;
            const Vec3 rp = pose.rotation * corr[k].point_pad;
            skew_rp << 0, -rp.z(), rp.y(), rp.z(), 0, -rp.x(), -rp.y(), rp.x(), 0;

            // d(residual)/d(delta, t) = -d(projection)/d(point) * [d point]
            jac.block<2, 3>(2 * k, 0) = proj * skew_rp;   // rotation (left increment)
            jac.block<2, 3>(2 * k, 3) = -proj;            // translation
        }

        const Eigen::Matrix<double, 6, 6> h = jac.transpose() * jac;
        const Eigen::Matrix<double, 6, 1> b = -jac.transpose() * r;

        bool stepped = false;
        for (int attempt = 0; attempt < 10; ++attempt) {
            Eigen::Matrix<double, 6, 6> damped = h;
            damped.diagonal().array() += damping;
            const Eigen::Matrix<double, 6, 1> delta = damped.ldlt().solve(b);
            if (!delta.allFinite()) {
                damping *= 10.0;
                continue;
            }

            FramePose candidate;
            candidate.rotation = rotation_from_axis_angle(delta.head<3>()) * pose.rotation;
            candidate.translation = pose.translation + delta.tail<3>();
            if (!residuals(candidate, r_new)) {
                damping *= 10.0;
                continue;
            }
            const double cost_new = r_new.squaredNorm();
            if (cost_new <= cost) {
                pose = candidate;
                r = r_new;
                cost = cost_new;
                damping = std::max(damping * 0.3, 1e-12);
                stepped = true;
                if (delta.norm() < kStepTol) converged = true;
                break;
            }
            damping *= 10.0;
        }
        if (!stepped) {
            // No decreasing step found; accept the iterate as-is.
            converged = cost < 1e-16 || converged;
            break;
        }
        if (converged) break;
    }

    rms_out = std::sqrt(cost / static_cast<double>(corr.size()));
    return true;
}

std::vector<Correspondence> collect(const std::vector<Detection>& detections) {
    std::vector<Correspondence> corr;
    corr.reserve(detections.size() * 4);
    for (const Detection& det : detections) {
        for (int i = 0; i < 4; ++i) {
            corr.push_back({det.corners_pad[i], det.corners_px[i]});
        }
    }
    return corr;
}

}  // namespace

RelativePoseEstimate estimate_relative_pose(const std::vector<Detection>& detections,
                                            const PadLayout& layout,
                                            const CameraIntrinsics& intr,
                                            const CameraMount& mount,
                                            const FramePose& initial_guess) {
    if (detections.empty()) throw NoDetections("estimate_relative_pose: no detections");

    RelativePoseEstimate est;
    est.pad_in_camera = initial_guess;

    // Pass 1: all detected markers.
    double rms = 0.0;
    bool converged = false;
    FramePose pose = initial_guess;
    if (!solve_pnp(collect(detections), intr, pose, rms, converged)) {
        est.converged = false;
        return est;
    }

    // Pass 2: restrict to markers inside their active band, judged from the
    // pass-1 pose, when any exist.
    std::vector<Detection> active;
    const Vec3 cam_in_pad = pose.inverse().translation;
    for (const Detection& det : detections) {
        const MarkerSpec* spec = layout.find(det.marker_id);
        if (spec && marker_active_gate(*spec, cam_in_pad)) active.push_back(det);
    }
    const std::vector<Detection>& used = active.empty() ? detections : active;
    if (!active.empty()) {
        double rms2 = 0.0;
        bool conv2 = false;
        FramePose pose2 = pose;
        if (solve_pnp(collect(active), intr, pose2, rms2, conv2)) {
            pose = pose2;
            rms = rms2;
            converged = conv2;
        }
    }

    est.pad_in_camera = pose;
    est.rms_px = rms;
    est.marker_count = static_cast<int>(used.size());
    est.converged = converged;
    est.pad_position_body =
        apply_body_transform(Vec3::Zero(), pose.rotation, pose.translation, mount);
    const Mat3 r_pad_to_body = mount.rotation * pose.rotation;
    est.pad_yaw_body = euler_from_rotation(r_pad_to_body).yaw;
    return est;
}

}  // namespace autoland
