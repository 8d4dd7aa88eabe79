#pragma once

#include <array>
#include <optional>
#include <vector>

#include "autoland/geometry.hpp"
#include "autoland/rng.hpp"
#include "autoland/vehicle.hpp"
#include "autoland/world.hpp"

namespace autoland {

struct CameraIntrinsics {
    double fx = 460.0, fy = 460.0;   // px
    double cx = 320.0, cy = 240.0;   // px
    double skew = 0.0;               // px
    int width = 640, height = 480;   // px

    void validate() const;
};

/// Fixed camera mounting: rotation camera->body and the lever arm expressed
/// in the camera frame (the Offset^c of the body-transform chain).
struct CameraMount {
    Mat3 rotation = (Mat3() << 1, 0, 0, 0, -1, 0, 0, 0, -1).finished();
    Vec3 offset = Vec3::Zero();   // m, camera frame

    /// Camera pose in the world given the vehicle pose.
    FramePose camera_in_world(const RigidBodyState& uav) const {
        const Mat3 r_body = rotation_from_euler(uav.attitude);
        return {r_body * rotation, uav.position + r_body * (rotation * offset)};
    }
};

/// One fiducial of the landing pad with its detectability and pose-fusion
/// envelopes. Ranges are vertical distance and per-axis horizontal offset
/// of the camera from the marker center, measured in the pad frame.
struct MarkerSpec {
    int id = 0;
    double edge = 0.1;                 // m
    FramePose pose_in_pad;             // marker center/orientation, pad frame
    double max_z_lo = 0.0, max_z_hi = 1.0;    // m, detectable band
    double max_offset = 1.0;                  // m, |x| and |y| bound
    double active_z_lo = 0.0, active_z_hi = 1.0;
    std::optional<double> active_offset;      // nullopt: no offset constraint

    /// Corner positions in the pad frame, counter-clockwise from the
    /// marker-local (-e/2, -e/2) corner.
    std::array<Vec3, 4> corners_in_pad() const;
};

struct PadLayout {
    std::vector<MarkerSpec> markers;

    void validate() const;   // unique ids, non-overlapping footprints
    const MarkerSpec* find(int id) const;
};

/// The nested layout shipped by default: 2.5 cm center marker, 6.4 cm and
/// 9.5 cm rings, 25.7 cm far marker behind the cluster.
PadLayout default_pad_layout();

struct Detection {
    int marker_id = 0;
    std::array<Eigen::Vector2d, 4> corners_px;
    std::array<Vec3, 4> corners_pad;   // 3D reference points, pad frame
};

struct RelativePoseEstimate {
    Vec3 pad_position_body = Vec3::Zero();  // pad center in the body frame
    double pad_yaw_body = 0.0;              // pad heading relative to body
    double rms_px = 0.0;
    int marker_count = 0;
    bool converged = false;
    FramePose pad_in_camera;                // the optimized pose itself
};

/// Pinhole projection Z (u,v,1)^T = K [R|t] (X,Y,Z,1)^T given the camera
/// pose (camera-to-world). Throws BehindCamera for camera-frame Z <= 1e-9.
Eigen::Vector2d project_point(const CameraIntrinsics& intr,
                              const FramePose& camera_in_world, const Vec3& p_world);

/// Detectability gate of one marker: vertical distance inside its max band
/// and both horizontal offsets inside max_offset. `camera_in_pad` is the
/// camera position expressed in the pad frame.
bool marker_range_gate(const MarkerSpec& marker, const Vec3& camera_in_pad);

/// Active-band membership used for pose-fusion weighting.
bool marker_active_gate(const MarkerSpec& marker, const Vec3& camera_in_pad);

/// Per-frame visible markers: range gate, all four corners inside the
/// image, and an unobstructed line of sight (when a grid is given). Corner
/// pixels carry zero-mean Gaussian noise from the scenario PRNG.
std::vector<Detection> detect_markers(const PadLayout& layout,
                                      const PlatformState& platform,
                                      const RigidBodyState& uav,
                                      const CameraMount& mount,
                                      const CameraIntrinsics& intr,
                                      const OccupancyGrid* grid,
                                      double pixel_noise_std, Rng& rng);

/// Gauss-Newton (Levenberg-damped) reprojection-error minimization of the
/// pad pose in the camera frame, mapped into the body frame through the
/// mount. When any detected marker sits in its active band only those
/// markers' corners are fused; otherwise all detections are used. Throws
/// NoDetections on an empty list; a failed optimization is returned with
/// converged = false and the last iterate.
RelativePoseEstimate estimate_relative_pose(const std::vector<Detection>& detections,
                                            const PadLayout& layout,
                                            const CameraIntrinsics& intr,
                                            const CameraMount& mount,
                                            const FramePose& initial_guess);

/// A plausible starting pose when no previous estimate exists: pad a given
/// distance straight ahead of the camera, facing it.
FramePose default_pose_guess(double distance = 1.5);

/// P^b = R_C^B ((R_M^C P^m + t_M^C) + Offset^c).
Vec3 apply_body_transform(const Vec3& p_pad, const Mat3& r_pad_to_cam,
                          const Vec3& t_pad_to_cam, const CameraMount& mount);

}  // namespace autoland
