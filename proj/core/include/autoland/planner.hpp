#pragma once

#include <vector>

#include "autoland/bspline.hpp"
#include "autoland/world.hpp"

namespace autoland {

/// Obstacle-surface anchor for one colliding control point. `direction` is
/// the unit vector from the control point toward the guide path, so the
/// signed clearance d = (Q - point) . direction is negative inside the
/// obstacle and grows as the control point retreats along +direction. Both
/// members stay fixed during optimization, making d affine in Q.
struct AnchorPair {
    int index = 0;       // owning control point
    Vec3 point = Vec3::Zero();
    Vec3 direction = Vec3::UnitZ();
};

inline double anchor_clearance(const Vec3& q, const AnchorPair& a) {
    return (q - a.point).dot(a.direction);
}

struct CostWeights {
    double lambda_smooth = 1.0;
    double lambda_collision = 8.5;
    double lambda_feasibility = 0.1;
    double lambda_fitness = 1.0;
    double w_vel = 1.0;
    double w_acc = 1.0;
    double w_jerk = 1.0;
    double v_max = 2.5;        // m/s, per axis
    double a_max = 5.0;        // m/s^2
    double j_max = 20.0;       // m/s^3
    double safe_distance = 0.3;  // m beyond the inflated surface
    double fit_a = 20.0;       // axial displacement scale
    double fit_b = 1.0;        // radial displacement scale
    int control_points = 25;
    int fit_samples = 100;

    void validate() const;
};

struct PlanRequest {
    Vec3 start_position = Vec3::Zero();
    Vec3 start_velocity = Vec3::Zero();
    Vec3 start_acceleration = Vec3::Zero();
    Vec3 goal_position = Vec3::Zero();
    Vec3 goal_velocity = Vec3::Zero();
    const OccupancyGrid* grid = nullptr;   // optional; nullptr plans in free space
    CostWeights weights;
    double horizon = 3.0;   // s
};

struct PlanResult {
    UniformBSpline trajectory;
    double init_ms = 0.0;
    double optimize_ms = 0.0;
    double refine_ms = 0.0;
    int iterations = 0;
    bool converged = true;
    double cost_smooth = 0.0;
    double cost_collision = 0.0;
    double cost_feasibility = 0.0;
    double cost_fitness = 0.0;
};

struct CostGrad {
    double cost = 0.0;
    std::vector<Vec3> gradient;
};

struct OptimizeResult {
    std::vector<Vec3> control_points;
    int iterations = 0;
    bool converged = true;
    double cost = 0.0;
};

/// Cubic spline meeting the start/goal position, velocity and acceleration
/// through the uniform-B-spline boundary equations; interior points are the
/// straight-line interpolation. knot_interval = horizon / (N - degree).
UniformBSpline init_trajectory(const PlanRequest& request);

/// 26-connected A* over the inflated grid, Euclidean heuristic, ties broken
/// by heap insertion order. Returns the cell-center polyline.
std::vector<Vec3> astar_path(const OccupancyGrid& grid, const Vec3& start,
                             const Vec3& goal);

/// Anchors for every control point of a colliding curve segment that sits
/// inside inflated occupancy: direction toward the nearest point of the A*
/// path for that segment, surface point located by bisection (1e-4 m).
std::vector<AnchorPair> generate_anchors(const UniformBSpline& spline,
                                         const OccupancyGrid& grid,
                                         const std::vector<Vec3>& path);

/// Sum of squared acceleration and jerk control points with its analytic
/// gradient.
CostGrad cost_smooth(const std::vector<Vec3>& q, double dt);

/// Cubic-hinge penalty on velocity/acceleration/jerk control points against
/// the per-axis limits; C2 at the boundary.
CostGrad cost_feasible(const std::vector<Vec3>& q, double dt, const CostWeights& w);

/// (s_f - d)^3 below the safe distance, zero above.
CostGrad cost_collide(const std::vector<Vec3>& q,
                      const std::vector<AnchorPair>& anchors, double safe_distance);

/// Mean axial/radial displacement penalty between the spline built from
/// q_fit (same degree and knot interval as `target`) and `target`, sampled
/// at fit_samples midpoints of [0, 1].
CostGrad cost_fit(const std::vector<Vec3>& q_fit, const UniformBSpline& target,
                  const CostWeights& w);

/// L-BFGS with Armijo backtracking over the interior control points (the
/// first/last degree points stay fixed); cost lambda_s*Js + lambda_c*Jc +
/// lambda_d*Jd never increases across accepted steps.
OptimizeResult optimize(const std::vector<Vec3>& q0,
                        const std::vector<AnchorPair>& anchors,
                        const CostWeights& weights, double dt, int degree = 3);

/// Scales the knot interval by the smallest factor that brings every
/// velocity/acceleration/jerk control point inside the limits.
UniformBSpline time_reassign(const UniformBSpline& spline, const CostWeights& weights);

/// Full pipeline: init, collision check, (A* + anchors + optimize) when
/// colliding, time re-assignment, fitting refinement.
PlanResult plan(const PlanRequest& request);

/// True if any sample of the curve at knot_interval/4 spacing lands in an
/// inflated-occupied cell.
bool trajectory_in_collision(const UniformBSpline& spline, const OccupancyGrid& grid);

}  // namespace autoland
