#pragma once

#include <optional>
#include <string>

#include "autoland/vehicle.hpp"

namespace autoland {

enum class MissionPhase { Takeoff, Hover, Track, Descend, Land, Landed };

const char* to_string(MissionPhase phase);
std::optional<MissionPhase> phase_from_string(const std::string& name);

struct MissionConfig {
    Vec3 preset_point{0.0, 0.0, 1.5};      // m, takeoff target
    double capture_radius = 0.2;           // m
    double detection_loss_timeout = 1.0;   // s, Track/Descend regress to Hover
    double descend_track_distance = 2.5;   // m flown in Track before descending
    double descend_height = 0.6;           // m above the pad while tracking
    double land_height = 0.2;              // m, hand-off to the final descent
    double touchdown_tolerance = 0.3;      // m, horizontal
    double replan_period = 0.5;            // s
    double plan_horizon = 3.0;             // s

    void validate() const;
};

/// Externally injected triggers (config-scheduled in the simulator).
struct MissionEvent {
    bool land_command = false;
    bool abort = false;
};

/// World-frame pad estimate fused from perception plus the vehicle state.
struct PadEstimate {
    Vec3 position = Vec3::Zero();   // pad center, world; z is the surface
    Vec3 velocity = Vec3::Zero();
    double yaw = 0.0;
    double time = 0.0;              // estimate timestamp
};

/// Everything the state machine remembers between ticks.
struct MissionState {
    MissionPhase phase = MissionPhase::Takeoff;
    double tracked_distance = 0.0;
    Vec3 prev_position = Vec3::Zero();
    bool has_prev_position = false;
    PadEstimate last_pad;
    bool has_pad = false;
    double last_detection_time = -1e18;
    double last_replan_time = -1e18;
    bool land_commanded = false;
};

/// Goal of a plan request toward the predicted pad intercept; the simulator
/// attaches the grid and weights.
struct PlanGoal {
    Vec3 position = Vec3::Zero();
    Vec3 velocity = Vec3::Zero();
    double horizon = 3.0;
};

struct MissionOutput {
    std::optional<Setpoint> setpoint;   // Takeoff/Hover/Land/Landed
    std::optional<PlanGoal> plan_goal;  // Track/Descend, at the replan period
};

/// One transition of the take-off/track/land machine:
///   Takeoff -> Hover   inside the capture radius of the preset point
///   Hover   -> Track   on a pad estimate this tick
///   Track   -> Descend tracked distance over threshold, or land command
///   Descend -> Land    below land_height above the pad and inside tolerance
///   Land    -> Landed  on contact
///   Track/Descend -> Hover on detection-loss timeout; abort forces Hover.
/// Landed is absorbing.
MissionOutput mission_step(MissionState& state, const StateEstimate& uav,
                           const std::optional<PadEstimate>& pad,
                           const MissionConfig& config, const MissionEvent& event,
                           double now, bool contact);

struct TouchdownRecord {
    bool success = false;
    double horizontal_offset = 0.0;   // m
    double descent_speed = 0.0;       // m/s, positive downward
};

/// Grades a completed landing against the pad truth. Success needs the
/// horizontal offset inside the tolerance (inclusive) and a contact descent
/// speed of at most 0.5 m/s.
TouchdownRecord touchdown_check(const RigidBodyState& uav_truth,
                                const Vec3& pad_center_truth,
                                const MissionConfig& config,
                                double contact_descent_speed);

}  // namespace autoland
