#include "autoland/mission.hpp"

#include <cmath>

namespace autoland {

const char* to_string(MissionPhase phase) {
    switch (phase) {
        case MissionPhase::Takeoff: return "Takeoff";
        case MissionPhase::Hover: return "Hover";
        case MissionPhase::Track: return "Track";
        case MissionPhase::Descend: return "Descend";
        case MissionPhase::Land: return "Land";
        case MissionPhase::Landed: return "Landed";
    }
    return "?";
}

std::optional<MissionPhase> phase_from_string(const std::string& name) {
    for (MissionPhase p : {MissionPhase::Takeoff, MissionPhase::Hover, MissionPhase::Track,
                           MissionPhase::Descend, MissionPhase::Land, MissionPhase::Landed}) {
        if (name == to_string(p)) return p;
    }
    return std::nullopt;
}

void MissionConfig::validate() const {
    if (!(capture_radius > 0) || !(detection_loss_timeout > 0) ||
        !(descend_track_distance > 0) || !(descend_height > 0) || !(land_height > 0) ||
        !(touchdown_tolerance > 0) || !(replan_period > 0) || !(plan_horizon > 0))
        throw ConfigInvalid("mission: thresholds must be > 0");
    if (!(land_height < descend_height))
        throw ConfigInvalid("mission.land_height: must be < descend_height");
}

namespace {

Setpoint hold_position(const Vec3& p, double yaw = 0.0) {
    Setpoint sp;
    sp.position = p;
    sp.yaw = yaw;
    return sp;
}

// Constant-velocity pad intercept over the plan horizon, aimed at the given
// height above the deck.
PlanGoal intercept_goal(const PadEstimate& pad, double height, double horizon) {
    PlanGoal goal;
    goal.position = pad.position + pad.velocity * horizon + Vec3(0, 0, height);
    goal.velocity = pad.velocity;
    goal.horizon = horizon;
    return goal;
}

// The pad estimate dead-reckoned to `now` under constant velocity.
Vec3 pad_position_at(const PadEstimate& pad, double now) {
    return pad.position + pad.velocity * (now - pad.time);
}

}  // namespace

MissionOutput mission_step(MissionState& state, const StateEstimate& uav,
                           const std::optional<PadEstimate>& pad,
                           const MissionConfig& config, const MissionEvent& event,
                           double now, bool contact) {
    MissionOutput out;
    const Vec3& p = uav.state.position;

    if (pad) {
        state.last_pad = *pad;
        state.has_pad = true;
        state.last_detection_time = now;
    }
    if (event.land_command) state.land_commanded = true;
    const bool fresh =
        state.has_pad && (now - state.last_detection_time) <= config.detection_loss_timeout;

    if (event.abort && state.phase != MissionPhase::Landed) {
        state.phase = MissionPhase::Hover;
        state.tracked_distance = 0.0;
        state.has_prev_position = false;
        out.setpoint = hold_position(config.preset_point);
        return out;
    }

    switch (state.phase) {
        case MissionPhase::Takeoff: {
            out.setpoint = hold_position(config.preset_point);
            if ((p - config.preset_point).norm() < config.capture_radius) {
                state.phase = MissionPhase::Hover;
            }
            break;
        }
        case MissionPhase::Hover: {
            out.setpoint = hold_position(config.preset_point);
            if (pad) {
                state.phase = MissionPhase::Track;
                state.tracked_distance = 0.0;
                state.prev_position = p;
                state.has_prev_position = true;
                state.last_replan_time = -1e18;
            }
            break;
        }
        case MissionPhase::Track: {
            if (state.has_prev_position) state.tracked_distance += (p - state.prev_position).norm();
            state.prev_position = p;
            state.has_prev_position = true;

            if (!fresh) {
                state.phase = MissionPhase::Hover;
                out.setpoint = hold_position(config.preset_point);
                break;
            }
            if (state.land_commanded ||
                state.tracked_distance >= config.descend_track_distance) {
                state.phase = MissionPhase::Descend;
                state.last_replan_time = -1e18;   // replan immediately
            }
            const double height = state.phase == MissionPhase::Track
                                      ? config.descend_height
                                      : config.land_height / 2.0;
            if (now - state.last_replan_time >= config.replan_period) {
                out.plan_goal = intercept_goal(state.last_pad, height, config.plan_horizon);
                state.last_replan_time = now;
            }
            break;
        }
        case MissionPhase::Descend: {
            if (!fresh) {
                state.phase = MissionPhase::Hover;
                out.setpoint = hold_position(config.preset_point);
                break;
            }
            const Vec3 pad_now = pad_position_at(state.last_pad, now);
            const double height_above = p.z() - pad_now.z();
            const double horiz = (p - pad_now).head<2>().norm();
            if (height_above < config.land_height && horiz < config.touchdown_tolerance) {
                state.phase = MissionPhase::Land;
                break;
            }
            if (now - state.last_replan_time >= config.replan_period) {
                out.plan_goal =
                    intercept_goal(state.last_pad, config.land_height / 2.0, config.plan_horizon);
                state.last_replan_time = now;
            }
            break;
        }
        case MissionPhase::Land: {
            const Vec3 pad_now = pad_position_at(state.last_pad, now);
            Setpoint sp;
            sp.position = pad_now - Vec3(0, 0, 0.05);   // just below the deck
            sp.velocity_ff = state.last_pad.velocity;
            out.setpoint = sp;
            if (contact) state.phase = MissionPhase::Landed;
            break;
        }
        case MissionPhase::Landed: {
            out.setpoint = hold_position(p);
            break;
        }
    }
    return out;
}

TouchdownRecord touchdown_check(const RigidBodyState& uav_truth,
                                const Vec3& pad_center_truth,
                                const MissionConfig& config,
                                double contact_descent_speed) {
    TouchdownRecord rec;
    rec.horizontal_offset = (uav_truth.position - pad_center_truth).head<2>().norm();
    rec.descent_speed = contact_descent_speed;
    rec.success = rec.horizontal_offset <= config.touchdown_tolerance &&
                  contact_descent_speed <= 0.5;
    return rec;
}

}  // namespace autoland
