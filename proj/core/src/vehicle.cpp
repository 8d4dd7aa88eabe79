#include "autoland/vehicle.hpp"

#include <cmath>

namespace autoland {

namespace {

Vec3 clamp_abs(const Vec3& v, const Vec3& limit) {
    Vec3 out;
    for (int i = 0; i < 3; ++i) {
        out[i] = std::clamp(v[i], -limit[i], limit[i]);
    }
    return out;
}

bool finite(const Vec3& v) { return v.allFinite(); }

}  // namespace

void VehicleParams::validate() const {
    if (!(mass > 0.0)) throw ConfigInvalid("vehicle.mass: must be > 0");
    if (!(inertia.minCoeff() > 0.0)) throw ConfigInvalid("vehicle.inertia: must be > 0");
    if (!(thrust_min >= 0.0) || !(thrust_max > thrust_min))
        throw ConfigInvalid("vehicle.thrust_limits: need 0 <= min < max");
    if (drag_coeff.minCoeff() < 0.0) throw ConfigInvalid("vehicle.drag_coeff: must be >= 0");
    if (torque_limit.minCoeff() <= 0.0) throw ConfigInvalid("vehicle.torque_limit: must be > 0");
}

void ControllerGains::validate() const {
    auto nonneg = [](const Vec3& v) { return v.minCoeff() >= 0.0; };
    if (!nonneg(pos_p) || !nonneg(vel.kp) || !nonneg(vel.ki) || !nonneg(vel.kd) ||
        !nonneg(att_p) || !nonneg(rate.kp) || !nonneg(rate.ki) || !nonneg(rate.kd))
        throw ConfigInvalid("gains: all gains must be >= 0");
    if (vel.integral_clamp.minCoeff() <= 0.0 || rate.integral_clamp.minCoeff() <= 0.0)
        throw ConfigInvalid("gains: integral clamps must be > 0");
}

void EstimatorNoise::validate() const {
    if (pos_std < 0 || vel_std < 0 || att_std < 0 || rate_std < 0)
        throw ConfigInvalid("estimator_noise: sigmas must be >= 0");
}

bool RigidBodyState::finite() const {
    return position.allFinite() && velocity.allFinite() && body_rates.allFinite() &&
           std::isfinite(attitude.roll) && std::isfinite(attitude.pitch) &&
           std::isfinite(attitude.yaw);
}

StateDerivative dynamics_derivative(const RigidBodyState& state,
                                    const ControlCommand& cmd,
                                    const VehicleParams& params,
                                    const Vec3& external_force) {
    StateDerivative d;
    d.dposition = state.velocity;

    const Mat3 r = rotation_from_euler(state.attitude);
    const Vec3 thrust_accel = (cmd.thrust / params.mass) * r.col(2);
    d.dvelocity = thrust_accel - Vec3(0.0, 0.0, params.gravity) -
                  params.drag_coeff.cwiseProduct(state.velocity) +
                  external_force / params.mass;

    const Vec3& w = state.body_rates;
    const Vec3& inertia = params.inertia;
    const double jr_omega = params.rotor_inertia * params.rotor_speed;
    d.dbody_rates.x() = ((inertia.y() - inertia.z()) * w.y() * w.z() +
                         cmd.torque.x() + jr_omega * w.y()) / inertia.x();
    d.dbody_rates.y() = ((inertia.z() - inertia.x()) * w.x() * w.z() +
                         cmd.torque.y() - jr_omega * w.x()) / inertia.y();
    d.dbody_rates.z() = ((inertia.x() - inertia.y()) * w.x() * w.y() +
                         cmd.torque.z()) / inertia.z();

    d.dattitude = euler_rates_from_body_rates(state.attitude, w);
    return d;
}

namespace {

RigidBodyState advance(const RigidBodyState& s, const StateDerivative& d, double h) {
    RigidBodyState out;
    out.position = s.position + h * d.dposition;
    out.velocity = s.velocity + h * d.dvelocity;
    out.attitude.roll = s.attitude.roll + h * d.dattitude.x();
    out.attitude.pitch = s.attitude.pitch + h * d.dattitude.y();
    out.attitude.yaw = s.attitude.yaw + h * d.dattitude.z();
    out.body_rates = s.body_rates + h * d.dbody_rates;
    return out;
}

}  // namespace

RigidBodyState integrate_step(const RigidBodyState& state,
                              const ControlCommand& cmd,
                              const VehicleParams& params, double dt,
                              const Vec3& external_force) {
    const StateDerivative k1 = dynamics_derivative(state, cmd, params, external_force);
    const StateDerivative k2 =
        dynamics_derivative(advance(state, k1, dt / 2.0), cmd, params, external_force);
    const StateDerivative k3 =
        dynamics_derivative(advance(state, k2, dt / 2.0), cmd, params, external_force);
    const StateDerivative k4 =
        dynamics_derivative(advance(state, k3, dt), cmd, params, external_force);

    StateDerivative sum;
    sum.dposition = (k1.dposition + 2 * k2.dposition + 2 * k3.dposition + k4.dposition) / 6.0;
    sum.dvelocity = (k1.dvelocity + 2 * k2.dvelocity + 2 * k3.dvelocity + k4.dvelocity) / 6.0;
    sum.dattitude = (k1.dattitude + 2 * k2.dattitude + 2 * k3.dattitude + k4.dattitude) / 6.0;
    sum.dbody_rates =
        (k1.dbody_rates + 2 * k2.dbody_rates + 2 * k3.dbody_rates + k4.dbody_rates) / 6.0;
    return advance(state, sum, dt);
}

ControlCommand controller_update(const Setpoint& setpoint,
                                 const StateEstimate& estimate,
                                 const ControllerGains& gains,
                                 const VehicleParams& params, double dt,
                                 ControllerState& cs) {
    const RigidBodyState& est = estimate.state;

    // Outer loop: position P with velocity feed-forward.
    const Vec3 pos_error = setpoint.position - est.position;
    const Vec3 vel_sp =
        clamp_abs(gains.pos_p.cwiseProduct(pos_error) + setpoint.velocity_ff, gains.vel_limit);

    // Velocity PID -> desired world acceleration.
    const Vec3 vel_error = vel_sp - est.velocity;
    const Vec3 vel_deriv =
        cs.has_prev ? Vec3((vel_error - cs.vel_prev_error) / dt) : Vec3::Zero();
    Vec3 accel_raw = gains.vel.kp.cwiseProduct(vel_error) +
                     gains.vel.ki.cwiseProduct(cs.vel_integral) +
                     gains.vel.kd.cwiseProduct(vel_deriv);
    const Vec3 accel_sp = clamp_abs(accel_raw, gains.accel_limit);
    for (int i = 0; i < 3; ++i) {
        // Anti-windup: only integrate axes whose output is not saturated.
        if (accel_raw[i] == accel_sp[i]) {
            cs.vel_integral[i] = std::clamp(cs.vel_integral[i] + vel_error[i] * dt,
                                            -gains.vel.integral_clamp[i],
                                            gains.vel.integral_clamp[i]);
        }
    }
    cs.vel_prev_error = vel_error;

    // Desired specific force and collective thrust.
    const Vec3 force_dir = accel_sp + Vec3(0.0, 0.0, params.gravity);
    const double force_norm = force_dir.norm();
    ControlCommand cmd;
    cmd.thrust = std::clamp(params.mass * force_norm, params.thrust_min, params.thrust_max);

    // Desired attitude: body z along the force direction, yaw from setpoint.
    Vec3 z_b = force_norm > 1e-9 ? Vec3(force_dir / force_norm) : Vec3(0, 0, 1);
    const Vec3 x_c(std::cos(setpoint.yaw), std::sin(setpoint.yaw), 0.0);
    Vec3 y_b = z_b.cross(x_c);
    const double y_norm = y_b.norm();
    EulerAngles att_sp;
    if (y_norm > 1e-9) {
        y_b /= y_norm;
        const Vec3 x_b = y_b.cross(z_b);
        Mat3 r_des;
        r_des.col(0) = x_b;
        r_des.col(1) = y_b;
        r_des.col(2) = z_b;
        att_sp = euler_from_rotation(r_des);
    } else {
        att_sp.yaw = setpoint.yaw;  // force direction parallel to yaw axis
    }

    // Attitude P -> body-rate setpoint.
    Vec3 att_error(wrap_angle(att_sp.roll - est.attitude.roll),
                   wrap_angle(att_sp.pitch - est.attitude.pitch),
                   wrap_angle(att_sp.yaw - est.attitude.yaw));
    const Vec3 rate_sp = clamp_abs(gains.att_p.cwiseProduct(att_error), gains.rate_limit);

    // Inner loop: body-rate PID -> torques.
    const Vec3 rate_error = rate_sp - est.body_rates;
    const Vec3 rate_deriv =
        cs.has_prev ? Vec3((rate_error - cs.rate_prev_error) / dt) : Vec3::Zero();
    Vec3 torque_raw = gains.rate.kp.cwiseProduct(rate_error) +
                      gains.rate.ki.cwiseProduct(cs.rate_integral) +
                      gains.rate.kd.cwiseProduct(rate_deriv);
    cmd.torque = clamp_abs(torque_raw, params.torque_limit);
    for (int i = 0; i < 3; ++i) {
        if (torque_raw[i] == cmd.torque[i]) {
            cs.rate_integral[i] = std::clamp(cs.rate_integral[i] + rate_error[i] * dt,
                                             -gains.rate.integral_clamp[i],
                                             gains.rate.integral_clamp[i]);
        }
    }
    cs.rate_prev_error = rate_error;
    cs.has_prev = true;
    return cmd;
}

StateEstimate estimate_state(const RigidBodyState& truth,
                             const EstimatorNoise& noise, Rng& rng) {
    StateEstimate est;
    est.noise = noise;
    est.state = truth;
    for (int i = 0; i < 3; ++i) est.state.position[i] += rng.gaussian(0.0, noise.pos_std);
    for (int i = 0; i < 3; ++i) est.state.velocity[i] += rng.gaussian(0.0, noise.vel_std);
    est.state.attitude.roll += rng.gaussian(0.0, noise.att_std);
    est.state.attitude.pitch += rng.gaussian(0.0, noise.att_std);
    est.state.attitude.yaw += rng.gaussian(0.0, noise.att_std);
    for (int i = 0; i < 3; ++i) est.state.body_rates[i] += rng.gaussian(0.0, noise.rate_std);
    return est;
}

}  // namespace autoland
