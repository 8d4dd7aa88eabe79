#pragma once

#include "autoland/geometry.hpp"
#include "autoland/rng.hpp"

namespace autoland {

struct VehicleParams {
    double mass = 1.5;                          // kg
    Vec3 inertia{0.029, 0.029, 0.055};          // kg m^2, diagonal
    double rotor_inertia = 0.0;                 // kg m^2
    double rotor_speed = 0.0;                   // rad/s, net residual
    Vec3 drag_coeff{0.1, 0.1, 0.1};             // 1/s, linear per-axis damping
    double gravity = 9.81;                      // m/s^2
    double thrust_min = 0.0;                    // N
    double thrust_max = 40.0;                   // N
    Vec3 torque_limit{0.5, 0.5, 0.2};           // N m, symmetric per axis

    void validate() const;
};

struct RigidBodyState {
    Vec3 position = Vec3::Zero();       // m, world ENU
    Vec3 velocity = Vec3::Zero();       // m/s, world
    EulerAngles attitude;               // rad
    Vec3 body_rates = Vec3::Zero();     // rad/s, body frame

    bool finite() const;
};

/// Collective thrust along body +z and body torques.
struct ControlCommand {
    double thrust = 0.0;    // N
    Vec3 torque = Vec3::Zero();  // N m
};

struct PidGains {
    Vec3 kp = Vec3::Zero();
    Vec3 ki = Vec3::Zero();
    Vec3 kd = Vec3::Zero();
    Vec3 integral_clamp = Vec3::Ones();
};

struct ControllerGains {
    Vec3 pos_p{1.2, 1.2, 1.6};
    PidGains vel{{3.0, 3.0, 4.0}, {0.4, 0.4, 0.6}, {0.05, 0.05, 0.05}, {2.0, 2.0, 2.0}};
    Vec3 att_p{8.0, 8.0, 4.0};
    PidGains rate{{0.30, 0.30, 0.20}, {0.05, 0.05, 0.02}, {0.002, 0.002, 0.0}, {0.3, 0.3, 0.1}};
    Vec3 vel_limit{3.0, 3.0, 2.0};      // m/s, per axis
    Vec3 accel_limit{6.0, 6.0, 5.0};    // m/s^2, per axis
    Vec3 rate_limit{6.0, 6.0, 3.0};     // rad/s

    void validate() const;
};

struct Setpoint {
    Vec3 position = Vec3::Zero();
    Vec3 velocity_ff = Vec3::Zero();
    double yaw = 0.0;
};

/// Integrator/derivative memory of the cascaded controller. Passed in and
/// returned by value so the controller itself stays a pure function.
struct ControllerState {
    Vec3 vel_integral = Vec3::Zero();
    Vec3 vel_prev_error = Vec3::Zero();
    Vec3 rate_integral = Vec3::Zero();
    Vec3 rate_prev_error = Vec3::Zero();
    bool has_prev = false;
};

struct EstimatorNoise {
    double pos_std = 0.0;    // m
    double vel_std = 0.0;    // m/s
    double att_std = 0.0;    // rad
    double rate_std = 0.0;   // rad/s

    void validate() const;
};

/// Ground-truth state corrupted by per-channel zero-mean Gaussian noise.
/// Stands in for the onboard estimator; the sigmas that produced it are
/// carried along for logging.
struct StateEstimate {
    RigidBodyState state;
    EstimatorNoise noise;
};

struct StateDerivative {
    Vec3 dposition = Vec3::Zero();
    Vec3 dvelocity = Vec3::Zero();
    Vec3 dattitude = Vec3::Zero();   // Euler-angle rates
    Vec3 dbody_rates = Vec3::Zero();
};

/// Newton-Euler rigid-body derivative:
///   v_dot = (T/m) R e_z - g e_z - diag(d) v + f_ext/m
///   w_dot has the inertia cross terms and the rotor gyroscopic terms
/// Attitude rates come from euler_rates_from_body_rates (throws GimbalLock
/// near pitch +-90 deg).
StateDerivative dynamics_derivative(const RigidBodyState& state,
                                    const ControlCommand& cmd,
                                    const VehicleParams& params,
                                    const Vec3& external_force = Vec3::Zero());

/// Classical fixed-step RK4.
RigidBodyState integrate_step(const RigidBodyState& state,
                              const ControlCommand& cmd,
                              const VehicleParams& params, double dt,
                              const Vec3& external_force = Vec3::Zero());

/// One cascaded controller update: position P -> velocity PID -> desired
/// acceleration -> (thrust, desired attitude) -> attitude P -> rate PID.
/// Outputs are clamped to the vehicle limits; integrators are clamped and
/// frozen on axes whose downstream output saturates.
ControlCommand controller_update(const Setpoint& setpoint,
                                 const StateEstimate& estimate,
                                 const ControllerGains& gains,
                                 const VehicleParams& params, double dt,
                                 ControllerState& ctl_state);

StateEstimate estimate_state(const RigidBodyState& truth,
                             const EstimatorNoise& noise, Rng& rng);

}  // namespace autoland
