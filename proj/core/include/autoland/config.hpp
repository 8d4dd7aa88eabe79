#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "autoland/mission.hpp"
#include "autoland/perception.hpp"
#include "autoland/planner.hpp"
#include "autoland/vehicle.hpp"
#include "autoland/world.hpp"

namespace autoland {

struct PlatformSegment {
    double duration = 0.0;        // s
    Vec3 velocity = Vec3::Zero(); // m/s, z ignored
};

struct PlatformConfig {
    Vec3 start_position{0, 0, 0};  // pad center; z is overwritten by surface_height
    double heading = 0.0;          // rad
    double surface_height = 0.3;   // m
    double deck_half_extent = 0.5; // m, square deck used for contact checks
    std::vector<PlatformSegment> segments;

    PlatformState initial_state() const;
    /// Piecewise-constant velocity active at time t (zero past the last segment).
    Vec3 velocity_at(double t) const;
};

struct WorldConfig {
    Vec3 bounds_min{-10, -10, 0};
    Vec3 bounds_max{10, 10, 6};
    double resolution = 0.15;    // m/cell
    double inflation = 0.299;    // m
    std::vector<Obstacle> obstacles;
    Vec3 disturbance_force = Vec3::Zero();   // N, constant world-frame
};

struct CameraConfig {
    CameraIntrinsics intrinsics;
    CameraMount mount;
    double pixel_noise_std = 0.0;   // px
};

struct ScenarioConfig {
    VehicleParams vehicle;
    ControllerGains gains;
    EstimatorNoise estimator_noise;
    WorldConfig world;
    PlatformConfig platform;
    CameraConfig camera;
    PadLayout pad;                  // default layout unless overridden
    CostWeights planner;
    MissionConfig mission;

    Vec3 start_position = Vec3::Zero();   // UAV on the ground
    double physics_dt = 0.005;            // s
    double duration = 60.0;               // s, hard stop
    std::uint64_t seed = 1;
    std::string output_dir = "out";
    /// Zero the planning-time fields written to ticks.csv/summary.json so a
    /// (config, seed) pair reproduces byte-identical files. Wall-clock
    /// measurements are still collected in memory either way.
    bool deterministic_timing = true;
    double land_command_time = -1.0;      // s; < 0 disables the scheduled event

    void validate() const;
};

ScenarioConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ScenarioConfig& config);

/// Reads and validates a scenario file. Throws ConfigInvalid with the JSON
/// field path on any schema violation, IoError when unreadable.
ScenarioConfig load_config(const std::string& path);

}  // namespace autoland
