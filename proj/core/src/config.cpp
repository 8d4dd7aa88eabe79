#include "autoland/config.hpp"

#include <fstream>
#include <set>

#include <nlohmann/json.hpp>

namespace autoland {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
    throw ConfigInvalid(path + ": " + what);
}

void expect_keys(const json& j, const std::string& path,
                 const std::set<std::string>& known) {
    if (!j.is_object()) fail(path, "expected an object");
    for (const auto& [key, _] : j.items()) {
        if (!known.count(key)) fail(path + "." + key, "unknown field");
    }
}

double get_num(const json& j, const std::string& path, const char* key, double fallback) {
    if (!j.contains(key)) return fallback;
    const json& v = j.at(key);
    if (!v.is_number()) fail(path + "." + key, "expected a number");
    return v.get<double>();
}

int get_int(const json& j, const std::string& path, const char* key, int fallback) {
    if (!j.contains(key)) return fallback;
    const json& v = j.at(key);
    if (!v.is_number_integer()) fail(path + "." + key, "expected an integer");
    return v.get<int>();
}

bool get_bool(const json& j, const std::string& path, const char* key, bool fallback) {
    if (!j.contains(key)) return fallback;
    const json& v = j.at(key);
    if (!v.is_boolean()) fail(path + "." + key, "expected a boolean");
    return v.get<bool>();
}

Vec3 get_vec3(const json& j, const std::string& path, const char* key,
              const Vec3& fallback) {
    if (!j.contains(key)) return fallback;
    const json& v = j.at(key);
    if (!v.is_array() || v.size() != 3 || !v[0].is_number() || !v[1].is_number() ||
        !v[2].is_number())
        fail(path + "." + key, "expected [x, y, z]");
    return {v[0].get<double>(), v[1].get<double>(), v[2].get<double>()};
}

json to_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

PidGains parse_pid(const json& j, const std::string& path, const PidGains& fallback) {
    expect_keys(j, path, {"kp", "ki", "kd", "integral_clamp"});
    PidGains g = fallback;
    g.kp = get_vec3(j, path, "kp", fallback.kp);
    g.ki = get_vec3(j, path, "ki", fallback.ki);
    g.kd = get_vec3(j, path, "kd", fallback.kd);
    g.integral_clamp = get_vec3(j, path, "integral_clamp", fallback.integral_clamp);
    return g;
}

json pid_to_json(const PidGains& g) {
    return {{"kp", to_json(g.kp)},
            {"ki", to_json(g.ki)},
            {"kd", to_json(g.kd)},
            {"integral_clamp", to_json(g.integral_clamp)}};
}

}  // namespace

PlatformState PlatformConfig::initial_state() const {
    PlatformState s;
    s.position = start_position;
    s.position.z() = surface_height;
    s.heading = heading;
    s.surface_height = surface_height;
    s.velocity = velocity_at(0.0);
    return s;
}

Vec3 PlatformConfig::velocity_at(double t) const {
    double acc = 0.0;
    for (const PlatformSegment& seg : segments) {
        if (t < acc + seg.duration) {
            Vec3 v = seg.velocity;
            v.z() = 0.0;
            return v;
        }
        acc += seg.duration;
    }
    return Vec3::Zero();
}

void ScenarioConfig::validate() const {
    vehicle.validate();
    gains.validate();
    estimator_noise.validate();
    camera.intrinsics.validate();
    pad.validate();
    planner.validate();
    mission.validate();
    if (!(physics_dt > 0)) throw ConfigInvalid("physics_dt: must be > 0");
    if (!(duration > 0)) throw ConfigInvalid("duration: must be > 0");
    if (!((world.bounds_max.array() > world.bounds_min.array()).all()))
        throw ConfigInvalid("world.bounds: max must exceed min");
    if (!(world.resolution > 0)) throw ConfigInvalid("world.resolution: must be > 0");
    if (world.inflation < 0) throw ConfigInvalid("world.inflation: must be >= 0");
    for (std::size_t i = 0; i < world.obstacles.size(); ++i) {
        const Obstacle& o = world.obstacles[i];
        if (!((o.max.array() >= o.min.array()).all()))
            throw ConfigInvalid("world.obstacles[" + std::to_string(i) + "]: min > max");
    }
    if (camera.pixel_noise_std < 0)
        throw ConfigInvalid("camera.pixel_noise_std: must be >= 0");
    if (!(platform.surface_height >= 0))
        throw ConfigInvalid("platform.surface_height: must be >= 0");
    if (!(platform.deck_half_extent > 0))
        throw ConfigInvalid("platform.deck_half_extent: must be > 0");
    for (std::size_t i = 0; i < platform.segments.size(); ++i) {
        if (platform.segments[i].duration < 0)
            throw ConfigInvalid("platform.segments[" + std::to_string(i) +
                                "].duration: must be >= 0");
    }
}

ScenarioConfig config_from_json(const json& j) {
    ScenarioConfig c;
    expect_keys(j, "$",
                {"vehicle", "gains", "estimator_noise", "world", "platform", "camera",
                 "pad", "planner", "mission", "start_position", "physics_dt", "duration",
                 "seed", "output_dir", "deterministic_timing", "land_command_time"});

    if (j.contains("vehicle")) {
        const json& v = j.at("vehicle");
        const std::string p = "vehicle";
        expect_keys(v, p,
                    {"mass_kg", "inertia_kgm2", "rotor_inertia_kgm2", "rotor_speed_rad_s",
                     "drag_coeff", "gravity_m_s2", "thrust_min_n", "thrust_max_n",
                     "torque_limit_nm"});
        c.vehicle.mass = get_num(v, p, "mass_kg", c.vehicle.mass);
        c.vehicle.inertia = get_vec3(v, p, "inertia_kgm2", c.vehicle.inertia);
        c.vehicle.rotor_inertia = get_num(v, p, "rotor_inertia_kgm2", c.vehicle.rotor_inertia);
        c.vehicle.rotor_speed = get_num(v, p, "rotor_speed_rad_s", c.vehicle.rotor_speed);
        c.vehicle.drag_coeff = get_vec3(v, p, "drag_coeff", c.vehicle.drag_coeff);
        c.vehicle.gravity = get_num(v, p, "gravity_m_s2", c.vehicle.gravity);
        c.vehicle.thrust_min = get_num(v, p, "thrust_min_n", c.vehicle.thrust_min);
        c.vehicle.thrust_max = get_num(v, p, "thrust_max_n", c.vehicle.thrust_max);
        c.vehicle.torque_limit = get_vec3(v, p, "torque_limit_nm", c.vehicle.torque_limit);
    }

    if (j.contains("gains")) {
        const json& g = j.at("gains");
        const std::string p = "gains";
        expect_keys(g, p,
                    {"pos_p", "vel", "att_p", "rate", "vel_limit", "accel_limit",
                     "rate_limit"});
        c.gains.pos_p = get_vec3(g, p, "pos_p", c.gains.pos_p);
        if (g.contains("vel")) c.gains.vel = parse_pid(g.at("vel"), p + ".vel", c.gains.vel);
        c.gains.att_p = get_vec3(g, p, "att_p", c.gains.att_p);
        if (g.contains("rate"))
            c.gains.rate = parse_pid(g.at("rate"), p + ".rate", c.gains.rate);
        c.gains.vel_limit = get_vec3(g, p, "vel_limit", c.gains.vel_limit);
        c.gains.accel_limit = get_vec3(g, p, "accel_limit", c.gains.accel_limit);
        c.gains.rate_limit = get_vec3(g, p, "rate_limit", c.gains.rate_limit);
    }

    if (j.contains("estimator_noise")) {
        const json& n = j.at("estimator_noise");
        const std::string p = "estimator_noise";
        expect_keys(n, p, {"pos_std_m", "vel_std_m_s", "att_std_rad", "rate_std_rad_s"});
        c.estimator_noise.pos_std = get_num(n, p, "pos_std_m", 0.0);
        c.estimator_noise.vel_std = get_num(n, p, "vel_std_m_s", 0.0);
        c.estimator_noise.att_std = get_num(n, p, "att_std_rad", 0.0);
        c.estimator_noise.rate_std = get_num(n, p, "rate_std_rad_s", 0.0);
    }

    if (j.contains("world")) {
        const json& w = j.at("world");
        const std::string p = "world";
        expect_keys(w, p,
                    {"bounds_min", "bounds_max", "resolution_m", "inflation_m",
                     "obstacles", "disturbance_force_n"});
        c.world.bounds_min = get_vec3(w, p, "bounds_min", c.world.bounds_min);
        c.world.bounds_max = get_vec3(w, p, "bounds_max", c.world.bounds_max);
        c.world.resolution = get_num(w, p, "resolution_m", c.world.resolution);
        c.world.inflation = get_num(w, p, "inflation_m", c.world.inflation);
        c.world.disturbance_force =
            get_vec3(w, p, "disturbance_force_n", c.world.disturbance_force);
        if (w.contains("obstacles")) {
            const json& obs = w.at("obstacles");
            if (!obs.is_array()) fail(p + ".obstacles", "expected an array");
            for (std::size_t i = 0; i < obs.size(); ++i) {
                const std::string op = p + ".obstacles[" + std::to_string(i) + "]";
                expect_keys(obs[i], op, {"min", "max"});
                Obstacle o;
                o.min = get_vec3(obs[i], op, "min", Vec3::Zero());
                o.max = get_vec3(obs[i], op, "max", Vec3::Zero());
                c.world.obstacles.push_back(o);
            }
        }
    }

    if (j.contains("platform")) {
        const json& pf = j.at("platform");
        const std::string p = "platform";
        expect_keys(pf, p,
                    {"start_position", "heading_rad", "surface_height_m",
                     "deck_half_extent_m", "segments"});
        c.platform.start_position = get_vec3(pf, p, "start_position", c.platform.start_position);
        c.platform.heading = get_num(pf, p, "heading_rad", c.platform.heading);
        c.platform.surface_height = get_num(pf, p, "surface_height_m", c.platform.surface_height);
        c.platform.deck_half_extent =
            get_num(pf, p, "deck_half_extent_m", c.platform.deck_half_extent);
        if (pf.contains("segments")) {
            const json& segs = pf.at("segments");
            if (!segs.is_array()) fail(p + ".segments", "expected an array");
            for (std::size_t i = 0; i < segs.size(); ++i) {
                const std::string sp = p + ".segments[" + std::to_string(i) + "]";
                expect_keys(segs[i], sp, {"duration_s", "velocity_m_s"});
                PlatformSegment seg;
                seg.duration = get_num(segs[i], sp, "duration_s", 0.0);
                seg.velocity = get_vec3(segs[i], sp, "velocity_m_s", Vec3::Zero());
                c.platform.segments.push_back(seg);
            }
        }
    }

    if (j.contains("camera")) {
        const json& cam = j.at("camera");
        const std::string p = "camera";
        expect_keys(cam, p,
                    {"fx_px", "fy_px", "cx_px", "cy_px", "skew_px", "width_px",
                     "height_px", "pixel_noise_std_px", "mount_rpy_rad",
                     "mount_offset_m"});
        c.camera.intrinsics.fx = get_num(cam, p, "fx_px", c.camera.intrinsics.fx);
        c.camera.intrinsics.fy = get_num(cam, p, "fy_px", c.camera.intrinsics.fy);
        c.camera.intrinsics.cx = get_num(cam, p, "cx_px", c.camera.intrinsics.cx);
        c.camera.intrinsics.cy = get_num(cam, p, "cy_px", c.camera.intrinsics.cy);
        c.camera.intrinsics.skew = get_num(cam, p, "skew_px", c.camera.intrinsics.skew);
        c.camera.intrinsics.width = get_int(cam, p, "width_px", c.camera.intrinsics.width);
        c.camera.intrinsics.height = get_int(cam, p, "height_px", c.camera.intrinsics.height);
        c.camera.pixel_noise_std = get_num(cam, p, "pixel_noise_std_px", 0.0);
        const Vec3 rpy = get_vec3(cam, p, "mount_rpy_rad", Vec3(M_PI, 0.0, 0.0));
        c.camera.mount.rotation = rotation_from_euler({rpy.x(), rpy.y(), rpy.z()});
        c.camera.mount.offset = get_vec3(cam, p, "mount_offset_m", Vec3(0, 0, 0.05));
    } else {
        c.camera.mount.rotation = rotation_from_euler({M_PI, 0.0, 0.0});
        c.camera.mount.offset = Vec3(0, 0, 0.05);
    }

    if (j.contains("pad")) {
        const json& pad = j.at("pad");
        expect_keys(pad, "pad", {"markers"});
        const json& ms = pad.at("markers");
        if (!ms.is_array() || ms.empty()) fail("pad.markers", "expected a non-empty array");
        for (std::size_t i = 0; i < ms.size(); ++i) {
            const std::string mp = "pad.markers[" + std::to_string(i) + "]";
            expect_keys(ms[i], mp,
                        {"id", "edge_m", "center", "yaw_rad", "max_z_m", "max_offset_m",
                         "active_z_m", "active_offset_m"});
            MarkerSpec m;
            m.id = get_int(ms[i], mp, "id", 0);
            m.edge = get_num(ms[i], mp, "edge_m", 0.1);
            const Vec3 center = get_vec3(ms[i], mp, "center", Vec3::Zero());
            const double yaw = get_num(ms[i], mp, "yaw_rad", 0.0);
            m.pose_in_pad = {rotation_from_euler({0.0, 0.0, yaw}), {center.x(), center.y(), 0.0}};
            if (ms[i].contains("max_z_m")) {
                const json& z = ms[i].at("max_z_m");
                if (!z.is_array() || z.size() != 2) fail(mp + ".max_z_m", "expected [lo, hi]");
                m.max_z_lo = z[0].get<double>();
                m.max_z_hi = z[1].get<double>();
            }
            m.max_offset = get_num(ms[i], mp, "max_offset_m", m.max_offset);
            if (ms[i].contains("active_z_m")) {
                const json& z = ms[i].at("active_z_m");
                if (!z.is_array() || z.size() != 2)
                    fail(mp + ".active_z_m", "expected [lo, hi]");
                m.active_z_lo = z[0].get<double>();
                m.active_z_hi = z[1].get<double>();
            }
            if (ms[i].contains("active_offset_m") && !ms[i].at("active_offset_m").is_null()) {
                m.active_offset = get_num(ms[i], mp, "active_offset_m", 0.0);
            }
            c.pad.markers.push_back(m);
        }
    } else {
        c.pad = default_pad_layout();
    }

    if (j.contains("planner")) {
        const json& pl = j.at("planner");
        const std::string p = "planner";
        expect_keys(pl, p,
                    {"lambda_smooth", "lambda_collision", "lambda_feasibility",
                     "lambda_fitness", "w_vel", "w_acc", "w_jerk", "v_max_m_s",
                     "a_max_m_s2", "j_max_m_s3", "safe_distance_m", "fit_a", "fit_b",
                     "control_points", "fit_samples"});
        c.planner.lambda_smooth = get_num(pl, p, "lambda_smooth", c.planner.lambda_smooth);
        c.planner.lambda_collision =
            get_num(pl, p, "lambda_collision", c.planner.lambda_collision);
        c.planner.lambda_feasibility =
            get_num(pl, p, "lambda_feasibility", c.planner.lambda_feasibility);
        c.planner.lambda_fitness = get_num(pl, p, "lambda_fitness", c.planner.lambda_fitness);
        c.planner.w_vel = get_num(pl, p, "w_vel", c.planner.w_vel);
        c.planner.w_acc = get_num(pl, p, "w_acc", c.planner.w_acc);
        c.planner.w_jerk = get_num(pl, p, "w_jerk", c.planner.w_jerk);
        c.planner.v_max = get_num(pl, p, "v_max_m_s", c.planner.v_max);
        c.planner.a_max = get_num(pl, p, "a_max_m_s2", c.planner.a_max);
        c.planner.j_max = get_num(pl, p, "j_max_m_s3", c.planner.j_max);
        c.planner.safe_distance = get_num(pl, p, "safe_distance_m", c.planner.safe_distance);
        c.planner.fit_a = get_num(pl, p, "fit_a", c.planner.fit_a);
        c.planner.fit_b = get_num(pl, p, "fit_b", c.planner.fit_b);
        c.planner.control_points = get_int(pl, p, "control_points", c.planner.control_points);
        c.planner.fit_samples = get_int(pl, p, "fit_samples", c.planner.fit_samples);
    }

    if (j.contains("mission")) {
        const json& m = j.at("mission");
        const std::string p = "mission";
        expect_keys(m, p,
                    {"preset_point", "capture_radius_m", "detection_loss_timeout_s",
                     "descend_track_distance_m", "descend_height_m", "land_height_m",
                     "touchdown_tolerance_m", "replan_period_s", "plan_horizon_s"});
        c.mission.preset_point = get_vec3(m, p, "preset_point", c.mission.preset_point);
        c.mission.capture_radius = get_num(m, p, "capture_radius_m", c.mission.capture_radius);
        c.mission.detection_loss_timeout =
            get_num(m, p, "detection_loss_timeout_s", c.mission.detection_loss_timeout);
        c.mission.descend_track_distance =
            get_num(m, p, "descend_track_distance_m", c.mission.descend_track_distance);
        c.mission.descend_height = get_num(m, p, "descend_height_m", c.mission.descend_height);
        c.mission.land_height = get_num(m, p, "land_height_m", c.mission.land_height);
        c.mission.touchdown_tolerance =
            get_num(m, p, "touchdown_tolerance_m", c.mission.touchdown_tolerance);
        c.mission.replan_period = get_num(m, p, "replan_period_s", c.mission.replan_period);
        c.mission.plan_horizon = get_num(m, p, "plan_horizon_s", c.mission.plan_horizon);
    }

    c.start_position = get_vec3(j, "$", "start_position",
                                Vec3(c.mission.preset_point.x(), c.mission.preset_point.y(), 0.0));
    c.physics_dt = get_num(j, "$", "physics_dt", c.physics_dt);
    c.duration = get_num(j, "$", "duration", c.duration);
    if (j.contains("seed")) {
        if (!j.at("seed").is_number_unsigned() && !j.at("seed").is_number_integer())
            fail("$.seed", "expected an integer");
        c.seed = j.at("seed").get<std::uint64_t>();
    }
    if (j.contains("output_dir")) {
        if (!j.at("output_dir").is_string()) fail("$.output_dir", "expected a string");
        c.output_dir = j.at("output_dir").get<std::string>();
    }
    c.deterministic_timing = get_bool(j, "$", "deterministic_timing", c.deterministic_timing);
    c.land_command_time = get_num(j, "$", "land_command_time", c.land_command_time);

    c.validate();
    return c;
}

json config_to_json(const ScenarioConfig& c) {
    json j;
    j["vehicle"] = {{"mass_kg", c.vehicle.mass},
                    {"inertia_kgm2", to_json(c.vehicle.inertia)},
                    {"rotor_inertia_kgm2", c.vehicle.rotor_inertia},
                    {"rotor_speed_rad_s", c.vehicle.rotor_speed},
                    {"drag_coeff", to_json(c.vehicle.drag_coeff)},
                    {"gravity_m_s2", c.vehicle.gravity},
                    {"thrust_min_n", c.vehicle.thrust_min},
                    {"thrust_max_n", c.vehicle.thrust_max},
                    {"torque_limit_nm", to_json(c.vehicle.torque_limit)}};
    j["gains"] = {{"pos_p", to_json(c.gains.pos_p)},
                  {"vel", pid_to_json(c.gains.vel)},
                  {"att_p", to_json(c.gains.att_p)},
                  {"rate", pid_to_json(c.gains.rate)},
                  {"vel_limit", to_json(c.gains.vel_limit)},
                  {"accel_limit", to_json(c.gains.accel_limit)},
                  {"rate_limit", to_json(c.gains.rate_limit)}};
    j["estimator_noise"] = {{"pos_std_m", c.estimator_noise.pos_std},
                            {"vel_std_m_s", c.estimator_noise.vel_std},
                            {"att_std_rad", c.estimator_noise.att_std},
                            {"rate_std_rad_s", c.estimator_noise.rate_std}};
    json obstacles = json::array();
    for (const Obstacle& o : c.world.obstacles) {
        obstacles.push_back({{"min", to_json(o.min)}, {"max", to_json(o.max)}});
    }
    j["world"] = {{"bounds_min", to_json(c.world.bounds_min)},
                  {"bounds_max", to_json(c.world.bounds_max)},
                  {"resolution_m", c.world.resolution},
                  {"inflation_m", c.world.inflation},
                  {"obstacles", obstacles},
                  {"disturbance_force_n", to_json(c.world.disturbance_force)}};
    json segments = json::array();
    for (const PlatformSegment& s : c.platform.segments) {
        segments.push_back({{"duration_s", s.duration}, {"velocity_m_s", to_json(s.velocity)}});
    }
    j["platform"] = {{"start_position", to_json(c.platform.start_position)},
                     {"heading_rad", c.platform.heading},
                     {"surface_height_m", c.platform.surface_height},
                     {"deck_half_extent_m", c.platform.deck_half_extent},
                     {"segments", segments}};
    const EulerAngles mount_rpy = euler_from_rotation(c.camera.mount.rotation);
    j["camera"] = {{"fx_px", c.camera.intrinsics.fx},
                   {"fy_px", c.camera.intrinsics.fy},
                   {"cx_px", c.camera.intrinsics.cx},
                   {"cy_px", c.camera.intrinsics.cy},
                   {"skew_px", c.camera.intrinsics.skew},
                   {"width_px", c.camera.intrinsics.width},
                   {"height_px", c.camera.intrinsics.height},
                   {"pixel_noise_std_px", c.camera.pixel_noise_std},
                   {"mount_rpy_rad",
                    json::array({mount_rpy.roll, mount_rpy.pitch, mount_rpy.yaw})},
                   {"mount_offset_m", to_json(c.camera.mount.offset)}};
    json markers = json::array();
    for (const MarkerSpec& m : c.pad.markers) {
        json mj = {{"id", m.id},
                   {"edge_m", m.edge},
                   {"center", to_json(m.pose_in_pad.translation)},
                   {"yaw_rad", euler_from_rotation(m.pose_in_pad.rotation).yaw},
                   {"max_z_m", json::array({m.max_z_lo, m.max_z_hi})},
                   {"max_offset_m", m.max_offset},
                   {"active_z_m", json::array({m.active_z_lo, m.active_z_hi})}};
        mj["active_offset_m"] = m.active_offset ? json(*m.active_offset) : json(nullptr);
        markers.push_back(mj);
    }
    j["pad"] = {{"markers", markers}};
    j["planner"] = {{"lambda_smooth", c.planner.lambda_smooth},
                    {"lambda_collision", c.planner.lambda_collision},
                    {"lambda_feasibility", c.planner.lambda_feasibility},
                    {"lambda_fitness", c.planner.lambda_fitness},
                    {"w_vel", c.planner.w_vel},
                    {"w_acc", c.planner.w_acc},
                    {"w_jerk", c.planner.w_jerk},
                    {"v_max_m_s", c.planner.v_max},
                    {"a_max_m_s2", c.planner.a_max},
                    {"j_max_m_s3", c.planner.j_max},
                    {"safe_distance_m", c.planner.safe_distance},
                    {"fit_a", c.planner.fit_a},
                    {"fit_b", c.planner.fit_b},
                    {"control_points", c.planner.control_points},
                    {"fit_samples", c.planner.fit_samples}};
    j["mission"] = {{"preset_point", to_json(c.mission.preset_point)},
                    {"capture_radius_m", c.mission.capture_radius},
                    {"detection_loss_timeout_s", c.mission.detection_loss_timeout},
                    {"descend_track_distance_m", c.mission.descend_track_distance},
                    {"descend_height_m", c.mission.descend_height},
                    {"land_height_m", c.mission.land_height},
                    {"touchdown_tolerance_m", c.mission.touchdown_tolerance},
                    {"replan_period_s", c.mission.replan_period},
                    {"plan_horizon_s", c.mission.plan_horizon}};
    j["start_position"] = to_json(c.start_position);
    j["physics_dt"] = c.physics_dt;
    j["duration"] = c.duration;
    j["seed"] = c.seed;
    j["output_dir"] = c.output_dir;
    j["deterministic_timing"] = c.deterministic_timing;
    j["land_command_time"] = c.land_command_time;
    return j;
}

ScenarioConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw ConfigInvalid(path + ": " + e.what());
    }
    return config_from_json(j);
}

}  // namespace autoland
