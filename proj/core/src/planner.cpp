#include "autoland/planner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <queue>
#include <tuple>

namespace autoland {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

// Cubic hinge f(u, L) = max(u - L, 0)^3 + max(-L - u, 0)^3 and its slope.
double hinge(double u, double limit, double& slope) {
    if (u > limit) {
        const double e = u - limit;
        slope = 3.0 * e * e;
        return e * e * e;
    }
    if (u < -limit) {
        const double e = -limit - u;
        slope = -3.0 * e * e;
        return e * e * e;
    }
    slope = 0.0;
    return 0.0;
}

}  // namespace

void CostWeights::validate() const {
    if (lambda_smooth < 0 || lambda_collision < 0 || lambda_feasibility < 0 ||
        lambda_fitness < 0 || w_vel < 0 || w_acc < 0 || w_jerk < 0)
        throw ConfigInvalid("planner: weights must be >= 0");
    if (!(v_max > 0) || !(a_max > 0) || !(j_max > 0))
        throw ConfigInvalid("planner: v_max/a_max/j_max must be > 0");
    if (!(safe_distance > 0)) throw ConfigInvalid("planner.safe_distance: must be > 0");
    if (!(fit_a > 0) || !(fit_b > 0)) throw ConfigInvalid("planner.fit_a/fit_b: must be > 0");
    if (control_points < 8) throw ConfigInvalid("planner.control_points: need >= 8");
    if (fit_samples < 2) throw ConfigInvalid("planner.fit_samples: need >= 2");
}

// --------------------------------------------------------------------------
// Initialization
// --------------------------------------------------------------------------

namespace {

// Boundary equations of an unclamped uniform cubic at a domain endpoint:
//   position = (Qa + 4 Qb + Qc) / 6
//   velocity = (Qc - Qa) / (2 dt)
//   accel    = (Qa - 2 Qb + Qc) / dt^2
// solved for the endpoint triple (Qa, Qb, Qc).
void boundary_triple(const Vec3& p, const Vec3& v, const Vec3& a, double dt,
                     Vec3& qa, Vec3& qb, Vec3& qc) {
    const Vec3 bias = p + a * (dt * dt / 3.0);
    qa = bias - dt * v;
    qb = p - a * (dt * dt / 6.0);
    qc = bias + dt * v;
}

void apply_boundary(std::vector<Vec3>& q, const PlanRequest& request, double dt) {
    const std::size_t n = q.size();
    boundary_triple(request.start_position, request.start_velocity,
                    request.start_acceleration, dt, q[0], q[1], q[2]);
    boundary_triple(request.goal_position, request.goal_velocity, Vec3::Zero(), dt,
                    q[n - 3], q[n - 2], q[n - 1]);
}

}  // namespace

UniformBSpline init_trajectory(const PlanRequest& request) {
    request.weights.validate();
    if (!(request.horizon > 0.0) ||
        (request.horizon < 1e-6 &&
         (request.goal_position - request.start_position).norm() < 1e-9)) {
        throw DegenerateRequest("plan request start == goal with tiny horizon");
    }

    UniformBSpline spline;
    spline.degree = 3;
    const int n = request.weights.control_points;
    spline.control_points.assign(n, Vec3::Zero());
    spline.knot_interval = request.horizon / (n - spline.degree);

    apply_boundary(spline.control_points, request, spline.knot_interval);

    // Interior: straight-line interpolation between the boundary triples.
    const Vec3 from = spline.control_points[2];
    const Vec3 to = spline.control_points[n - 3];
    for (int i = 3; i < n - 3; ++i) {
        const double s = static_cast<double>(i - 2) / (n - 5);
        spline.control_points[i] = from + s * (to - from);
    }
    return spline;
}

// --------------------------------------------------------------------------
// A* search
// --------------------------------------------------------------------------

std::vector<Vec3> astar_path(const OccupancyGrid& grid, const Vec3& start,
                             const Vec3& goal) {
    auto clamp_cell = [&](CellIndex c) {
        c.x = std::clamp(c.x, 0, grid.size_x() - 1);
        c.y = std::clamp(c.y, 0, grid.size_y() - 1);
        c.z = std::clamp(c.z, 0, grid.size_z() - 1);
        return c;
    };
    const CellIndex sc = clamp_cell(grid.cell_at(start));
    const CellIndex gc = clamp_cell(grid.cell_at(goal));
    if (grid.occupied(sc)) throw StartOccupied("astar: start cell occupied");
    if (grid.occupied(gc)) throw GoalOccupied("astar: goal cell occupied");

    const int nx = grid.size_x(), ny = grid.size_y(), nz = grid.size_z();
    const std::size_t total = static_cast<std::size_t>(nx) * ny * nz;
    auto flat = [&](const CellIndex& c) {
        return static_cast<std::size_t>(c.x) +
               static_cast<std::size_t>(nx) *
                   (static_cast<std::size_t>(c.y) + static_cast<std::size_t>(ny) * c.z);
    };
    auto unflat = [&](std::size_t i) {
        CellIndex c;
        c.x = static_cast<int>(i % nx);
        c.y = static_cast<int>((i / nx) % ny);
        c.z = static_cast<int>(i / (static_cast<std::size_t>(nx) * ny));
        return c;
    };

    const double res = grid.resolution();
    auto heuristic = [&](const CellIndex& c) {
        return res * Vec3(c.x - gc.x, c.y - gc.y, c.z - gc.z).norm();
    };

    std::vector<double> gscore(total, std::numeric_limits<double>::infinity());
    std::vector<std::int64_t> parent(total, -1);
    std::vector<uint8_t> closed(total, 0);

    // (f, insertion sequence, cell). The sequence number makes the expansion
    // order, and therefore the returned path, deterministic.
    using Entry = std::tuple<double, std::int64_t, std::size_t>;
    std::priority_queue<Entry, std::vector<Entry>, std::greater<Entry>> open;
    std::int64_t seq = 0;

    const std::size_t s0 = flat(sc);
    gscore[s0] = 0.0;
    open.emplace(heuristic(sc), seq++, s0);

    const std::size_t goal_idx = flat(gc);
    bool found = (s0 == goal_idx);

    while (!open.empty() && !found) {
        const auto [f, _, idx] = open.top();
        open.pop();
        if (closed[idx]) continue;
        closed[idx] = 1;
        if (idx == goal_idx) {
            found = true;
            break;
        }
        const CellIndex c = unflat(idx);
        for (int dz = -1; dz <= 1; ++dz) {
            for (int dy = -1; dy <= 1; ++dy) {
                for (int dx = -1; dx <= 1; ++dx) {
                    if (dx == 0 && dy == 0 && dz == 0) continue;
                    const CellIndex n{c.x + dx, c.y + dy, c.z + dz};
                    if (!grid.in_bounds(n) || grid.occupied(n)) continue;
                    const std::size_t ni = flat(n);
                    if (closed[ni]) continue;
                    const double step = res * std::sqrt(double(dx * dx + dy * dy + dz * dz));
                    const double cand = gscore[idx] + step;
                    if (cand < gscore[ni]) {
                        gscore[ni] = cand;
                        parent[ni] = static_cast<std::int64_t>(idx);
                        open.emplace(cand + heuristic(n), seq++, ni);
                    }
                }
            }
        }
    }

    if (!found) throw NoPath("astar: no path between start and goal");

    std::vector<Vec3> path;
    for (std::int64_t i = static_cast<std::int64_t>(goal_idx); i >= 0; i = parent[i]) {
        path.push_back(grid.cell_center(unflat(static_cast<std::size_t>(i))));
        if (static_cast<std::size_t>(i) == s0) break;
    }
    std::reverse(path.begin(), path.end());
    return path;
}

// --------------------------------------------------------------------------
// Anchor generation
// --------------------------------------------------------------------------

namespace {

// Nearest point of path[lo..hi] to p; ties go to the lower vertex index.
Vec3 nearest_on_polyline(const std::vector<Vec3>& path, std::size_t lo, std::size_t hi,
                         const Vec3& p, std::size_t& nearest_vertex) {
    Vec3 best = path[lo];
    double best_d2 = (p - best).squaredNorm();
    nearest_vertex = lo;
    for (std::size_t i = lo; i < hi; ++i) {
        const Vec3& a = path[i];
        const Vec3 ab = path[i + 1] - a;
        const double len2 = ab.squaredNorm();
        Vec3 proj = a;
        if (len2 > 1e-18) {
            const double s = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
            proj = a + s * ab;
        }
        const double d2 = (p - proj).squaredNorm();
        if (d2 < best_d2 - 1e-15) {
            best_d2 = d2;
            best = proj;
            nearest_vertex = i;
        }
    }
    if (hi > lo) {
        const double d2 = (p - path[hi]).squaredNorm();
        if (d2 < best_d2 - 1e-15) {
            best = path[hi];
            nearest_vertex = hi;
        }
    }
    return best;
}

std::size_t nearest_vertex_index(const std::vector<Vec3>& path, const Vec3& p) {
    std::size_t best = 0;
    double best_d2 = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < path.size(); ++i) {
        const double d2 = (p - path[i]).squaredNorm();
        if (d2 < best_d2 - 1e-15) {
            best_d2 = d2;
            best = i;
        }
    }
    return best;
}

// First free->occupied boundary from an occupied q along direction v,
// bracketed by coarse marching then bisected to 1e-4 m.
std::optional<Vec3> surface_crossing(const OccupancyGrid& grid, const Vec3& q,
                                     const Vec3& v, double max_range) {
    const double coarse = grid.resolution() / 2.0;
    double prev = 0.0;
    double free_s = -1.0;
    for (double s = coarse; s <= max_range; s += coarse) {
        if (!grid.occupied(q + s * v)) {
            free_s = s;
            break;
        }
        prev = s;
    }
    if (free_s < 0.0) return std::nullopt;
    double lo = prev, hi = free_s;
    while (hi - lo > 1e-4) {
        const double mid = 0.5 * (lo + hi);
        if (grid.occupied(q + mid * v)) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return q + 0.5 * (lo + hi) * v;
}

}  // namespace

std::vector<AnchorPair> generate_anchors(const UniformBSpline& spline,
                                         const OccupancyGrid& grid,
                                         const std::vector<Vec3>& path) {
    std::vector<AnchorPair> anchors;
    if (path.empty()) return anchors;

    const double T = spline.duration();
    const double step = spline.knot_interval / 4.0;
    const int samples = static_cast<int>(std::ceil(T / step)) + 1;

    // Contiguous colliding sample runs become "obstacle segments".
    struct Segment {
        double t_begin, t_end;
    };
    std::vector<Segment> segments;
    bool in_run = false;
    double run_start = 0.0, last_t = 0.0;
    for (int i = 0; i < samples; ++i) {
        const double t = std::min(i * step, T);
        const bool hit = grid.occupied(spline_evaluate(spline, t));
        if (hit && !in_run) {
            in_run = true;
            run_start = t;
        }
        if (!hit && in_run) {
            in_run = false;
            segments.push_back({run_start, last_t});
        }
        if (hit) last_t = t;
    }
    if (in_run) segments.push_back({run_start, last_t});

    const int p = spline.degree;
    const int n = static_cast<int>(spline.control_points.size());
    const double max_range =
        4.0 * (grid.inflation() + grid.resolution()) +
        (path.front() - path.back()).norm();

    for (const Segment& seg : segments) {
        // Control points whose basis support covers the colliding span.
        int span_lo = std::clamp(static_cast<int>(std::floor(seg.t_begin / spline.knot_interval)), 0, n - 1 - p);
        int span_hi = std::clamp(static_cast<int>(std::floor(seg.t_end / spline.knot_interval)), 0, n - 1 - p);

        // Restrict the guide path to the stretch facing this segment.
        const std::size_t va =
            nearest_vertex_index(path, spline_evaluate(spline, seg.t_begin));
        const std::size_t vb =
            nearest_vertex_index(path, spline_evaluate(spline, seg.t_end));
        std::size_t lo = std::min(va, vb);
        std::size_t hi = std::max(va, vb);
        lo = lo >= 2 ? lo - 2 : 0;
        hi = std::min(hi + 2, path.size() - 1);

        for (int i = span_lo; i <= span_hi + p; ++i) {
            const Vec3& q = spline.control_points[i];
            if (!grid.occupied(q)) continue;

            std::size_t vertex = 0;
            const Vec3 target = nearest_on_polyline(path, lo, hi, q, vertex);
            Vec3 dir = target - q;
            const double norm = dir.norm();
            if (norm < 1e-9) continue;
            dir /= norm;

            const auto surface = surface_crossing(grid, q, dir, max_range);
            if (!surface) continue;
            anchors.push_back({i, *surface, dir});
        }
    }
    return anchors;
}

// --------------------------------------------------------------------------
// Cost terms
// --------------------------------------------------------------------------

CostGrad cost_smooth(const std::vector<Vec3>& q, double dt) {
    CostGrad out;
    out.gradient.assign(q.size(), Vec3::Zero());
    const std::size_t n = q.size();
    const double inv_dt2 = 1.0 / (dt * dt);
    const double inv_dt3 = inv_dt2 / dt;

    for (std::size_t i = 0; i + 2 < n; ++i) {
        const Vec3 acc = (q[i + 2] - 2.0 * q[i + 1] + q[i]) * inv_dt2;
        out.cost += acc.squaredNorm();
        const Vec3 g = 2.0 * acc * inv_dt2;
        out.gradient[i] += g;
        out.gradient[i + 1] -= 2.0 * g;
        out.gradient[i + 2] += g;
    }
    for (std::size_t i = 0; i + 3 < n; ++i) {
        const Vec3 jerk = (q[i + 3] - 3.0 * q[i + 2] + 3.0 * q[i + 1] - q[i]) * inv_dt3;
        out.cost += jerk.squaredNorm();
        const Vec3 g = 2.0 * jerk * inv_dt3;
        out.gradient[i] -= g;
        out.gradient[i + 1] += 3.0 * g;
        out.gradient[i + 2] -= 3.0 * g;
        out.gradient[i + 3] += g;
    }
    return out;
}

CostGrad cost_feasible(const std::vector<Vec3>& q, double dt, const CostWeights& w) {
    CostGrad out;
    out.gradient.assign(q.size(), Vec3::Zero());
    const std::size_t n = q.size();
    const double inv_dt = 1.0 / dt;
    const double inv_dt2 = inv_dt * inv_dt;
    const double inv_dt3 = inv_dt2 * inv_dt;

    for (std::size_t i = 0; i + 1 < n; ++i) {
        const Vec3 vel = (q[i + 1] - q[i]) * inv_dt;
        for (int ax = 0; ax < 3; ++ax) {
            double slope;
            out.cost += w.w_vel * hinge(vel[ax], w.v_max, slope);
            const double g = w.w_vel * slope * inv_dt;
            out.gradient[i][ax] -= g;
            out.gradient[i + 1][ax] += g;
        }
    }
    for (std::size_t i = 0; i + 2 < n; ++i) {
        const Vec3 acc = (q[i + 2] - 2.0 * q[i + 1] + q[i]) * inv_dt2;
        for (int ax = 0; ax < 3; ++ax) {
            double slope;
            out.cost += w.w_acc * hinge(acc[ax], w.a_max, slope);
            const double g = w.w_acc * slope * inv_dt2;
            out.gradient[i][ax] += g;
            out.gradient[i + 1][ax] -= 2.0 * g;
            out.gradient[i + 2][ax] += g;
        }
    }
    for (std::size_t i = 0; i + 3 < n; ++i) {
        const Vec3 jerk = (q[i + 3] - 3.0 * q[i + 2] + 3.0 * q[i + 1] - q[i]) * inv_dt3;
        for (int ax = 0; ax < 3; ++ax) {
            double slope;
            out.cost += w.w_jerk * hinge(jerk[ax], w.j_max, slope);
            const double g = w.w_jerk * slope * inv_dt3;
            out.gradient[i][ax] -= g;
            out.gradient[i + 1][ax] += 3.0 * g;
            out.gradient[i + 2][ax] -= 3.0 * g;
            out.gradient[i + 3][ax] += g;
        }
    }
    return out;
}

CostGrad cost_collide(const std::vector<Vec3>& q,
                      const std::vector<AnchorPair>& anchors, double safe_distance) {
    CostGrad out;
    out.gradient.assign(q.size(), Vec3::Zero());
    for (const AnchorPair& a : anchors) {
        const double d = anchor_clearance(q[a.index], a);
        if (d < safe_distance) {
            const double e = safe_distance - d;
            out.cost += e * e * e;
            out.gradient[a.index] -= 3.0 * e * e * a.direction;
        }
    }
    return out;
}

CostGrad cost_fit(const std::vector<Vec3>& q_fit, const UniformBSpline& target,
                  const CostWeights& w) {
    CostGrad out;
    out.gradient.assign(q_fit.size(), Vec3::Zero());

    UniformBSpline fit;
    fit.degree = target.degree;
    fit.knot_interval = target.knot_interval;
    fit.control_points = q_fit;

    const double T = fit.duration();
    const int K = w.fit_samples;
    const double inv_a2 = 1.0 / (w.fit_a * w.fit_a);
    const double inv_b2 = 1.0 / (w.fit_b * w.fit_b);

    for (int k = 0; k < K; ++k) {
        const double t = (k + 0.5) / K * T;
        const BasisWeights bw = basis_weights(fit, t);
        Vec3 phi_f = Vec3::Zero();
        for (std::size_t j = 0; j < bw.weights.size(); ++j) {
            phi_f += bw.weights[j] * q_fit[bw.first_index + j];
        }
        const Vec3 phi_s = spline_evaluate(target, t, 0);
        const Vec3 tangent = spline_evaluate(target, t, 1);
        const double tn = tangent.norm();
        const Vec3 delta = phi_f - phi_s;

        Vec3 dcost_ddelta;
        if (tn > 1e-9) {
            const Vec3 that = tangent / tn;
            const double axial = delta.dot(that);
            const Vec3 radial = delta - axial * that;
            out.cost += (axial * axial * inv_a2 + radial.squaredNorm() * inv_b2) / K;
            dcost_ddelta = (2.0 * axial * inv_a2 / K) * that + (2.0 * inv_b2 / K) * radial;
        } else {
            // Zero tangent: the whole displacement counts as radial.
            out.cost += delta.squaredNorm() * inv_b2 / K;
            dcost_ddelta = (2.0 * inv_b2 / K) * delta;
        }
        for (std::size_t j = 0; j < bw.weights.size(); ++j) {
            out.gradient[bw.first_index + j] += bw.weights[j] * dcost_ddelta;
        }
    }
    return out;
}

// --------------------------------------------------------------------------
// L-BFGS over interior control points
// --------------------------------------------------------------------------

namespace {

struct LbfgsSettings {
    int max_iterations = 200;
    double grad_tol = 1e-6;
    double rel_cost_tol = 1e-8;
    int history = 8;
};

struct LbfgsOutcome {
    Eigen::VectorXd x;
    double cost = 0.0;
    int iterations = 0;
    bool converged = false;
};

template <typename Objective>
LbfgsOutcome lbfgs_minimize(Eigen::VectorXd x, Objective&& objective,
                            const LbfgsSettings& settings) {
    const int dim = static_cast<int>(x.size());
    Eigen::VectorXd grad(dim), grad_new(dim);
    double f = objective(x, grad);

    std::deque<Eigen::VectorXd> s_hist, y_hist;
    std::deque<double> rho_hist;

    LbfgsOutcome out;
    out.converged = grad.norm() < settings.grad_tol;

    int iter = 0;
    while (!out.converged && iter < settings.max_iterations) {
        ++iter;

        // Two-loop recursion.
        Eigen::VectorXd dir = -grad;
        std::vector<double> alpha(s_hist.size());
        for (int i = static_cast<int>(s_hist.size()) - 1; i >= 0; --i) {
            alpha[i] = rho_hist[i] * s_hist[i].dot(dir);
            dir -= alpha[i] * y_hist[i];
        }
        if (!s_hist.empty()) {
            const double gamma =
                s_hist.back().dot(y_hist.back()) / y_hist.back().squaredNorm();
            dir *= gamma;
        }
        for (std::size_t i = 0; i < s_hist.size(); ++i) {
            const double beta = rho_hist[i] * y_hist[i].dot(dir);
            dir += (alpha[i] - beta) * s_hist[i];
        }

        double dg = dir.dot(grad);
        if (dg >= 0.0) {   // not a descent direction; restart from steepest
            dir = -grad;
            dg = -grad.squaredNorm();
            s_hist.clear();
            y_hist.clear();
            rho_hist.clear();
        }

        // Armijo backtracking.
        double step = s_hist.empty() ? std::min(1.0, 1.0 / grad.norm()) : 1.0;
        bool accepted = false;
        double f_new = f;
        Eigen::VectorXd x_new;
        for (int bt = 0; bt < 60; ++bt) {
            x_new = x + step * dir;
            f_new = objective(x_new, grad_new);
            if (f_new <= f + 1e-4 * step * dg) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) break;   // flat to machine precision along dir

        const Eigen::VectorXd s = x_new - x;
        const Eigen::VectorXd y = grad_new - grad;
        const double sy = s.dot(y);
        if (sy > 1e-12) {
            s_hist.push_back(s);
            y_hist.push_back(y);
            rho_hist.push_back(1.0 / sy);
            if (static_cast<int>(s_hist.size()) > settings.history) {
                s_hist.pop_front();
                y_hist.pop_front();
                rho_hist.pop_front();
            }
        }

        const double rel_change = std::abs(f - f_new) / std::max(1.0, std::abs(f));
        x = x_new;
        grad = grad_new;
        f = f_new;
        if (grad.norm() < settings.grad_tol || rel_change < settings.rel_cost_tol) {
            out.converged = true;
        }
    }

    out.x = x;
    out.cost = f;
    out.iterations = iter;
    return out;
}

// Shared scaffolding for optimizing the interior control points of a spline
// under a composite cost over the full control polygon.
template <typename CostFn>
OptimizeResult optimize_interior(const std::vector<Vec3>& q0, int degree,
                                 CostFn&& full_cost) {
    const int n = static_cast<int>(q0.size());
    const int interior = n - 2 * degree;
    OptimizeResult result;
    result.control_points = q0;
    if (interior <= 0) {
        std::vector<Vec3> unused_grad;
        result.cost = full_cost(q0, unused_grad);
        result.converged = true;
        return result;
    }

    std::vector<Vec3> q = q0;
    std::vector<Vec3> grad_full;
    auto objective = [&](const Eigen::VectorXd& x, Eigen::VectorXd& grad) {
        for (int i = 0; i < interior; ++i) {
            q[degree + i] = Vec3(x[3 * i], x[3 * i + 1], x[3 * i + 2]);
        }
        const double cost = full_cost(q, grad_full);
        for (int i = 0; i < interior; ++i) {
            grad[3 * i] = grad_full[degree + i].x();
            grad[3 * i + 1] = grad_full[degree + i].y();
            grad[3 * i + 2] = grad_full[degree + i].z();
        }
        return cost;
    };

    Eigen::VectorXd x0(3 * interior);
    for (int i = 0; i < interior; ++i) {
        x0.segment<3>(3 * i) = q0[degree + i];
    }

    const LbfgsOutcome outcome = lbfgs_minimize(x0, objective, LbfgsSettings{});
    for (int i = 0; i < interior; ++i) {
        result.control_points[degree + i] =
            Vec3(outcome.x[3 * i], outcome.x[3 * i + 1], outcome.x[3 * i + 2]);
    }
    result.iterations = outcome.iterations;
    result.converged = outcome.converged;
    result.cost = outcome.cost;
    return result;
}

}  // namespace

OptimizeResult optimize(const std::vector<Vec3>& q0,
                        const std::vector<AnchorPair>& anchors,
                        const CostWeights& w, double dt, int degree) {
    return optimize_interior(q0, degree, [&](const std::vector<Vec3>& q,
                                             std::vector<Vec3>& grad) {
        const CostGrad js = cost_smooth(q, dt);
        const CostGrad jc = cost_collide(q, anchors, w.safe_distance);
        const CostGrad jd = cost_feasible(q, dt, w);
        grad.assign(q.size(), Vec3::Zero());
        for (std::size_t i = 0; i < q.size(); ++i) {
            grad[i] = w.lambda_smooth * js.gradient[i] +
                      w.lambda_collision * jc.gradient[i] +
                      w.lambda_feasibility * jd.gradient[i];
        }
        return w.lambda_smooth * js.cost + w.lambda_collision * jc.cost +
               w.lambda_feasibility * jd.cost;
    });
}

// --------------------------------------------------------------------------
// Time re-assignment and refinement
// --------------------------------------------------------------------------

UniformBSpline time_reassign(const UniformBSpline& spline, const CostWeights& w) {
    auto max_abs = [](const std::vector<Vec3>& pts) {
        double m = 0.0;
        for (const Vec3& p : pts) m = std::max(m, p.cwiseAbs().maxCoeff());
        return m;
    };
    const double max_v = max_abs(derivative_points(spline, 1));
    const double max_a = max_abs(derivative_points(spline, 2));
    const double max_j = max_abs(derivative_points(spline, 3));

    // V scales as 1/dt, A as 1/dt^2, J as 1/dt^3, hence the roots.
    const double ratio = std::max({1.0, max_v / w.v_max, std::sqrt(max_a / w.a_max),
                                   std::cbrt(max_j / w.j_max)});
    if (ratio <= 1.0) return spline;

    UniformBSpline out = spline;
    out.knot_interval = spline.knot_interval * ratio * (1.0 + 1e-12);
    return out;
}

bool trajectory_in_collision(const UniformBSpline& spline, const OccupancyGrid& grid) {
    const double T = spline.duration();
    const double step = spline.knot_interval / 4.0;
    const int samples = static_cast<int>(std::ceil(T / step)) + 1;
    for (int i = 0; i < samples; ++i) {
        const double t = std::min(i * step, T);
        if (grid.occupied(spline_evaluate(spline, t))) return true;
    }
    return false;
}

PlanResult plan(const PlanRequest& request) {
    request.weights.validate();
    if (request.grid && request.grid->occupied(request.start_position)) {
        throw StartOccupied("plan: start position inside inflated occupancy");
    }

    PlanResult result;
    const CostWeights& w = request.weights;

    auto t0 = Clock::now();
    UniformBSpline traj = init_trajectory(request);
    result.init_ms = ms_since(t0);

    std::vector<AnchorPair> anchors;
    t0 = Clock::now();
    if (request.grid && trajectory_in_collision(traj, *request.grid)) {
        const std::vector<Vec3> path =
            astar_path(*request.grid, request.start_position, request.goal_position);
        // A few anchor-refresh rounds let freshly pushed control points drag
        // the curve fully clear before the time/refine steps.
        for (int round = 0; round < 4; ++round) {
            anchors = generate_anchors(traj, *request.grid, path);
            if (anchors.empty()) break;
            OptimizeResult opt =
                optimize(traj.control_points, anchors, w, traj.knot_interval, traj.degree);
            result.iterations += opt.iterations;
            result.converged = result.converged && opt.converged;
            traj.control_points = std::move(opt.control_points);
            if (!trajectory_in_collision(traj, *request.grid)) break;
        }
    }
    result.optimize_ms = ms_since(t0);

    t0 = Clock::now();
    const UniformBSpline reassigned = time_reassign(traj, w);

    // Refinement: restore the requested boundary states under the stretched
    // knot interval, then pull the interior back toward the feasible shape.
    UniformBSpline refined = reassigned;
    apply_boundary(refined.control_points, request, refined.knot_interval);
    OptimizeResult fit = optimize_interior(
        refined.control_points, refined.degree,
        [&](const std::vector<Vec3>& q, std::vector<Vec3>& grad) {
            const CostGrad js = cost_smooth(q, refined.knot_interval);
            const CostGrad jc = cost_collide(q, anchors, w.safe_distance);
            const CostGrad jf = cost_fit(q, reassigned, w);
            grad.assign(q.size(), Vec3::Zero());
            for (std::size_t i = 0; i < q.size(); ++i) {
                grad[i] = w.lambda_smooth * js.gradient[i] +
                          w.lambda_collision * jc.gradient[i] +
                          w.lambda_fitness * jf.gradient[i];
            }
            return w.lambda_smooth * js.cost + w.lambda_collision * jc.cost +
                   w.lambda_fitness * jf.cost;
        });
    result.iterations += fit.iterations;
    result.converged = result.converged && fit.converged;
    refined.control_points = std::move(fit.control_points);
    result.refine_ms = ms_since(t0);

    result.trajectory = refined;
    result.cost_smooth = cost_smooth(refined.control_points, refined.knot_interval).cost;
    result.cost_collision =
        cost_collide(refined.control_points, anchors, w.safe_distance).cost;
    result.cost_feasibility =
        cost_feasible(refined.control_points, refined.knot_interval, w).cost;
    result.cost_fitness = cost_fit(refined.control_points, reassigned, w).cost;
    return result;
}

}  // namespace autoland
