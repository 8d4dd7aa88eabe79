#include "autoland/world.hpp"

#include <algorithm>
#include <cmath>

namespace autoland {

OccupancyGrid::OccupancyGrid(const Vec3& origin, double resolution, int nx, int ny,
                             int nz, double inflation)
    : origin_(origin),
      resolution_(resolution),
      inflation_(inflation),
      nx_(nx),
      ny_(ny),
      nz_(nz) {
    if (resolution <= 0.0) throw ConfigInvalid("world.resolution: must be > 0");
    if (inflation < 0.0) throw ConfigInvalid("world.inflation: must be >= 0");
    if (nx <= 0 || ny <= 0 || nz <= 0) throw EmptyBounds("grid dimensions degenerate");
    const std::size_t n = static_cast<std::size_t>(nx) * ny * nz;
    raw_.assign(n, 0);
    inflated_.assign(n, 0);
}

CellIndex OccupancyGrid::cell_at(const Vec3& p) const {
    return {static_cast<int>(std::floor((p.x() - origin_.x()) / resolution_)),
            static_cast<int>(std::floor((p.y() - origin_.y()) / resolution_)),
            static_cast<int>(std::floor((p.z() - origin_.z()) / resolution_))};
}

Vec3 OccupancyGrid::cell_center(const CellIndex& c) const {
    return origin_ + resolution_ * Vec3(c.x + 0.5, c.y + 0.5, c.z + 0.5);
}

bool OccupancyGrid::occupied_raw(const CellIndex& c) const {
    return in_bounds(c) && raw_[flat(c)] != 0;
}

bool OccupancyGrid::occupied(const CellIndex& c) const {
    return in_bounds(c) && inflated_[flat(c)] != 0;
}

void OccupancyGrid::set_occupied(const CellIndex& c) {
    if (in_bounds(c)) raw_[flat(c)] = 1;
}

void OccupancyGrid::dilate() {
    const int r = static_cast<int>(std::ceil(inflation_ / resolution_));
    std::fill(inflated_.begin(), inflated_.end(), 0);
    for (int z = 0; z < nz_; ++z) {
        for (int y = 0; y < ny_; ++y) {
            for (int x = 0; x < nx_; ++x) {
                if (!raw_[flat({x, y, z})]) continue;
                for (int dz = -r; dz <= r; ++dz) {
                    for (int dy = -r; dy <= r; ++dy) {
                        for (int dx = -r; dx <= r; ++dx) {
                            const CellIndex n{x + dx, y + dy, z + dz};
                            if (in_bounds(n)) inflated_[flat(n)] = 1;
                        }
                    }
                }
            }
        }
    }
}

OccupancyGrid grid_from_obstacles(const std::vector<Obstacle>& obstacles,
                                  const Vec3& bounds_min, const Vec3& bounds_max,
                                  double resolution, double inflation) {
    if (!((bounds_max.array() > bounds_min.array()).all()))
        throw EmptyBounds("grid bounds degenerate");
    const Vec3 extent = bounds_max - bounds_min;
    const int nx = static_cast<int>(std::ceil(extent.x() / resolution));
    const int ny = static_cast<int>(std::ceil(extent.y() / resolution));
    const int nz = static_cast<int>(std::ceil(extent.z() / resolution));

    OccupancyGrid grid(bounds_min, resolution, nx, ny, nz, inflation);
    for (const Obstacle& box : obstacles) {
        // Only cells whose centers can fall inside the box need testing.
        const CellIndex lo = grid.cell_at(box.min);
        const CellIndex hi = grid.cell_at(box.max);
        for (int z = std::max(0, lo.z); z <= std::min(nz - 1, hi.z); ++z) {
            for (int y = std::max(0, lo.y); y <= std::min(ny - 1, hi.y); ++y) {
                for (int x = std::max(0, lo.x); x <= std::min(nx - 1, hi.x); ++x) {
                    const CellIndex c{x, y, z};
                    if (box.contains(grid.cell_center(c))) grid.set_occupied(c);
                }
            }
        }
    }
    grid.dilate();
    return grid;
}

PlatformState platform_advance(const PlatformState& platform, double dt) {
    PlatformState next = platform;
    next.position += platform.velocity * dt;
    next.position.z() = platform.surface_height;
    return next;
}

std::optional<Vec3> raycast(const OccupancyGrid& grid, const Vec3& from, const Vec3& to) {
    if (grid.occupied(from)) return from;

    const Vec3 dir = to - from;
    const double length = dir.norm();
    if (length < 1e-12) return std::nullopt;

    // Amanatides-Woo traversal, parameterized by t in [0, 1].
    CellIndex cell = grid.cell_at(from);
    const CellIndex goal = grid.cell_at(to);

    int step[3];
    double t_max[3], t_delta[3];
    const double res = grid.resolution();
    for (int i = 0; i < 3; ++i) {
        const double d = dir[i];
        const int ci = (i == 0) ? cell.x : (i == 1) ? cell.y : cell.z;
        if (d > 1e-15) {
            step[i] = 1;
            const double boundary = grid.origin()[i] + (ci + 1) * res;
            t_max[i] = (boundary - from[i]) / d;
            t_delta[i] = res / d;
        } else if (d < -1e-15) {
            step[i] = -1;
            const double boundary = grid.origin()[i] + ci * res;
            t_max[i] = (boundary - from[i]) / d;
            t_delta[i] = res / -d;
        } else {
            step[i] = 0;
            t_max[i] = std::numeric_limits<double>::infinity();
            t_delta[i] = std::numeric_limits<double>::infinity();
        }
    }

    while (!(cell.x == goal.x && cell.y == goal.y && cell.z == goal.z)) {
        int axis = 0;
        if (t_max[1] < t_max[axis]) axis = 1;
        if (t_max[2] < t_max[axis]) axis = 2;
        const double t_enter = t_max[axis];
        if (t_enter > 1.0) break;

        if (axis == 0) cell.x += step[0];
        else if (axis == 1) cell.y += step[1];
        else cell.z += step[2];
        t_max[axis] += t_delta[axis];

        if (grid.occupied(cell)) return from + std::min(t_enter, 1.0) * dir;
    }
    return std::nullopt;
}

}  // namespace autoland
