#pragma once

#include <optional>
#include <vector>

#include "autoland/geometry.hpp"

namespace autoland {

/// Axis-aligned box obstacle.
struct Obstacle {
    Vec3 min = Vec3::Zero();
    Vec3 max = Vec3::Zero();

    bool contains(const Vec3& p) const {
        return (p.array() >= min.array()).all() && (p.array() <= max.array()).all();
    }
};

struct CellIndex {
    int x = 0, y = 0, z = 0;
};

/// World-fixed voxel map of the static obstacles. Raw occupancy is decided
/// by cell-center membership; the inflated layer is a Chebyshev dilation by
/// ceil(inflation / resolution) cells. Immutable after construction.
class OccupancyGrid {
  public:
    OccupancyGrid() = default;
    OccupancyGrid(const Vec3& origin, double resolution, int nx, int ny, int nz,
                  double inflation);

    const Vec3& origin() const { return origin_; }
    double resolution() const { return resolution_; }
    double inflation() const { return inflation_; }
    int size_x() const { return nx_; }
    int size_y() const { return ny_; }
    int size_z() const { return nz_; }

    bool in_bounds(const CellIndex& c) const {
        return c.x >= 0 && c.x < nx_ && c.y >= 0 && c.y < ny_ && c.z >= 0 && c.z < nz_;
    }

    CellIndex cell_at(const Vec3& p) const;
    Vec3 cell_center(const CellIndex& c) const;

    /// Out-of-bounds cells read as free.
    bool occupied_raw(const CellIndex& c) const;
    bool occupied(const CellIndex& c) const;       // inflated layer
    bool occupied(const Vec3& p) const { return occupied(cell_at(p)); }

    void set_occupied(const CellIndex& c);
    void dilate();                                  // builds the inflated layer

  private:
    std::size_t flat(const CellIndex& c) const {
        return static_cast<std::size_t>(c.x) +
               static_cast<std::size_t>(nx_) *
                   (static_cast<std::size_t>(c.y) +
                    static_cast<std::size_t>(ny_) * static_cast<std::size_t>(c.z));
    }

    Vec3 origin_ = Vec3::Zero();
    double resolution_ = 0.15;
    double inflation_ = 0.0;
    int nx_ = 0, ny_ = 0, nz_ = 0;
    std::vector<uint8_t> raw_;
    std::vector<uint8_t> inflated_;
};

/// Moving UGV landing platform. The pad frame has its origin at the pad
/// center with axes yawed by `heading` relative to world; motion stays in
/// the z = surface_height plane.
struct PlatformState {
    Vec3 position = Vec3::Zero();     // pad center, world; z == surface_height
    double heading = 0.0;             // rad
    Vec3 velocity = Vec3::Zero();     // m/s, z component zero
    double surface_height = 0.0;      // m

    FramePose pad_pose() const {
        return {rotation_from_euler({0.0, 0.0, heading}), position};
    }
};

OccupancyGrid grid_from_obstacles(const std::vector<Obstacle>& obstacles,
                                  const Vec3& bounds_min, const Vec3& bounds_max,
                                  double resolution, double inflation);

PlatformState platform_advance(const PlatformState& platform, double dt);

/// First point where the segment enters an inflated-occupied cell, walking
/// voxels from `from` to `to`; nullopt if the segment is clear.
std::optional<Vec3> raycast(const OccupancyGrid& grid, const Vec3& from, const Vec3& to);

}  // namespace autoland
