#pragma once

#include <vector>

#include "autoland/geometry.hpp"

namespace autoland {

/// Uniform B-spline: degree, control points, one knot interval. Knots are
/// u_j = (j - degree) * knot_interval so the curve domain is
/// [0, (N - degree) * knot_interval].
struct UniformBSpline {
    int degree = 3;
    std::vector<Vec3> control_points;
    double knot_interval = 0.1;   // s

    double duration() const {
        return (static_cast<double>(control_points.size()) - degree) * knot_interval;
    }

    void validate() const;
};

/// Basis weights of the degree+1 active control points at parameter t.
/// first_index is the index of the first active control point; weights are
/// nonnegative and sum to one (the convex-hull property).
struct BasisWeights {
    int first_index = 0;
    std::vector<double> weights;
};

/// De Boor evaluation of the curve (order 0) or its derivatives (order k
/// evaluated through the differenced control points). Throws OutOfDomain
/// for t outside [0, duration] beyond a 1e-9 slack.
Vec3 spline_evaluate(const UniformBSpline& spline, double t, int order = 0);

/// Control points of the order-th derivative spline; order 1 gives
/// V_i = (Q_{i+1} - Q_i) / knot_interval, etc.
std::vector<Vec3> derivative_points(const UniformBSpline& spline, int order);

UniformBSpline derivative_spline(const UniformBSpline& spline);

BasisWeights basis_weights(const UniformBSpline& spline, double t);

}  // namespace autoland
