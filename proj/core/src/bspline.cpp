#include "autoland/bspline.hpp"

#include <algorithm>
#include <cmath>

namespace autoland {

namespace {

constexpr double kDomainSlack = 1e-9;

// Knot value u_j = (j - degree) * dt.
double knot(const UniformBSpline& s, int j) {
    return (j - s.degree) * s.knot_interval;
}

// Span k with u_k <= t < u_{k+1}, clamped to valid spans [degree, N-1].
int find_span(const UniformBSpline& s, double t) {
    const int n = static_cast<int>(s.control_points.size());
    int k = s.degree + static_cast<int>(std::floor(t / s.knot_interval));
    return std::clamp(k, s.degree, n - 1);
}

double clamp_domain(const UniformBSpline& s, double t) {
    const double T = s.duration();
    if (t < -kDomainSlack || t > T + kDomainSlack) {
        throw OutOfDomain("spline parameter outside [0, duration]");
    }
    return std::clamp(t, 0.0, T);
}

Vec3 de_boor(const UniformBSpline& s, double t) {
    const int p = s.degree;
    const int k = find_span(s, t);

    std::vector<Vec3> d(p + 1);
    for (int j = 0; j <= p; ++j) d[j] = s.control_points[k - p + j];

    for (int r = 1; r <= p; ++r) {
        for (int j = p; j >= r; --j) {
            const int i = k - p + j;
            const double lo = knot(s, i);
            const double hi = knot(s, i + p - r + 1);
            const double alpha = (t - lo) / (hi - lo);
            d[j] = (1.0 - alpha) * d[j - 1] + alpha * d[j];
        }
    }
    return d[p];
}

}  // namespace

void UniformBSpline::validate() const {
    if (degree < 1) throw ConfigInvalid("spline.degree: must be >= 1");
    if (static_cast<int>(control_points.size()) < degree + 1)
        throw ConfigInvalid("spline.control_points: need at least degree + 1");
    if (!(knot_interval > 0.0)) throw ConfigInvalid("spline.knot_interval: must be > 0");
}

std::vector<Vec3> derivative_points(const UniformBSpline& spline, int order) {
    std::vector<Vec3> pts = spline.control_points;
    for (int k = 0; k < order; ++k) {
        std::vector<Vec3> next(pts.size() - 1);
        for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
            next[i] = (pts[i + 1] - pts[i]) / spline.knot_interval;
        }
        pts = std::move(next);
    }
    return pts;
}

UniformBSpline derivative_spline(const UniformBSpline& spline) {
    UniformBSpline d;
    d.degree = spline.degree - 1;
    d.knot_interval = spline.knot_interval;
    d.control_points = derivative_points(spline, 1);
    return d;
}

Vec3 spline_evaluate(const UniformBSpline& spline, double t, int order) {
    spline.validate();
    if (order < 0 || order > spline.degree) {
        if (order > spline.degree) return Vec3::Zero();
        throw OutOfDomain("negative derivative order");
    }
    const double tc = clamp_domain(spline, t);

    UniformBSpline s = spline;
    for (int k = 0; k < order; ++k) s = derivative_spline(s);
    if (s.degree == 0) {
        // Piecewise-constant: pick the segment containing tc.
        const int n = static_cast<int>(s.control_points.size());
        int i = std::clamp(static_cast<int>(std::floor(tc / s.knot_interval)), 0, n - 1);
        return s.control_points[i];
    }
    return de_boor(s, tc);
}

BasisWeights basis_weights(const UniformBSpline& spline, double t) {
    spline.validate();
    const double tc = clamp_domain(spline, t);
    const int p = spline.degree;
    const int k = find_span(spline, tc);

    // Cox-de-Boor triangular scheme for the p+1 nonzero basis functions.
    std::vector<double> left(p + 1), right(p + 1), w(p + 1, 0.0);
    w[0] = 1.0;
    for (int j = 1; j <= p; ++j) {
        left[j] = tc - knot(spline, k + 1 - j);
        right[j] = knot(spline, k + j) - tc;
        double saved = 0.0;
        for (int r = 0; r < j; ++r) {
            const double denom = right[r + 1] + left[j - r];
            const double tmp = w[r] / denom;
            w[r] = saved + right[r + 1] * tmp;
            saved = left[j - r] * tmp;
        }
        w[j] = saved;
    }

    BasisWeights out;
    out.first_index = k - p;
    out.weights = std::move(w);
    return out;
}

}  // namespace autoland
