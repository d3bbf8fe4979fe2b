#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

namespace nlfeti {

struct Point {
    double x = 0.0;
    double y = 0.0;
};

constexpr Point operator+(Point a, Point b) { return {a.x + b.x, a.y + b.y}; }
constexpr Point operator-(Point a, Point b) { return {a.x - b.x, a.y - b.y}; }
constexpr Point operator*(double s, Point a) { return {s * a.x, s * a.y}; }
constexpr bool operator==(Point a, Point b) { return a.x == b.x && a.y == b.y; }
constexpr double dot(Point a, Point b) { return a.x * b.x + a.y * b.y; }
constexpr double cross(Point a, Point b) { return a.x * b.y - a.y * b.x; }
inline double norm_l2(Point a) { return std::hypot(a.x, a.y); }
inline double norm_linf(Point a) { return std::max(std::abs(a.x), std::abs(a.y)); }

enum class BallNorm { l2, linf };

inline double distance(Point a, Point b, BallNorm norm)
{
    return norm == BallNorm::l2 ? norm_l2(a - b) : norm_linf(a - b);
}

using Triangle = std::array<Point, 3>;

// Convex polygon, counter-clockwise, no repeated closing vertex.
using Polygon = std::vector<Point>;

double signed_area(const Triangle& t);
Point barycenter(const Triangle& t);
double diameter(const Triangle& t, BallNorm norm = BallNorm::l2);
// Largest distance from the barycenter to a vertex.
double barycenter_radius(const Triangle& t, BallNorm norm);

// Barycentric coordinates of p (the linear extension outside t).
std::array<double, 3> barycentric(const Triangle& t, Point p);
// Gradients of the three barycentric functions.
std::array<Point, 3> barycentric_gradients(const Triangle& t);

double polygon_area(const Polygon& p);
// Keeps the part of p with dot(normal, y) <= offset.
Polygon clip_halfplane(const Polygon& p, Point normal, double offset);
Polygon clip_box(const Polygon& p, Point lo, Point hi);
// Drops vertices that coincide with their predecessor (relative tolerance).
Polygon remove_duplicate_vertices(Polygon p, double tol);
std::vector<Triangle> fan_triangulate(const Polygon& p);

// Moments of a polygon: integral of 1, y, and y y^T.
struct PolygonMoments {
    double m0 = 0.0;
    Point m1;
    double xx = 0.0, xy = 0.0, yy = 0.0;
};
PolygonMoments polygon_moments(const Polygon& p);

}  // namespace nlfeti
