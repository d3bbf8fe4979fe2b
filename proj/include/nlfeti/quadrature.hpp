#pragma once

#include "nlfeti/geometry.hpp"

#include <vector>

namespace nlfeti {

// Gauss-Legendre rule on [0, 1].
struct Rule1D {
    std::vector<double> x;
    std::vector<double> w;
};
const Rule1D& gauss_legendre(int n);

// Rule on the reference triangle (0,0),(1,0),(0,1) in barycentric-style
// coordinates (xi, eta); weights sum to one, so physical weights are w * |T|.
struct TriangleRule {
    std::vector<std::array<double, 2>> points;
    std::vector<double> weights;
    std::size_t size() const { return weights.size(); }
};

// Collapsed (Duffy) tensor Gauss rule with n*n points, exact to degree 2n-2.
const TriangleRule& collapsed_gauss(int n);
// Symmetric 6-point rule exact for polynomials of degree 4.
const TriangleRule& dunavant_degree4();

struct QuadPoint {
    Point x;
    double w = 0.0;  // physical weight
};

std::vector<QuadPoint> map_rule(const Triangle& t, const TriangleRule& rule);

// Composite rule: the triangle is split into four children by edge midpoints
// `levels` times, refining only children with a vertex on `singular` (points
// or the segment between two points when singular_is_edge is set).
std::vector<QuadPoint> graded_rule(const Triangle& t, const TriangleRule& base, int levels,
                                   const std::vector<Point>& singular, bool singular_is_edge);

}  // namespace nlfeti
