#pragma once

#include "nlfeti/kernels.hpp"
#include "nlfeti/quadrature.hpp"

#include <array>
#include <functional>
#include <vector>

namespace nlfeti {

struct QuadratureOptions {
    int outer_constant = 3;  // collapsed Gauss points per direction, constant kernel
    int outer = 6;           // same, singular kernels
    int outer_touching = 12; // same, singular kernels on identical or touching pairs
    int angular = 12;        // Gauss points per angular panel
    int grading = 3;         // refinement levels toward shared vertices/edges
    double panel = 1.0;      // maximal width of an angular panel in the graded variable

    QuadratureOptions doubled() const
    {
        QuadratureOptions q = *this;
        q.outer_constant *= 2;
        q.outer *= 2;
        q.outer_touching *= 2;
        q.angular *= 2;
        return q;
    }
};

// Element matrix of one ordered pair (E outer, E-hat inner) of the bilinear
// form; local nodes are the vertices of E followed by the vertices of E-hat
// not shared with E. Vector kernels interleave components per node.
struct LocalMatrix {
    int nodes = 0;
    int comps = 1;
    std::array<int, 3> ehat_local{};
    std::vector<double> values;

    int dim() const { return nodes * comps; }
    double operator()(int i, int j) const { return values[static_cast<std::size_t>(i) * dim() + j]; }
};

// Shared vertices are detected by exact coordinate equality; E == E-hat when
// all three vertices coincide in order.
LocalMatrix assemble_pair(const Triangle& e, const Triangle& ehat, const KernelSpec& spec, BallStrategy strategy,
                          const QuadratureOptions& quad);

// Sweeps a convex polygon in polar coordinates around x. For each angular
// node calls sink(direction, r_in, r_out, weight); the radial variable is left
// to the caller. Angles are graded through the nearest edge.
void polar_sweep(Point x, const Polygon& poly, const Rule1D& rule, double panel,
                 const std::function<void(Point, double, double, double)>& sink);

}  // namespace nlfeti
