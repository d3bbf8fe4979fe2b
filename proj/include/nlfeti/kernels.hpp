#pragma once

#include "nlfeti/geometry.hpp"

#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace nlfeti {

class KernelError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

enum class KernelFamily { constant, fractional, peridynamic };
enum class BallStrategy { exact_linf, barycenter, nocaps, approxcaps };

std::string to_string(KernelFamily f);
std::string to_string(BallStrategy s);
KernelFamily parse_kernel_family(const std::string& s);
BallStrategy parse_ball_strategy(const std::string& s);

// Scaling so that the operator tends to -Laplace (scalar kernels) or to
// -pi/4 Laplace - pi/2 grad div (peridynamic kernel) as delta -> 0.
double scaling_constant(KernelFamily family, double delta, double s = 0.4);

struct KernelSpec {
    KernelFamily family = KernelFamily::constant;
    double delta = 0.1;
    double s = 0.4;         // fractional order, fractional family only
    double scaling = 0.0;
    BallNorm norm = BallNorm::linf;

    static KernelSpec make(KernelFamily family, double delta, double s = 0.4);
    int components() const { return family == KernelFamily::peridynamic ? 2 : 1; }
    bool singular() const { return family != KernelFamily::constant; }
};

BallStrategy default_ball_strategy(KernelFamily family);
// Throws KernelError when the strategy cannot represent the kernel's ball.
void check_compatible(const KernelSpec& spec, BallStrategy strategy);

struct Mat2 {
    double xx = 0, xy = 0, yx = 0, yy = 0;
};
using KernelValue = std::variant<double, Mat2>;

// Zero outside the interaction ball.
KernelValue evaluate_kernel(const KernelSpec& spec, Point x, Point y);

// Part of an element that lies in the (approximate) ball around a point, as a
// set of convex pieces.
struct BallApproximation {
    std::vector<Polygon> pieces;
    std::vector<Triangle> sub_simplices() const;
    double area() const;
};

BallApproximation ball_element_intersection(const Triangle& element, Point center, const KernelSpec& spec,
                                            BallStrategy strategy);

// Conservative test for whether any part of the two elements can interact:
// compares barycenter distance against delta plus a slack that covers the
// element extents. Never misses a pair whose approximate ball intersection is
// non-empty.
double interaction_slack(const Triangle& a, const Triangle& b, BallNorm norm);
bool elements_interact(const Triangle& a, const Triangle& b, double delta, BallNorm norm);

}  // namespace nlfeti
