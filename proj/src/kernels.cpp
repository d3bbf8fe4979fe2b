#include "nlfeti/kernels.hpp"

#include <cmath>
#include <numbers>

namespace nlfeti {

std::string to_string(KernelFamily f)
{
    switch (f) {
    case KernelFamily::constant: return "constant";
    case KernelFamily::fractional: return "fractional";
    case KernelFamily::peridynamic: return "peridynamic";
    }
    return "?";
}

std::string to_string(BallStrategy s)
{
    switch (s) {
    case BallStrategy::exact_linf: return "exact_linf";
    case BallStrategy::barycenter: return "barycenter";
    case BallStrategy::nocaps: return "nocaps";
    case BallStrategy::approxcaps: return "approxcaps";
    }
    return "?";
}

KernelFamily parse_kernel_family(const std::string& s)
{
    if (s == "constant")
        return KernelFamily::constant;
    if (s == "fractional")
        return KernelFamily::fractional;
    if (s == "peridynamic")
        return KernelFamily::peridynamic;
    throw KernelError("unknown kernel family '" + s + "'");
}

BallStrategy parse_ball_strategy(const std::string& s)
{
    if (s == "exact_linf")
        return BallStrategy::exact_linf;
    if (s == "barycenter")
        return BallStrategy::barycenter;
    if (s == "nocaps")
        return BallStrategy::nocaps;
    if (s == "approxcaps")
        return BallStrategy::approxcaps;
    throw KernelError("unknown ball strategy '" + s + "'");
}

double scaling_constant(KernelFamily family, double delta, double s)
{
    if (!(delta > 0.0))
        throw KernelError("kernel: delta must be positive");
    switch (family) {
    case KernelFamily::constant:
        return 3.0 / (4.0 * std::pow(delta, 4));
    case KernelFamily::fractional:
        if (!(s > 0.0 && s < 1.0))
            throw KernelError("kernel: fractional order s must lie in (0, 1)");
        return (2.0 - 2.0 * s) / (std::numbers::pi * std::pow(delta, 2.0 - 2.0 * s));
    case KernelFamily::peridynamic:
        return 3.0 / std::pow(delta, 3);
    }
    return 0.0;
}

KernelSpec KernelSpec::make(KernelFamily family, double delta, double s)
{
    KernelSpec k;
    k.family = family;
    k.delta = delta;
    k.s = s;
    k.scaling = scaling_constant(family, delta, s);
    k.norm = family == KernelFamily::constant ? BallNorm::linf : BallNorm::l2;
    return k;
}

BallStrategy default_ball_strategy(KernelFamily family)
{
    return family == KernelFamily::constant ? BallStrategy::exact_linf : BallStrategy::approxcaps;
}

void check_compatible(const KernelSpec& spec, BallStrategy strategy)
{
    if (spec.norm == BallNorm::linf && (strategy == BallStrategy::nocaps || strategy == BallStrategy::approxcaps))
        throw KernelError("ball strategy " + to_string(strategy) + " approximates a Euclidean ball; kernel " +
                          to_string(spec.family) + " uses the l-infinity ball");
    if (spec.norm == BallNorm::l2 && strategy == BallStrategy::exact_linf)
        throw KernelError("ball strategy exact_linf cannot represent the Euclidean ball of kernel " +
                          to_string(spec.family));
}

KernelValue evaluate_kernel(const KernelSpec& spec, Point x, Point y)
{
    const Point d = y - x;
    const double dist = distance(x, y, spec.norm);
    switch (spec.family) {
    case KernelFamily::constant:
        return dist <= spec.delta ? spec.scaling : 0.0;
    case KernelFamily::fractional:
        if (dist > spec.delta || dist == 0.0)
            return 0.0;
        return spec.scaling * std::pow(dist, -2.0 - 2.0 * spec.s);
    case KernelFamily::peridynamic: {
        if (dist > spec.delta || dist == 0.0)
            return Mat2{};
        const double c = spec.scaling / (dist * dist * dist);
        return Mat2{c * d.x * d.x, c * d.x * d.y, c * d.y * d.x, c * d.y * d.y};
    }
    }
    return 0.0;
}

std::vector<Triangle> BallApproximation::sub_simplices() const
{
    std::vector<Triangle> out;
    for (const Polygon& p : pieces) {
        auto t = fan_triangulate(p);
        out.insert(out.end(), t.begin(), t.end());
    }
    return out;
}

double BallApproximation::area() const
{
    double a = 0.0;
    for (const Polygon& p : pieces)
        a += polygon_area(p);
    return a;
}

namespace {

enum class Mark { vertex, entry, exit };

struct Emitted {
    Point p;
    Mark mark;
};

int cap_grid_size(const Triangle& t, double delta)
{
    return std::max(16, static_cast<int>(std::ceil(8.0 * std::numbers::pi * delta / diameter(t))));
}

Point on_circle(Point c, double r, double angle) { return {c.x + r * std::cos(angle), c.y + r * std::sin(angle)}; }

BallApproximation euclidean_pieces(const Triangle& t, Point x, double delta, bool caps)
{
    BallApproximation out;
    const double r2 = delta * delta;
    std::array<bool, 3> inside{};
    int n_inside = 0;
    for (int k = 0; k < 3; ++k) {
        const Point d = t[k] - x;
        inside[k] = dot(d, d) <= r2;
        n_inside += inside[k];
    }
    if (n_inside == 3) {
        out.pieces.push_back({t[0], t[1], t[2]});
        return out;
    }

    std::vector<Emitted> seq;
    for (int k = 0; k < 3; ++k) {
        const Point a = t[k];
        const Point d = t[(k + 1) % 3] - a;
        if (inside[k])
            seq.push_back({a, Mark::vertex});
        const double qa = dot(d, d);
        const double qb = dot(d, a - x);
        const double qc = dot(a - x, a - x) - r2;
        const double disc = qb * qb - qa * qc;
        if (disc <= 1e-14 * qa * r2)
            continue;
        const double sq = std::sqrt(disc);
        for (double tt : {(-qb - sq) / qa, (-qb + sq) / qa}) {
            if (tt <= 1e-12 || tt >= 1.0 - 1e-12)
                continue;
            const Point p = a + tt * d;
            const bool leaving = dot(d, p - x) > 0.0;
            seq.push_back({p, leaving ? Mark::exit : Mark::entry});
        }
    }

    if (seq.empty()) {
        // Either disjoint, or the whole disc lies inside the element.
        const auto lam = barycentric(t, x);
        if (lam[0] > 0 && lam[1] > 0 && lam[2] > 0) {
            Polygon disc;
            const int m = caps ? cap_grid_size(t, delta) : 32;
            for (int k = 0; k < m; ++k)
                disc.push_back(on_circle(x, delta, 2.0 * std::numbers::pi * k / m));
            out.pieces.push_back(std::move(disc));
        }
        return out;
    }

    // Walking the boundary counter-clockwise, an exit is followed by the arc
    // back to the next entry. With caps the arc is replaced by the polyline
    // through the points of an angular grid around x whose chords are half
    // the element diameter; grid points appear at the arc ends as x moves, so
    // the approximation is continuous in x, convex, and inside the disc.
    const double cap_angle = 2.0 * std::numbers::pi / cap_grid_size(t, delta);
    Polygon main;
    const std::size_t m = seq.size();
    for (std::size_t i = 0; i < m; ++i) {
        main.push_back(seq[i].p);
        if (!caps || seq[i].mark != Mark::exit)
            continue;
        const Emitted& next = seq[(i + 1) % m];
        if (next.mark != Mark::entry)
            continue;
        const Point u = seq[i].p - x;
        const Point v = next.p - x;
        double alpha = std::atan2(cross(u, v), dot(u, v));
        if (alpha <= 0.0)
            alpha += 2.0 * std::numbers::pi;
        const double start = std::atan2(u.y, u.x);
        const double end = start + alpha;
        for (double k = std::floor(start / cap_angle) + 1; k * cap_angle < end - 1e-9; k += 1)
            if (k * cap_angle > start + 1e-9)
                main.push_back(on_circle(x, delta, k * cap_angle));
    }
    main = remove_duplicate_vertices(std::move(main), 1e-14 * delta);
    if (main.size() >= 3 && polygon_area(main) > 1e-15 * r2)
        out.pieces.push_back(std::move(main));
    return out;
}

}  // namespace

BallApproximation ball_element_intersection(const Triangle& element, Point center, const KernelSpec& spec,
                                            BallStrategy strategy)
{
    check_compatible(spec, strategy);
    const double delta = spec.delta;
    switch (strategy) {
    case BallStrategy::barycenter: {
        BallApproximation out;
        if (distance(barycenter(element), center, spec.norm) <= delta)
            out.pieces.push_back({element[0], element[1], element[2]});
        return out;
    }
    case BallStrategy::exact_linf: {
        BallApproximation out;
        Polygon p = clip_box({element[0], element[1], element[2]}, {center.x - delta, center.y - delta},
                             {center.x + delta, center.y + delta});
        p = remove_duplicate_vertices(std::move(p), 1e-14 * delta);
        if (p.size() >= 3 && polygon_area(p) > 1e-15 * delta * delta)
            out.pieces.push_back(std::move(p));
        return out;
    }
    case BallStrategy::nocaps:
        return euclidean_pieces(element, center, delta, false);
    case BallStrategy::approxcaps:
        return euclidean_pieces(element, center, delta, true);
    }
    return {};
}

double interaction_slack(const Triangle& a, const Triangle& b, BallNorm norm)
{
    const double h_pair = std::max(diameter(a, norm), diameter(b, norm));
    return std::max(h_pair, barycenter_radius(a, norm) + barycenter_radius(b, norm));
}

bool elements_interact(const Triangle& a, const Triangle& b, double delta, BallNorm norm)
{
    const double d = distance(barycenter(a), barycenter(b), norm);
    return d <= delta + interaction_slack(a, b, norm) + 1e-12 * delta;
}

}  // namespace nlfeti
