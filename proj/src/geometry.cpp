#include "nlfeti/geometry.hpp"

namespace nlfeti {

double signed_area(const Triangle& t)
{
    return 0.5 * cross(t[1] - t[0], t[2] - t[0]);
}

Point barycenter(const Triangle& t)
{
    return {(t[0].x + t[1].x + t[2].x) / 3.0, (t[0].y + t[1].y + t[2].y) / 3.0};
}

double diameter(const Triangle& t, BallNorm norm)
{
    return std::max({distance(t[0], t[1], norm), distance(t[1], t[2], norm), distance(t[2], t[0], norm)});
}

double barycenter_radius(const Triangle& t, BallNorm norm)
{
    const Point b = barycenter(t);
    return std::max({distance(b, t[0], norm), distance(b, t[1], norm), distance(b, t[2], norm)});
}

std::array<double, 3> barycentric(const Triangle& t, Point p)
{
    const double a2 = cross(t[1] - t[0], t[2] - t[0]);
    return {cross(t[1] - p, t[2] - p) / a2, cross(t[2] - p, t[0] - p) / a2, cross(t[0] - p, t[1] - p) / a2};
}

std::array<Point, 3> barycentric_gradients(const Triangle& t)
{
    const double a2 = cross(t[1] - t[0], t[2] - t[0]);
    std::array<Point, 3> g;
    for (int i = 0; i < 3; ++i) {
        const Point& p = t[(i + 1) % 3];
        const Point& q = t[(i + 2) % 3];
        g[i] = {(p.y - q.y) / a2, (q.x - p.x) / a2};
    }
    return g;
}

double polygon_area(const Polygon& p)
{
    double s = 0.0;
    const std::size_t n = p.size();
    for (std::size_t i = 0; i < n; ++i)
        s += cross(p[i], p[(i + 1) % n]);
    return 0.5 * s;
}

Polygon clip_halfplane(const Polygon& p, Point normal, double offset)
{
    Polygon out;
    const std::size_t n = p.size();
    if (n == 0)
        return out;
    out.reserve(n + 2);
    for (std::size_t i = 0; i < n; ++i) {
        const Point a = p[i];
        const Point b = p[(i + 1) % n];
        const double da = dot(normal, a) - offset;
        const double db = dot(normal, b) - offset;
        if (da <= 0.0)
            out.push_back(a);
        if ((da < 0.0 && db > 0.0) || (da > 0.0 && db < 0.0)) {
            const double t = da / (da - db);
            out.push_back(a + t * (b - a));
        }
    }
    return out;
}

Polygon clip_box(const Polygon& p, Point lo, Point hi)
{
    Polygon q = clip_halfplane(p, {-1.0, 0.0}, -lo.x);
    q = clip_halfplane(q, {1.0, 0.0}, hi.x);
    q = clip_halfplane(q, {0.0, -1.0}, -lo.y);
    q = clip_halfplane(q, {0.0, 1.0}, hi.y);
    return q;
}

Polygon remove_duplicate_vertices(Polygon p, double tol)
{
    Polygon out;
    out.reserve(p.size());
    for (const Point& v : p) {
        if (!out.empty() && norm_linf(v - out.back()) <= tol)
            continue;
        out.push_back(v);
    }
    while (out.size() > 1 && norm_linf(out.front() - out.back()) <= tol)
        out.pop_back();
    return out;
}

std::vector<Triangle> fan_triangulate(const Polygon& p)
{
    std::vector<Triangle> out;
    for (std::size_t i = 1; i + 1 < p.size(); ++i)
        out.push_back({p[0], p[i], p[i + 1]});
    return out;
}

PolygonMoments polygon_moments(const Polygon& p)
{
    PolygonMoments m;
    const std::size_t n = p.size();
    if (n < 3)
        return m;
    double a = 0, sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const Point u = p[i];
        const Point v = p[(i + 1) % n];
        const double c = u.x * v.y - v.x * u.y;
        a += c;
        sx += (u.x + v.x) * c;
        sy += (u.y + v.y) * c;
        sxx += (u.x * u.x + u.x * v.x + v.x * v.x) * c;
        syy += (u.y * u.y + u.y * v.y + v.y * v.y) * c;
        sxy += (u.x * v.y + 2.0 * u.x * u.y + 2.0 * v.x * v.y + v.x * u.y) * c;
    }
    m.m0 = a / 2.0;
    m.m1 = {sx / 6.0, sy / 6.0};
    m.xx = sxx / 12.0;
    m.yy = syy / 12.0;
    m.xy = sxy / 24.0;
    return m;
}

}  // namespace nlfeti
