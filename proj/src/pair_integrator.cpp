#include "nlfeti/pair_integrator.hpp"

#include <algorithm>
#include <cmath>

namespace nlfeti {

namespace {

constexpr int max_panels = 64;

// Rays leave x along e = (nrm + sinh(tau) tan) / cosh(tau), which hit the
// line at distance p in direction nrm at radius p cosh(tau). Integrating in
// tau instead of the angle removes the near-singularity of rays that graze a
// close edge.
template <class Sink>
void sweep_through_line(Point nrm, Point tan, double p, double sa, double sb, const Rule1D& rule, double panel,
                        bool line_is_entry, const std::vector<Point>& normals, const std::vector<double>& sdist,
                        int exit_edge, Sink& sink)
{
    const double ta = std::asinh(sa / p);
    const double tb = std::asinh(sb / p);
    if (!(tb > ta))
        return;
    const int panels = std::clamp(static_cast<int>(std::ceil((tb - ta) / panel)), 1, max_panels);
    const double width = (tb - ta) / panels;
    for (int k = 0; k < panels; ++k) {
        const double t0 = ta + k * width;
        for (std::size_t q = 0; q < rule.x.size(); ++q) {
            const double tau = t0 + width * rule.x[q];
            const double ch = std::cosh(tau);
            const double sh = std::sinh(tau);
            const Point e = (1.0 / ch) * (nrm + sh * tan);
            const double w = rule.w[q] * width / ch;
            if (line_is_entry) {
                const double r_in = p * ch;
                const double r_out = sdist[exit_edge] / dot(normals[exit_edge], e);
                if (r_out > r_in)
                    sink(e, r_in, r_out, w);
            } else {
                sink(e, 0.0, p * ch, w);
            }
        }
    }
}

template <class Sink>
void sweep(Point x, const Polygon& poly, const Rule1D& rule, double panel, Sink& sink)
{
    const std::size_t n = poly.size();
    if (n < 3)
        return;
    std::vector<Point> normals(n);
    std::vector<double> sdist(n);
    double scale = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        scale = std::max(scale, norm_linf(poly[i] - x));
    // Points on the boundary count as inside; the edges through them add nothing.
    bool inside = true;
    for (std::size_t i = 0; i < n; ++i) {
        const Point d = poly[(i + 1) % n] - poly[i];
        const double len = norm_l2(d);
        normals[i] = {d.y / len, -d.x / len};
        sdist[i] = dot(normals[i], poly[i] - x);  // > 0: x on the inner side
        if (sdist[i] < -1e-12 * scale)
            inside = false;
    }

    if (inside) {
        for (std::size_t i = 0; i < n; ++i) {
            const Point nrm = normals[i];
            const Point tan{-nrm.y, nrm.x};
            const double p = sdist[i];
            if (!(p > 1e-12 * scale))
                continue;
            sweep_through_line(nrm, tan, p, dot(tan, poly[i] - x), dot(tan, poly[(i + 1) % n] - x), rule, panel,
                               false, normals, sdist, -1, sink);
        }
        return;
    }

    Point ref{0.0, 0.0};
    for (const Point& v : poly)
        ref = ref + (1.0 / n) * (v - x);
    ref = (1.0 / norm_l2(ref)) * ref;
    std::vector<double> phi(n);
    for (std::size_t i = 0; i < n; ++i) {
        const Point d = poly[i] - x;
        phi[i] = std::atan2(cross(ref, d), dot(ref, d));
    }
    std::sort(phi.begin(), phi.end());
    auto direction = [&](double a) {
        const double c = std::cos(a), s = std::sin(a);
        return Point{c * ref.x - s * ref.y, s * ref.x + c * ref.y};
    };
    for (std::size_t k = 0; k + 1 < n; ++k) {
        const double pa = phi[k], pb = phi[k + 1];
        if (!(pb - pa > 1e-13))
            continue;
        const Point em = direction(0.5 * (pa + pb));
        int entry = -1, exit = -1;
        double lo = -1e300, hi = 1e300;
        for (std::size_t i = 0; i < n; ++i) {
            const double ne = dot(normals[i], em);
            if (ne < 0.0) {
                const double t = sdist[i] / ne;
                if (t > lo) {
                    lo = t;
                    entry = static_cast<int>(i);
                }
            } else if (ne > 0.0) {
                const double t = sdist[i] / ne;
                if (t < hi) {
                    hi = t;
                    exit = static_cast<int>(i);
                }
            }
        }
        if (entry < 0 || exit < 0 || !(hi > lo) || !(lo > 0.0))
            continue;
        const Point nrm = -1.0 * normals[entry];  // from x toward the entry line
        const Point tan{-nrm.y, nrm.x};
        const double p = -sdist[entry];
        auto sigma = [&](double a) {
            const Point e = direction(a);
            return p * dot(tan, e) / dot(nrm, e);
        };
        sweep_through_line(nrm, tan, p, sigma(pa), sigma(pb), rule, panel, true, normals, sdist, exit, sink);
    }
}

// Per outer point: S0 = sum w m0, S1 = sum w m1 e, S2 = sum w m2 e e^T, where
// m_k are radial moments of r^k times the kernel's radial profile.
struct Moments {
    double s0 = 0.0;
    Point s1;
    double xx = 0.0, xy = 0.0, yy = 0.0;

    void add(Point e, double w, double m0, double m1, double m2)
    {
        s0 += w * m0;
        s1 = s1 + (w * m1) * e;
        xx += w * m2 * e.x * e.x;
        xy += w * m2 * e.x * e.y;
        yy += w * m2 * e.y * e.y;
    }
};

}  // namespace

void polar_sweep(Point x, const Polygon& poly, const Rule1D& rule, double panel,
                 const std::function<void(Point, double, double, double)>& sink)
{
    auto s = [&](Point e, double ri, double ro, double w) { sink(e, ri, ro, w); };
    sweep(x, poly, rule, panel, s);
}

LocalMatrix assemble_pair(const Triangle& e, const Triangle& ehat, const KernelSpec& spec, BallStrategy strategy,
                          const QuadratureOptions& quad)
{
    check_compatible(spec, strategy);
    LocalMatrix lm;
    lm.comps = spec.components();
    const bool identical = e == ehat;

    std::array<int, 6> in_e{}, in_h{};
    in_e.fill(-1);
    in_h.fill(-1);
    std::vector<Point> shared;
    int nl = 3;
    for (int k = 0; k < 3; ++k)
        in_e[k] = k;
    for (int k = 0; k < 3; ++k) {
        int j = -1;
        for (int m = 0; m < 3; ++m)
            if (e[m] == ehat[k])
                j = m;
        if (j >= 0) {
            shared.push_back(ehat[k]);
        } else {
            j = nl++;
        }
        lm.ehat_local[k] = j;
        in_h[j] = k;
    }
    lm.nodes = nl;
    const auto grad = barycentric_gradients(ehat);
    std::array<Point, 6> g{};
    for (int i = 0; i < nl; ++i)
        if (in_h[i] >= 0)
            g[i] = grad[in_h[i]];

    std::vector<QuadPoint> outer;
    if (!spec.singular()) {
        outer = map_rule(e, collapsed_gauss(quad.outer_constant));
    } else if (identical) {
        outer = graded_rule(e, collapsed_gauss(quad.outer_touching), quad.grading, {e[0], e[1], e[2]}, false);
    } else if (!shared.empty()) {
        outer = graded_rule(e, collapsed_gauss(quad.outer_touching), quad.grading, shared, shared.size() == 2);
    } else {
        outer = map_rule(e, collapsed_gauss(quad.outer));
    }

    const Rule1D& angular = gauss_legendre(quad.angular);
    const int npairs = spec.family == KernelFamily::peridynamic ? 3 : 1;  // xx, xy, yy
    std::vector<double> t(static_cast<std::size_t>(npairs) * nl * nl, 0.0);
    std::array<double, 6> a{};

    for (const QuadPoint& qp : outer) {
        const Point x = qp.x;
        if (!identical) {
            const auto le = barycentric(e, x);
            const auto lh = barycentric(ehat, x);
            for (int i = 0; i < nl; ++i)
                a[i] = (in_h[i] >= 0 ? lh[in_h[i]] : 0.0) - (in_e[i] >= 0 ? le[in_e[i]] : 0.0);
        }
        const BallApproximation ball = ball_element_intersection(ehat, x, spec, strategy);
        if (ball.pieces.empty())
            continue;

        std::array<Moments, 3> mom;
        if (spec.family == KernelFamily::constant) {
            for (Polygon piece : ball.pieces) {
                for (Point& v : piece)
                    v = v - x;
                const PolygonMoments pm = polygon_moments(piece);
                mom[0].s0 += pm.m0;
                mom[0].s1 = mom[0].s1 + pm.m1;
                mom[0].xx += pm.xx;
                mom[0].xy += pm.xy;
                mom[0].yy += pm.yy;
            }
        } else if (spec.family == KernelFamily::fractional) {
            const double s = spec.s;
            const double q0 = -2.0 * s, q1 = 1.0 - 2.0 * s, q2 = 2.0 - 2.0 * s;
            auto sink = [&](Point dir, double ri, double ro, double w) {
                const double lo = std::log(ro);
                double m0 = 0.0, m1 = 0.0;
                const double m2 = (std::exp(q2 * lo) - (ri > 0.0 ? std::exp(q2 * std::log(ri)) : 0.0)) / q2;
                if (!identical) {
                    const double li = std::log(ri);
                    m0 = (std::exp(q0 * lo) - std::exp(q0 * li)) / q0;
                    m1 = std::abs(q1) > 1e-12 ? (std::exp(q1 * lo) - std::exp(q1 * li)) / q1 : lo - li;
                }
                mom[0].add(dir, w, m0, m1, m2);
            };
            for (const Polygon& piece : ball.pieces)
                sweep(x, piece, angular, quad.panel, sink);
        } else {
            auto sink = [&](Point dir, double ri, double ro, double w) {
                const double n0 = ro - ri;
                const double n1 = 0.5 * (ro * ro - ri * ri);
                const double n2 = (ro * ro * ro - ri * ri * ri) / 3.0;
                const double f[3] = {dir.x * dir.x, dir.x * dir.y, dir.y * dir.y};
                for (int c = 0; c < 3; ++c)
                    mom[c].add(dir, w * f[c], n0, n1, n2);
            };
            for (const Polygon& piece : ball.pieces)
                sweep(x, piece, angular, quad.panel, sink);
        }

        for (int c = 0; c < npairs; ++c) {
            const Moments& m = mom[c];
            double* tc = t.data() + static_cast<std::size_t>(c) * nl * nl;
            for (int i = 0; i < nl; ++i) {
                const double gs1 = dot(g[i], m.s1);
                const Point s2g{m.xx * g[i].x + m.xy * g[i].y, m.xy * g[i].x + m.yy * g[i].y};
                for (int j = 0; j < nl; ++j) {
                    double v = dot(g[j], s2g);
                    if (!identical)
                        v += a[i] * a[j] * m.s0 + a[i] * dot(g[j], m.s1) + a[j] * gs1;
                    tc[i * nl + j] += qp.w * v;
                }
            }
        }
    }

    const int dim = nl * lm.comps;
    lm.values.assign(static_cast<std::size_t>(dim) * dim, 0.0);
    const double c = spec.scaling;
    if (lm.comps == 1) {
        for (int k = 0; k < nl * nl; ++k)
            lm.values[k] = c * t[k];
    } else {
        const int idx[2][2] = {{0, 1}, {1, 2}};
        for (int i = 0; i < nl; ++i)
            for (int j = 0; j < nl; ++j)
                for (int ci = 0; ci < 2; ++ci)
                    for (int cj = 0; cj < 2; ++cj)
                        lm.values[static_cast<std::size_t>(2 * i + ci) * dim + 2 * j + cj] =
                            c * t[static_cast<std::size_t>(idx[ci][cj]) * nl * nl + i * nl + j];
    }
    return lm;
}

}  // namespace nlfeti
