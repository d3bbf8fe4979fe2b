#include "nlfeti/quadrature.hpp"

#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>

namespace nlfeti {

namespace {

// Returns (P_n(z), P_n'(z)).
std::pair<double, double> legendre(int n, double z)
{
    double p0 = 1.0, p1 = z;
    for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    return {p1, n * (z * p1 - p0) / (z * z - 1.0)};
}

Rule1D compute_gauss_legendre(int n)
{
    Rule1D r;
    r.x.resize(n);
    r.w.resize(n);
    for (int i = 0; i < n; ++i) {
        double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        for (int it = 0; it < 100; ++it) {
            const auto [p, dp] = legendre(n, z);
            const double dz = p / dp;
            z -= dz;
            if (std::abs(dz) < 1e-16)
                break;
        }
        const double dp = legendre(n, z).second;
        // map [-1,1] -> [0,1], nodes ascending
        r.x[n - 1 - i] = 0.5 * (z + 1.0);
        r.w[n - 1 - i] = 1.0 / ((1.0 - z * z) * dp * dp);
    }
    return r;
}

std::mutex cache_mutex;

}  // namespace

const Rule1D& gauss_legendre(int n)
{
    if (n < 1)
        throw std::invalid_argument("gauss_legendre: order must be positive");
    static std::map<int, Rule1D> cache;
    std::lock_guard lock(cache_mutex);
    auto it = cache.find(n);
    if (it == cache.end())
        it = cache.emplace(n, compute_gauss_legendre(n)).first;
    return it->second;
}

const TriangleRule& collapsed_gauss(int n)
{
    static std::map<int, TriangleRule> cache;
    const Rule1D& g = gauss_legendre(n);
    std::lock_guard lock(cache_mutex);
    auto it = cache.find(n);
    if (it != cache.end())
        return it->second;
    TriangleRule r;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const double xi = g.x[i];
            const double eta = g.x[j] * (1.0 - xi);
            r.points.push_back({xi, eta});
            r.weights.push_back(2.0 * g.w[i] * g.w[j] * (1.0 - xi));
        }
    return cache.emplace(n, std::move(r)).first->second;
}

const TriangleRule& dunavant_degree4()
{
    static const TriangleRule rule = [] {
        TriangleRule r;
        const double a1 = 0.445948490915965, b1 = 1.0 - 2.0 * a1, w1 = 0.223381589678011;
        const double a2 = 0.091576213509771, b2 = 1.0 - 2.0 * a2, w2 = 0.109951743655322;
        for (auto [a, b, w] : {std::array<double, 3>{a1, b1, w1}, std::array<double, 3>{a2, b2, w2}}) {
            r.points.push_back({a, a});
            r.points.push_back({a, b});
            r.points.push_back({b, a});
            for (int k = 0; k < 3; ++k)
                r.weights.push_back(w);
        }
        return r;
    }();
    return rule;
}

std::vector<QuadPoint> map_rule(const Triangle& t, const TriangleRule& rule)
{
    const double area = std::abs(signed_area(t));
    const Point e1 = t[1] - t[0];
    const Point e2 = t[2] - t[0];
    std::vector<QuadPoint> out(rule.size());
    for (std::size_t q = 0; q < rule.size(); ++q) {
        const auto [xi, eta] = rule.points[q];
        out[q] = {t[0] + xi * e1 + eta * e2, rule.weights[q] * area};
    }
    return out;
}

namespace {

bool on_segment(Point p, Point a, Point b, double tol)
{
    const Point d = b - a;
    const double len2 = dot(d, d);
    const double c = cross(d, p - a);
    if (c * c > tol * tol * len2)
        return false;
    const double t = dot(p - a, d) / len2;
    return t >= -tol && t <= 1.0 + tol;
}

bool touches(const Triangle& t, const std::vector<Point>& singular, bool is_edge, double tol)
{
    for (const Point& v : t) {
        if (is_edge) {
            if (on_segment(v, singular[0], singular[1], tol))
                return true;
        } else {
            for (const Point& s : singular)
                if (norm_linf(v - s) <= tol)
                    return true;
        }
    }
    return false;
}

void refine(const Triangle& t, const TriangleRule& base, int levels, const std::vector<Point>& singular,
            bool is_edge, double tol, std::vector<QuadPoint>& out)
{
    if (levels == 0 || !touches(t, singular, is_edge, tol)) {
        // The collapsed rule degenerates at the second vertex; put a singular
        // vertex there so the Duffy Jacobian absorbs a 1/r singularity.
        Triangle r = t;
        if (!is_edge)
            for (int k = 0; k < 3; ++k)
                for (const Point& sp : singular)
                    if (norm_linf(t[k] - sp) <= tol)
                        r = {t[(k + 2) % 3], t[k], t[(k + 1) % 3]};
        auto pts = map_rule(r, base);
        out.insert(out.end(), pts.begin(), pts.end());
        return;
    }
    const Point m01 = 0.5 * (t[0] + t[1]);
    const Point m12 = 0.5 * (t[1] + t[2]);
    const Point m20 = 0.5 * (t[2] + t[0]);
    const std::array<Triangle, 4> kids = {Triangle{t[0], m01, m20}, Triangle{m01, t[1], m12},
                                          Triangle{m20, m12, t[2]}, Triangle{m12, m20, m01}};
    for (const Triangle& k : kids)
        refine(k, base, levels - 1, singular, is_edge, tol, out);
}

}  // namespace

std::vector<QuadPoint> graded_rule(const Triangle& t, const TriangleRule& base, int levels,
                                   const std::vector<Point>& singular, bool singular_is_edge)
{
    std::vector<QuadPoint> out;
    const double tol = 1e-12 * diameter(t);
    if (singular.empty() || (singular_is_edge && singular.size() != 2))
        levels = 0;
    refine(t, base, levels, singular, singular_is_edge, tol, out);
    return out;
}

}  // namespace nlfeti
