#include "nlfeti/interaction.hpp"
#include "nlfeti/kernels.hpp"
#include "nlfeti/mesh.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace nlfeti;

namespace {

double monte_carlo_area(const Triangle& t, Point c, double r, int samples)
{
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0, 1);
    int hits = 0;
    for (int i = 0; i < samples; ++i) {
        double a = u(rng), b = u(rng);
        if (a + b > 1) {
            a = 1 - a;
            b = 1 - b;
        }
        const Point p = t[0] + a * (t[1] - t[0]) + b * (t[2] - t[0]);
        hits += norm_l2(p - c) <= r;
    }
    return signed_area(t) * hits / samples;
}

double exact_disc_area(const Triangle& t, Point c, double r)
{
    // Fine polar integration for a triangle with vertex c and a right angle.
    const int m = 200000;
    double s = 0;
    const double th0 = 0, th1 = std::numbers::pi / 2;
    for (int i = 0; i < m; ++i) {
        const double th = th0 + (i + 0.5) * (th1 - th0) / m;
        const double edge = 1.0 / (std::cos(th) + std::sin(th));
        const double ro = std::min(r, edge);
        s += 0.5 * ro * ro * (th1 - th0) / m;
    }
    (void)t;
    (void)c;
    return s;
}

}  // namespace

TEST_SUITE("kernels")
{
    TEST_CASE("scaling constants")
    {
        CHECK(scaling_constant(KernelFamily::constant, 0.008) == doctest::Approx(1.8310546875e8));
        CHECK(scaling_constant(KernelFamily::fractional, 0.008, 0.4) == doctest::Approx(125.4).epsilon(1e-3));
        CHECK(scaling_constant(KernelFamily::peridynamic, 0.008) == doctest::Approx(5.859375e6));
    }

    TEST_CASE("kernel evaluation")
    {
        const auto c = KernelSpec::make(KernelFamily::constant, 1.0);
        CHECK(std::get<double>(evaluate_kernel(c, {0, 0}, {1, 1})) == doctest::Approx(0.75));
        CHECK(std::get<double>(evaluate_kernel(c, {0, 0}, {1.01, 0})) == 0.0);
        const auto f = KernelSpec::make(KernelFamily::fractional, 1.0, 0.4);
        CHECK(std::get<double>(evaluate_kernel(f, {0, 0}, {0.5, 0})) ==
              doctest::Approx(1.2 / std::numbers::pi * std::pow(0.5, -2.8)));
        CHECK(std::get<double>(evaluate_kernel(f, {0, 0}, {0.8, 0.8})) == 0.0);
        const auto p = KernelSpec::make(KernelFamily::peridynamic, 1.0);
        const Mat2 m = std::get<Mat2>(evaluate_kernel(p, {0, 0}, {1, 0}));
        CHECK(m.xx == doctest::Approx(3.0));
        CHECK(m.xy == 0.0);
        CHECK(m.yy == 0.0);
    }

    TEST_CASE("strategy compatibility")
    {
        const auto c = KernelSpec::make(KernelFamily::constant, 0.1);
        const auto f = KernelSpec::make(KernelFamily::fractional, 0.1);
        CHECK_NOTHROW(check_compatible(c, BallStrategy::exact_linf));
        CHECK_THROWS_AS(check_compatible(c, BallStrategy::approxcaps), KernelError);
        CHECK_THROWS_AS(check_compatible(f, BallStrategy::exact_linf), KernelError);
        CHECK(default_ball_strategy(KernelFamily::peridynamic) == BallStrategy::approxcaps);
        CHECK_THROWS_AS(parse_kernel_family("gaussian"), KernelError);
    }

    TEST_CASE("ball intersections, trivial cases")
    {
        const Triangle t{{{0, 0}, {0.1, 0}, {0, 0.1}}};
        for (auto fam : {KernelFamily::constant, KernelFamily::fractional})
            for (auto st : {BallStrategy::exact_linf, BallStrategy::nocaps, BallStrategy::approxcaps,
                            BallStrategy::barycenter}) {
                const auto spec = KernelSpec::make(fam, 1.0);
                try {
                    check_compatible(spec, st);
                } catch (const KernelError&) {
                    continue;
                }
                CHECK(ball_element_intersection(t, {0.02, 0.02}, spec, st).area() == doctest::Approx(0.005));
                CHECK(ball_element_intersection(t, {5, 5}, spec, st).pieces.empty());
            }
    }

    TEST_CASE("cap approximations against Monte Carlo")
    {
        const Triangle t{{{0, 0}, {1, 0}, {0, 1}}};
        const auto spec = KernelSpec::make(KernelFamily::fractional, 0.9);
        const double nocaps = ball_element_intersection(t, {0, 0}, spec, BallStrategy::nocaps).area();
        const double caps = ball_element_intersection(t, {0, 0}, spec, BallStrategy::approxcaps).area();
        const double mc = monte_carlo_area(t, {0, 0}, 0.9, 10'000'000);
        const double exact = exact_disc_area(t, {0, 0}, 0.9);
        CHECK(mc == doctest::Approx(exact).epsilon(2e-3));
        CHECK(caps >= nocaps);
        CHECK(caps <= exact + 1e-12);
        CHECK(nocaps <= exact + 1e-12);
        CHECK(caps > 0.95 * exact);
    }

    TEST_CASE("cap error decays with element size")
    {
        // Element edge cut by a circle of radius 0.5: the cap deficit scales
        // like the cube of the chord length.
        const auto spec = KernelSpec::make(KernelFamily::fractional, 0.5);
        double prev = 0;
        for (double s : {0.2, 0.1, 0.05}) {
            const Triangle t{{{0.5 - s, -s}, {0.5 + s, -s}, {0.5 - s, s}}};
            const double caps = ball_element_intersection(t, {0, 0}, spec, BallStrategy::approxcaps).area();
            const double mc = monte_carlo_area(t, {0, 0}, 0.5, 4'000'000);
            const double nocaps = ball_element_intersection(t, {0, 0}, spec, BallStrategy::nocaps).area();
            CHECK(std::abs(caps - mc) <= std::abs(nocaps - mc) + 3 * s * s * 1e-3);
            if (prev > 0)
                CHECK(std::abs(nocaps - caps) < prev);
            prev = std::abs(nocaps - caps);
        }
    }

    TEST_CASE("interaction predicate")
    {
        const Triangle a{{{0, 0}, {0.1, 0}, {0, 0.1}}};
        CHECK(elements_interact(a, a, 0.01, BallNorm::l2));
        std::mt19937_64 rng(3);
        std::uniform_real_distribution<double> u(-1, 1);
        for (int trial = 0; trial < 10000; ++trial) {
            Triangle p, q;
            const Point cp{u(rng), u(rng)}, cq{u(rng), u(rng)};
            for (int k = 0; k < 3; ++k) {
                p[k] = cp + 0.1 * Point{u(rng), u(rng)};
                q[k] = cq + 0.1 * Point{u(rng), u(rng)};
            }
            const double delta = 0.3 * (u(rng) + 1);
            for (auto norm : {BallNorm::l2, BallNorm::linf}) {
                double dmin = 1e9;
                for (const Point& x : p)
                    for (const Point& y : q)
                        dmin = std::min(dmin, distance(x, y, norm));
                if (dmin <= delta)
                    CHECK(elements_interact(p, q, delta, norm));
            }
        }
    }

    TEST_CASE("interaction index is symmetric")
    {
        const Mesh m = build_structured_mesh(8, 0.25);
        const InteractionIndex idx(m, 0.25, BallNorm::l2);
        for (int e = 0; e < m.num_elements(); ++e) {
            const auto p = idx.partners(e);
            CHECK(std::binary_search(p.begin(), p.end(), e));
            for (int f : p) {
                const auto q = idx.partners(f);
                CHECK(std::binary_search(q.begin(), q.end(), e));
            }
        }
    }
}
