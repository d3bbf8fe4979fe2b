#include "nlfeti/assembly.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace nlfeti;

namespace {

ProblemData scalar_data()
{
    return {[](Point p) { return std::array<double, 2>{-2.0 * (1.0 + p.y), 0.0}; },
            [](Point p) { return std::array<double, 2>{p.x * p.x * p.y + p.y * p.y, 0.0}; }};
}

ProblemData vector_data()
{
    const double c = -std::acos(-1.0) / 2;
    return {[c](Point p) { return std::array<double, 2>{c * (1 + 2 * p.x), c * p.y}; },
            [](Point p) { return std::array<double, 2>{p.y * p.y, p.x * p.x * p.y}; }};
}

double max_abs(const std::vector<double>& v)
{
    double m = 0;
    for (double x : v)
        m = std::max(m, std::abs(x));
    return m;
}

// Local vector of subdomain k taken from a global I vector.
std::vector<double> restrict_to(const Mesh& m, const SubdomainSystem& s, const std::vector<double>& u)
{
    std::vector<double> out;
    for (const auto* nodes : {&s.interior_nodes, &s.interface_nodes})
        for (int v : *nodes)
            for (int c = 0; c < s.components; ++c)
                out.push_back(u[m.dof_index[v] * s.components + c]);
    return out;
}

double energy(const CsrMatrix& a, const std::vector<double>& u)
{
    std::vector<double> au(u.size());
    a.multiply(u, au);
    return dot(u, au);
}

}  // namespace

TEST_SUITE("assembly")
{
    TEST_CASE("constant kernel: rows of A and B sum to zero")
    {
        const Mesh m = build_structured_mesh(4, 0.25);
        const auto spec = KernelSpec::make(KernelFamily::constant, 0.25);
        const Assembler as(m, spec, BallStrategy::exact_linf, {});
        const auto sys = as.assemble_global(scalar_data());
        REQUIRE(sys.A.rows == 9);
        REQUIRE(sys.B.cols == static_cast<int>(m.boundary_nodes.size()));
        const double scale = max_abs(sys.A.values);
        for (int i = 0; i < sys.A.rows; ++i) {
            double s = 0;
            for (int p = sys.A.row_ptr[i]; p < sys.A.row_ptr[i + 1]; ++p)
                s += sys.A.values[p];
            for (int p = sys.B.row_ptr[i]; p < sys.B.row_ptr[i + 1]; ++p)
                s += sys.B.values[p];
            CHECK(std::abs(s) <= 1e-12 * scale);
        }
    }

    TEST_CASE("assembled matrices are symmetric with positive diagonal")
    {
        for (auto family : {KernelFamily::constant, KernelFamily::fractional, KernelFamily::peridynamic}) {
            const Mesh m = build_structured_mesh(8, 0.25);
            const auto spec = KernelSpec::make(family, 0.25);
            const Assembler as(m, spec, default_ball_strategy(family), {});
            const auto sys = as.assemble_global(family == KernelFamily::peridynamic ? vector_data() : scalar_data());
            CHECK(sys.A.is_symmetric(1e-12));
            for (double d : sys.A.diagonal())
                CHECK(d > 0);
            CHECK(sys.f.size() == m.interior_nodes.size() * spec.components());
            CHECK(sys.g.size() == m.boundary_nodes.size() * spec.components());
        }
    }

    TEST_CASE("consistency residual of the interpolant")
    {
        // Odd kernel moments vanish, so the nonlocal operator reproduces the
        // local one on the cubic solution. The constant kernel integrates the
        // interpolant exactly; the fractional kernel's residual decays with h.
        const auto data = scalar_data();
        for (auto family : {KernelFamily::constant, KernelFamily::fractional}) {
            std::vector<double> res;
            for (int n : {8, 16, 32}) {
                const Mesh m = build_structured_mesh(n, 0.25);
                const auto spec = KernelSpec::make(family, 0.25);
                const Assembler as(m, spec, default_ball_strategy(family), {});
                const auto sys = as.assemble_global(data);
                std::vector<double> u(m.interior_nodes.size());
                for (std::size_t i = 0; i < u.size(); ++i)
                    u[i] = data.g(m.vertices[m.interior_nodes[i]])[0];
                std::vector<double> r(u.size());
                sys.A.multiply(u, r);
                sys.B.multiply_add(sys.g, r, 1.0);
                axpy(-1.0, sys.f, r);
                res.push_back(max_abs(r) / max_abs(sys.f));
            }
            MESSAGE(to_string(family) << " relative residuals " << res[0] << " " << res[1] << " " << res[2]);
            if (family == KernelFamily::constant)
                CHECK(res[2] <= 1e-10);
            else
                CHECK(std::log2(res[1] / res[2]) >= 1.8);
        }
    }

    TEST_CASE("single subdomain reproduces the global system exactly")
    {
        for (auto family : {KernelFamily::constant, KernelFamily::peridynamic}) {
            const Mesh m = build_structured_mesh(8, 0.25);
            const auto spec = KernelSpec::make(family, 0.25);
            const Assembler as(m, spec, default_ball_strategy(family), {});
            const auto data = family == KernelFamily::peridynamic ? vector_data() : scalar_data();
            const auto sys = as.assemble_global(data);
            const auto sub = build_subdivision(m, 1, 1, as.interactions());
            const auto local = as.assemble_subdomain(sub, 0, data);
            CHECK(local.interface_dofs() == 0);
            CHECK(local.A.row_ptr == sys.A.row_ptr);
            CHECK(local.A.col_idx == sys.A.col_idx);
            CHECK(local.A.values == sys.A.values);
            const auto rhs = sys.rhs();
            REQUIRE(local.rhs.size() == rhs.size());
            for (std::size_t i = 0; i < rhs.size(); ++i)
                CHECK(local.rhs[i] == doctest::Approx(rhs[i]).epsilon(1e-13).scale(max_abs(rhs)));
        }
    }

    TEST_CASE("weighted subdomain energies add up to the global energy")
    {
        std::mt19937_64 rng(11);
        std::uniform_real_distribution<double> u01(-1, 1);
        for (auto family : {KernelFamily::constant, KernelFamily::fractional, KernelFamily::peridynamic})
            for (auto [k1, k2] : {std::pair{2, 1}, std::pair{2, 2}, std::pair{3, 3}}) {
                const Mesh m = build_structured_mesh(8, 0.25);
                const auto spec = KernelSpec::make(family, 0.25);
                const Assembler as(m, spec, default_ball_strategy(family), {});
                const auto data = family == KernelFamily::peridynamic ? vector_data() : scalar_data();
                const auto sys = as.assemble_global(data);
                const auto sub = build_subdivision(m, k1, k2, as.interactions());
                const auto locals = as.assemble_subdomains(sub, data);
                std::vector<double> u(sys.A.rows);
                for (auto& x : u)
                    x = u01(rng);
                const double global = energy(sys.A, u);
                double sum = 0;
                for (const auto& s : locals)
                    sum += energy(s.A, restrict_to(m, s, u));
                CHECK(sum == doctest::Approx(global).epsilon(1e-12));

                // The weighted right-hand sides against u add up likewise.
                const auto rhs = sys.rhs();
                double lsum = 0;
                for (const auto& s : locals)
                    lsum += dot(s.rhs, restrict_to(m, s, u));
                CHECK(lsum == doctest::Approx(dot(rhs, u)).epsilon(1e-11));
            }
    }

    TEST_CASE("floating blocks annihilate constants and rigid modes")
    {
        const Mesh m = build_structured_mesh(12, 2.0 / 12);
        for (auto family : {KernelFamily::constant, KernelFamily::fractional, KernelFamily::peridynamic}) {
            const auto spec = KernelSpec::make(family, 2.0 / 12);
            const Assembler as(m, spec, default_ball_strategy(family), {});
            const auto sub = build_subdivision(m, 3, 3, as.interactions());
            REQUIRE(sub.floating[4]);
            const auto data = family == KernelFamily::peridynamic ? vector_data() : scalar_data();
            const auto s = as.assemble_subdomain(sub, 4, data);
            std::vector<Point> pts;
            for (const auto* nodes : {&s.interior_nodes, &s.interface_nodes})
                for (int v : *nodes)
                    pts.push_back(m.vertices[v]);
            const double scale = max_abs(s.A.values);
            const int modes = family == KernelFamily::peridynamic ? 3 : 1;
            for (int mode = 0; mode < modes; ++mode) {
                std::vector<double> z(s.dofs());
                for (std::size_t i = 0; i < pts.size(); ++i) {
                    if (modes == 1) {
                        z[i] = 1.0;
                    } else {
                        z[2 * i] = mode == 0 ? 1.0 : mode == 1 ? 0.0 : -pts[i].y;
                        z[2 * i + 1] = mode == 0 ? 0.0 : mode == 1 ? 1.0 : pts[i].x;
                    }
                }
                std::vector<double> az(z.size());
                s.A.multiply(z, az);
                CHECK(max_abs(az) <= 1e-10 * scale);
            }
            // A non-floating block is nonsingular on constants.
            const auto corner = as.assemble_subdomain(sub, 0, data);
            std::vector<double> one(corner.dofs(), 1.0), a1(corner.dofs());
            corner.A.multiply(one, a1);
            CHECK(max_abs(a1) > 1e-6 * max_abs(corner.A.values));
        }
    }

    TEST_CASE("assembly does not depend on the worker count")
    {
        const Mesh m = build_structured_mesh(8, 0.25);
        const auto spec = KernelSpec::make(KernelFamily::fractional, 0.25);
        const Assembler a1(m, spec, BallStrategy::approxcaps, {}, 1);
        const Assembler a3(m, spec, BallStrategy::approxcaps, {}, 3);
        const auto s1 = a1.assemble_global(scalar_data());
        const auto s3 = a3.assemble_global(scalar_data());
        CHECK(s1.A.values == s3.A.values);
        CHECK(s1.B.values == s3.B.values);
        CHECK(s1.f == s3.f);
        CHECK(a1.distinct_pair_matrices() < a1.num_pairs());
    }

    TEST_CASE("global self-convergence under quadrature doubling")
    {
        const Mesh m = build_structured_mesh(8, 0.25);
        for (auto [family, tol] : {std::pair{KernelFamily::constant, 1e-8}, std::pair{KernelFamily::fractional, 1e-5}}) {
            const auto spec = KernelSpec::make(family, 0.25);
            const QuadratureOptions q;
            const Assembler a(m, spec, default_ball_strategy(family), q);
            const Assembler b(m, spec, default_ball_strategy(family), q.doubled());
            const auto sa = a.assemble_global(scalar_data());
            const auto sb = b.assemble_global(scalar_data());
            REQUIRE(sa.A.values.size() == sb.A.values.size());
            double diff = 0;
            for (std::size_t i = 0; i < sa.A.values.size(); ++i)
                diff = std::max(diff, std::abs(sa.A.values[i] - sb.A.values[i]));
            CHECK(diff <= tol * max_abs(sb.A.values));
        }
    }
}
