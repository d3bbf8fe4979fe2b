#include "nlfeti/feti.hpp"
#include "nlfeti/harness.hpp"

#include <doctest.h>

#include <cmath>
#include <memory>
#include <random>

using namespace nlfeti;

namespace {

struct Fixture {
    Mesh mesh;
    KernelSpec spec;
    ManufacturedProblem problem;
    Assembler assembler;
    Subdivision sub;
    AssembledSystem global;
    FetiSolver feti;

    Fixture(KernelFamily family, int n, int ratio, int k1, int k2, FetiOptions opts = {})
        : mesh(build_structured_mesh(n, static_cast<double>(ratio) / n)),
          spec(KernelSpec::make(family, static_cast<double>(ratio) / n)),
          problem(manufactured_problem(family)),
          assembler(mesh, spec, default_ball_strategy(family), {}),
          sub(build_subdivision(mesh, k1, k2, assembler.interactions())),
          global(assembler.assemble_global(problem.data)),
          feti(mesh, sub, assembler.assemble_subdomains(sub, problem.data), opts)
    {
    }
};

std::vector<double> random_vector(std::size_t n, std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> u(-1, 1);
    std::vector<double> v(n);
    for (auto& x : v)
        x = u(rng);
    return v;
}

double max_abs(std::span<const double> v)
{
    double m = 0;
    for (double x : v)
        m = std::max(m, std::abs(x));
    return m;
}

// Interface vector holding the copies of a single-valued global I vector.
std::vector<double> duplicate(const Mesh& m, const Subdivision& sub, int comps, const std::vector<double>& u)
{
    std::vector<double> out;
    for (int k = 0; k < sub.count(); ++k)
        for (int v : sub.interface_nodes[k])
            for (int c = 0; c < comps; ++c)
                out.push_back(u[m.dof_index[v] * comps + c]);
    return out;
}

// Rigid modes (or the constant) on the interface nodes of subdomain k.
std::vector<std::vector<double>> null_modes(const Mesh& m, const Subdivision& sub, int k, int comps)
{
    std::vector<std::vector<double>> modes(comps == 1 ? 1 : 3);
    for (int v : sub.interface_nodes[k]) {
        const Point p = m.vertices[v];
        if (comps == 1) {
            modes[0].push_back(1.0);
            continue;
        }
        const double vals[3][2] = {{1, 0}, {0, 1}, {-p.y, p.x}};
        for (int mode = 0; mode < 3; ++mode)
            for (int c = 0; c < 2; ++c)
                modes[mode].push_back(vals[mode][c]);
    }
    return modes;
}

std::vector<double> coarse_solve(const Fixture& f, std::span<const double> rhs)
{
    const int nz = f.feti.coarse_size();
    const int nl = f.feti.constraints().num_rows();
    const auto& g = f.feti.g_matrix();
    std::vector<double> gtg(static_cast<std::size_t>(nz) * nz, 0.0);
    for (int i = 0; i < nz; ++i)
        for (int j = 0; j < nz; ++j)
            for (int r = 0; r < nl; ++r)
                gtg[i * nz + j] += g[static_cast<std::size_t>(i) * nl + r] * g[static_cast<std::size_t>(j) * nl + r];
    return dense_spd_solve(gtg, nz, std::vector<double>(rhs.begin(), rhs.end()));
}

}  // namespace

TEST_SUITE("feti")
{
    TEST_CASE("constraint count and structure")
    {
        for (auto family : {KernelFamily::constant, KernelFamily::peridynamic}) {
            const Fixture f(family, 8, 2, 2, 2);
            const auto& cs = f.feti.constraints();
            const int comps = f.spec.components();
            int expected = 0;
            for (int v : f.mesh.interior_nodes)
                expected += (f.sub.zeta_nodes(v, v) - 1) * comps;
            CHECK(cs.num_rows() == expected);

            const CsrMatrix b = cs.b_matrix();
            CHECK(b.rows == expected);
            CHECK(b.cols == cs.gamma_size());
            for (int r = 0; r < b.rows; ++r) {
                REQUIRE(b.row_ptr[r + 1] - b.row_ptr[r] == 2);
                double s = 0, p = 1;
                for (int q = b.row_ptr[r]; q < b.row_ptr[r + 1]; ++q) {
                    s += b.values[q];
                    p *= b.values[q];
                }
                CHECK(s == 0.0);
                CHECK(p == -1.0);
            }

            // B annihilates duplicated single-valued vectors.
            std::mt19937_64 rng(3);
            const auto u = random_vector(f.global.A.rows, rng);
            const auto gamma = duplicate(f.mesh, f.sub, comps, u);
            std::vector<double> lambda(cs.num_rows());
            cs.apply_b(gamma, lambda);
            CHECK(max_abs(lambda) == 0.0);

            // B_D is a left inverse of B^T.
            const CsrMatrix bd = cs.bd_matrix();
            const auto bt = b.transpose();
            for (int r = 0; r < cs.num_rows(); ++r) {
                std::vector<double> e(cs.num_rows(), 0.0), col(cs.gamma_size()), back(cs.num_rows());
                e[r] = 1.0;
                bt.multiply(e, col);
                bd.multiply(col, back);
                for (int i = 0; i < cs.num_rows(); ++i)
                    CHECK(std::abs(back[i] - (i == r ? 1.0 : 0.0)) <= 1e-12);
            }
        }
    }

    TEST_CASE("null space bases")
    {
        const Fixture none(KernelFamily::constant, 8, 2, 1, 2);
        CHECK(none.feti.coarse_size() == 0);

        const Fixture scalar(KernelFamily::constant, 24, 2, 3, 3);
        CHECK(scalar.feti.coarse_size() == 1);
        const auto& cs = scalar.feti.constraints();
        for (int k = 0; k < 9; ++k)
            CHECK(cs.z_count[k] == (k == 4 ? 1 : 0));
        const auto& z = cs.z_gamma[4];
        for (double v : z)
            CHECK(v == doctest::Approx(z[0]));

        const Fixture peri(KernelFamily::peridynamic, 12, 2, 3, 3);
        CHECK(peri.feti.coarse_size() == 3);
        CHECK(peri.feti.constraints().z_count[4] == 3);
    }

    TEST_CASE("Schur operators")
    {
        std::mt19937_64 rng(5);
        for (auto family : {KernelFamily::constant, KernelFamily::fractional, KernelFamily::peridynamic}) {
            const Fixture f(family, 12, 2, 3, 3);
            const int comps = f.spec.components();
            for (int k = 0; k < f.feti.num_subdomains(); ++k) {
                const SubdomainSolver& s = f.feti.local(k);
                const int ng = s.interface_dofs();
                auto apply_s = [&](const std::vector<double>& v) {
                    std::vector<double> out(ng);
                    s.schur_apply(v, out);
                    return out;
                };
                auto apply_pinv = [&](const std::vector<double>& v) {
                    std::vector<double> out(ng);
                    s.schur_pinv_apply(v, out);
                    return out;
                };
                const auto u = random_vector(ng, rng), v = random_vector(ng, rng);
                const auto su = apply_s(u), sv = apply_s(v);
                const double snorm = max_abs(su);
                CHECK(std::abs(dot(su, v) - dot(u, sv)) <= 1e-10 * snorm * ng);

                if (s.floating()) {
                    for (const auto& z : null_modes(f.mesh, f.sub, k, comps))
                        CHECK(max_abs(apply_s(z)) <= 1e-9 * snorm);
                    for (int t = 0; t < 10; ++t) {
                        const auto w = random_vector(ng, rng);
                        const auto sw = apply_s(w);
                        const auto ssps = apply_s(apply_pinv(sw));
                        for (int i = 0; i < ng; ++i)
                            CHECK(std::abs(ssps[i] - sw[i]) <= 1e-8 * max_abs(sw));
                    }
                    // The pseudo-inverse output is orthogonal to the null space.
                    const auto out = apply_pinv(su);
                    for (const auto& z : null_modes(f.mesh, f.sub, k, comps))
                        CHECK(std::abs(dot(out, z)) <= 1e-8 * max_abs(out) * ng);
                } else {
                    const auto back = apply_s(apply_pinv(v));
                    for (int i = 0; i < ng; ++i)
                        CHECK(back[i] == doctest::Approx(v[i]).epsilon(1e-9).scale(1.0));
                }
            }
        }
    }

    TEST_CASE("projection and coarse space")
    {
        std::mt19937_64 rng(6);
        for (auto family : {KernelFamily::constant, KernelFamily::peridynamic}) {
            const Fixture f(family, 12, 2, 3, 3);
            const int nl = f.feti.constraints().num_rows();
            const int nz = f.feti.coarse_size();
            const auto& g = f.feti.g_matrix();
            const double gnorm = max_abs(g);
            const auto lambda = random_vector(nl, rng);
            std::vector<double> p1(nl), p2(nl);
            f.feti.apply_p(lambda, p1);
            f.feti.apply_p(p1, p2);
            for (int i = 0; i < nl; ++i)
                CHECK(std::abs(p2[i] - p1[i]) <= 1e-12 * max_abs(lambda));
            for (int c = 0; c < nz; ++c) {
                std::span<const double> col(g.data() + static_cast<std::size_t>(c) * nl, nl);
                std::vector<double> pg(nl);
                f.feti.apply_p(col, pg);
                CHECK(max_abs(pg) <= 1e-12 * gnorm);
            }

            // lambda0 = G (G^T G)^-1 e satisfies G^T lambda0 = e.
            const auto coef = coarse_solve(f, f.feti.coarse_rhs());
            std::vector<double> lambda0(nl, 0.0);
            for (int c = 0; c < nz; ++c)
                for (int r = 0; r < nl; ++r)
                    lambda0[r] += g[static_cast<std::size_t>(c) * nl + r] * coef[c];
            for (int c = 0; c < nz; ++c) {
                std::span<const double> col(g.data() + static_cast<std::size_t>(c) * nl, nl);
                CHECK(std::abs(dot(col, lambda0) - f.feti.coarse_rhs()[c]) <= 1e-12 * (1 + max_abs(f.feti.coarse_rhs())));
            }

            // The converged multipliers keep the solvability condition.
            const auto r = f.feti.solve();
            REQUIRE(r.converged);
            for (int c = 0; c < nz; ++c) {
                std::span<const double> col(g.data() + static_cast<std::size_t>(c) * nl, nl);
                CHECK(std::abs(dot(col, r.lambda) - f.feti.coarse_rhs()[c]) <= 1e-9 * (1 + max_abs(f.feti.coarse_rhs())));
            }
        }
    }

    TEST_CASE("Dirichlet preconditioner is symmetric and positive on the projected space")
    {
        std::mt19937_64 rng(7);
        for (auto family : {KernelFamily::constant, KernelFamily::peridynamic}) {
            const Fixture f(family, 12, 2, 3, 3);
            const int nl = f.feti.constraints().num_rows();
            for (int t = 0; t < 5; ++t) {
                const auto u = random_vector(nl, rng), v = random_vector(nl, rng);
                std::vector<double> mu(nl), mv(nl);
                f.feti.apply_preconditioner(u, mu);
                f.feti.apply_preconditioner(v, mv);
                CHECK(std::abs(dot(mu, v) - dot(u, mv)) <= 1e-10 * std::max(1.0, max_abs(mu) * nl));
            }
            for (int t = 0; t < 100; ++t) {
                const auto r = random_vector(nl, rng);
                std::vector<double> pr(nl), mpr(nl);
                f.feti.apply_p(r, pr);
                f.feti.apply_preconditioner(pr, mpr);
                CHECK(dot(mpr, pr) > 0.0);
            }
        }
    }

    TEST_CASE("FETI matches the single-domain direct solve")
    {
        for (auto family : {KernelFamily::constant, KernelFamily::fractional, KernelFamily::peridynamic})
            for (auto [k1, k2] : {std::pair{1, 1}, std::pair{2, 1}, std::pair{2, 2}, std::pair{3, 3}}) {
                INFO(to_string(family) << " " << k1 << "x" << k2);
                const Fixture f(family, 16, 2, k1, k2);
                const auto r = f.feti.solve();
                REQUIRE(r.converged);
                double jump = -1;
                const auto nodal = f.feti.gather(r, f.global.g, 1e-7, &jump);
                CHECK(jump >= 0.0);
                const int comps = f.spec.components();
                const auto u = interior_part(f.mesh, comps, nodal);
                const auto ref = direct_solve(f.global);
                CHECK(energy_norm_difference(f.global.A, u, ref) <= 1e-8);

                // Continuity of the interface copies.
                const auto& cs = f.feti.constraints();
                std::vector<double> gamma;
                for (int k = 0; k < f.feti.num_subdomains(); ++k) {
                    const auto& loc = r.local[k];
                    const int no = f.feti.local(k).interior_dofs();
                    gamma.insert(gamma.end(), loc.begin() + no, loc.end());
                }
                std::vector<double> bu(cs.num_rows());
                cs.apply_b(gamma, bu);
                CHECK(norm2(bu) <= 1e-8 * std::max(1.0, norm2(gamma)));

                // Each local solution satisfies its subdomain equations on the interior rows.
                const auto systems = f.assembler.assemble_subdomains(f.sub, f.problem.data);
                for (int k = 0; k < f.feti.num_subdomains(); ++k) {
                    const auto& sys = systems[k];
                    std::vector<double> res(sys.dofs());
                    sys.A.multiply(r.local[k], res);
                    axpy(-1.0, sys.rhs, res);
                    for (int i = 0; i < sys.interior_dofs(); ++i)
                        CHECK(std::abs(res[i]) <= 1e-8 * std::max(1.0, max_abs(sys.rhs)));
                }
            }
    }

    TEST_CASE("interior recovery from zero data is zero")
    {
        const Mesh m = build_structured_mesh(8, 0.25);
        const auto spec = KernelSpec::make(KernelFamily::constant, 0.25);
        const Assembler as(m, spec, BallStrategy::exact_linf, {});
        const auto sub = build_subdivision(m, 2, 2, as.interactions());
        const ProblemData zero{[](Point) { return std::array<double, 2>{0, 0}; },
                               [](Point) { return std::array<double, 2>{0, 0}; }};
        const FetiSolver feti(m, sub, as.assemble_subdomains(sub, zero), {});
        for (int k = 0; k < 4; ++k) {
            const auto& s = feti.local(k);
            const std::vector<double> ug(s.interface_dofs(), 0.0);
            CHECK(max_abs(s.recover_interior(ug)) == 0.0);
        }
        const auto r = feti.solve();
        CHECK(r.converged);
        CHECK(r.iterations == 0);
        CHECK(max_abs(feti.gather(r, std::vector<double>(m.boundary_nodes.size(), 0.0))) == 0.0);
    }

    TEST_CASE("a loose solve fails the copy agreement check")
    {
        FetiOptions loose;
        loose.tol = 1e-2;
        const Fixture f(KernelFamily::constant, 16, 2, 2, 1, loose);
        const auto r = f.feti.solve();
        CHECK_THROWS_AS(f.feti.gather(r, f.global.g), FetiError);
        CHECK_NOTHROW(f.feti.gather(r, f.global.g, 1.0));
    }

    TEST_CASE("preconditioning never increases the iteration count")
    {
        for (auto family : {KernelFamily::constant, KernelFamily::fractional, KernelFamily::peridynamic})
            for (auto [k1, k2] : {std::pair{2, 1}, std::pair{2, 2}, std::pair{3, 3}}) {
                FetiOptions plain;
                plain.preconditioner = Preconditioner::none;
                const Fixture a(family, 16, 2, k1, k2);
                const Fixture b(family, 16, 2, k1, k2, plain);
                const auto ra = a.feti.solve(), rb = b.feti.solve();
                INFO(to_string(family) << " " << k1 << "x" << k2 << ": " << ra.iterations << " vs " << rb.iterations);
                CHECK(ra.converged);
                CHECK(rb.converged);
                CHECK(ra.iterations <= rb.iterations);
            }
    }

    TEST_CASE("solves are reproducible")
    {
        const Fixture a(KernelFamily::fractional, 16, 2, 2, 2);
        FetiOptions threaded;
        threaded.workers = 3;
        const Fixture b(KernelFamily::fractional, 16, 2, 2, 2, threaded);
        const auto ra = a.feti.solve(), rb = b.feti.solve();
        CHECK(ra.iterations == rb.iterations);
        CHECK(ra.lambda == rb.lambda);
    }
}
