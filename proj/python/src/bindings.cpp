#include "nlfeti/harness.hpp"

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace nlfeti;

namespace {

using Settings = std::map<std::string, std::string>;

template <class T>
py::array_t<T> array(const std::vector<T>& v)
{
    return py::array_t<T>(static_cast<py::ssize_t>(v.size()), v.data());
}

ExperimentConfig config(const std::string& path, const Settings& settings)
{
    return load_config(path, {settings.begin(), settings.end()});
}

py::dict record(const RunRecord& r)
{
    py::dict d;
    d["study"] = r.study;
    d["kernel"] = r.kernel;
    d["K"] = py::make_tuple(r.k1, r.k2);
    d["h"] = r.h;
    d["delta"] = r.delta;
    d["solver"] = r.solver;
    d["dofs"] = r.dofs;
    d["iterations"] = r.iterations;
    d["residual"] = r.residual;
    d["l2_error"] = r.l2_error;
    d["roc"] = r.roc ? py::cast(*r.roc) : py::none();
    d["seconds"] = r.seconds;
    d["status"] = r.status;
    return d;
}

py::dict csr(const CsrMatrix& m)
{
    py::dict d;
    d["shape"] = py::make_tuple(m.rows, m.cols);
    d["indptr"] = array(m.row_ptr);
    d["indices"] = array(m.col_idx);
    d["data"] = array(m.values);
    return d;
}

py::dict mesh_dict(const Mesh& m)
{
    py::array_t<double> xy({m.num_vertices(), 2});
    auto w = xy.mutable_unchecked<2>();
    for (int v = 0; v < m.num_vertices(); ++v) {
        w(v, 0) = m.vertices[v].x;
        w(v, 1) = m.vertices[v].y;
    }
    py::array_t<int> tri({m.num_elements(), 3});
    auto t = tri.mutable_unchecked<2>();
    std::vector<int> region(m.num_elements());
    for (int e = 0; e < m.num_elements(); ++e) {
        for (int k = 0; k < 3; ++k)
            t(e, k) = m.elements[e][k];
        region[e] = m.region[e] == Region::interior ? 0 : 1;
    }
    py::dict d;
    d["n"] = m.n;
    d["delta"] = m.delta;
    d["h"] = m.h;
    d["vertices"] = xy;
    d["elements"] = tri;
    d["region"] = array(region);
    d["interior_nodes"] = array(m.interior_nodes);
    d["boundary_nodes"] = array(m.boundary_nodes);
    return d;
}

py::dict solve(const std::string& path, const Settings& settings, const std::string& export_dir)
{
    const auto cfg = config(path, settings);
    SolveOutcome out;
    {
        py::gil_scoped_release release;
        out = run_single(cfg, export_dir);
    }
    py::list records;
    for (const auto& r : out.records)
        records.append(record(r));
    py::dict d;
    d["records"] = records;
    d["components"] = out.components;
    d["solution"] = array(out.solution);
    d["energy_difference"] = out.energy_difference ? py::cast(*out.energy_difference) : py::none();
    d["max_jump"] = out.max_jump;
    d["failures"] = out.failures;
    d["ok"] = out.ok();
    return d;
}

py::dict study(const std::string& path, const Settings& settings)
{
    const auto cfg = config(path, settings);
    StudyOutcome out;
    {
        py::gil_scoped_release release;
        out = run_study(cfg);
    }
    py::list records;
    for (const auto& r : out.records)
        records.append(record(r));
    py::dict d;
    d["records"] = records;
    d["failures"] = out.failures;
    d["ok"] = out.ok();
    return d;
}

py::dict assemble(const std::string& path, const Settings& settings)
{
    const auto cfg = config(path, settings);
    const Mesh mesh = build_structured_mesh(cfg.n, cfg.delta);
    const Assembler as(mesh, cfg.kernel(), cfg.ball(), cfg.quad, cfg.workers);
    AssembledSystem sys;
    {
        py::gil_scoped_release release;
        sys = as.assemble_global(manufactured_problem(cfg.family, cfg.orientation).data);
    }
    py::dict d;
    d["components"] = sys.components;
    d["A"] = csr(sys.A);
    d["B"] = csr(sys.B);
    d["f"] = array(sys.f);
    d["g"] = array(sys.g);
    d["mesh"] = mesh_dict(mesh);
    return d;
}

py::dict subdivide(const std::string& path, const Settings& settings)
{
    const auto cfg = config(path, settings);
    const Mesh mesh = build_structured_mesh(cfg.n, cfg.delta);
    const InteractionIndex index(mesh, cfg.delta, cfg.kernel().norm);
    const Subdivision sub = build_subdivision(mesh, cfg.k1, cfg.k2, index, cfg.workers);
    check_coverage(mesh, sub, index);
    std::vector<int> zeta(mesh.num_vertices(), 0);
    for (int v : mesh.interior_nodes)
        zeta[v] = sub.zeta_nodes(v, v);
    py::list extended, interface;
    for (int k = 0; k < sub.count(); ++k) {
        extended.append(array(sub.extended[k]));
        interface.append(array(sub.interface_nodes[k]));
    }
    py::dict d;
    d["K"] = py::make_tuple(sub.k1, sub.k2);
    d["radius"] = sub.radius;
    d["owner"] = array(sub.owner);
    d["extended"] = extended;
    d["interface_nodes"] = interface;
    d["node_zeta"] = array(zeta);
    d["floating"] = std::vector<bool>(sub.floating.begin(), sub.floating.end());
    return d;
}

}  // namespace

PYBIND11_MODULE(_nlfeti, m)
{
    m.doc() = "FETI solver for nonlocal diffusion and bond-based peridynamics";
    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

    m.def("mesh", [](int n, double delta) { return mesh_dict(build_structured_mesh(n, delta)); }, py::arg("n"),
          py::arg("delta"));
    m.def("solve", &solve, py::arg("config") = "", py::arg("settings") = Settings{}, py::arg("export_dir") = "");
    m.def("study", &study, py::arg("config") = "", py::arg("settings") = Settings{});
    m.def("assemble", &assemble, py::arg("config") = "", py::arg("settings") = Settings{});
    m.def("subdivide", &subdivide, py::arg("config") = "", py::arg("settings") = Settings{});
    m.def("study_csv_header", &study_csv_header);
}
