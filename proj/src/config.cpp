#include "nlfeti/config.hpp"

#include "nlfeti/mesh.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <map>

namespace nlfeti {

namespace {

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v)
{
    try {
        std::size_t pos = 0;
        const double d = std::stod(v, &pos);
        if (pos == v.size())
            return d;
    } catch (const std::exception&) {
    }
    throw ConfigError(key + ": expected a number, got '" + v + "'");
}

int to_int(const std::string& key, const std::string& v)
{
    try {
        std::size_t pos = 0;
        const int i = std::stoi(v, &pos);
        if (pos == v.size())
            return i;
    } catch (const std::exception&) {
    }
    throw ConfigError(key + ": expected an integer, got '" + v + "'");
}

bool to_bool(const std::string& key, const std::string& v)
{
    if (v == "on" || v == "true" || v == "full" || v == "1")
        return true;
    if (v == "off" || v == "false" || v == "none" || v == "0")
        return false;
    throw ConfigError(key + ": expected on/off, got '" + v + "'");
}

template <class F>
auto wrap(const std::string& key, F&& f)
{
    try {
        return f();
    } catch (const KernelError& e) {
        throw ConfigError(key + ": " + e.what());
    }
}

}  // namespace

std::string to_string(SolverChoice s)
{
    switch (s) {
    case SolverChoice::feti: return "feti";
    case SolverChoice::cg: return "cg";
    case SolverChoice::both: return "both";
    case SolverChoice::direct: return "direct";
    }
    return "?";
}

std::string to_string(StudyKind s)
{
    switch (s) {
    case StudyKind::single: return "single";
    case StudyKind::fixed_horizon: return "fixed_horizon";
    case StudyKind::fixed_ratio: return "fixed_ratio";
    case StudyKind::strong_scaling: return "strong_scaling";
    }
    return "?";
}

SolverChoice parse_solver(const std::string& s)
{
    for (auto c : {SolverChoice::feti, SolverChoice::cg, SolverChoice::both, SolverChoice::direct})
        if (to_string(c) == s)
            return c;
    throw ConfigError("unknown solver '" + s + "'");
}

StudyKind parse_study(const std::string& s)
{
    for (auto c : {StudyKind::single, StudyKind::fixed_horizon, StudyKind::fixed_ratio, StudyKind::strong_scaling})
        if (to_string(c) == s)
            return c;
    throw ConfigError("unknown study '" + s + "'");
}

std::vector<std::pair<std::string, std::string>> read_key_values(const std::string& path)
{
    std::ifstream is(path);
    if (!is)
        throw ConfigError("cannot read config " + path);
    std::vector<std::pair<std::string, std::string>> out;
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos)
            line.erase(hash);
        line = trim(line);
        if (line.empty())
            continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(path + ":" + std::to_string(lineno) + ": expected 'key = value'");
        out.emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return out;
}

void apply_setting(ExperimentConfig& cfg, const std::string& key, const std::string& v)
{
    using Setter = std::function<void()>;
    const std::map<std::string, Setter> table = {
        {"kernel.family", [&] { cfg.family = wrap(key, [&] { return parse_kernel_family(v); }); }},
        {"kernel.delta", [&] { cfg.delta = to_double(key, v); }},
        {"kernel.s", [&] { cfg.s = to_double(key, v); }},
        {"ball.strategy",
         [&] {
             if (v == "default")
                 cfg.strategy.reset();
             else
                 cfg.strategy = wrap(key, [&] { return parse_ball_strategy(v); });
         }},
        {"mesh.n", [&] { cfg.n = to_int(key, v); }},
        {"subdomains.k1", [&] { cfg.k1 = to_int(key, v); }},
        {"subdomains.k2", [&] { cfg.k2 = to_int(key, v); }},
        {"solver", [&] { cfg.solver = parse_solver(v); }},
        {"study", [&] { cfg.study = parse_study(v); }},
        {"study.levels", [&] { cfg.levels = to_int(key, v); }},
        {"study.ratio", [&] { cfg.ratio = to_double(key, v); }},
        {"feti.tol", [&] { cfg.feti.tol = to_double(key, v); }},
        {"feti.maxit", [&] { cfg.feti.max_iterations = to_int(key, v); }},
        {"feti.preconditioner",
         [&] {
             if (v == "dirichlet")
                 cfg.feti.preconditioner = Preconditioner::dirichlet;
             else if (v == "none")
                 cfg.feti.preconditioner = Preconditioner::none;
             else
                 throw ConfigError(key + ": expected dirichlet or none");
         }},
        {"feti.reortho", [&] { cfg.feti.reorthogonalize = to_bool(key, v); }},
        {"cg.tol", [&] { cfg.cg.tol = to_double(key, v); }},
        {"cg.maxit", [&] { cfg.cg.max_iterations = to_int(key, v); }},
        {"workers", [&] { cfg.workers = to_int(key, v); }},
        {"quad.outer_constant", [&] { cfg.quad.outer_constant = to_int(key, v); }},
        {"quad.outer", [&] { cfg.quad.outer = to_int(key, v); }},
        {"quad.outer_touching", [&] { cfg.quad.outer_touching = to_int(key, v); }},
        {"quad.angular", [&] { cfg.quad.angular = to_int(key, v); }},
        {"quad.grading", [&] { cfg.quad.grading = to_int(key, v); }},
        {"quad.panel", [&] { cfg.quad.panel = to_double(key, v); }},
        {"manufactured.orientation",
         [&] {
             if (v == "consistent")
                 cfg.orientation = Orientation::consistent;
             else if (v == "swapped")
                 cfg.orientation = Orientation::swapped;
             else
                 throw ConfigError(key + ": expected consistent or swapped");
         }},
        {"output.solution", [&] { cfg.solution_path = v; }},
        {"output.trace", [&] { cfg.trace_path = v; }},
        {"check.equivalence_tol", [&] { cfg.equivalence_tol = to_double(key, v); }},
        {"check.copy_tol", [&] { cfg.copy_tol = to_double(key, v); }},
        {"check.l2_reference", [&] { cfg.l2_reference = to_double(key, v); }},
        {"check.l2_reference_tol", [&] { cfg.l2_reference_tol = to_double(key, v); }},
    };
    const auto it = table.find(key);
    if (it == table.end())
        throw ConfigError("unknown config key '" + key + "'");
    it->second();
}

void ExperimentConfig::validate() const
{
    if (n < 2)
        throw ConfigError("mesh.n must be at least 2");
    if (!(delta > 0))
        throw ConfigError("kernel.delta must be positive");
    if (family == KernelFamily::fractional && !(s > 0 && s < 1))
        throw ConfigError("kernel.s must lie in (0, 1)");
    const double layers = delta * n;
    if (std::abs(layers - std::round(layers)) > 1e-9)
        throw ConfigError("kernel.delta * mesh.n must be an integer");
    if (k1 < 1 || k2 < 1 || k1 > n || k2 > n)
        throw ConfigError("subdomain counts must lie in [1, mesh.n]");
    if (levels < 1)
        throw ConfigError("study.levels must be positive");
    if (workers < 1)
        throw ConfigError("workers must be positive");
    if (feti.tol <= 0 || cg.tol <= 0)
        throw ConfigError("solver tolerances must be positive");
    if (quad.outer_constant < 1 || quad.outer < 1 || quad.outer_touching < 1 || quad.angular < 1 || quad.grading < 0 || quad.panel <= 0)
        throw ConfigError("quadrature orders must be positive");
    try {
        check_compatible(kernel(), ball());
    } catch (const KernelError& e) {
        throw ConfigError(e.what());
    }
}

ExperimentConfig load_config(const std::string& path,
                             const std::vector<std::pair<std::string, std::string>>& overrides)
{
    ExperimentConfig cfg;
    if (!path.empty())
        for (const auto& [k, v] : read_key_values(path))
            apply_setting(cfg, k, v);
    for (const auto& [k, v] : overrides)
        apply_setting(cfg, k, v);
    cfg.validate();
    return cfg;
}

void apply_published_scale(ExperimentConfig& cfg)
{
    cfg.k1 = cfg.k2 = 6;
    switch (cfg.study) {
    case StudyKind::single:
    case StudyKind::fixed_horizon:
        cfg.delta = 0.008;
        cfg.n = 250;
        cfg.levels = 4;
        if (cfg.family == KernelFamily::constant && cfg.study == StudyKind::single && !cfg.l2_reference)
            cfg.l2_reference = 3.47e-06;
        break;
    case StudyKind::fixed_ratio:
        cfg.n = 500;
        cfg.delta = 0.008;
        cfg.ratio = 4;
        cfg.levels = 4;
        break;
    case StudyKind::strong_scaling:
        cfg.n = 500;
        cfg.delta = 0.016;
        cfg.k1 = cfg.k2 = 2;
        cfg.levels = 4;
        break;
    }
}

}  // namespace nlfeti
