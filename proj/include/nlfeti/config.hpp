#pragma once

#include "nlfeti/feti.hpp"
#include "nlfeti/kernels.hpp"
#include "nlfeti/krylov.hpp"
#include "nlfeti/pair_integrator.hpp"

#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace nlfeti {

class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

enum class SolverChoice { feti, cg, both, direct };
enum class StudyKind { single, fixed_horizon, fixed_ratio, strong_scaling };
// Diffusion source for u = x1^2 x2 + x2^2: `consistent` is -2(1+x2), the matching
// one; `swapped` is -2(1+x1), which does not match u.
enum class Orientation { consistent, swapped };

std::string to_string(SolverChoice s);
std::string to_string(StudyKind s);
SolverChoice parse_solver(const std::string& s);
StudyKind parse_study(const std::string& s);

struct ExperimentConfig {
    KernelFamily family = KernelFamily::constant;
    double delta = 0.0625;
    double s = 0.4;
    std::optional<BallStrategy> strategy;  // kernel default when unset
    int n = 32;
    int k1 = 2, k2 = 2;
    SolverChoice solver = SolverChoice::both;
    StudyKind study = StudyKind::single;
    int levels = 3;
    double ratio = 0.0;  // delta * n for fixed_ratio ladders; 0 takes it from delta and n
    FetiOptions feti;
    KrylovOptions cg{1e-10, 100000, false, false};
    int workers = 1;
    QuadratureOptions quad;
    Orientation orientation = Orientation::consistent;
    std::string solution_path;
    std::string trace_path;
    double equivalence_tol = 1e-7;  // relative energy norm, FETI vs CG
    double copy_tol = 1e-7;         // agreement of interface copies
    std::optional<double> l2_reference;
    double l2_reference_tol = 0.15;

    BallStrategy ball() const { return strategy.value_or(default_ball_strategy(family)); }
    KernelSpec kernel() const { return KernelSpec::make(family, delta, s); }
    // Throws ConfigError (or the module error) on inconsistent settings.
    void validate() const;
};

// "key = value" lines, '#' starts a comment.
std::vector<std::pair<std::string, std::string>> read_key_values(const std::string& path);
void apply_setting(ExperimentConfig& cfg, const std::string& key, const std::string& value);
ExperimentConfig load_config(const std::string& path,
                             const std::vector<std::pair<std::string, std::string>>& overrides = {});

// Published problem sizes: delta = 0.008, h = 0.004 and 6x6 subdomains as the
// first rung (fixed ratio and strong scaling start at h = 0.002).
void apply_published_scale(ExperimentConfig& cfg);

}  // namespace nlfeti
