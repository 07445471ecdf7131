#pragma once

#include <string>
#include <vector>

namespace shiftwave {

struct CriterionResult {
    int id = 0;
    std::string name;
    bool pass = false;
    std::string detail;
    double seconds = 0.0;
};

/// Runs the acceptance experiments. Each criterion loads its scenario from
/// `config_dir` (c1_dispersion.cfg, c2_delta.cfg, ...); a broken config
/// fails that criterion with the configuration error as its detail. Every
/// tolerance is pinned in code. `only` restricts to the listed criterion
/// ids; overrides are forwarded to each config load (accept.tol_scale
/// tightens the dispersion-oracle tolerances).
std::vector<CriterionResult> run_acceptance(const std::string& config_dir,
                                            const std::vector<std::string>& overrides = {},
                                            const std::vector<int>& only = {});

}  // namespace shiftwave
