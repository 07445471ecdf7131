#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "shiftwave/grid.hpp"
#include "shiftwave/model.hpp"
#include "shiftwave/simulate.hpp"

namespace shiftwave {

/// Flat INI-like scenario configuration. Sections: [model], [habitat],
/// [kernel.prey], [kernel.predator], [grid], [sim], [scenario], [accept].
/// '#' starts a comment; keys are key = value; unknown sections or keys are
/// rejected; duplicate keys are an error naming both lines. Relative file
/// paths resolve against the config file's directory.
struct ScenarioConfig {
    std::string source;       // file path or "<inline>"
    std::string scenario_id;  // [scenario] id, default: file stem
    std::string config_hash;  // FNV-1a 64 over the canonical key=value form

    ModelParams model;
    HabitatProfile habitat = HabitatProfile::tanh_profile(-1.0, 1.0);
    std::optional<Kernel> kernel_prey;
    std::optional<Kernel> kernel_predator;
    Grid1D grid = Grid1D::from_range(-200.0, 200.0, 0.1);

    // [sim]
    double T = 100.0;
    double dt = 0.0;  // 0 => dt_max
    double probe_dt = 1.0;
    std::vector<double> frames;
    std::vector<double> snapshot_times;

    // [scenario]
    std::string kind;  // informational echo; the CLI subcommand decides the action
    std::string wave_type = "front";
    std::string method = "both";
    double tol = 1e-7;
    int maxiter = 50000;
    double steady_tol = 1e-9;
    double wave_T = 0.0;  // 0 => auto
    double tail_tol = 1e-2;
    double edge_fraction = 0.05;
    double slack_tol = 1e-7;
    std::vector<double> s_list;
    std::string probes_file;
    InitKind init_kind = InitKind::Bump;
    double init_center = 0.0;
    double init_width = 20.0;
    double init_amp_u = 0.5;
    double init_amp_v = 0.5;
    ClassifyThresholds thresholds;

    // [accept]
    double accept_tol_scale = 1.0;

    /// Builds the validated model bundle (throws ModelError/ConfigError).
    ValidatedModel validated() const;
};

/// Parses config text. `source_name` is used in diagnostics and for
/// resolving relative paths (its parent directory). Overrides are
/// "section.key=value" entries applied after parsing, before validation.
ScenarioConfig parse_config(const std::string& text, const std::string& source_name,
                            const std::vector<std::string>& overrides = {});

ScenarioConfig load_config(const std::string& path,
                           const std::vector<std::string>& overrides = {});

/// FNV-1a 64-bit over the canonical serialized form, as 16 hex digits.
std::string config_hash_of(const std::map<std::string, std::string>& canonical);

}  // namespace shiftwave
