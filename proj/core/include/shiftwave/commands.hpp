#pragma once

#include <string>
#include <vector>

#include "shiftwave/config.hpp"

namespace shiftwave {

/// CLI command implementations. Each writes its CSV outputs under out_dir
/// plus a result.csv row per completed unit, and returns the process exit
/// code: 0 success, 3 numerical failure. Configuration and regime errors
/// are thrown (ConfigError / ModelError / RegimeError) and mapped to exit
/// code 2 by the CLI entry point.
int cmd_speeds(const ScenarioConfig& cfg, const std::string& out_dir);
int cmd_wave(const ScenarioConfig& cfg, const std::string& out_dir);
int cmd_simulate(const ScenarioConfig& cfg, const std::string& out_dir);
int cmd_classify(const ScenarioConfig& cfg, const std::string& out_dir);
int cmd_sweep(const ScenarioConfig& cfg, const std::string& out_dir);
int cmd_accept(const std::string& config_dir, const std::string& out_dir,
               const std::vector<std::string>& overrides, const std::vector<int>& only = {});

/// Parallelism cap: SHIFTWAVE_THREADS, default hardware concurrency.
int thread_cap();

}  // namespace shiftwave
