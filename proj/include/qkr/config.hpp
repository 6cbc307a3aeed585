/* Run configuration files.
 *
 * Plain sectioned key = value text:
 *
 *   [simulation]
 *   K = 10.0
 *   kbar = 2.9
 *   pi = 0.01
 *   delta = 0.04
 *   n_kicks = 500
 *   n_traj = 4000
 *   n_max = 1024
 *   seed = 1
 *   checkpoints = 300, 500
 *
 *   [sweep]               # optional, used by the sweep command
 *   pi_values = 0, 0.005, 0.01, 0.02
 *
 * Omitted keys keep the SimParams defaults. Comments start with # or ;.
 * Every parse error carries file name and line number.
 */
#pragma once

#include <string>
#include <vector>

#include "qkr/core.hpp"

namespace qkr {

struct RunConfig {
    SimParams sim;
    std::vector<double> sweep_pi;
};

// Parses and validates; throws ConfigError with positions on any problem.
RunConfig parse_config(const std::string& path);
RunConfig parse_config_text(const std::string& text, const std::string& name);

}  // namespace qkr
