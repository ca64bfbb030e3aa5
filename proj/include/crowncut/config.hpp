#pragma once

#include <string>
#include <vector>

#include "crowncut/pipeline.hpp"
#include "crowncut/synthforest.hpp"

namespace crowncut {

struct RpcaConfig {
    double lambda = -1.0;  // <= 0 means the 1/sqrt(max(m,n)) default
    double tol = 1e-7;
    int max_iter = 500;
    int comp_lo = 2, comp_hi = 5;
};

// Every tunable of the tool in one place. `preset` selects a bandwidth style
// before individual keys are applied: "italian" (default) or "benchmark"
// (sigma_xy = 2, sigma_z = 5, no feature term, same for MC and RC).
struct ToolConfig {
    McrcConfig mcrc;
    ForestSpec synth;
    RpcaConfig rpca;
    double validate_max_xy = 5.0;
    double validate_max_dz = 5.0;
};

void apply_preset(ToolConfig& cfg, const std::string& name);

// One `key = value` per line, '#' comments, dotted keys
// (e.g. graph_mc.sigma_xy = 1.0). Unknown keys are errors.
void apply_config_line(ToolConfig& cfg, const std::string& key, const std::string& value);
ToolConfig load_config(const std::string& path);

// The full schema as `key = value` lines reflecting cfg's current values,
// used for the run manifest and for --dump-config.
std::vector<std::string> dump_config(const ToolConfig& cfg);

}  // namespace crowncut
