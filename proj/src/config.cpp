#include "crowncut/config.hpp"

#include <cstdio>
#include <fstream>

namespace crowncut {

namespace {

std::string trim(const std::string& s) {
    size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
    try {
        size_t pos = 0;
        double d = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw DataError("config: bad numeric value for " + key + ": '" + v + "'");
    }
}

int to_int(const std::string& key, const std::string& v) {
    try {
        size_t pos = 0;
        int i = std::stoi(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return i;
    } catch (const std::exception&) {
        throw DataError("config: bad integer value for " + key + ": '" + v + "'");
    }
}

uint64_t to_u64(const std::string& key, const std::string& v) {
    try {
        size_t pos = 0;
        unsigned long long i = std::stoull(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return i;
    } catch (const std::exception&) {
        throw DataError("config: bad integer value for " + key + ": '" + v + "'");
    }
}

bool to_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw DataError("config: bad boolean value for " + key + ": '" + v + "'");
}

std::string fmt_g(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

}  // namespace

void apply_preset(ToolConfig& cfg, const std::string& name) {
    if (name == "italian") {
        cfg.mcrc.graph_mc = GraphParams{1.0, 1.0, 3.0, 0.005};
        cfg.mcrc.graph_rc = GraphParams{1.0, 0.5, 2.0, 0.005};
    } else if (name == "benchmark") {
        cfg.mcrc.graph_mc = GraphParams{1.0, 2.0, 5.0, 0.0};
        cfg.mcrc.graph_rc = GraphParams{1.0, 2.0, 5.0, 0.0};
        cfg.mcrc.use_features = false;
    } else {
        throw DataError("config: unknown preset '" + name + "' (italian, benchmark)");
    }
}

void apply_config_line(ToolConfig& cfg, const std::string& key, const std::string& value) {
    auto graph_key = [&](GraphParams& g, const std::string& sub) -> bool {
        if (sub == "d") g.d = to_double(key, value);
        else if (sub == "sigma_xy") g.sigma_xy = to_double(key, value);
        else if (sub == "sigma_z") g.sigma_z = to_double(key, value);
        else if (sub == "sigma_fts") g.sigma_fts = to_double(key, value);
        else return false;
        return true;
    };

    if (key == "preset") {
        apply_preset(cfg, value);
        return;
    }
    auto dot = key.find('.');
    std::string scope = dot == std::string::npos ? "" : key.substr(0, dot);
    std::string sub = dot == std::string::npos ? key : key.substr(dot + 1);

    if (scope == "terrain") {
        if (sub == "cell_size") cfg.mcrc.terrain.cell_size = to_double(key, value);
        else if (sub == "max_window") cfg.mcrc.terrain.max_window = to_double(key, value);
        else if (sub == "slope_tolerance") cfg.mcrc.terrain.slope_tolerance = to_double(key, value);
        else if (sub == "elevation_threshold")
            cfg.mcrc.terrain.elevation_threshold = to_double(key, value);
        else throw DataError("config: unknown key '" + key + "'");
    } else if (scope == "mcrc") {
        if (sub == "chm_smoothing_sigma") cfg.mcrc.chm_smoothing_sigma = to_double(key, value);
        else if (sub == "mwf_window") cfg.mcrc.mwf_window = to_int(key, value);
        else if (sub == "min_tree_height") cfg.mcrc.min_tree_height = to_double(key, value);
        else if (sub == "prior_radius") cfg.mcrc.prior_radius = to_double(key, value);
        else if (sub == "tau_ncut") cfg.mcrc.tau_ncut = to_double(key, value);
        else if (sub == "min_points") cfg.mcrc.min_points = to_int(key, value);
        else if (sub == "kappa") cfg.mcrc.kappa = to_double(key, value);
        else if (sub == "use_features") cfg.mcrc.use_features = to_bool(key, value);
        else throw DataError("config: unknown key '" + key + "'");
    } else if (scope == "graph_mc") {
        if (!graph_key(cfg.mcrc.graph_mc, sub)) throw DataError("config: unknown key '" + key + "'");
    } else if (scope == "graph_rc") {
        if (!graph_key(cfg.mcrc.graph_rc, sub)) throw DataError("config: unknown key '" + key + "'");
    } else if (scope == "synth") {
        if (sub == "extent_x") cfg.synth.extent_x = to_double(key, value);
        else if (sub == "extent_y") cfg.synth.extent_y = to_double(key, value);
        else if (sub == "n_canopy") cfg.synth.n_canopy = to_int(key, value);
        else if (sub == "n_understory") cfg.synth.n_understory = to_int(key, value);
        else if (sub == "crown_model") {
            if (value == "cone") cfg.synth.crown_model = CrownModel::Cone;
            else if (value == "hemisphere") cfg.synth.crown_model = CrownModel::Hemisphere;
            else throw DataError("config: bad crown_model '" + value + "' (cone, hemisphere)");
        } else if (sub == "height_min") cfg.synth.height_min = to_double(key, value);
        else if (sub == "height_max") cfg.synth.height_max = to_double(key, value);
        else if (sub == "radius_min") cfg.synth.radius_min = to_double(key, value);
        else if (sub == "radius_max") cfg.synth.radius_max = to_double(key, value);
        else if (sub == "point_density") cfg.synth.point_density = to_double(key, value);
        else if (sub == "ground_slope") cfg.synth.ground_slope = to_double(key, value);
        else if (sub == "noise_sigma") cfg.synth.noise_sigma = to_double(key, value);
        else if (sub == "crown_overlap") cfg.synth.crown_overlap = to_double(key, value);
        else if (sub == "crown_base_frac") cfg.synth.crown_base_frac = to_double(key, value);
        else if (sub == "feature_dim") cfg.synth.feature_dim = to_int(key, value);
        else if (sub == "seed") cfg.synth.seed = to_u64(key, value);
        else throw DataError("config: unknown key '" + key + "'");
    } else if (scope == "rpca") {
        if (sub == "lambda") cfg.rpca.lambda = to_double(key, value);
        else if (sub == "tol") cfg.rpca.tol = to_double(key, value);
        else if (sub == "max_iter") cfg.rpca.max_iter = to_int(key, value);
        else if (sub == "comp_lo") cfg.rpca.comp_lo = to_int(key, value);
        else if (sub == "comp_hi") cfg.rpca.comp_hi = to_int(key, value);
        else throw DataError("config: unknown key '" + key + "'");
    } else if (scope == "validate") {
        if (sub == "max_xy") cfg.validate_max_xy = to_double(key, value);
        else if (sub == "max_dz") cfg.validate_max_dz = to_double(key, value);
        else throw DataError("config: unknown key '" + key + "'");
    } else {
        throw DataError("config: unknown key '" + key + "'");
    }
}

ToolConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open config: " + path);
    ToolConfig cfg;
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string s = trim(line);
        if (s.empty() || s[0] == '#') continue;
        auto eq = s.find('=');
        if (eq == std::string::npos)
            throw DataError(path + ":" + std::to_string(lineno) + ": expected key = value");
        std::string key = trim(s.substr(0, eq));
        std::string value = trim(s.substr(eq + 1));
        if (key.empty()) throw DataError(path + ":" + std::to_string(lineno) + ": empty key");
        try {
            apply_config_line(cfg, key, value);
        } catch (const DataError& e) {
            throw DataError(path + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    return cfg;
}

std::vector<std::string> dump_config(const ToolConfig& cfg) {
    std::vector<std::string> out;
    auto kv = [&](const std::string& k, const std::string& v) { out.push_back(k + " = " + v); };
    kv("terrain.cell_size", fmt_g(cfg.mcrc.terrain.cell_size));
    kv("terrain.max_window", fmt_g(cfg.mcrc.terrain.max_window));
    kv("terrain.slope_tolerance", fmt_g(cfg.mcrc.terrain.slope_tolerance));
    kv("terrain.elevation_threshold", fmt_g(cfg.mcrc.terrain.elevation_threshold));
    kv("mcrc.chm_smoothing_sigma", fmt_g(cfg.mcrc.chm_smoothing_sigma));
    kv("mcrc.mwf_window", std::to_string(cfg.mcrc.mwf_window));
    kv("mcrc.min_tree_height", fmt_g(cfg.mcrc.min_tree_height));
    kv("mcrc.prior_radius", fmt_g(cfg.mcrc.prior_radius));
    kv("mcrc.tau_ncut", fmt_g(cfg.mcrc.tau_ncut));
    kv("mcrc.min_points", std::to_string(cfg.mcrc.min_points));
    kv("mcrc.kappa", fmt_g(cfg.mcrc.kappa));
    kv("mcrc.use_features", cfg.mcrc.use_features ? "true" : "false");
    kv("graph_mc.d", fmt_g(cfg.mcrc.graph_mc.d));
    kv("graph_mc.sigma_xy", fmt_g(cfg.mcrc.graph_mc.sigma_xy));
    kv("graph_mc.sigma_z", fmt_g(cfg.mcrc.graph_mc.sigma_z));
    kv("graph_mc.sigma_fts", fmt_g(cfg.mcrc.graph_mc.sigma_fts));
    kv("graph_rc.d", fmt_g(cfg.mcrc.graph_rc.d));
    kv("graph_rc.sigma_xy", fmt_g(cfg.mcrc.graph_rc.sigma_xy));
    kv("graph_rc.sigma_z", fmt_g(cfg.mcrc.graph_rc.sigma_z));
    kv("graph_rc.sigma_fts", fmt_g(cfg.mcrc.graph_rc.sigma_fts));
    kv("synth.extent_x", fmt_g(cfg.synth.extent_x));
    kv("synth.extent_y", fmt_g(cfg.synth.extent_y));
    kv("synth.n_canopy", std::to_string(cfg.synth.n_canopy));
    kv("synth.n_understory", std::to_string(cfg.synth.n_understory));
    kv("synth.crown_model", cfg.synth.crown_model == CrownModel::Cone ? "cone" : "hemisphere");
    kv("synth.height_min", fmt_g(cfg.synth.height_min));
    kv("synth.height_max", fmt_g(cfg.synth.height_max));
    kv("synth.radius_min", fmt_g(cfg.synth.radius_min));
    kv("synth.radius_max", fmt_g(cfg.synth.radius_max));
    kv("synth.point_density", fmt_g(cfg.synth.point_density));
    kv("synth.ground_slope", fmt_g(cfg.synth.ground_slope));
    kv("synth.noise_sigma", fmt_g(cfg.synth.noise_sigma));
    kv("synth.crown_overlap", fmt_g(cfg.synth.crown_overlap));
    kv("synth.crown_base_frac", fmt_g(cfg.synth.crown_base_frac));
    kv("synth.feature_dim", std::to_string(cfg.synth.feature_dim));
    kv("synth.seed", std::to_string(cfg.synth.seed));
    kv("rpca.lambda", fmt_g(cfg.rpca.lambda));
    kv("rpca.tol", fmt_g(cfg.rpca.tol));
    kv("rpca.max_iter", std::to_string(cfg.rpca.max_iter));
    kv("rpca.comp_lo", std::to_string(cfg.rpca.comp_lo));
    kv("rpca.comp_hi", std::to_string(cfg.rpca.comp_hi));
    kv("validate.max_xy", fmt_g(cfg.validate_max_xy));
    kv("validate.max_dz", fmt_g(cfg.validate_max_dz));
    return out;
}

}  // namespace crowncut
