#pragma once

#include <cstdint>
#include <vector>

#include "crowncut/pointcloud.hpp"
#include "crowncut/validation.hpp"

namespace crowncut {

enum class CrownModel { Cone, Hemisphere };

struct ForestSpec {
    double extent_x = 30.0, extent_y = 30.0;  // m
    int n_canopy = 10;
    int n_understory = 0;
    CrownModel crown_model = CrownModel::Cone;
    double height_min = 8.0, height_max = 20.0;    // m
    double radius_min = 1.5, radius_max = 2.5;     // m
    double point_density = 50.0;                   // pts/m^2
    double ground_slope = 0.0;                     // dz/dx
    double noise_sigma = 0.05;                     // m
    double crown_overlap = 0.2;                    // allowed overlap fraction
    double crown_base_frac = 0.35;                 // live crown starts at this height fraction
    int feature_dim = 0;
    uint64_t seed = 1;
};

struct SynthForest {
    PointCloud cloud;                    // true class labels set
    std::vector<GroundTruthTree> truth;  // canopy trees first, then understory
    std::vector<int> point_tree;         // per point: truth index or -1 (ground)
    int n_canopy = 0;                    // leading truth entries that are canopy
};

// Deterministic synthetic plot: a sloped ground plane and crown surfaces
// sampled at point_density with Gaussian z-noise. Crowns span
// [crown_base_frac * h, h] (the live crown; conifer crowns do not reach the
// ground). Canopy centers are placed by rejection sampling with minimum
// spacing (1-overlap)*(r_i+r_j); understory trees sit under canopy crowns at
// height < 0.6 x the local canopy surface. Per-tree point streams use
// independent seeds, so the result does not depend on generation order.
SynthForest generate_forest(const ForestSpec& spec);

void save_point_tree_csv(const std::vector<int>& point_tree, const std::string& path);

}  // namespace crowncut
