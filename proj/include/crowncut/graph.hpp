#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "crowncut/pointcloud.hpp"

namespace crowncut {

struct GraphParams {
    double d = 1.0;           // neighborhood radius, m
    double sigma_xy = 1.0;    // m
    double sigma_z = 3.0;     // m
    double sigma_fts = 0.0;   // feature units; 0 = feature term unused
};

struct Edge {
    uint32_t i = 0, j = 0;  // i < j
    double w = 0;
};

// Symmetric nonnegative sparse affinity graph. One stored entry per unordered
// pair; degrees[i] = sum of incident weights. Isolated vertices are permitted
// and listed in isolated().
struct SparseAffinity {
    uint32_t n = 0;
    std::vector<Edge> edges;
    std::vector<double> degrees;

    std::vector<uint32_t> isolated() const;
    size_t edge_count() const { return edges.size(); }
};

// Gaussian affinity over all pairs within 3D distance d:
//   w = exp(-dxy^2/sxy^2) * exp(-dz^2/sz^2) * exp(-dfts^2/sfts^2)
// The feature factor is 1 when either endpoint lacks features. Neighbor
// search uses a uniform voxel grid of cell size d.
SparseAffinity build_graph(const PointCloud& cloud, const GraphParams& params);

struct Subgraph {
    SparseAffinity g;
    std::vector<uint32_t> to_parent;  // new index -> original index
};

// Induced subgraph on the given vertex set (any order, duplicates ignored),
// reindexed and with degrees recomputed from the surviving edges.
Subgraph subgraph(const SparseAffinity& g, const std::vector<uint32_t>& indices);

void dump_edges_csv(const SparseAffinity& g, const std::string& path);

}  // namespace crowncut
