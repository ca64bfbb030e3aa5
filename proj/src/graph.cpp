#include "crowncut/graph.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <unordered_map>

namespace crowncut {

std::vector<uint32_t> SparseAffinity::isolated() const {
    std::vector<uint32_t> out;
    for (uint32_t i = 0; i < n; ++i)
        if (degrees[i] == 0.0) out.push_back(i);
    return out;
}

namespace {

// Voxel key packing for the uniform grid; coordinates are offset to be
// nonnegative before packing.
uint64_t pack(int32_t a, int32_t b, int32_t c) {
    return (static_cast<uint64_t>(static_cast<uint32_t>(a)) << 42) ^
           (static_cast<uint64_t>(static_cast<uint32_t>(b) & 0x1FFFFF) << 21) ^
           (static_cast<uint64_t>(static_cast<uint32_t>(c) & 0x1FFFFF));
}

}  // namespace

SparseAffinity build_graph(const PointCloud& cloud, const GraphParams& params) {
    if (cloud.empty()) throw DataError("build_graph: empty cloud");
    if (params.d <= 0) throw DataError("build_graph: d must be positive");
    if (params.sigma_xy <= 0 || params.sigma_z <= 0)
        throw DataError("build_graph: sigmas must be positive");
    bool any_features = false;
    for (size_t i = 0; i < cloud.size() && !any_features; ++i)
        any_features = cloud.point_has_features(i);
    if (any_features && params.sigma_fts <= 0)
        throw DataError("build_graph: sigma_fts required when points carry features");

    size_t n = cloud.size();
    double inv_d = 1.0 / params.d;
    double minx = cloud.x[0], miny = cloud.y[0], minz = cloud.z[0];
    for (size_t i = 0; i < n; ++i) {
        minx = std::min(minx, cloud.x[i]);
        miny = std::min(miny, cloud.y[i]);
        minz = std::min(minz, cloud.z[i]);
    }
    auto voxel = [&](size_t i, int32_t& vx, int32_t& vy, int32_t& vz) {
        vx = static_cast<int32_t>(std::floor((cloud.x[i] - minx) * inv_d));
        vy = static_cast<int32_t>(std::floor((cloud.y[i] - miny) * inv_d));
        vz = static_cast<int32_t>(std::floor((cloud.z[i] - minz) * inv_d));
    };
    std::unordered_map<uint64_t, std::vector<uint32_t>> grid;
    grid.reserve(n);
    for (size_t i = 0; i < n; ++i) {
        int32_t vx, vy, vz;
        voxel(i, vx, vy, vz);
        grid[pack(vx, vy, vz)].push_back(static_cast<uint32_t>(i));
    }

    double d2 = params.d * params.d;
    double inv_sxy2 = 1.0 / (params.sigma_xy * params.sigma_xy);
    double inv_sz2 = 1.0 / (params.sigma_z * params.sigma_z);
    double inv_sf2 = params.sigma_fts > 0 ? 1.0 / (params.sigma_fts * params.sigma_fts) : 0.0;
    int k = cloud.feature_dim;

    SparseAffinity g;
    g.n = static_cast<uint32_t>(n);
    g.degrees.assign(n, 0.0);
    for (uint32_t i = 0; i < n; ++i) {
        int32_t vx, vy, vz;
        voxel(i, vx, vy, vz);
        for (int32_t dx = -1; dx <= 1; ++dx) {
            for (int32_t dy = -1; dy <= 1; ++dy) {
                for (int32_t dz = -1; dz <= 1; ++dz) {
                    auto it = grid.find(pack(vx + dx, vy + dy, vz + dz));
                    if (it == grid.end()) continue;
                    for (uint32_t j : it->second) {
                        if (j <= i) continue;
                        double ddx = cloud.x[i] - cloud.x[j];
                        double ddy = cloud.y[i] - cloud.y[j];
                        double ddz = cloud.z[i] - cloud.z[j];
                        double dist2 = ddx * ddx + ddy * ddy + ddz * ddz;
                        if (dist2 > d2) continue;
                        double expo = (ddx * ddx + ddy * ddy) * inv_sxy2 + ddz * ddz * inv_sz2;
                        if (inv_sf2 > 0 && cloud.point_has_features(i) &&
                            cloud.point_has_features(j)) {
                            double df2 = 0;
                            const double* fi = cloud.feature_row(i);
                            const double* fj = cloud.feature_row(j);
                            for (int f = 0; f < k; ++f) {
                                double df = fi[f] - fj[f];
                                df2 += df * df;
                            }
                            expo += df2 * inv_sf2;
                        }
                        double w = std::exp(-expo);
                        g.edges.push_back({i, j, w});
                        g.degrees[i] += w;
                        g.degrees[j] += w;
                    }
                }
            }
        }
    }
    // Neighbor voxel scan emits j > i in voxel-bucket order; sort for a
    // canonical edge order independent of hashing.
    std::sort(g.edges.begin(), g.edges.end(), [](const Edge& a, const Edge& b) {
        return a.i != b.i ? a.i < b.i : a.j < b.j;
    });
    // Degrees are rebuilt in sorted edge order so that equal inputs give
    // bitwise-equal degrees regardless of hash iteration.
    std::fill(g.degrees.begin(), g.degrees.end(), 0.0);
    for (const Edge& e : g.edges) {
        g.degrees[e.i] += e.w;
        g.degrees[e.j] += e.w;
    }
    return g;
}

Subgraph subgraph(const SparseAffinity& g, const std::vector<uint32_t>& indices) {
    Subgraph out;
    out.to_parent = indices;
    std::sort(out.to_parent.begin(), out.to_parent.end());
    out.to_parent.erase(std::unique(out.to_parent.begin(), out.to_parent.end()),
                        out.to_parent.end());
    for (uint32_t i : out.to_parent)
        if (i >= g.n) throw DataError("subgraph: index out of range");

    std::vector<int64_t> to_new(g.n, -1);
    for (size_t k = 0; k < out.to_parent.size(); ++k) to_new[out.to_parent[k]] = static_cast<int64_t>(k);

    out.g.n = static_cast<uint32_t>(out.to_parent.size());
    out.g.degrees.assign(out.g.n, 0.0);
    for (const Edge& e : g.edges) {
        int64_t ni = to_new[e.i], nj = to_new[e.j];
        if (ni < 0 || nj < 0) continue;
        Edge ne{static_cast<uint32_t>(std::min(ni, nj)), static_cast<uint32_t>(std::max(ni, nj)),
                e.w};
        out.g.edges.push_back(ne);
        out.g.degrees[ne.i] += e.w;
        out.g.degrees[ne.j] += e.w;
    }
    return out;
}

void dump_edges_csv(const SparseAffinity& g, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot open for writing: " + path);
    out << "i,j,w\n";
    char buf[64];
    for (const Edge& e : g.edges) {
        std::snprintf(buf, sizeof(buf), "%u,%u,%.12g\n", e.i, e.j, e.w);
        out << buf;
    }
    if (!out) throw DataError("write failed: " + path);
}

}  // namespace crowncut
