#pragma once

#include <string>
#include <vector>

#include "crowncut/pointcloud.hpp"
#include "crowncut/raster.hpp"

namespace crowncut {

struct Apex {
    double x = 0, y = 0;
    double chm_height = 0;
    int row = 0, col = 0;
};

struct ApexSet {
    std::vector<Apex> apexes;
    bool empty() const { return apexes.empty(); }
    size_t size() const { return apexes.size(); }
};

// C disjoint seed clusters over point indices; clusters[c] is sorted.
// source_apex[c] lists the apex indices merged into cluster c.
struct PriorSet {
    std::vector<std::vector<uint32_t>> clusters;
    std::vector<std::vector<int>> source_apex;
    std::vector<std::string> warnings;
    size_t count() const { return clusters.size(); }
};

// Moving-window maxima: a cell is an apex when it is >= min_height, >= every
// cell in the Chebyshev window, and strictly greater than at least one of
// them; equal-valued candidates within one window keep only the
// lexicographically smallest (row, col).
ApexSet local_maxima_mwf(const RasterGrid& chm, int window_radius, double min_height);

// Meyer-style priority flooding of the inverted CHM from the marker cells.
// Cells with chm > min_height receive the label (1-based) of the marker they
// drain to; everything else is 0. 4-connected regions.
RasterGrid watershed_markers(const RasterGrid& chm, const ApexSet& markers,
                             double min_height = 0.0);

// Seed clusters: all cloud points within horizontal radius of each apex
// (closed ball); seed sets sharing a point are merged; apexes with no nearby
// points are dropped with a warning.
PriorSet build_priors(const PointCloud& cloud, const ApexSet& apexes, double radius = 0.7);

void save_apexes_csv(const ApexSet& apexes, const std::string& path);
ApexSet load_apexes_csv(const std::string& path);

}  // namespace crowncut
