#pragma once

#include "crowncut/pointcloud.hpp"
#include "crowncut/raster.hpp"

namespace crowncut {

struct TerrainParams {
    double cell_size = 0.5;            // m
    double max_window = 10.0;          // m
    double slope_tolerance = 0.3;      // m added per window doubling
    double elevation_threshold = 0.5;  // m
};

// Progressive morphological filtering on the gridded minimum surface:
// window sizes double from 1 cell up to max_window, bumps that rise more than
// the step tolerance above the opened surface are cut away, and points within
// elevation_threshold of the final surface are ground. Every point ends up
// labeled ground or object.
PointCloud classify_ground(const PointCloud& cloud, const TerrainParams& params);

// Per-cell minimum z over ground-labeled points; empty cells filled from the
// nearest non-empty cell (grid BFS).
RasterGrid rasterize_dtm(const PointCloud& cloud, double cell_size);

// Per-cell maximum of z - dtm(point's cell) over object-labeled points,
// clamped at 0; cells without object points stay 0.
RasterGrid rasterize_chm(const PointCloud& cloud, const RasterGrid& dtm, double cell_size);

// Gaussian smoothing, kernel truncated at 3 sigma (cells), separable; NODATA
// cells are excluded from the average and left NODATA in the output.
RasterGrid smooth_raster(const RasterGrid& grid, double sigma);

}  // namespace crowncut
