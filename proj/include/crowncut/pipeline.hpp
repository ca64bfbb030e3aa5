#pragma once

#include <string>
#include <utility>
#include <vector>

#include "crowncut/graph.hpp"
#include "crowncut/spectral.hpp"
#include "crowncut/terrain.hpp"
#include "crowncut/treetops.hpp"

namespace crowncut {

struct McrcConfig {
    TerrainParams terrain;
    double chm_smoothing_sigma = 1.0;  // cells
    int mwf_window = 3;                // cells
    double min_tree_height = 2.0;      // m
    double prior_radius = 0.7;         // m
    GraphParams graph_mc{1.0, 1.0, 3.0, 0.005};
    GraphParams graph_rc{1.0, 0.5, 2.0, 0.005};
    // Recursion threshold. Crowns are thin sampled surfaces: internal cuts of
    // a single crown measure ~0.05-0.22 while genuine tree-to-tree seams and
    // vertical gaps sit at 0-0.05, so the threshold has to sit between the
    // two populations rather than at the textbook 0.3.
    double tau_ncut = 0.03;
    int min_points = 5;
    double kappa = 0.8;
    bool use_features = false;
};

struct StageTiming {
    std::string stage;
    double ms = 0;
};

struct PipelineDiagnostics {
    RasterGrid dtm, chm, chm_smooth;
    ApexSet apexes;
    RasterGrid watershed_labels;
    McDiagnostics mc;
    std::vector<RcNode> rc_nodes;  // every recursion node, clusters in order
    std::vector<StageTiming> timings;
    std::vector<std::string> warnings;
    bool fell_back_to_rc = false;
};

// Full workflow: ground filtering, DTM/CHM, smoothing, window maxima, priors,
// multiclass cut on the object graph, then a recursive cut inside every
// multiclass cluster. Isolated graph vertices become singleton trees. Falls
// back to rc_only (with a warning) when no usable priors exist.
Segmentation mcrc(const PointCloud& cloud, const McrcConfig& config, int threads = 1,
                  PipelineDiagnostics* diag = nullptr);

// Baseline without priors: recursive cut over the whole object graph.
Segmentation rc_only(const PointCloud& cloud, const McrcConfig& config, int threads = 1,
                     PipelineDiagnostics* diag = nullptr);

// CHM-only baseline: window maxima + marker watershed on the smoothed CHM;
// object points take the label of their cell's region (nearest region for
// unlabeled cells). Tree height is the smoothed CHM at the marker, crown area
// the region's cell area.
Segmentation watershed_only(const PointCloud& cloud, const McrcConfig& config,
                            PipelineDiagnostics* diag = nullptr);

// Per-tree metrics from labeled points: height = max(z - dtm at the point),
// apex = (x,y) of the maximizing point, crown area = 2D convex hull area.
std::vector<TreeRecord> extract_tree_metrics(const std::vector<int>& labels,
                                             const PointCloud& cloud, const RasterGrid& dtm);

// Area of the 2D convex hull of a point set (0 for < 3 non-collinear points).
double convex_hull_area(const std::vector<double>& xs, const std::vector<double>& ys);

}  // namespace crowncut
