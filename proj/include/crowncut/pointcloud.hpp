#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "crowncut/raster.hpp"

namespace crowncut {

enum class ClassLabel : uint8_t { Unclassified = 0, Ground = 1, Object = 2 };

// 3D LiDAR returns with optional class labels and optional per-point feature
// vectors of uniform length feature_dim. Indices are stable 0-based ids.
// A point may carry no features even when feature_dim > 0 (absent marker);
// has_features tracks that per point.
struct PointCloud {
    std::vector<double> x, y, z;
    std::vector<ClassLabel> labels;       // empty or size()==n
    int feature_dim = 0;
    std::vector<double> features;         // n * feature_dim, row per point
    std::vector<uint8_t> has_features;    // empty (all present) or size()==n

    size_t size() const { return x.size(); }
    bool empty() const { return x.empty(); }
    bool point_has_features(size_t i) const {
        if (feature_dim == 0) return false;
        return has_features.empty() || has_features[i] != 0;
    }
    const double* feature_row(size_t i) const { return features.data() + i * feature_dim; }

    void push_point(double px, double py, double pz) {
        x.push_back(px);
        y.push_back(py);
        z.push_back(pz);
    }

    // Subset copy preserving labels and features; indices must be in range.
    PointCloud select(const std::vector<uint32_t>& idx) const;
};

enum class CloudFormat { XyzCsv, XyzBinary };

// CSV: `x,y,z[,f1,...,fk]`, optional single header line. Binary: magic "PCLD",
// u32 count, u32 feature_dim, then per point (3+k) little-endian float64.
PointCloud load_cloud(const std::string& path, CloudFormat format);
void save_cloud(const PointCloud& cloud, const std::string& path, CloudFormat format);

// Infer format from extension: .pcb/.bin -> binary, anything else -> CSV.
CloudFormat guess_format(const std::string& path);

// Assign each point the feature vector of the raster pixel containing its
// (x,y); one band per raster. Points outside the extent or on a NODATA pixel
// get the absent marker.
PointCloud attach_features(const PointCloud& cloud, const std::vector<RasterGrid>& raster_stack);

struct TreeRecord {
    int tree_id = 0;
    double apex_x = 0, apex_y = 0;
    double height = 0;
    double crown_area = 0;
    size_t n_points = 0;
};

// Per-point tree labels over the full cloud; ground points carry -1.
struct Segmentation {
    std::vector<int> labels;
    std::vector<TreeRecord> trees;
};

// labels CSV `point_index,tree_id` + tree table CSV
// `tree_id,apex_x,apex_y,height_m,crown_area_m2,n_points`.
void write_segmentation(const Segmentation& seg, const std::string& labels_path,
                        const std::string& trees_path);
std::vector<int> load_segmentation_labels(const std::string& path);
std::vector<TreeRecord> load_tree_table(const std::string& path);
void write_tree_table(const std::vector<TreeRecord>& trees, const std::string& path);

}  // namespace crowncut
