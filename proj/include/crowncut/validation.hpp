#pragma once

#include <string>
#include <vector>

#include "crowncut/pointcloud.hpp"

namespace crowncut {

struct GroundTruthTree {
    double x = 0, y = 0;
    double height = 0;
};

struct MatchPair {
    int candidate_id = 0;
    int truth_id = 0;
    double d_xy = 0;
    double d_z = 0;  // candidate height - truth height
};

struct MatchReport {
    std::vector<MatchPair> pairs;
    size_t n_extracted = 0;
    size_t n_truth = 0;
    size_t n_matched = 0;
};

// Height tiers, half-open [lo, hi); hi = +inf for the top band.
struct BandRow {
    std::string label;
    double lo = 0, hi = 0;
    size_t truth = 0;
    size_t extracted = 0;
    size_t matched = 0;
};

// One-to-one matching: all candidate/truth pairs within the horizontal and
// vertical gates are scored by sqrt(d_xy^2 + d_z^2) and taken greedily in
// ascending score, ties by lower truth id then lower candidate id.
MatchReport match_trees(const std::vector<TreeRecord>& candidates,
                        const std::vector<GroundTruthTree>& truth, double max_xy = 5.0,
                        double max_dz = 5.0);

// Per-band extracted/matched/truth counts using tiers >=20, 15-20, 10-15,
// 5-10, 2-5, 0-2 m, plus a trailing overall row. Candidates are banded by
// their own height, truth rows by truth height.
std::vector<BandRow> band_summary(const MatchReport& report,
                                  const std::vector<TreeRecord>& candidates,
                                  const std::vector<GroundTruthTree>& truth);

std::vector<GroundTruthTree> load_truth_csv(const std::string& path);
void save_truth_csv(const std::vector<GroundTruthTree>& truth, const std::string& path);
void write_report_csv(const MatchReport& report, const std::vector<BandRow>& bands,
                      const std::string& path);

}  // namespace crowncut
