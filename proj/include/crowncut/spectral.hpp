#pragma once

#include <Eigen/Dense>
#include <vector>

#include "crowncut/graph.hpp"
#include "crowncut/treetops.hpp"

namespace crowncut {

// Thrown by binary_ncut when thresholding cannot produce two non-empty sides.
struct IndivisibleError : SolverError {
    explicit IndivisibleError(const std::string& msg) : SolverError(msg) {}
};

struct EigenPairs {
    std::vector<double> values;    // ascending, in [0, 2]
    Eigen::MatrixXd vectors;       // n x k, orthonormal columns
    std::vector<double> residuals; // ||A v - lambda v||_2 per pair
};

struct CutResult {
    std::vector<int> labels;  // per-vertex cluster id in [0, C)
    double ncut_energy = 0;
    int C = 0;
};

// k smallest eigenpairs of the normalized Laplacian D^{-1/2}(D-W)D^{-1/2} by
// restarted Lanczos with full reorthogonalization and locking. The trivial
// eigenvector D^{1/2}1 (lambda = 0) is locked analytically up front, so
// values[0] is exactly 0. Requires k < n and all degrees > 0.
EigenPairs smallest_eigenpairs(const SparseAffinity& g, int k, double tol = 1e-10);

// Discrete Ncut energy sum_c cut(c, V\c)/assoc(c, V) of a labeling. A cluster
// with assoc = 0 (all members isolated) also has cut = 0 and contributes 0.
double ncut_energy(const SparseAffinity& g, const std::vector<int>& labels, int C);

// Two-way cut from the second-smallest eigenvector: threshold the
// generalized-problem vector x = D^{-1/2} v2 at its mean (median fallback;
// IndivisibleError if both fail).
CutResult binary_ncut(const SparseAffinity& g);

struct McDiagnostics {
    std::vector<double> eigenvalues;
    std::vector<double> residuals;
    std::vector<double> correlations;  // per cluster, vs kappa
    double kappa = 0;
    int violations = 0;
    int embedding_dims = 0;
};

// Seeded multiclass cut: C smallest nontrivial eigenvectors form embedding
// rows (scaled by 1/sqrt(d_i)); prior points carry immutable labels, k-means
// centroids start from the prior rows, free points move until stable. Per
// cluster the correlation between output and prior indicators is reported
// against kappa in diagnostics; it is not enforced in-solver.
CutResult multiclass_ncut_with_priors(const SparseAffinity& g, const PriorSet& priors,
                                      double kappa, McDiagnostics* diag = nullptr);

struct RcNode {
    std::vector<uint32_t> vertices;  // original graph indices
    double ncut = -1;                // energy of the attempted split, -1 = none
    bool is_leaf = false;
};

struct RcDiagnostics {
    std::vector<RcNode> nodes;  // DFS order
};

// Recursive binary cut: split while the discrete Ncut <= tau and both sides
// keep >= min_points vertices; degree-0 vertices become singleton leaves.
// Leaves are labeled in DFS order. Sibling subtrees may be solved on worker
// threads; results are schedule-independent.
CutResult recursive_ncut(const SparseAffinity& g, double tau, int min_points,
                         RcDiagnostics* diag = nullptr, int threads = 1);

}  // namespace crowncut
