#pragma once

#include <Eigen/Dense>
#include <vector>

#include "crowncut/raster.hpp"

namespace crowncut {

struct RpcaResult {
    Eigen::MatrixXd L;
    Eigen::MatrixXd S;
    int iterations = 0;
    double primal_residual = 0;           // ||M - L - S||_F at exit
    bool converged = false;
    std::vector<double> objective_trace;  // ||L||_* + lambda*||S||_1 per iteration
};

// Principal component pursuit, min ||L||_* + lambda*||S||_1 s.t. M = L + S,
// by ADMM: singular-value thresholding on L, entrywise soft-thresholding on S,
// dual update Y += rho*(M - L - S). Fixed rho = 0.25*m*n/||M||_1. Stops when
// ||M - L - S||_F <= tol*||M||_F. lambda <= 0 selects the default
// 1/sqrt(max(m,n)).
RpcaResult rpca(const Eigen::MatrixXd& M, double lambda = -1.0, double tol = 1e-7,
                int max_iter = 500);

// SVD of L (uncentered); score raster per requested component, 1-indexed by
// descending singular value. Scores are U.col(c-1)*sigma_(c-1) reshaped to the
// geometry row-major. Default component range is 2..5.
std::vector<RasterGrid> pc_score_rasters(const Eigen::MatrixXd& L, int comp_lo, int comp_hi,
                                         const RasterGrid& geometry);

}  // namespace crowncut
