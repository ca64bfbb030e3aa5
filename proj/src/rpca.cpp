#include "crowncut/rpca.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <random>

namespace crowncut {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

MatrixXd soft_threshold(const MatrixXd& X, double t) {
    return X.unaryExpr([t](double v) { return v > t ? v - t : (v < -t ? v + t : 0.0); });
}

// Exact singular-value thresholding via dense SVD.
MatrixXd svt_dense(const MatrixXd& X, double t, double& nuclear_after) {
    Eigen::BDCSVD<MatrixXd> svd(X, Eigen::ComputeThinU | Eigen::ComputeThinV);
    VectorXd s = svd.singularValues();
    nuclear_after = 0;
    for (int i = 0; i < s.size(); ++i) {
        s[i] = std::max(0.0, s[i] - t);
        nuclear_after += s[i];
    }
    return svd.matrixU() * s.asDiagonal() * svd.matrixV().transpose();
}

// Randomized partial SVD for the thresholding step: only singular values
// above t survive, so a sketch that captures the > t part suffices. The rank
// guess doubles until the smallest captured value falls below t.
MatrixXd svt_randomized(const MatrixXd& X, double t, double& nuclear_after) {
    int m = static_cast<int>(X.rows()), n = static_cast<int>(X.cols());
    int maxr = std::min(m, n);
    std::mt19937_64 rng(0xC0FFEE123456789ull ^ (static_cast<uint64_t>(m) << 20) ^
                        static_cast<uint64_t>(n));
    std::normal_distribution<double> gauss(0.0, 1.0);
    int r = std::min(maxr, 16);
    while (true) {
        int sk = std::min(maxr, r + 8);
        MatrixXd Omega(n, sk);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < sk; ++j) Omega(i, j) = gauss(rng);
        MatrixXd Y = X * Omega;
        for (int q = 0; q < 2; ++q) {
            Eigen::HouseholderQR<MatrixXd> qr(Y);
            MatrixXd Q = qr.householderQ() * MatrixXd::Identity(m, std::min<int>(m, sk));
            Y = X * (X.transpose() * Q);
        }
        Eigen::HouseholderQR<MatrixXd> qr(Y);
        MatrixXd Q = qr.householderQ() * MatrixXd::Identity(m, std::min<int>(m, sk));
        MatrixXd B = Q.transpose() * X;
        Eigen::BDCSVD<MatrixXd> svd(B, Eigen::ComputeThinU | Eigen::ComputeThinV);
        VectorXd s = svd.singularValues();
        if (sk >= maxr || s[s.size() - 1] <= t) {
            nuclear_after = 0;
            for (int i = 0; i < s.size(); ++i) {
                s[i] = std::max(0.0, s[i] - t);
                nuclear_after += s[i];
            }
            return (Q * svd.matrixU()) * s.asDiagonal() * svd.matrixV().transpose();
        }
        r *= 2;
    }
}

MatrixXd svt(const MatrixXd& X, double t, double& nuclear_after) {
    if (std::min(X.rows(), X.cols()) >= 1000) return svt_randomized(X, t, nuclear_after);
    return svt_dense(X, t, nuclear_after);
}

}  // namespace

RpcaResult rpca(const Eigen::MatrixXd& M, double lambda, double tol, int max_iter) {
    if (!M.allFinite()) throw DataError("rpca: non-finite entries in M");
    int m = static_cast<int>(M.rows()), n = static_cast<int>(M.cols());
    if (m == 0 || n == 0) throw DataError("rpca: empty matrix");
    if (lambda <= 0) lambda = 1.0 / std::sqrt(static_cast<double>(std::max(m, n)));

    RpcaResult res;
    double norm_m = M.norm();
    double l1 = M.cwiseAbs().sum();
    if (norm_m == 0) {
        res.L = MatrixXd::Zero(m, n);
        res.S = MatrixXd::Zero(m, n);
        res.iterations = 1;
        res.converged = true;
        res.objective_trace.push_back(0.0);
        return res;
    }
    double rho = 0.25 * m * n / l1;

    MatrixXd L = MatrixXd::Zero(m, n);
    MatrixXd S = MatrixXd::Zero(m, n);
    MatrixXd Y = MatrixXd::Zero(m, n);
    for (int it = 1; it <= max_iter; ++it) {
        double nuc = 0;
        L = svt(M - S + Y / rho, 1.0 / rho, nuc);
        S = soft_threshold(M - L + Y / rho, lambda / rho);
        MatrixXd R = M - L - S;
        Y += rho * R;
        res.iterations = it;
        res.primal_residual = R.norm();
        res.objective_trace.push_back(nuc + lambda * S.cwiseAbs().sum());
        if (res.primal_residual <= tol * norm_m) {
            res.converged = true;
            break;
        }
    }
    res.L = std::move(L);
    res.S = std::move(S);
    return res;
}

std::vector<RasterGrid> pc_score_rasters(const Eigen::MatrixXd& L, int comp_lo, int comp_hi,
                                         const RasterGrid& geometry) {
    if (comp_lo < 1 || comp_hi < comp_lo)
        throw DataError("pc_score_rasters: invalid component range");
    if (L.rows() != static_cast<Eigen::Index>(geometry.size()))
        throw DataError("pc_score_rasters: matrix rows do not match the raster geometry");

    Eigen::BDCSVD<Eigen::MatrixXd> svd(L, Eigen::ComputeThinU | Eigen::ComputeThinV);
    Eigen::VectorXd s = svd.singularValues();
    double cutoff = std::max(L.rows(), L.cols()) * 2.220446049250313e-16 * (s.size() ? s[0] : 0.0);
    int rank = 0;
    for (int i = 0; i < s.size(); ++i)
        if (s[i] > cutoff) ++rank;
    if (comp_hi > rank)
        throw DataError("pc_score_rasters: rank " + std::to_string(rank) + " < component " +
                        std::to_string(comp_hi));

    std::vector<RasterGrid> out;
    for (int c = comp_lo; c <= comp_hi; ++c) {
        RasterGrid g(geometry.ncols(), geometry.nrows(), geometry.x0(), geometry.y0(),
                     geometry.cell(), 0.0, geometry.nodata());
        Eigen::VectorXd score = svd.matrixU().col(c - 1) * s[c - 1];
        for (size_t i = 0; i < g.size(); ++i) g.values()[i] = score[static_cast<Eigen::Index>(i)];
        out.push_back(std::move(g));
    }
    return out;
}

}  // namespace crowncut
