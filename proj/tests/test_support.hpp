#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "crowncut/graph.hpp"
#include "crowncut/spectral.hpp"

namespace testsup {

using crowncut::Edge;
using crowncut::PointCloud;
using crowncut::SparseAffinity;

// Scratch directory removed on destruction.
struct TempDir {
    std::filesystem::path path;

    explicit TempDir(const std::string& tag) {
        static std::atomic<int> counter{0};
        path = std::filesystem::temp_directory_path() /
               ("crowncut_test_" + tag + "_" + std::to_string(counter.fetch_add(1)));
        std::filesystem::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

inline SparseAffinity graph_from_edges(uint32_t n, std::vector<Edge> edges) {
    std::sort(edges.begin(), edges.end(),
              [](const Edge& a, const Edge& b) { return a.i != b.i ? a.i < b.i : a.j < b.j; });
    SparseAffinity g;
    g.n = n;
    g.edges = std::move(edges);
    g.degrees.assign(n, 0.0);
    for (const Edge& e : g.edges) {
        g.degrees[e.i] += e.w;
        g.degrees[e.j] += e.w;
    }
    return g;
}

inline void add_edge(std::vector<Edge>& edges, uint32_t i, uint32_t j, double w) {
    if (i > j) std::swap(i, j);
    edges.push_back({i, j, w});
}

inline void add_clique(std::vector<Edge>& edges, uint32_t first, uint32_t count, double w) {
    for (uint32_t a = 0; a < count; ++a)
        for (uint32_t b = a + 1; b < count; ++b) add_edge(edges, first + a, first + b, w);
}

inline void add_ring(std::vector<Edge>& edges, uint32_t first, uint32_t count, double w) {
    for (uint32_t a = 0; a < count; ++a)
        add_edge(edges, first + a, first + (a + 1) % count, w);
}

// Ring plus random chords: connected, no isolated vertices.
inline SparseAffinity random_connected_graph(std::mt19937_64& rng, uint32_t n,
                                             double chord_prob = 0.15) {
    std::uniform_real_distribution<double> uw(0.1, 1.0);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    std::vector<Edge> edges;
    add_ring(edges, 0, n, 1.0);
    for (uint32_t i = 0; i < n; ++i)
        for (uint32_t j = i + 2; j < n; ++j) {
            if (i == 0 && j == n - 1) continue;  // ring edge already present
            if (u01(rng) < chord_prob) add_edge(edges, i, j, uw(rng));
        }
    return graph_from_edges(n, std::move(edges));
}

// Two cliques of sizes a and b joined by one bridge edge.
inline SparseAffinity dumbbell(uint32_t a, uint32_t b, double intra, double bridge) {
    std::vector<Edge> edges;
    add_clique(edges, 0, a, intra);
    add_clique(edges, a, b, intra);
    add_edge(edges, 0, a, bridge);
    return graph_from_edges(a + b, std::move(edges));
}

inline Eigen::MatrixXd dense_normalized_laplacian(const SparseAffinity& g) {
    int n = static_cast<int>(g.n);
    Eigen::MatrixXd W = Eigen::MatrixXd::Zero(n, n);
    for (const Edge& e : g.edges) {
        W(e.i, e.j) += e.w;
        W(e.j, e.i) += e.w;
    }
    Eigen::VectorXd d = W.rowwise().sum();
    Eigen::MatrixXd L = Eigen::MatrixXd::Identity(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (W(i, j) != 0) L(i, j) -= W(i, j) / std::sqrt(d[i] * d[j]);
    return L;
}

inline std::vector<double> dense_smallest_eigenvalues(const SparseAffinity& g, int k) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dense_normalized_laplacian(g));
    std::vector<double> out(es.eigenvalues().data(), es.eigenvalues().data() + k);
    return out;
}

// Minimum discrete Ncut over all nontrivial bipartitions (n <= 20).
inline double brute_force_min_ncut(const SparseAffinity& g, std::vector<int>* best_labels = nullptr) {
    uint32_t n = g.n;
    double best = std::numeric_limits<double>::infinity();
    std::vector<int> labels(n);
    for (uint64_t mask = 1; mask + 1 < (1ull << n); ++mask) {
        for (uint32_t i = 0; i < n; ++i) labels[i] = (mask >> i) & 1u;
        double e = crowncut::ncut_energy(g, labels, 2);
        if (e < best) {
            best = e;
            if (best_labels) *best_labels = labels;
        }
    }
    return best;
}

// Same bipartition irrespective of label order.
inline bool same_bipartition(const std::vector<int>& a, const std::vector<int>& b) {
    if (a.size() != b.size() || a.empty()) return false;
    bool direct = true, flipped = true;
    for (size_t i = 0; i < a.size(); ++i) {
        direct &= a[i] == b[i];
        flipped &= a[i] == 1 - b[i];
    }
    return direct || flipped;
}

// Deterministic ideal two-cone canopy surface, cell size 1.
inline crowncut::RasterGrid cone_chm(int ncols, int nrows,
                                     const std::vector<std::array<double, 4>>& cones) {
    crowncut::RasterGrid g(ncols, nrows, 0.0, 0.0, 1.0, 0.0);
    for (int r = 0; r < nrows; ++r)
        for (int c = 0; c < ncols; ++c) {
            double best = 0.0;
            for (const auto& k : cones) {  // {cx, cy, height, radius}
                double dx = g.cx(c) - k[0], dy = g.cy(r) - k[1];
                double rho = std::sqrt(dx * dx + dy * dy);
                if (rho < k[3]) best = std::max(best, k[2] * (1.0 - rho / k[3]));
            }
            g.at(r, c) = best;
        }
    return g;
}

}  // namespace testsup
