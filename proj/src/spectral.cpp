#include "crowncut/spectral.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <condition_variable>
#include <deque>
#include <mutex>
#include <numeric>
#include <random>
#include <thread>

namespace crowncut {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// y = L_sym x = x - D^{-1/2} W D^{-1/2} x, applied through the edge list.
struct LaplacianOp {
    const SparseAffinity& g;
    VectorXd inv_sqrt_d;

    explicit LaplacianOp(const SparseAffinity& graph) : g(graph) {
        inv_sqrt_d.resize(g.n);
        for (uint32_t i = 0; i < g.n; ++i) {
            if (g.degrees[i] <= 0)
                throw DataError("eigensolver: isolated vertex (degree 0) in graph");
            inv_sqrt_d[i] = 1.0 / std::sqrt(g.degrees[i]);
        }
    }

    VectorXd apply(const VectorXd& x) const {
        VectorXd u = x.cwiseProduct(inv_sqrt_d);
        VectorXd v = VectorXd::Zero(g.n);
        for (const Edge& e : g.edges) {
            v[e.i] += e.w * u[e.j];
            v[e.j] += e.w * u[e.i];
        }
        return x - v.cwiseProduct(inv_sqrt_d);
    }
};

void orthogonalize(VectorXd& w, const MatrixXd& basis, int cols) {
    if (cols == 0) return;
    auto B = basis.leftCols(cols);
    w -= B * (B.transpose() * w);
    w -= B * (B.transpose() * w);
}

}  // namespace

EigenPairs smallest_eigenpairs(const SparseAffinity& g, int k, double tol) {
    int n = static_cast<int>(g.n);
    if (k < 1) throw DataError("eigensolver: k must be >= 1");
    if (k >= n) throw DataError("eigensolver: k must be < n");
    LaplacianOp op(g);

    MatrixXd locked(n, k);
    std::vector<double> values;
    values.reserve(k);

    // The trivial pair: D^{1/2} 1 with eigenvalue exactly 0.
    VectorXd u0(n);
    for (int i = 0; i < n; ++i) u0[i] = std::sqrt(g.degrees[i]);
    u0.normalize();
    locked.col(0) = u0;
    values.push_back(0.0);
    int L = 1;

    std::mt19937_64 rng(0x9E3779B97F4A7C15ull ^ (static_cast<uint64_t>(n) * 1099511628211ull) ^
                        static_cast<uint64_t>(k));
    std::normal_distribution<double> gauss(0.0, 1.0);
    auto random_start = [&]() {
        VectorXd v(n);
        for (int attempt = 0; attempt < 16; ++attempt) {
            for (int i = 0; i < n; ++i) v[i] = gauss(rng);
            orthogonalize(v, locked, L);
            double nn = v.norm();
            if (nn > 1e-8) {
                v /= nn;
                return v;
            }
        }
        throw SolverError("eigensolver: cannot build a start vector outside the locked space");
    };

    // Thick-restart Rayleigh-Ritz: grow a Krylov basis with full
    // reorthogonalization against both the locked pairs and the active basis,
    // then compress onto the best unconverged Ritz vectors so progress
    // accumulates across restarts. Deflation through the locked set is what
    // resolves eigenvalue multiplicities one copy at a time.
    const int m_cap = std::max(2 * k + 20, 48);
    MatrixXd V(n, std::min(n, m_cap)), W(n, std::min(n, m_cap));
    int m = 0;

    // Appends t (orthogonalized, normalized) and its image under the
    // operator; false when t lies in the space already spanned.
    auto append = [&](VectorXd t) -> bool {
        for (int pass = 0; pass < 2; ++pass) {
            orthogonalize(t, locked, L);
            orthogonalize(t, V, m);
            double nn = t.norm();
            if (nn <= 1e-10) return false;
            t /= nn;
        }
        V.col(m) = t;
        W.col(m) = op.apply(t);
        ++m;
        return true;
    };

    long budget = std::max(4000L, 150L * k);
    long spent = 0;
    double best_unconverged = std::numeric_limits<double>::infinity();
    VectorXd t = random_start();
    while (L < k && spent < budget) {
        // Expansion phase.
        int m_max = std::min(n - L, m_cap);
        while (m < m_max && spent < budget) {
            bool grew = append(t);
            ++spent;
            if (grew) {
                t = W.col(m - 1);  // continue the Krylov chain
            } else if (L + m >= n) {
                break;  // whole complement spanned: Ritz pairs are exact
            } else {
                bool fresh = false;
                for (int attempt = 0; attempt < 16 && !fresh; ++attempt)
                    fresh = append(random_start());
                if (!fresh) break;
                t = W.col(m - 1);
            }
        }
        if (m == 0) break;

        // Rayleigh-Ritz on the active basis.
        MatrixXd H = V.leftCols(m).transpose() * W.leftCols(m);
        H = 0.5 * (H + H.transpose()).eval();
        Eigen::SelfAdjointEigenSolver<MatrixXd> es(H);
        MatrixXd X = V.leftCols(m) * es.eigenvectors();
        MatrixXd WX = W.leftCols(m) * es.eigenvectors();

        // Lock the ascending prefix of converged Ritz pairs; stopping at the
        // first unconverged one keeps the locked set equal to the true
        // smallest eigenvalues.
        int r = 0;
        for (; r < m && L < k; ++r) {
            double theta = es.eigenvalues()[r];
            double res = (WX.col(r) - theta * X.col(r)).norm();
            if (res > tol) {
                best_unconverged = res;
                break;
            }
            VectorXd y = X.col(r);
            orthogonalize(y, locked, L);
            double nn = y.norm();
            if (nn < 0.5) break;  // collapsed onto the locked space
            locked.col(L) = y / nn;
            // Snap roundoff-level drift outside [0, 2] now, before the final
            // ascending sort, so a -1e-17 copy of an eigenvalue 0 cannot
            // order ahead of the prelocked exact-zero trivial pair.
            if (theta < 0 && theta > -1e-9) theta = 0;
            if (theta > 2 && theta < 2 + 1e-9) theta = 2;
            values.push_back(theta);
            ++L;
        }
        if (L >= k) break;

        // Compression: keep the leading unconverged Ritz vectors.
        int keep = std::min(m - r, std::max(k - L + 8, 12));
        if (keep <= 0) {
            m = 0;
            t = random_start();
            continue;
        }
        MatrixXd Xk = X.middleCols(r, keep);
        MatrixXd WXk = WX.middleCols(r, keep);
        V.leftCols(keep) = Xk;
        W.leftCols(keep) = WXk;
        m = keep;
        t = W.col(0);  // expand toward the bottom of the spectrum
    }
    if (L < k)
        throw SolverError("eigensolver: " + std::to_string(L) + "/" + std::to_string(k) +
                          " pairs converged; best unconverged residual " +
                          std::to_string(best_unconverged));

    // Cycles lock in globally ascending order up to roundoff; enforce it.
    std::vector<int> order(k);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return values[a] < values[b]; });

    EigenPairs out;
    out.vectors.resize(n, k);
    out.values.resize(k);
    out.residuals.resize(k);
    for (int c = 0; c < k; ++c) {
        out.vectors.col(c) = locked.col(order[c]);
        out.values[c] = values[order[c]];
        out.residuals[c] =
            (op.apply(out.vectors.col(c)) - out.values[c] * out.vectors.col(c)).norm();
    }
    return out;
}

double ncut_energy(const SparseAffinity& g, const std::vector<int>& labels, int C) {
    if (labels.size() != g.n) throw DataError("ncut_energy: label count mismatch");
    std::vector<double> assoc(C, 0.0), cut(C, 0.0);
    for (uint32_t i = 0; i < g.n; ++i) {
        int c = labels[i];
        if (c < 0 || c >= C) throw DataError("ncut_energy: label out of range");
        assoc[c] += g.degrees[i];
    }
    for (const Edge& e : g.edges) {
        if (labels[e.i] != labels[e.j]) {
            cut[labels[e.i]] += e.w;
            cut[labels[e.j]] += e.w;
        }
    }
    double energy = 0;
    for (int c = 0; c < C; ++c)
        if (assoc[c] > 0) energy += cut[c] / assoc[c];
    return energy;
}

CutResult binary_ncut(const SparseAffinity& g) {
    int n = static_cast<int>(g.n);
    if (n < 2) throw DataError("binary_ncut: need at least 2 vertices");
    CutResult out;
    out.C = 2;
    out.labels.assign(n, 0);
    if (n == 2) {
        out.labels[1] = 1;
        out.ncut_energy = ncut_energy(g, out.labels, 2);
        return out;
    }

    EigenPairs pairs = smallest_eigenpairs(g, 2, 1e-10);
    // x solves the generalized problem (D - W) x = lambda D x; constant per
    // connected component for lambda = 0, which makes the mean threshold
    // split disconnected graphs exactly.
    VectorXd x(n);
    for (int i = 0; i < n; ++i) x[i] = pairs.vectors(i, 1) / std::sqrt(g.degrees[i]);

    auto assign = [&](double thresh) {
        int above = 0;
        for (int i = 0; i < n; ++i) {
            out.labels[i] = x[i] > thresh ? 1 : 0;
            above += out.labels[i];
        }
        return above > 0 && above < n;
    };
    if (!assign(x.mean())) {
        std::vector<double> sorted(x.data(), x.data() + n);
        std::nth_element(sorted.begin(), sorted.begin() + n / 2, sorted.end());
        double med = sorted[n / 2];
        if (!assign(med))
            throw IndivisibleError("binary_ncut: thresholding left all vertices on one side");
    }
    if (out.labels[0] == 1)
        for (int& l : out.labels) l ^= 1;
    out.ncut_energy = ncut_energy(g, out.labels, 2);
    return out;
}

CutResult multiclass_ncut_with_priors(const SparseAffinity& g, const PriorSet& priors,
                                      double kappa, McDiagnostics* diag) {
    int n = static_cast<int>(g.n);
    int C = static_cast<int>(priors.count());
    if (C < 1) throw DataError("multiclass: need at least one prior cluster");
    if (C >= n) throw DataError("multiclass: C must be < n");
    if (kappa <= 0 || kappa > 1) throw DataError("multiclass: kappa must be in (0, 1]");

    std::vector<int> labels(n, -1);
    for (int c = 0; c < C; ++c) {
        if (priors.clusters[c].empty()) throw DataError("multiclass: empty prior cluster");
        for (uint32_t i : priors.clusters[c]) {
            if (i >= g.n) throw DataError("multiclass: prior index out of range");
            if (labels[i] != -1) throw DataError("multiclass: priors not disjoint");
            labels[i] = c;
        }
    }

    size_t seeded = 0;
    for (int c = 0; c < C; ++c) seeded += priors.clusters[c].size();
    bool all_seeded = seeded == static_cast<size_t>(n);

    if (C > 1 && !all_seeded) {
        int k_req = std::min(C + 2, n - 1);
        EigenPairs pairs = smallest_eigenpairs(g, k_req, 1e-10);
        int dims = std::min(C, k_req - 1);
        if (k_req >= C + 2 && pairs.values[C + 1] - pairs.values[C] < 1e-10) dims = C + 1;

        MatrixXd E(n, dims);
        for (int i = 0; i < n; ++i) {
            double s = 1.0 / std::sqrt(g.degrees[i]);
            for (int t = 0; t < dims; ++t) E(i, t) = pairs.vectors(i, 1 + t) * s;
        }

        std::vector<char> frozen(n, 0);
        for (int i = 0; i < n; ++i) frozen[i] = labels[i] != -1;

        MatrixXd centroids(C, dims);
        auto recompute_centroids = [&]() {
            centroids.setZero();
            std::vector<int> counts(C, 0);
            for (int i = 0; i < n; ++i) {
                if (labels[i] < 0) continue;
                centroids.row(labels[i]) += E.row(i);
                ++counts[labels[i]];
            }
            for (int c = 0; c < C; ++c) centroids.row(c) /= counts[c];
        };
        recompute_centroids();

        for (int iter = 0; iter < 100; ++iter) {
            bool changed = false;
            for (int i = 0; i < n; ++i) {
                if (frozen[i]) continue;
                int best = 0;
                double best_d = std::numeric_limits<double>::infinity();
                for (int c = 0; c < C; ++c) {
                    double d = (E.row(i) - centroids.row(c)).squaredNorm();
                    if (d < best_d) {  // strict < keeps ties on the lower id
                        best_d = d;
                        best = c;
                    }
                }
                if (labels[i] != best) {
                    labels[i] = best;
                    changed = true;
                }
            }
            if (!changed) break;
            recompute_centroids();
        }
        if (diag) {
            diag->eigenvalues = pairs.values;
            diag->residuals = pairs.residuals;
            diag->embedding_dims = dims;
        }
    }
    for (int i = 0; i < n; ++i)
        if (labels[i] < 0) labels[i] = 0;

    CutResult out;
    out.C = C;
    out.labels = std::move(labels);
    out.ncut_energy = C == 1 ? 0.0 : ncut_energy(g, out.labels, C);

    if (diag) {
        diag->kappa = kappa;
        diag->correlations.assign(C, 0.0);
        diag->violations = 0;
        // x_c' s_c with x_c the binary output indicator and s_c the prior
        // indicator normalized by |P_c|: the fraction of prior c inside
        // cluster c. 1.0 whenever the cluster keeps its whole prior.
        for (int c = 0; c < C; ++c) {
            size_t inter = 0;
            for (uint32_t i : priors.clusters[c])
                if (out.labels[i] == c) ++inter;
            double corr = double(inter) / double(priors.clusters[c].size());
            diag->correlations[c] = corr;
            if (corr < kappa) ++diag->violations;
        }
    }
    return out;
}

namespace {

struct RcTreeNode {
    std::vector<uint32_t> verts;  // original ids
    int first_child = -1;
    int n_children = 0;
    bool leaf = false;
    double ncut = -1;
};

struct RcTask {
    SparseAffinity g;
    std::vector<uint32_t> verts;  // original ids, aligned with g's vertices
    int slot = 0;
};

struct RcShared {
    std::mutex m;
    std::condition_variable cv;
    std::deque<RcTask> queue;
    std::vector<RcTreeNode> nodes;
    int active = 0;
    bool failed = false;
    std::exception_ptr error;

    void push(RcTask&& t) {
        {
            std::lock_guard<std::mutex> lk(m);
            queue.push_back(std::move(t));
        }
        cv.notify_one();
    }
};

void rc_process(RcShared& sh, RcTask task, double tau, int min_points) {
    size_t n = task.verts.size();
    auto iso = task.g.isolated();

    if (n >= 2 && !iso.empty()) {
        // Peel the degree-0 vertices into singleton leaves, keep the rest as
        // one child processed next.
        std::vector<char> is_iso(n, 0);
        for (uint32_t i : iso) is_iso[i] = 1;
        std::vector<uint32_t> core_local;
        for (uint32_t i = 0; i < n; ++i)
            if (!is_iso[i]) core_local.push_back(i);

        RcTask core_task;
        int core_slot = -1;
        {
            std::lock_guard<std::mutex> lk(sh.m);
            sh.nodes[task.slot].first_child = static_cast<int>(sh.nodes.size());
            sh.nodes[task.slot].n_children =
                static_cast<int>(iso.size()) + (core_local.empty() ? 0 : 1);
            for (uint32_t i : iso) {
                RcTreeNode leafn;
                leafn.verts = {task.verts[i]};
                leafn.leaf = true;
                sh.nodes.push_back(std::move(leafn));
            }
            if (!core_local.empty()) {
                core_slot = static_cast<int>(sh.nodes.size());
                RcTreeNode core;
                for (uint32_t i : core_local) core.verts.push_back(task.verts[i]);
                sh.nodes.push_back(std::move(core));
            }
        }
        if (core_slot >= 0) {
            Subgraph sub = subgraph(task.g, core_local);
            core_task.slot = core_slot;
            for (uint32_t i : sub.to_parent) core_task.verts.push_back(task.verts[i]);
            core_task.g = std::move(sub.g);
            sh.push(std::move(core_task));
        }
        return;
    }

    auto mark_leaf = [&](double energy) {
        std::lock_guard<std::mutex> lk(sh.m);
        sh.nodes[task.slot].leaf = true;
        sh.nodes[task.slot].ncut = energy;
    };

    if (n < 2 || n < 2 * static_cast<size_t>(min_points)) {
        mark_leaf(-1);
        return;
    }

    CutResult cut;
    try {
        cut = binary_ncut(task.g);
    } catch (const IndivisibleError&) {
        mark_leaf(-1);
        return;
    }

    std::vector<uint32_t> side[2];
    for (uint32_t i = 0; i < n; ++i) side[cut.labels[i]].push_back(i);
    bool accept = cut.ncut_energy <= tau && side[0].size() >= static_cast<size_t>(min_points) &&
                  side[1].size() >= static_cast<size_t>(min_points);
    if (!accept) {
        mark_leaf(cut.ncut_energy);
        return;
    }

    int child0;
    {
        std::lock_guard<std::mutex> lk(sh.m);
        child0 = static_cast<int>(sh.nodes.size());
        sh.nodes[task.slot].first_child = child0;
        sh.nodes[task.slot].n_children = 2;
        sh.nodes[task.slot].ncut = cut.ncut_energy;
        for (int s = 0; s < 2; ++s) {
            RcTreeNode child;
            for (uint32_t i : side[s]) child.verts.push_back(task.verts[i]);
            sh.nodes.push_back(std::move(child));
        }
    }
    for (int s = 0; s < 2; ++s) {
        Subgraph sub = subgraph(task.g, side[s]);
        RcTask child;
        child.slot = child0 + s;
        for (uint32_t i : sub.to_parent) child.verts.push_back(task.verts[i]);
        child.g = std::move(sub.g);
        sh.push(std::move(child));
    }
}

}  // namespace

CutResult recursive_ncut(const SparseAffinity& g, double tau, int min_points,
                         RcDiagnostics* diag, int threads) {
    if (g.n == 0) throw DataError("recursive_ncut: empty graph");
    if (tau <= 0) throw DataError("recursive_ncut: tau must be positive");
    if (min_points < 2) throw DataError("recursive_ncut: min_points must be >= 2");

    RcShared sh;
    sh.nodes.emplace_back();
    sh.nodes[0].verts.resize(g.n);
    std::iota(sh.nodes[0].verts.begin(), sh.nodes[0].verts.end(), 0);
    RcTask root;
    root.g = g;
    root.verts = sh.nodes[0].verts;
    root.slot = 0;
    sh.push(std::move(root));

    auto worker = [&]() {
        std::unique_lock<std::mutex> lk(sh.m);
        while (true) {
            sh.cv.wait(lk, [&] { return !sh.queue.empty() || (sh.active == 0) || sh.failed; });
            if (sh.failed || (sh.queue.empty() && sh.active == 0)) {
                sh.cv.notify_all();
                return;
            }
            if (sh.queue.empty()) continue;
            RcTask t = std::move(sh.queue.front());
            sh.queue.pop_front();
            ++sh.active;
            lk.unlock();
            try {
                rc_process(sh, std::move(t), tau, min_points);
            } catch (...) {
                std::lock_guard<std::mutex> g2(sh.m);
                if (!sh.failed) {
                    sh.failed = true;
                    sh.error = std::current_exception();
                }
            }
            lk.lock();
            --sh.active;
            if (sh.queue.empty() && sh.active == 0) sh.cv.notify_all();
        }
    };

    int T = std::max(1, threads);
    if (T == 1) {
        // Sequential drain, no condition-variable round trips.
        while (true) {
            RcTask t;
            {
                std::lock_guard<std::mutex> lk(sh.m);
                if (sh.queue.empty()) break;
                t = std::move(sh.queue.front());
                sh.queue.pop_front();
            }
            rc_process(sh, std::move(t), tau, min_points);
        }
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < T; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
        if (sh.failed) std::rethrow_exception(sh.error);
    }

    // DFS over the finished tree assigns leaf labels independent of the
    // processing schedule.
    CutResult out;
    out.labels.assign(g.n, -1);
    std::vector<int> stack{0};
    int next_label = 0;
    std::vector<int> dfs_order;
    while (!stack.empty()) {
        int s = stack.back();
        stack.pop_back();
        dfs_order.push_back(s);
        const RcTreeNode& node = sh.nodes[s];
        if (node.n_children == 0) {
            for (uint32_t v : node.verts) out.labels[v] = next_label;
            ++next_label;
        } else {
            for (int c = node.n_children - 1; c >= 0; --c) stack.push_back(node.first_child + c);
        }
    }
    out.C = next_label;
    out.ncut_energy = ncut_energy(g, out.labels, out.C);
    if (diag) {
        diag->nodes.clear();
        for (int s : dfs_order) {
            RcNode n;
            n.vertices = sh.nodes[s].verts;
            n.ncut = sh.nodes[s].ncut;
            n.is_leaf = sh.nodes[s].n_children == 0;
            diag->nodes.push_back(std::move(n));
        }
    }
    return out;
}

}  // namespace crowncut
