#include "crowncut/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <deque>
#include <functional>
#include <numeric>
#include <thread>

namespace crowncut {

namespace {

using Clock = std::chrono::steady_clock;

struct StageClock {
    PipelineDiagnostics* diag;
    Clock::time_point t0 = Clock::now();

    void lap(const char* stage) {
        auto t1 = Clock::now();
        if (diag)
            diag->timings.push_back(
                {stage, std::chrono::duration<double, std::milli>(t1 - t0).count()});
        t0 = t1;
    }
};

struct Prologue {
    PointCloud labeled;
    std::vector<uint32_t> object_idx;
    RasterGrid dtm, chm, chm_smooth;
};

Prologue run_prologue(const PointCloud& cloud, const McrcConfig& config,
                      PipelineDiagnostics* diag, StageClock& clock) {
    if (cloud.empty()) throw DataError("pipeline: empty cloud");
    Prologue p;
    p.labeled = classify_ground(cloud, config.terrain);
    clock.lap("classify_ground");
    for (size_t i = 0; i < p.labeled.size(); ++i)
        if (p.labeled.labels[i] == ClassLabel::Object)
            p.object_idx.push_back(static_cast<uint32_t>(i));
    p.dtm = rasterize_dtm(p.labeled, config.terrain.cell_size);
    clock.lap("dtm");
    p.chm = rasterize_chm(p.labeled, p.dtm, config.terrain.cell_size);
    clock.lap("chm");
    p.chm_smooth = smooth_raster(p.chm, config.chm_smoothing_sigma);
    clock.lap("smooth");
    if (diag) {
        diag->dtm = p.dtm;
        diag->chm = p.chm;
        diag->chm_smooth = p.chm_smooth;
    }
    return p;
}

PointCloud object_cloud_for_graph(const Prologue& p, const McrcConfig& config) {
    PointCloud obj = p.labeled.select(p.object_idx);
    if (!config.use_features) {
        obj.feature_dim = 0;
        obj.features.clear();
        obj.has_features.clear();
    }
    return obj;
}

// Run fn(c) for c in [0, count) on up to `threads` workers; slots are
// preassigned so results land deterministically.
void parallel_clusters(int count, int threads, const std::function<void(int)>& fn) {
    int T = std::max(1, std::min(threads, count));
    if (T == 1) {
        for (int c = 0; c < count; ++c) fn(c);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(T);
    for (int t = 0; t < T; ++t) {
        pool.emplace_back([&, t]() {
            try {
                while (true) {
                    int c = next.fetch_add(1);
                    if (c >= count) return;
                    fn(c);
                }
            } catch (...) {
                errors[t] = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

Segmentation finalize(const Prologue& p, const std::vector<std::vector<uint32_t>>& groups,
                      PipelineDiagnostics* diag, StageClock& clock) {
    Segmentation seg;
    seg.labels.assign(p.labeled.size(), -1);
    for (size_t gi = 0; gi < groups.size(); ++gi)
        for (uint32_t obj_local : groups[gi])
            seg.labels[p.object_idx[obj_local]] = static_cast<int>(gi);
    seg.trees = extract_tree_metrics(seg.labels, p.labeled, p.dtm);
    clock.lap("metrics");
    (void)diag;
    return seg;
}

// Leaves of a recursive cut over an object-index subset, in DFS order.
std::vector<std::vector<uint32_t>> rc_groups(const SparseAffinity& g,
                                             const std::vector<uint32_t>& to_object,
                                             double tau, int min_points, int threads,
                                             std::vector<RcNode>* nodes_out = nullptr) {
    RcDiagnostics rcd;
    CutResult cut = recursive_ncut(g, tau, min_points, &rcd, threads);
    if (nodes_out)
        for (RcNode& nd : rcd.nodes) {
            for (uint32_t& v : nd.vertices) v = to_object[v];
            nodes_out->push_back(std::move(nd));
        }
    std::vector<std::vector<uint32_t>> groups(cut.C);
    for (uint32_t v = 0; v < g.n; ++v) groups[cut.labels[v]].push_back(to_object[v]);
    return groups;
}

}  // namespace

Segmentation mcrc(const PointCloud& cloud, const McrcConfig& config, int threads,
                  PipelineDiagnostics* diag) {
    StageClock clock{diag};
    Prologue p = run_prologue(cloud, config, diag, clock);
    if (p.object_idx.empty()) throw DataError("no object returns");

    ApexSet apexes = local_maxima_mwf(p.chm_smooth, config.mwf_window, config.min_tree_height);
    clock.lap("maxima");
    if (diag) diag->apexes = apexes;

    PointCloud obj = object_cloud_for_graph(p, config);
    PriorSet priors;
    bool have_priors = false;
    if (!apexes.empty()) {
        try {
            priors = build_priors(obj, apexes, config.prior_radius);
            have_priors = true;
            if (diag)
                for (const auto& w : priors.warnings) diag->warnings.push_back(w);
        } catch (const DataError& e) {
            if (diag) diag->warnings.push_back(e.what());
        }
    }
    clock.lap("priors");

    SparseAffinity g_mc = build_graph(obj, config.graph_mc);
    clock.lap("graph_mc");

    std::vector<uint32_t> iso = g_mc.isolated();
    std::vector<char> is_iso(g_mc.n, 0);
    for (uint32_t i : iso) is_iso[i] = 1;
    std::vector<uint32_t> main_idx;
    for (uint32_t i = 0; i < g_mc.n; ++i)
        if (!is_iso[i]) main_idx.push_back(i);

    // Priors restricted to the non-isolated subgraph; clusters that vanish
    // are dropped.
    PriorSet main_priors;
    if (have_priors && !main_idx.empty()) {
        std::vector<int64_t> to_new(g_mc.n, -1);
        for (size_t k = 0; k < main_idx.size(); ++k) to_new[main_idx[k]] = static_cast<int64_t>(k);
        for (size_t c = 0; c < priors.count(); ++c) {
            std::vector<uint32_t> kept;
            for (uint32_t i : priors.clusters[c])
                if (to_new[i] >= 0) kept.push_back(static_cast<uint32_t>(to_new[i]));
            if (kept.empty()) {
                if (diag)
                    diag->warnings.push_back("prior cluster " + std::to_string(c) +
                                             " only contained isolated points, dropped");
                continue;
            }
            main_priors.clusters.push_back(std::move(kept));
            main_priors.source_apex.push_back(priors.source_apex[c]);
        }
    }

    bool fallback = !have_priors || main_priors.count() == 0 ||
                    main_priors.count() >= main_idx.size();
    std::vector<std::vector<uint32_t>> groups;

    if (fallback) {
        if (diag) {
            diag->warnings.push_back("no usable priors; falling back to recursive cut");
            diag->fell_back_to_rc = true;
        }
        SparseAffinity g_rc = build_graph(obj, config.graph_rc);
        std::vector<uint32_t> ident(g_rc.n);
        std::iota(ident.begin(), ident.end(), 0);
        groups = rc_groups(g_rc, ident, config.tau_ncut, config.min_points, threads,
                           diag ? &diag->rc_nodes : nullptr);
        clock.lap("rc");
        return finalize(p, groups, diag, clock);
    }

    Subgraph main_sub = subgraph(g_mc, main_idx);
    CutResult mc = multiclass_ncut_with_priors(main_sub.g, main_priors, config.kappa,
                                               diag ? &diag->mc : nullptr);
    clock.lap("mc");

    // Recursive cut inside every multiclass cluster, on a graph rebuilt with
    // the RC bandwidths.
    int C = mc.C;
    std::vector<std::vector<uint32_t>> members(C);  // object-cloud indices
    for (uint32_t v = 0; v < main_sub.g.n; ++v)
        members[mc.labels[v]].push_back(main_sub.to_parent[v]);

    std::vector<std::vector<std::vector<uint32_t>>> cluster_groups(C);
    std::vector<std::vector<RcNode>> cluster_nodes(C);
    parallel_clusters(C, threads, [&](int c) {
        if (members[c].size() < 2) {
            cluster_groups[c] = {members[c]};
            return;
        }
        PointCloud sub_cloud = obj.select(members[c]);
        SparseAffinity g_rc = build_graph(sub_cloud, config.graph_rc);
        cluster_groups[c] = rc_groups(g_rc, members[c], config.tau_ncut,
                                      config.min_points, 1,
                                      diag ? &cluster_nodes[c] : nullptr);
    });
    for (int c = 0; c < C; ++c)
        for (auto& grp : cluster_groups[c]) groups.push_back(std::move(grp));
    if (diag)
        for (int c = 0; c < C; ++c)
            for (RcNode& nd : cluster_nodes[c]) diag->rc_nodes.push_back(std::move(nd));
    for (uint32_t i : iso) groups.push_back({i});
    clock.lap("rc");

    return finalize(p, groups, diag, clock);
}

Segmentation rc_only(const PointCloud& cloud, const McrcConfig& config, int threads,
                     PipelineDiagnostics* diag) {
    StageClock clock{diag};
    Prologue p = run_prologue(cloud, config, diag, clock);
    if (p.object_idx.empty()) throw DataError("no object returns");

    PointCloud obj = object_cloud_for_graph(p, config);
    SparseAffinity g = build_graph(obj, config.graph_rc);
    clock.lap("graph_rc");

    std::vector<uint32_t> ident(g.n);
    std::iota(ident.begin(), ident.end(), 0);
    auto groups = rc_groups(g, ident, config.tau_ncut, config.min_points, threads,
                            diag ? &diag->rc_nodes : nullptr);
    clock.lap("rc");
    return finalize(p, groups, diag, clock);
}

Segmentation watershed_only(const PointCloud& cloud, const McrcConfig& config,
                            PipelineDiagnostics* diag) {
    StageClock clock{diag};
    Prologue p = run_prologue(cloud, config, diag, clock);
    if (p.object_idx.empty()) throw DataError("no object returns");

    ApexSet apexes = local_maxima_mwf(p.chm_smooth, config.mwf_window, config.min_tree_height);
    clock.lap("maxima");
    if (diag) diag->apexes = apexes;

    Segmentation seg;
    seg.labels.assign(p.labeled.size(), -1);
    if (apexes.empty()) {
        clock.lap("watershed");
        return seg;
    }

    RasterGrid regions = watershed_markers(p.chm_smooth, apexes, config.min_tree_height);
    if (diag) diag->watershed_labels = regions;

    // Unlabeled cells take the region of the nearest labeled cell so that
    // every object point lands in some region.
    RasterGrid filled = regions;
    {
        std::deque<std::pair<int, int>> queue;
        for (int r = 0; r < filled.nrows(); ++r)
            for (int c = 0; c < filled.ncols(); ++c)
                if (filled.at(r, c) != 0.0) queue.emplace_back(r, c);
        const int dr[4] = {-1, 1, 0, 0};
        const int dc[4] = {0, 0, -1, 1};
        while (!queue.empty()) {
            auto [r, c] = queue.front();
            queue.pop_front();
            for (int k = 0; k < 4; ++k) {
                int rr = r + dr[k], cc = c + dc[k];
                if (!filled.in_bounds(rr, cc) || filled.at(rr, cc) != 0.0) continue;
                filled.at(rr, cc) = filled.at(r, c);
                queue.emplace_back(rr, cc);
            }
        }
    }

    size_t K = apexes.size();
    std::vector<size_t> counts(K, 0);
    std::vector<std::vector<uint32_t>> region_points(K);
    for (uint32_t oi : p.object_idx) {
        int r, c;
        if (!filled.cell_of(p.labeled.x[oi], p.labeled.y[oi], r, c)) {
            r = std::clamp(r, 0, filled.nrows() - 1);
            c = std::clamp(c, 0, filled.ncols() - 1);
        }
        int k = static_cast<int>(filled.at(r, c));
        if (k < 1) continue;  // markerless component
        region_points[k - 1].push_back(oi);
    }
    for (int r = 0; r < regions.nrows(); ++r)
        for (int c = 0; c < regions.ncols(); ++c)
            if (regions.at(r, c) != 0.0) ++counts[static_cast<size_t>(regions.at(r, c)) - 1];

    double cell_area = regions.cell() * regions.cell();
    int tree_id = 0;
    for (size_t k = 0; k < K; ++k) {
        if (region_points[k].empty()) continue;
        TreeRecord t;
        t.tree_id = tree_id;
        t.apex_x = apexes.apexes[k].x;
        t.apex_y = apexes.apexes[k].y;
        t.height = apexes.apexes[k].chm_height;
        t.crown_area = static_cast<double>(counts[k]) * cell_area;
        t.n_points = region_points[k].size();
        for (uint32_t oi : region_points[k]) seg.labels[oi] = tree_id;
        seg.trees.push_back(t);
        ++tree_id;
    }
    clock.lap("watershed");
    return seg;
}

std::vector<TreeRecord> extract_tree_metrics(const std::vector<int>& labels,
                                             const PointCloud& cloud, const RasterGrid& dtm) {
    if (labels.size() != cloud.size())
        throw DataError("extract_tree_metrics: label count mismatch");
    int T = 0;
    for (int l : labels) T = std::max(T, l + 1);
    std::vector<std::vector<uint32_t>> buckets(T);
    for (size_t i = 0; i < labels.size(); ++i)
        if (labels[i] >= 0) buckets[labels[i]].push_back(static_cast<uint32_t>(i));

    std::vector<TreeRecord> out;
    for (int t = 0; t < T; ++t) {
        if (buckets[t].empty())
            throw DataError("extract_tree_metrics: empty tree id " + std::to_string(t));
        TreeRecord rec;
        rec.tree_id = t;
        rec.n_points = buckets[t].size();
        std::vector<double> xs, ys;
        xs.reserve(rec.n_points);
        ys.reserve(rec.n_points);
        double best = -std::numeric_limits<double>::infinity();
        for (uint32_t i : buckets[t]) {
            int r, c;
            if (!dtm.cell_of(cloud.x[i], cloud.y[i], r, c)) {
                r = std::clamp(r, 0, dtm.nrows() - 1);
                c = std::clamp(c, 0, dtm.ncols() - 1);
            }
            double h = cloud.z[i] - dtm.at(r, c);
            if (h > best) {
                best = h;
                rec.apex_x = cloud.x[i];
                rec.apex_y = cloud.y[i];
            }
            xs.push_back(cloud.x[i]);
            ys.push_back(cloud.y[i]);
        }
        rec.height = best;
        rec.crown_area = convex_hull_area(xs, ys);
        out.push_back(rec);
    }
    return out;
}

}  // namespace crowncut
