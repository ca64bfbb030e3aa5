#include "crowncut/treetops.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <numeric>
#include <queue>

namespace crowncut {

namespace {

std::string fmt_g(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

}  // namespace

ApexSet local_maxima_mwf(const RasterGrid& chm, int window_radius, double min_height) {
    if (window_radius < 1) throw DataError("local_maxima_mwf: window_radius must be >= 1");
    int nr = chm.nrows(), nc = chm.ncols();

    // Candidate: >= every cell in the window and strictly above at least one.
    std::vector<std::pair<int, int>> cand;
    for (int r = 0; r < nr; ++r) {
        for (int c = 0; c < nc; ++c) {
            double v = chm.at(r, c);
            if (v < min_height) continue;
            bool dominated = false, strict = false;
            for (int dr = -window_radius; dr <= window_radius && !dominated; ++dr) {
                for (int dc = -window_radius; dc <= window_radius; ++dc) {
                    if (dr == 0 && dc == 0) continue;
                    int rr = r + dr, cc = c + dc;
                    if (!chm.in_bounds(rr, cc)) continue;
                    double u = chm.at(rr, cc);
                    if (u > v) {
                        dominated = true;
                        break;
                    }
                    if (u < v) strict = true;
                }
            }
            if (!dominated && strict) cand.emplace_back(r, c);
        }
    }

    // Equal-valued candidates sharing a window keep only the lexicographically
    // smallest (row, col). cand is already in lexicographic order.
    ApexSet out;
    for (size_t a = 0; a < cand.size(); ++a) {
        auto [r, c] = cand[a];
        bool drop = false;
        for (size_t b = 0; b < a && !drop; ++b) {
            auto [rb, cb] = cand[b];
            if (std::abs(rb - r) <= window_radius && std::abs(cb - c) <= window_radius &&
                chm.at(rb, cb) == chm.at(r, c))
                drop = true;
        }
        if (drop) continue;
        Apex apex;
        apex.row = r;
        apex.col = c;
        apex.x = chm.cx(c);
        apex.y = chm.cy(r);
        apex.chm_height = chm.at(r, c);
        out.apexes.push_back(apex);
    }
    return out;
}

RasterGrid watershed_markers(const RasterGrid& chm, const ApexSet& markers, double min_height) {
    if (markers.empty()) throw DataError("watershed_markers: no markers");
    int nr = chm.nrows(), nc = chm.ncols();
    RasterGrid labels(nc, nr, chm.x0(), chm.y0(), chm.cell(), 0.0, chm.nodata());

    struct Entry {
        double value;
        uint64_t seq;
        int idx;
    };
    auto cmp = [](const Entry& a, const Entry& b) {
        if (a.value != b.value) return a.value < b.value;  // higher CHM floods first
        return a.seq > b.seq;                              // then FIFO
    };
    std::priority_queue<Entry, std::vector<Entry>, decltype(cmp)> pq(cmp);
    uint64_t seq = 0;

    for (size_t m = 0; m < markers.size(); ++m) {
        const Apex& a = markers.apexes[m];
        int r, c;
        if (!chm.cell_of(a.x, a.y, r, c))
            throw DataError("watershed_markers: marker outside the raster");
        if (chm.at(r, c) <= min_height)
            throw DataError("watershed_markers: marker on a zero-height cell");
        int idx = r * nc + c;
        if (labels.values()[idx] != 0.0)
            throw DataError("watershed_markers: two markers share a cell");
        labels.values()[idx] = static_cast<double>(m + 1);
        pq.push({chm.values()[idx], seq++, idx});
    }

    const int dr[4] = {-1, 1, 0, 0};
    const int dc[4] = {0, 0, -1, 1};
    while (!pq.empty()) {
        Entry e = pq.top();
        pq.pop();
        int r = e.idx / nc, c = e.idx % nc;
        for (int k = 0; k < 4; ++k) {
            int rr = r + dr[k], cc = c + dc[k];
            if (rr < 0 || rr >= nr || cc < 0 || cc >= nc) continue;
            int nidx = rr * nc + cc;
            if (labels.values()[nidx] != 0.0) continue;
            if (chm.values()[nidx] <= min_height) continue;
            labels.values()[nidx] = labels.values()[e.idx];
            pq.push({chm.values()[nidx], seq++, nidx});
        }
    }
    return labels;
}

PriorSet build_priors(const PointCloud& cloud, const ApexSet& apexes, double radius) {
    if (apexes.empty()) throw DataError("build_priors: no apexes");
    if (radius <= 0) throw DataError("build_priors: radius must be positive");

    // 2D bucket grid over xy at the query radius.
    double minx = cloud.x[0], miny = cloud.y[0];
    for (size_t i = 0; i < cloud.size(); ++i) {
        minx = std::min(minx, cloud.x[i]);
        miny = std::min(miny, cloud.y[i]);
    }
    auto bucket = [&](double x, double y) {
        int bx = static_cast<int>(std::floor((x - minx) / radius));
        int by = static_cast<int>(std::floor((y - miny) / radius));
        return std::make_pair(bx, by);
    };
    std::vector<std::pair<std::pair<int, int>, uint32_t>> entries;
    entries.reserve(cloud.size());
    for (size_t i = 0; i < cloud.size(); ++i)
        entries.emplace_back(bucket(cloud.x[i], cloud.y[i]), static_cast<uint32_t>(i));
    std::sort(entries.begin(), entries.end());

    auto points_near = [&](double x, double y) {
        std::vector<uint32_t> out;
        auto [bx, by] = bucket(x, y);
        for (int dx = -1; dx <= 1; ++dx) {
            for (int dy = -1; dy <= 1; ++dy) {
                std::pair<int, int> key{bx + dx, by + dy};
                auto lo = std::lower_bound(entries.begin(), entries.end(),
                                           std::make_pair(key, uint32_t(0)));
                for (auto it = lo; it != entries.end() && it->first == key; ++it) {
                    uint32_t i = it->second;
                    double ddx = cloud.x[i] - x, ddy = cloud.y[i] - y;
                    if (ddx * ddx + ddy * ddy <= radius * radius) out.push_back(i);
                }
            }
        }
        std::sort(out.begin(), out.end());
        return out;
    };

    size_t A = apexes.size();
    std::vector<int> parent(A);
    std::iota(parent.begin(), parent.end(), 0);
    std::function<int(int)> find = [&](int a) {
        while (parent[a] != a) a = parent[a] = parent[parent[a]];
        return a;
    };
    auto unite = [&](int a, int b) {
        int ra = find(a), rb = find(b);
        if (ra == rb) return;
        parent[std::max(ra, rb)] = std::min(ra, rb);
    };

    std::vector<std::vector<uint32_t>> seed(A);
    std::vector<int> owner(cloud.size(), -1);
    PriorSet out;
    for (size_t a = 0; a < A; ++a) {
        seed[a] = points_near(apexes.apexes[a].x, apexes.apexes[a].y);
        if (seed[a].empty()) {
            out.warnings.push_back("apex " + std::to_string(a) + " at (" +
                                   fmt_g(apexes.apexes[a].x) + ", " + fmt_g(apexes.apexes[a].y) +
                                   "): no points within " + fmt_g(radius) + " m, dropped");
            continue;
        }
        for (uint32_t p : seed[a]) {
            if (owner[p] < 0)
                owner[p] = static_cast<int>(a);
            else
                unite(owner[p], static_cast<int>(a));
        }
    }

    // Groups keyed by union-find root, emitted in order of smallest apex index.
    std::vector<int> root_cluster(A, -1);
    for (size_t a = 0; a < A; ++a) {
        if (seed[a].empty()) continue;
        int r = find(static_cast<int>(a));
        if (root_cluster[r] < 0) {
            root_cluster[r] = static_cast<int>(out.clusters.size());
            out.clusters.emplace_back();
            out.source_apex.emplace_back();
        }
        int c = root_cluster[r];
        out.clusters[c].insert(out.clusters[c].end(), seed[a].begin(), seed[a].end());
        out.source_apex[c].push_back(static_cast<int>(a));
    }
    for (auto& cluster : out.clusters) {
        std::sort(cluster.begin(), cluster.end());
        cluster.erase(std::unique(cluster.begin(), cluster.end()), cluster.end());
    }
    if (out.clusters.empty()) throw DataError("build_priors: no usable priors");
    return out;
}

void save_apexes_csv(const ApexSet& apexes, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot open for writing: " + path);
    out << "x,y,height\n";
    for (const Apex& a : apexes.apexes)
        out << fmt_g(a.x) << ',' << fmt_g(a.y) << ',' << fmt_g(a.chm_height) << '\n';
    if (!out) throw DataError("write failed: " + path);
}

ApexSet load_apexes_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open apex csv: " + path);
    ApexSet out;
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (lineno == 1 || line.empty() || line == "\r") continue;
        Apex a;
        auto c1 = line.find(',');
        auto c2 = c1 == std::string::npos ? std::string::npos : line.find(',', c1 + 1);
        if (c2 == std::string::npos)
            throw DataError(path + ":" + std::to_string(lineno) + ": expected x,y,height");
        try {
            a.x = std::stod(line.substr(0, c1));
            a.y = std::stod(line.substr(c1 + 1, c2 - c1 - 1));
            a.chm_height = std::stod(line.substr(c2 + 1));
        } catch (const std::exception&) {
            throw DataError(path + ":" + std::to_string(lineno) + ": bad apex row");
        }
        out.apexes.push_back(a);
    }
    return out;
}

}  // namespace crowncut
