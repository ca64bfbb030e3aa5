#include "crowncut/terrain.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

namespace crowncut {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct GridFrame {
    double x0 = 0, y0 = 0, cell = 1;
    int ncols = 0, nrows = 0;
};

GridFrame frame_for(const PointCloud& cloud, double cell_size) {
    double minx = kInf, miny = kInf, maxx = -kInf, maxy = -kInf;
    for (size_t i = 0; i < cloud.size(); ++i) {
        minx = std::min(minx, cloud.x[i]);
        maxx = std::max(maxx, cloud.x[i]);
        miny = std::min(miny, cloud.y[i]);
        maxy = std::max(maxy, cloud.y[i]);
    }
    GridFrame f;
    f.x0 = minx;
    f.y0 = miny;
    f.cell = cell_size;
    f.ncols = static_cast<int>(std::floor((maxx - minx) / cell_size)) + 1;
    f.nrows = static_cast<int>(std::floor((maxy - miny) / cell_size)) + 1;
    return f;
}

// Multi-source BFS fill: every infinite cell takes the value of the nearest
// (4-connected) finite cell, seeds visited in row-major order.
void bfs_fill(RasterGrid& g, double empty_marker) {
    std::deque<std::pair<int, int>> queue;
    for (int r = 0; r < g.nrows(); ++r)
        for (int c = 0; c < g.ncols(); ++c)
            if (g.at(r, c) != empty_marker) queue.emplace_back(r, c);
    if (queue.empty()) return;
    const int dr[4] = {-1, 1, 0, 0};
    const int dc[4] = {0, 0, -1, 1};
    while (!queue.empty()) {
        auto [r, c] = queue.front();
        queue.pop_front();
        for (int k = 0; k < 4; ++k) {
            int nr = r + dr[k], nc = c + dc[k];
            if (!g.in_bounds(nr, nc) || g.at(nr, nc) != empty_marker) continue;
            g.at(nr, nc) = g.at(r, c);
            queue.emplace_back(nr, nc);
        }
    }
}

// Separable min (erode) or max (dilate) filter with half-width w cells,
// window clamped at the border.
std::vector<double> minmax_filter(const std::vector<double>& v, int nrows, int ncols, int w,
                                  bool take_min) {
    std::vector<double> tmp(v.size()), out(v.size());
    auto pick = [take_min](double a, double b) { return take_min ? std::min(a, b) : std::max(a, b); };
    for (int r = 0; r < nrows; ++r) {
        for (int c = 0; c < ncols; ++c) {
            double acc = v[static_cast<size_t>(r) * ncols + std::max(0, c - w)];
            for (int cc = std::max(0, c - w) + 1; cc <= std::min(ncols - 1, c + w); ++cc)
                acc = pick(acc, v[static_cast<size_t>(r) * ncols + cc]);
            tmp[static_cast<size_t>(r) * ncols + c] = acc;
        }
    }
    for (int c = 0; c < ncols; ++c) {
        for (int r = 0; r < nrows; ++r) {
            double acc = tmp[static_cast<size_t>(std::max(0, r - w)) * ncols + c];
            for (int rr = std::max(0, r - w) + 1; rr <= std::min(nrows - 1, r + w); ++rr)
                acc = pick(acc, tmp[static_cast<size_t>(rr) * ncols + c]);
            out[static_cast<size_t>(r) * ncols + c] = acc;
        }
    }
    return out;
}

}  // namespace

PointCloud classify_ground(const PointCloud& cloud, const TerrainParams& params) {
    if (cloud.empty()) throw DataError("classify_ground: empty cloud");
    if (params.cell_size <= 0 || params.max_window < params.cell_size)
        throw DataError("classify_ground: invalid terrain parameters");

    GridFrame f = frame_for(cloud, params.cell_size);
    RasterGrid surf(f.ncols, f.nrows, f.x0, f.y0, f.cell, kInf);
    std::vector<int> cell_of(cloud.size());
    for (size_t i = 0; i < cloud.size(); ++i) {
        int r, c;
        surf.cell_of(cloud.x[i], cloud.y[i], r, c);
        cell_of[i] = r * f.ncols + c;
        surf.values()[cell_of[i]] = std::min(surf.values()[cell_of[i]], cloud.z[i]);
    }
    bfs_fill(surf, kInf);

    // Progressive opening: bumps rising more than the step tolerance above
    // the opened surface are cut down to it.
    int step = 0;
    for (int w = 1; w * params.cell_size <= params.max_window; w *= 2, ++step) {
        std::vector<double> eroded = minmax_filter(surf.values(), f.nrows, f.ncols, w, true);
        std::vector<double> opened = minmax_filter(eroded, f.nrows, f.ncols, w, false);
        double dh = params.elevation_threshold + step * params.slope_tolerance;
        for (size_t i = 0; i < surf.size(); ++i)
            if (surf.values()[i] - opened[i] > dh) surf.values()[i] = opened[i];
    }

    PointCloud out = cloud;
    out.labels.resize(cloud.size());
    for (size_t i = 0; i < cloud.size(); ++i) {
        double dz = cloud.z[i] - surf.values()[cell_of[i]];
        out.labels[i] = dz <= params.elevation_threshold ? ClassLabel::Ground : ClassLabel::Object;
    }
    return out;
}

RasterGrid rasterize_dtm(const PointCloud& cloud, double cell_size) {
    if (cloud.empty()) throw DataError("rasterize_dtm: empty cloud");
    if (cell_size <= 0) throw DataError("rasterize_dtm: cell_size must be positive");
    bool have_labels = !cloud.labels.empty();
    size_t n_ground = 0;
    for (size_t i = 0; i < cloud.size(); ++i)
        if (!have_labels || cloud.labels[i] == ClassLabel::Ground) ++n_ground;
    if (n_ground == 0) throw DataError("rasterize_dtm: zero ground points");

    GridFrame f = frame_for(cloud, cell_size);
    RasterGrid dtm(f.ncols, f.nrows, f.x0, f.y0, f.cell, kInf);
    for (size_t i = 0; i < cloud.size(); ++i) {
        if (have_labels && cloud.labels[i] != ClassLabel::Ground) continue;
        int r, c;
        dtm.cell_of(cloud.x[i], cloud.y[i], r, c);
        dtm.at(r, c) = std::min(dtm.at(r, c), cloud.z[i]);
    }
    bfs_fill(dtm, kInf);
    return dtm;
}

RasterGrid rasterize_chm(const PointCloud& cloud, const RasterGrid& dtm, double cell_size) {
    if (cloud.empty()) throw DataError("rasterize_chm: empty cloud");
    bool have_labels = !cloud.labels.empty();
    GridFrame f = frame_for(cloud, cell_size);
    RasterGrid chm(f.ncols, f.nrows, f.x0, f.y0, f.cell, 0.0);
    for (size_t i = 0; i < cloud.size(); ++i) {
        if (have_labels && cloud.labels[i] != ClassLabel::Object) continue;
        int r, c;
        chm.cell_of(cloud.x[i], cloud.y[i], r, c);
        int dr, dc;
        if (!dtm.cell_of(cloud.x[i], cloud.y[i], dr, dc)) {
            dr = std::clamp(dr, 0, dtm.nrows() - 1);
            dc = std::clamp(dc, 0, dtm.ncols() - 1);
        }
        double h = cloud.z[i] - dtm.at(dr, dc);
        if (h > chm.at(r, c)) chm.at(r, c) = h;
    }
    return chm;
}

RasterGrid smooth_raster(const RasterGrid& grid, double sigma) {
    if (sigma < 0) throw DataError("smooth_raster: sigma must be >= 0");
    if (sigma == 0) return grid;
    int radius = static_cast<int>(std::ceil(3.0 * sigma));
    std::vector<double> kernel(2 * radius + 1);
    for (int k = -radius; k <= radius; ++k) kernel[k + radius] = std::exp(-0.5 * k * k / (sigma * sigma));

    int nr = grid.nrows(), nc = grid.ncols();
    std::vector<double> num(grid.size()), den(grid.size());
    for (size_t i = 0; i < grid.size(); ++i) {
        bool nd = grid.values()[i] == grid.nodata();
        num[i] = nd ? 0.0 : grid.values()[i];
        den[i] = nd ? 0.0 : 1.0;
    }
    auto pass = [&](std::vector<double>& v, bool rows) {
        std::vector<double> out(v.size(), 0.0);
        for (int r = 0; r < nr; ++r) {
            for (int c = 0; c < nc; ++c) {
                double acc = 0;
                if (rows) {
                    for (int k = -radius; k <= radius; ++k) {
                        int cc = c + k;
                        if (cc < 0 || cc >= nc) continue;
                        acc += kernel[k + radius] * v[static_cast<size_t>(r) * nc + cc];
                    }
                } else {
                    for (int k = -radius; k <= radius; ++k) {
                        int rr = r + k;
                        if (rr < 0 || rr >= nr) continue;
                        acc += kernel[k + radius] * v[static_cast<size_t>(rr) * nc + c];
                    }
                }
                out[static_cast<size_t>(r) * nc + c] = acc;
            }
        }
        v = std::move(out);
    };
    pass(num, true);
    pass(num, false);
    pass(den, true);
    pass(den, false);

    RasterGrid out(nc, nr, grid.x0(), grid.y0(), grid.cell(), 0.0, grid.nodata());
    for (size_t i = 0; i < grid.size(); ++i) {
        if (grid.values()[i] == grid.nodata())
            out.values()[i] = grid.nodata();
        else
            out.values()[i] = den[i] > 0 ? num[i] / den[i] : grid.nodata();
    }
    return out;
}

}  // namespace crowncut
