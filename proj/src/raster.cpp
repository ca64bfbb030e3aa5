#include "crowncut/raster.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace crowncut {

RasterGrid::RasterGrid(int ncols, int nrows, double x0, double y0, double cell, double fill,
                       double nodata)
    : ncols_(ncols), nrows_(nrows), x0_(x0), y0_(y0), cell_(cell), nodata_(nodata) {
    if (ncols <= 0 || nrows <= 0) throw DataError("raster dimensions must be positive");
    if (cell <= 0) throw DataError("raster cell_size must be positive");
    v_.assign(static_cast<size_t>(ncols) * nrows, fill);
}

bool RasterGrid::cell_of(double x, double y, int& row, int& col) const {
    double fc = std::floor((x - x0_) / cell_);
    double fr = std::floor((y - y0_) / cell_);
    col = static_cast<int>(fc);
    row = static_cast<int>(fr);
    return in_bounds(row, col);
}

namespace {

std::string fmt_g(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

double parse_double(const std::string& tok, const char* what) {
    double v = 0;
    const char* b = tok.data();
    const char* e = b + tok.size();
    auto res = std::from_chars(b, e, v);
    if (res.ec != std::errc() || res.ptr != e)
        throw DataError(std::string("cannot parse ") + what + " from '" + tok + "'");
    return v;
}

}  // namespace

void save_raster_ascii(const RasterGrid& g, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot open for writing: " + path);
    out << "ncols " << g.ncols() << "\n";
    out << "nrows " << g.nrows() << "\n";
    out << "xll " << fmt_g(g.x0()) << "\n";
    out << "yll " << fmt_g(g.y0()) << "\n";
    out << "cellsize " << fmt_g(g.cell()) << "\n";
    out << "nodata " << fmt_g(g.nodata()) << "\n";
    for (int r = 0; r < g.nrows(); ++r) {
        for (int c = 0; c < g.ncols(); ++c) {
            if (c) out << ' ';
            out << fmt_g(g.at(r, c));
        }
        out << '\n';
    }
    if (!out) throw DataError("write failed: " + path);
}

RasterGrid load_raster_ascii(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open raster: " + path);
    auto header = [&](const char* name) -> std::string {
        std::string key, val;
        if (!(in >> key >> val)) throw DataError(path + ": truncated header, expected " + name);
        if (key != name) throw DataError(path + ": expected header '" + std::string(name) +
                                         "', found '" + key + "'");
        return val;
    };
    int ncols = static_cast<int>(parse_double(header("ncols"), "ncols"));
    int nrows = static_cast<int>(parse_double(header("nrows"), "nrows"));
    double x0 = parse_double(header("xll"), "xll");
    double y0 = parse_double(header("yll"), "yll");
    double cell = parse_double(header("cellsize"), "cellsize");
    double nodata = parse_double(header("nodata"), "nodata");
    RasterGrid g(ncols, nrows, x0, y0, cell, 0.0, nodata);
    for (size_t i = 0; i < g.size(); ++i) {
        std::string tok;
        if (!(in >> tok)) throw DataError(path + ": truncated raster body");
        g.values()[i] = parse_double(tok, "raster value");
        if (!std::isfinite(g.values()[i]))
            throw DataError(path + ": non-finite raster value");
    }
    return g;
}

}  // namespace crowncut
