#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace crowncut {

// Thrown for malformed or inconsistent input data. CLI maps it to exit code 2.
struct DataError : std::runtime_error {
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

// Thrown when an iterative solver fails to converge. CLI maps it to exit code 3.
struct SolverError : std::runtime_error {
    explicit SolverError(const std::string& msg) : std::runtime_error(msg) {}
};

// Row-major single-band grid. Row 0 is the southernmost row (lowest y),
// column 0 the westernmost column. Cell (r, c) covers the half-open square
// [x0 + c*cell, x0 + (c+1)*cell) x [y0 + r*cell, y0 + (r+1)*cell).
class RasterGrid {
public:
    RasterGrid() = default;
    RasterGrid(int ncols, int nrows, double x0, double y0, double cell,
               double fill = 0.0, double nodata = -9999.0);

    int ncols() const { return ncols_; }
    int nrows() const { return nrows_; }
    double x0() const { return x0_; }
    double y0() const { return y0_; }
    double cell() const { return cell_; }
    double nodata() const { return nodata_; }

    double& at(int row, int col) { return v_[static_cast<size_t>(row) * ncols_ + col]; }
    double at(int row, int col) const { return v_[static_cast<size_t>(row) * ncols_ + col]; }
    bool in_bounds(int row, int col) const {
        return row >= 0 && row < nrows_ && col >= 0 && col < ncols_;
    }
    bool is_nodata(int row, int col) const { return at(row, col) == nodata_; }

    // Cell owning point (x, y) under the half-open convention, or false if outside.
    bool cell_of(double x, double y, int& row, int& col) const;

    // Center coordinates of cell (row, col).
    double cx(int col) const { return x0_ + (col + 0.5) * cell_; }
    double cy(int row) const { return y0_ + (row + 0.5) * cell_; }

    size_t size() const { return v_.size(); }
    std::vector<double>& values() { return v_; }
    const std::vector<double>& values() const { return v_; }

private:
    int ncols_ = 0, nrows_ = 0;
    double x0_ = 0, y0_ = 0, cell_ = 1;
    double nodata_ = -9999.0;
    std::vector<double> v_;
};

// Plain-text grid exchange format:
//   ncols <int>
//   nrows <int>
//   xll <float>
//   yll <float>
//   cellsize <float>
//   nodata <float>
// followed by nrows lines of ncols values in storage order (row 0 first).
void save_raster_ascii(const RasterGrid& g, const std::string& path);
RasterGrid load_raster_ascii(const std::string& path);

}  // namespace crowncut
