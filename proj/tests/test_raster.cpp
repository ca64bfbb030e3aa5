#include <cmath>
#include <fstream>

#include "crowncut/raster.hpp"
#include "doctest.h"
#include "test_support.hpp"

using namespace crowncut;
using testsup::TempDir;

TEST_CASE("raster construction validates dimensions") {
    CHECK_THROWS_AS(RasterGrid(0, 4, 0, 0, 1.0), DataError);
    CHECK_THROWS_AS(RasterGrid(4, -1, 0, 0, 1.0), DataError);
    CHECK_THROWS_AS(RasterGrid(4, 4, 0, 0, 0.0), DataError);
    RasterGrid g(3, 2, 10.0, 20.0, 0.5, 7.0);
    CHECK(g.size() == 6);
    CHECK(g.at(1, 2) == 7.0);
}

TEST_CASE("cell ownership is half-open in both axes") {
    RasterGrid g(4, 4, 0.0, 0.0, 1.0);
    int r = -1, c = -1;
    CHECK(g.cell_of(0.0, 0.0, r, c));
    CHECK(r == 0);
    CHECK(c == 0);
    // A point exactly on the shared edge belongs to the higher cell.
    CHECK(g.cell_of(1.0, 0.5, r, c));
    CHECK(c == 1);
    CHECK(r == 0);
    CHECK(g.cell_of(3.999, 3.999, r, c));
    CHECK(r == 3);
    CHECK(c == 3);
    CHECK_FALSE(g.cell_of(4.0, 1.0, r, c));
    CHECK_FALSE(g.cell_of(-0.001, 1.0, r, c));
}

TEST_CASE("raster round-trips through the text format") {
    TempDir tmp("raster");
    RasterGrid g(5, 3, -12.25, 4.5, 0.5, 0.0, -9999.0);
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 5; ++c) g.at(r, c) = std::sin(r * 5.0 + c) * 123.456;
    g.at(1, 1) = g.nodata();
    save_raster_ascii(g, tmp.file("g.asc"));
    RasterGrid h = load_raster_ascii(tmp.file("g.asc"));
    REQUIRE(h.ncols() == 5);
    REQUIRE(h.nrows() == 3);
    CHECK(h.x0() == doctest::Approx(-12.25).epsilon(1e-12));
    CHECK(h.cell() == 0.5);
    CHECK(h.is_nodata(1, 1));
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 5; ++c)
            CHECK(h.at(r, c) == doctest::Approx(g.at(r, c)).epsilon(1e-10));
}

TEST_CASE("raster loader rejects malformed files") {
    TempDir tmp("rasterbad");
    CHECK_THROWS_AS(load_raster_ascii(tmp.file("missing.asc")), DataError);

    {
        std::ofstream out(tmp.file("trunc.asc"));
        out << "ncols 3\nnrows 2\nxll 0\nyll 0\ncellsize 1\nnodata -9999\n1 2 3\n4\n";
    }
    CHECK_THROWS_AS(load_raster_ascii(tmp.file("trunc.asc")), DataError);

    {
        std::ofstream out(tmp.file("badheader.asc"));
        out << "cols 3\nnrows 2\nxll 0\nyll 0\ncellsize 1\nnodata -9999\n1 2 3 4 5 6\n";
    }
    CHECK_THROWS_AS(load_raster_ascii(tmp.file("badheader.asc")), DataError);
}
