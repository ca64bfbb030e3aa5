#include "crowncut/pointcloud.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace crowncut {

namespace {

constexpr char kMagic[4] = {'P', 'C', 'L', 'D'};

std::string fmt_g(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

bool parse_field(const char* b, const char* e, double& out) {
    auto res = std::from_chars(b, e, out);
    return res.ec == std::errc() && res.ptr == e;
}

// Split a CSV line in place into trimmed [begin,end) field ranges.
void split_fields(const std::string& line, std::vector<std::pair<const char*, const char*>>& out) {
    out.clear();
    const char* p = line.data();
    const char* end = p + line.size();
    const char* start = p;
    auto push = [&](const char* b, const char* e) {
        while (b < e && (*b == ' ' || *b == '\t')) ++b;
        while (e > b && (e[-1] == ' ' || e[-1] == '\t' || e[-1] == '\r')) --e;
        out.emplace_back(b, e);
    };
    for (; p < end; ++p) {
        if (*p == ',') {
            push(start, p);
            start = p + 1;
        }
    }
    push(start, end);
}

}  // namespace

PointCloud PointCloud::select(const std::vector<uint32_t>& idx) const {
    PointCloud out;
    out.feature_dim = feature_dim;
    out.x.reserve(idx.size());
    out.y.reserve(idx.size());
    out.z.reserve(idx.size());
    if (!labels.empty()) out.labels.reserve(idx.size());
    if (feature_dim > 0) out.features.reserve(idx.size() * feature_dim);
    if (!has_features.empty()) out.has_features.reserve(idx.size());
    for (uint32_t i : idx) {
        out.x.push_back(x[i]);
        out.y.push_back(y[i]);
        out.z.push_back(z[i]);
        if (!labels.empty()) out.labels.push_back(labels[i]);
        if (feature_dim > 0)
            out.features.insert(out.features.end(), feature_row(i), feature_row(i) + feature_dim);
        if (!has_features.empty()) out.has_features.push_back(has_features[i]);
    }
    return out;
}

PointCloud load_cloud(const std::string& path, CloudFormat format) {
    if (format == CloudFormat::XyzBinary) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw DataError("cannot open cloud: " + path);
        char magic[4];
        in.read(magic, 4);
        if (!in || std::memcmp(magic, kMagic, 4) != 0)
            throw DataError(path + ": not a PCLD binary cloud");
        uint32_t count = 0, k = 0;
        in.read(reinterpret_cast<char*>(&count), 4);
        in.read(reinterpret_cast<char*>(&k), 4);
        if (!in) throw DataError(path + ": truncated header");
        if (count == 0) throw DataError(path + ": no points");
        PointCloud cloud;
        cloud.feature_dim = static_cast<int>(k);
        cloud.x.resize(count);
        cloud.y.resize(count);
        cloud.z.resize(count);
        if (k > 0) cloud.features.resize(static_cast<size_t>(count) * k);
        std::vector<double> row(3 + k);
        for (uint32_t i = 0; i < count; ++i) {
            in.read(reinterpret_cast<char*>(row.data()), static_cast<std::streamsize>(row.size() * 8));
            if (!in) throw DataError(path + ": truncated at point " + std::to_string(i));
            for (double v : row)
                if (!std::isfinite(v))
                    throw DataError(path + ": non-finite value at point " + std::to_string(i));
            cloud.x[i] = row[0];
            cloud.y[i] = row[1];
            cloud.z[i] = row[2];
            for (uint32_t f = 0; f < k; ++f) cloud.features[static_cast<size_t>(i) * k + f] = row[3 + f];
        }
        return cloud;
    }

    std::ifstream in(path);
    if (!in) throw DataError("cannot open cloud: " + path);
    PointCloud cloud;
    std::string line;
    std::vector<std::pair<const char*, const char*>> fields;
    size_t lineno = 0;
    int arity = -1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        split_fields(line, fields);
        if (fields.size() == 1 && fields[0].first == fields[0].second) continue;
        double v0;
        if (arity < 0 && !parse_field(fields[0].first, fields[0].second, v0)) {
            continue;  // header line
        }
        if (arity < 0) {
            arity = static_cast<int>(fields.size());
            if (arity < 3)
                throw DataError(path + ":" + std::to_string(lineno) + ": expected x,y,z[,f...]");
            cloud.feature_dim = arity - 3;
        } else if (static_cast<int>(fields.size()) != arity) {
            throw DataError(path + ":" + std::to_string(lineno) + ": inconsistent column count (" +
                            std::to_string(fields.size()) + " vs " + std::to_string(arity) + ")");
        }
        double vals[3];
        for (int c = 0; c < 3; ++c) {
            if (!parse_field(fields[c].first, fields[c].second, vals[c]) ||
                !std::isfinite(vals[c]))
                throw DataError(path + ":" + std::to_string(lineno) + ": bad coordinate in column " +
                                std::to_string(c + 1));
        }
        cloud.push_point(vals[0], vals[1], vals[2]);
        for (int c = 3; c < arity; ++c) {
            double f;
            if (!parse_field(fields[c].first, fields[c].second, f) || !std::isfinite(f))
                throw DataError(path + ":" + std::to_string(lineno) + ": bad feature in column " +
                                std::to_string(c + 1));
            cloud.features.push_back(f);
        }
    }
    if (cloud.empty()) throw DataError(path + ": no points");
    return cloud;
}

void save_cloud(const PointCloud& cloud, const std::string& path, CloudFormat format) {
    if (format == CloudFormat::XyzBinary) {
        std::ofstream out(path, std::ios::binary);
        if (!out) throw DataError("cannot open for writing: " + path);
        out.write(kMagic, 4);
        uint32_t count = static_cast<uint32_t>(cloud.size());
        uint32_t k = static_cast<uint32_t>(cloud.feature_dim);
        out.write(reinterpret_cast<const char*>(&count), 4);
        out.write(reinterpret_cast<const char*>(&k), 4);
        for (size_t i = 0; i < cloud.size(); ++i) {
            double row[3] = {cloud.x[i], cloud.y[i], cloud.z[i]};
            out.write(reinterpret_cast<const char*>(row), 24);
            if (k > 0)
                out.write(reinterpret_cast<const char*>(cloud.feature_row(i)),
                          static_cast<std::streamsize>(k) * 8);
        }
        if (!out) throw DataError("write failed: " + path);
        return;
    }
    std::ofstream out(path);
    if (!out) throw DataError("cannot open for writing: " + path);
    for (size_t i = 0; i < cloud.size(); ++i) {
        out << fmt_g(cloud.x[i]) << ',' << fmt_g(cloud.y[i]) << ',' << fmt_g(cloud.z[i]);
        for (int f = 0; f < cloud.feature_dim; ++f) out << ',' << fmt_g(cloud.feature_row(i)[f]);
        out << '\n';
    }
    if (!out) throw DataError("write failed: " + path);
}

CloudFormat guess_format(const std::string& path) {
    auto dot = path.find_last_of('.');
    std::string ext = dot == std::string::npos ? "" : path.substr(dot);
    if (ext == ".pcb" || ext == ".bin") return CloudFormat::XyzBinary;
    return CloudFormat::XyzCsv;
}

PointCloud attach_features(const PointCloud& cloud, const std::vector<RasterGrid>& raster_stack) {
    if (raster_stack.empty()) throw DataError("attach_features: empty raster stack");
    const RasterGrid& g0 = raster_stack[0];
    for (const RasterGrid& g : raster_stack) {
        if (g.ncols() != g0.ncols() || g.nrows() != g0.nrows() || g.x0() != g0.x0() ||
            g.y0() != g0.y0() || g.cell() != g0.cell())
            throw DataError("attach_features: mismatched raster geometries");
    }
    PointCloud out = cloud;
    int k = static_cast<int>(raster_stack.size());
    out.feature_dim = k;
    out.features.assign(cloud.size() * k, 0.0);
    out.has_features.assign(cloud.size(), 0);
    for (size_t i = 0; i < cloud.size(); ++i) {
        int r, c;
        if (!g0.cell_of(cloud.x[i], cloud.y[i], r, c)) continue;
        bool any_nodata = false;
        for (int b = 0; b < k; ++b)
            if (raster_stack[b].is_nodata(r, c)) any_nodata = true;
        if (any_nodata) continue;
        out.has_features[i] = 1;
        for (int b = 0; b < k; ++b) out.features[i * k + b] = raster_stack[b].at(r, c);
    }
    return out;
}

void write_tree_table(const std::vector<TreeRecord>& trees, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot open for writing: " + path);
    out << "tree_id,apex_x,apex_y,height_m,crown_area_m2,n_points\n";
    for (const TreeRecord& t : trees) {
        out << t.tree_id << ',' << fmt_g(t.apex_x) << ',' << fmt_g(t.apex_y) << ','
            << fmt_g(t.height) << ',' << fmt_g(t.crown_area) << ',' << t.n_points << '\n';
    }
    if (!out) throw DataError("write failed: " + path);
}

void write_segmentation(const Segmentation& seg, const std::string& labels_path,
                        const std::string& trees_path) {
    if (seg.labels.empty()) throw DataError("write_segmentation: empty segmentation");
    std::ofstream out(labels_path);
    if (!out) throw DataError("cannot open for writing: " + labels_path);
    out << "point_index,tree_id\n";
    for (size_t i = 0; i < seg.labels.size(); ++i) out << i << ',' << seg.labels[i] << '\n';
    if (!out) throw DataError("write failed: " + labels_path);
    write_tree_table(seg.trees, trees_path);
}

std::vector<int> load_segmentation_labels(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open segmentation: " + path);
    std::string line;
    std::vector<int> labels;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (lineno == 1 || line.empty()) continue;  // header
        auto comma = line.find(',');
        if (comma == std::string::npos)
            throw DataError(path + ":" + std::to_string(lineno) + ": expected index,tree_id");
        size_t idx = std::stoul(line.substr(0, comma));
        int id = std::stoi(line.substr(comma + 1));
        if (idx != labels.size())
            throw DataError(path + ":" + std::to_string(lineno) + ": non-sequential point index");
        labels.push_back(id);
    }
    return labels;
}

std::vector<TreeRecord> load_tree_table(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open tree table: " + path);
    std::string line;
    std::vector<TreeRecord> trees;
    std::vector<std::pair<const char*, const char*>> fields;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (lineno == 1 || line.empty() || line == "\r") continue;
        split_fields(line, fields);
        if (fields.size() != 6)
            throw DataError(path + ":" + std::to_string(lineno) + ": expected 6 columns");
        double v[6];
        for (int c = 0; c < 6; ++c) {
            if (!parse_field(fields[c].first, fields[c].second, v[c]))
                throw DataError(path + ":" + std::to_string(lineno) + ": bad value in column " +
                                std::to_string(c + 1));
        }
        TreeRecord t;
        t.tree_id = static_cast<int>(v[0]);
        t.apex_x = v[1];
        t.apex_y = v[2];
        t.height = v[3];
        t.crown_area = v[4];
        t.n_points = static_cast<size_t>(v[5]);
        trees.push_back(t);
    }
    return trees;
}

}  // namespace crowncut
