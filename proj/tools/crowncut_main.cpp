#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "crowncut/config.hpp"
#include "crowncut/pipeline.hpp"
#include "crowncut/rpca.hpp"
#include "crowncut/synthforest.hpp"
#include "crowncut/validation.hpp"

namespace {

using namespace crowncut;

constexpr const char* kVersion = "0.1.0";

struct CommonOpts {
    std::string config_path;
    std::string out_dir;
    uint64_t seed = 0;
    bool seed_set = false;
    int threads = 1;
    std::vector<std::string> overrides;  // key=value
};

void add_common(CLI::App* cmd, CommonOpts& o, bool out_required) {
    cmd->add_option("--config", o.config_path, "Config file (key = value lines)");
    auto* out = cmd->add_option("--out", o.out_dir, "Output directory");
    if (out_required) out->required();
    cmd->add_option("--seed", o.seed, "Random seed (overrides synth.seed)")
        ->each([&o](const std::string&) { o.seed_set = true; });
    cmd->add_option("--threads", o.threads, "Worker thread cap")->check(CLI::PositiveNumber);
    cmd->add_option("--set", o.overrides, "Extra config override key=value (repeatable)");
}

ToolConfig build_config(const CommonOpts& o) {
    ToolConfig cfg;
    if (!o.config_path.empty()) cfg = load_config(o.config_path);
    for (const std::string& kv : o.overrides) {
        auto eq = kv.find('=');
        if (eq == std::string::npos) throw DataError("--set expects key=value, got '" + kv + "'");
        std::string key = kv.substr(0, eq);
        std::string val = kv.substr(eq + 1);
        auto strip = [](std::string& s) {
            while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.erase(s.begin());
            while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.pop_back();
        };
        strip(key);
        strip(val);
        apply_config_line(cfg, key, val);
    }
    if (o.seed_set) cfg.synth.seed = o.seed;
    return cfg;
}

std::string join_path(const std::string& dir, const std::string& name) {
    return (std::filesystem::path(dir) / name).string();
}

// Manifests record input basenames, not full paths: reruns from different
// directories must produce byte-identical manifests (timings aside).
std::string file_name(const std::string& path) {
    return std::filesystem::path(path).filename().string();
}

void ensure_out(const std::string& dir) {
    if (dir.empty()) return;
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw DataError("cannot create output directory: " + dir);
}

struct ManifestWriter {
    std::vector<std::string> lines;

    void kv(const std::string& k, const std::string& v) { lines.push_back(k + " = " + v); }
    void config(const ToolConfig& cfg) {
        for (const std::string& line : dump_config(cfg)) lines.push_back(line);
    }
    void timings(const PipelineDiagnostics& diag) {
        for (const StageTiming& t : diag.timings) {
            char buf[64];
            std::snprintf(buf, sizeof(buf), "%.3f", t.ms);
            kv("timing." + t.stage + "_ms", buf);
        }
    }
    void warnings(const PipelineDiagnostics& diag) {
        for (size_t i = 0; i < diag.warnings.size(); ++i)
            kv("warning." + std::to_string(i), diag.warnings[i]);
    }
    void write(const std::string& dir) const {
        std::ofstream out(join_path(dir, "manifest.txt"));
        if (!out) throw DataError("cannot write manifest in " + dir);
        for (const std::string& line : lines) out << line << '\n';
    }
};

ManifestWriter make_manifest(const char* subcommand, const CommonOpts& o, const ToolConfig& cfg) {
    ManifestWriter m;
    m.kv("tool.name", "crowncut");
    m.kv("tool.version", kVersion);
    m.kv("run.subcommand", subcommand);
    m.kv("run.seed", std::to_string(cfg.synth.seed));
    m.kv("run.threads", std::to_string(o.threads));
    m.config(cfg);
    return m;
}

PointCloud load_input_cloud(const std::string& path) {
    if (path.empty()) throw DataError("missing --cloud input");
    return load_cloud(path, guess_format(path));
}

void write_class_labels(const PointCloud& cloud, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot open for writing: " + path);
    out << "point_index,class\n";
    for (size_t i = 0; i < cloud.size(); ++i)
        out << i << ',' << (cloud.labels[i] == ClassLabel::Ground ? "ground" : "object") << '\n';
}

std::vector<uint32_t> indices_with_label(const PointCloud& cloud, ClassLabel want) {
    std::vector<uint32_t> idx;
    for (size_t i = 0; i < cloud.size(); ++i)
        if (cloud.labels[i] == want) idx.push_back(static_cast<uint32_t>(i));
    return idx;
}

int run_segment_like(const char* name, const CommonOpts& o, const std::string& cloud_path,
                     const std::vector<std::string>& feature_bands, bool use_rc_only) {
    ToolConfig cfg = build_config(o);
    PointCloud cloud = load_input_cloud(cloud_path);
    if (cfg.mcrc.use_features && !feature_bands.empty()) {
        std::vector<RasterGrid> stack;
        for (const std::string& b : feature_bands) stack.push_back(load_raster_ascii(b));
        cloud = attach_features(cloud, stack);
    }
    ensure_out(o.out_dir);
    PipelineDiagnostics diag;
    Segmentation seg = use_rc_only ? rc_only(cloud, cfg.mcrc, o.threads, &diag)
                                   : mcrc(cloud, cfg.mcrc, o.threads, &diag);
    write_segmentation(seg, join_path(o.out_dir, "segmentation.csv"),
                       join_path(o.out_dir, "trees.csv"));
    save_raster_ascii(diag.dtm, join_path(o.out_dir, "dtm.asc"));
    save_raster_ascii(diag.chm, join_path(o.out_dir, "chm.asc"));
    save_raster_ascii(diag.chm_smooth, join_path(o.out_dir, "chm_smooth.asc"));
    if (!diag.apexes.empty()) save_apexes_csv(diag.apexes, join_path(o.out_dir, "apexes.csv"));

    ManifestWriter m = make_manifest(name, o, cfg);
    m.kv("input.cloud", file_name(cloud_path));
    m.kv("result.trees", std::to_string(seg.trees.size()));
    m.kv("result.fell_back_to_rc", diag.fell_back_to_rc ? "true" : "false");
    m.warnings(diag);
    m.timings(diag);
    m.write(o.out_dir);
    std::cout << name << ": " << seg.trees.size() << " trees\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"crowncut: individual tree crown delineation from LiDAR point clouds"};
    app.require_subcommand(1);

    CommonOpts o;
    std::string cloud_path, truth_path, trees_path;
    std::vector<std::string> bands, feature_bands;
    bool binary_cloud = false;

    auto* synth = app.add_subcommand("synth", "Generate a synthetic forest plot");
    add_common(synth, o, true);
    synth->add_flag("--binary", binary_cloud, "Write the cloud in binary (PCLD) format");

    auto* filter = app.add_subcommand("filter", "Ground/object classification");
    add_common(filter, o, true);
    filter->add_option("--cloud", cloud_path, "Input point cloud")->required();

    auto* chm = app.add_subcommand("chm", "DTM, CHM, and smoothed CHM rasters");
    add_common(chm, o, true);
    chm->add_option("--cloud", cloud_path, "Input point cloud")->required();

    auto* detect = app.add_subcommand("detect", "Treetop detection + watershed baseline");
    add_common(detect, o, true);
    detect->add_option("--cloud", cloud_path, "Input point cloud")->required();

    auto* rpca_cmd = app.add_subcommand("rpca", "Robust PCA on a raster stack");
    add_common(rpca_cmd, o, true);
    rpca_cmd->add_option("--band", bands, "Band raster (repeatable, ordered)")->required();

    auto* segment = app.add_subcommand("segment", "Full MCRC segmentation");
    add_common(segment, o, true);
    segment->add_option("--cloud", cloud_path, "Input point cloud")->required();
    segment->add_option("--feature-band", feature_bands,
                        "Feature raster attached before segmentation (repeatable)");

    auto* rconly = app.add_subcommand("rc-only", "Recursive-cut-only segmentation");
    add_common(rconly, o, true);
    rconly->add_option("--cloud", cloud_path, "Input point cloud")->required();

    auto* validate = app.add_subcommand("validate", "Match a tree table against ground truth");
    add_common(validate, o, false);
    validate->add_option("--trees", trees_path, "Delineated tree table CSV")->required();
    validate->add_option("--truth", truth_path, "Ground-truth CSV x,y,height")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        if (synth->parsed()) {
            ToolConfig cfg = build_config(o);
            ensure_out(o.out_dir);
            SynthForest forest = generate_forest(cfg.synth);
            std::string cloud_name = binary_cloud ? "cloud.pcb" : "cloud.csv";
            save_cloud(forest.cloud, join_path(o.out_dir, cloud_name),
                       binary_cloud ? CloudFormat::XyzBinary : CloudFormat::XyzCsv);
            save_truth_csv(forest.truth, join_path(o.out_dir, "truth.csv"));
            save_point_tree_csv(forest.point_tree, join_path(o.out_dir, "point_tree.csv"));
            write_class_labels(forest.cloud, join_path(o.out_dir, "true_labels.csv"));
            ManifestWriter m = make_manifest("synth", o, cfg);
            m.kv("result.points", std::to_string(forest.cloud.size()));
            m.kv("result.trees", std::to_string(forest.truth.size()));
            m.kv("output.cloud", cloud_name);
            m.write(o.out_dir);
            std::cout << "synth: " << forest.cloud.size() << " points, " << forest.truth.size()
                      << " trees\n";
            return 0;
        }
        if (filter->parsed()) {
            ToolConfig cfg = build_config(o);
            PointCloud cloud = load_input_cloud(cloud_path);
            ensure_out(o.out_dir);
            PointCloud labeled = classify_ground(cloud, cfg.mcrc.terrain);
            write_class_labels(labeled, join_path(o.out_dir, "labels.csv"));
            save_cloud(labeled.select(indices_with_label(labeled, ClassLabel::Ground)),
                       join_path(o.out_dir, "ground.csv"), CloudFormat::XyzCsv);
            save_cloud(labeled.select(indices_with_label(labeled, ClassLabel::Object)),
                       join_path(o.out_dir, "object.csv"), CloudFormat::XyzCsv);
            ManifestWriter m = make_manifest("filter", o, cfg);
            m.kv("input.cloud", file_name(cloud_path));
            m.write(o.out_dir);
            return 0;
        }
        if (chm->parsed()) {
            ToolConfig cfg = build_config(o);
            PointCloud cloud = load_input_cloud(cloud_path);
            ensure_out(o.out_dir);
            PointCloud labeled = classify_ground(cloud, cfg.mcrc.terrain);
            RasterGrid dtm = rasterize_dtm(labeled, cfg.mcrc.terrain.cell_size);
            RasterGrid chm_r = rasterize_chm(labeled, dtm, cfg.mcrc.terrain.cell_size);
            RasterGrid chm_s = smooth_raster(chm_r, cfg.mcrc.chm_smoothing_sigma);
            save_raster_ascii(dtm, join_path(o.out_dir, "dtm.asc"));
            save_raster_ascii(chm_r, join_path(o.out_dir, "chm.asc"));
            save_raster_ascii(chm_s, join_path(o.out_dir, "chm_smooth.asc"));
            ManifestWriter m = make_manifest("chm", o, cfg);
            m.kv("input.cloud", file_name(cloud_path));
            m.write(o.out_dir);
            return 0;
        }
        if (detect->parsed()) {
            ToolConfig cfg = build_config(o);
            PointCloud cloud = load_input_cloud(cloud_path);
            ensure_out(o.out_dir);
            PipelineDiagnostics diag;
            Segmentation seg = watershed_only(cloud, cfg.mcrc, &diag);
            save_apexes_csv(diag.apexes, join_path(o.out_dir, "apexes.csv"));
            if (!diag.apexes.empty())
                save_raster_ascii(diag.watershed_labels, join_path(o.out_dir, "watershed.asc"));
            write_segmentation(seg, join_path(o.out_dir, "segmentation.csv"),
                               join_path(o.out_dir, "trees.csv"));
            ManifestWriter m = make_manifest("detect", o, cfg);
            m.kv("input.cloud", file_name(cloud_path));
            m.kv("result.apexes", std::to_string(diag.apexes.size()));
            m.kv("result.trees", std::to_string(seg.trees.size()));
            m.warnings(diag);
            m.timings(diag);
            m.write(o.out_dir);
            std::cout << "detect: " << diag.apexes.size() << " apexes, " << seg.trees.size()
                      << " regions\n";
            return 0;
        }
        if (rpca_cmd->parsed()) {
            ToolConfig cfg = build_config(o);
            ensure_out(o.out_dir);
            std::vector<RasterGrid> stack;
            for (const std::string& b : bands) stack.push_back(load_raster_ascii(b));
            const RasterGrid& g0 = stack[0];
            for (const RasterGrid& g : stack)
                if (g.ncols() != g0.ncols() || g.nrows() != g0.nrows())
                    throw DataError("rpca: band rasters disagree in shape");
            Eigen::MatrixXd M(g0.size(), stack.size());
            for (size_t b = 0; b < stack.size(); ++b)
                for (size_t i = 0; i < g0.size(); ++i) {
                    if (stack[b].values()[i] == stack[b].nodata())
                        throw DataError("rpca: NODATA pixel in band " + std::to_string(b));
                    M(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(b)) =
                        stack[b].values()[i];
                }
            RpcaResult res = rpca(M, cfg.rpca.lambda, cfg.rpca.tol, cfg.rpca.max_iter);
            auto scores = pc_score_rasters(res.L, cfg.rpca.comp_lo, cfg.rpca.comp_hi, g0);
            for (size_t s = 0; s < scores.size(); ++s)
                save_raster_ascii(scores[s], join_path(o.out_dir, "pc_" +
                                                            std::to_string(cfg.rpca.comp_lo +
                                                                           static_cast<int>(s)) +
                                                            ".asc"));
            ManifestWriter m = make_manifest("rpca", o, cfg);
            for (size_t b = 0; b < bands.size(); ++b)
                m.kv("input.band." + std::to_string(b), file_name(bands[b]));
            m.kv("rpca.iterations", std::to_string(res.iterations));
            m.kv("rpca.converged", res.converged ? "true" : "false");
            char buf[40];
            std::snprintf(buf, sizeof(buf), "%.12g", res.primal_residual);
            m.kv("rpca.primal_residual", buf);
            m.write(o.out_dir);
            std::cout << "rpca: " << res.iterations << " iterations, "
                      << (res.converged ? "converged" : "not converged") << "\n";
            return 0;
        }
        if (segment->parsed())
            return run_segment_like("segment", o, cloud_path, feature_bands, false);
        if (rconly->parsed())
            return run_segment_like("rc-only", o, cloud_path, feature_bands, true);
        if (validate->parsed()) {
            ToolConfig cfg = build_config(o);
            auto trees = load_tree_table(trees_path);
            auto truth = load_truth_csv(truth_path);
            MatchReport report = match_trees(trees, truth, cfg.validate_max_xy, cfg.validate_max_dz);
            auto bands_table = band_summary(report, trees, truth);
            if (!o.out_dir.empty()) {
                ensure_out(o.out_dir);
                write_report_csv(report, bands_table, join_path(o.out_dir, "report.csv"));
                ManifestWriter m = make_manifest("validate", o, cfg);
                m.kv("input.trees", file_name(trees_path));
                m.kv("input.truth", file_name(truth_path));
                m.kv("result.matched", std::to_string(report.n_matched));
                m.write(o.out_dir);
            }
            const BandRow& overall = bands_table.back();
            std::cout << "overall: truth " << overall.truth << ", extracted " << overall.extracted
                      << ", matched " << overall.matched << "\n";
            return 0;
        }
    } catch (const SolverError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const DataError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}
