#include "crowncut/synthforest.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>

namespace crowncut {

namespace {

constexpr double kPi = 3.14159265358979323846;

uint64_t splitmix64(uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

struct TreeShape {
    double cx = 0, cy = 0;
    double r = 1, h = 10;
};

double surface_height(CrownModel model, const TreeShape& t, double rho, double base_frac) {
    double frac = std::clamp(rho / t.r, 0.0, 1.0);
    double shape = model == CrownModel::Cone ? 1.0 - frac
                                             : std::sqrt(std::max(0.0, 1.0 - frac * frac));
    return t.h * (base_frac + (1.0 - base_frac) * shape);
}

}  // namespace

SynthForest generate_forest(const ForestSpec& spec) {
    if (spec.point_density <= 0) throw DataError("synth: point_density must be positive");
    if (spec.extent_x <= 0 || spec.extent_y <= 0) throw DataError("synth: extent must be positive");
    if (spec.height_min <= 0 || spec.height_max < spec.height_min)
        throw DataError("synth: height range must be positive and ordered");
    if (spec.radius_min <= 0 || spec.radius_max < spec.radius_min)
        throw DataError("synth: radius range must be positive and ordered");
    if (spec.n_canopy < 0 || spec.n_understory < 0)
        throw DataError("synth: tree counts must be nonnegative");
    if (spec.n_understory > 0 && spec.n_canopy == 0)
        throw DataError("synth: understory requires at least one canopy tree");
    if (spec.crown_overlap < 0 || spec.crown_overlap >= 1)
        throw DataError("synth: crown_overlap must be in [0, 1)");
    if (spec.noise_sigma < 0) throw DataError("synth: noise_sigma must be >= 0");
    if (spec.crown_base_frac < 0 || spec.crown_base_frac >= 1)
        throw DataError("synth: crown_base_frac must be in [0, 1)");

    std::mt19937_64 place_rng(splitmix64(spec.seed));
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    // Shapes are drawn before placement; placement is rejection sampling with
    // a minimum center spacing of (1 - overlap) * (r_i + r_j).
    std::vector<TreeShape> canopy(spec.n_canopy);
    for (TreeShape& t : canopy) {
        t.r = spec.radius_min + (spec.radius_max - spec.radius_min) * unit(place_rng);
        t.h = spec.height_min + (spec.height_max - spec.height_min) * unit(place_rng);
    }
    int64_t attempts_left = 200ll * std::max(1, spec.n_canopy);
    for (int t = 0; t < spec.n_canopy; ++t) {
        double margin = canopy[t].r;
        if (spec.extent_x <= 2 * margin || spec.extent_y <= 2 * margin)
            throw DataError("synth: extent too small for the crown radius");
        while (true) {
            if (attempts_left-- <= 0)
                throw DataError("synth: extent too small for n_canopy at minimum crown spacing");
            double x = margin + (spec.extent_x - 2 * margin) * unit(place_rng);
            double y = margin + (spec.extent_y - 2 * margin) * unit(place_rng);
            bool ok = true;
            for (int s = 0; s < t && ok; ++s) {
                double dx = x - canopy[s].cx, dy = y - canopy[s].cy;
                double min_d = (1.0 - spec.crown_overlap) * (canopy[t].r + canopy[s].r);
                ok = dx * dx + dy * dy >= min_d * min_d;
            }
            if (ok) {
                canopy[t].cx = x;
                canopy[t].cy = y;
                break;
            }
        }
    }

    std::vector<TreeShape> under(spec.n_understory);
    for (int u = 0; u < spec.n_understory; ++u) {
        const TreeShape& host = canopy[u % spec.n_canopy];
        double rho = (0.3 + 0.2 * unit(place_rng)) * host.r;
        double ang = 2 * kPi * unit(place_rng);
        under[u].cx = host.cx + rho * std::cos(ang);
        under[u].cy = host.cy + rho * std::sin(ang);
        double local = surface_height(spec.crown_model, host, rho, spec.crown_base_frac);
        under[u].h = (0.35 + 0.2 * unit(place_rng)) * local;
        under[u].r = std::max(0.4, std::min(1.0, 0.4 * host.r)) * (0.8 + 0.4 * unit(place_rng));
    }

    SynthForest out;
    out.n_canopy = spec.n_canopy;
    int k = spec.feature_dim;
    out.cloud.feature_dim = k;

    auto ground_z = [&](double x) { return spec.ground_slope * x; };

    // Ground plane points.
    {
        std::mt19937_64 rng(splitmix64(spec.seed ^ 0x47524F554Eull));
        std::normal_distribution<double> noise(0.0, spec.noise_sigma > 0 ? spec.noise_sigma : 1.0);
        std::normal_distribution<double> fnoise(0.0, 0.02);
        int64_t n_g = std::llround(spec.point_density * spec.extent_x * spec.extent_y);
        for (int64_t i = 0; i < n_g; ++i) {
            double x = spec.extent_x * unit(rng);
            double y = spec.extent_y * unit(rng);
            double z = ground_z(x) + (spec.noise_sigma > 0 ? noise(rng) : 0.0);
            out.cloud.push_point(x, y, z);
            out.cloud.labels.push_back(ClassLabel::Ground);
            out.point_tree.push_back(-1);
            for (int f = 0; f < k; ++f) out.cloud.features.push_back(0.1 + fnoise(rng));
        }
    }

    // Crown surface points, one independent stream per tree.
    auto emit_tree = [&](const TreeShape& t, int truth_id, uint64_t stream) {
        std::mt19937_64 rng(splitmix64(spec.seed ^ (0x54524545ull + stream)));
        std::normal_distribution<double> noise(0.0, spec.noise_sigma > 0 ? spec.noise_sigma : 1.0);
        std::normal_distribution<double> fnoise(0.0, 0.02);
        std::uniform_real_distribution<double> u01(0.0, 1.0);
        std::vector<double> fvec(k);
        for (int f = 0; f < k; ++f) fvec[f] = u01(rng);
        // Exact apex return first: guarantees the treetop survives sampling.
        out.cloud.push_point(t.cx, t.cy, ground_z(t.cx) + t.h);
        out.cloud.labels.push_back(ClassLabel::Object);
        out.point_tree.push_back(truth_id);
        for (int f = 0; f < k; ++f) out.cloud.features.push_back(fvec[f] + fnoise(rng));
        int64_t n_t = std::max<int64_t>(1, std::llround(spec.point_density * kPi * t.r * t.r));
        for (int64_t i = 0; i < n_t; ++i) {
            double rho = t.r * std::sqrt(u01(rng));
            double ang = 2 * kPi * u01(rng);
            double x = t.cx + rho * std::cos(ang);
            double y = t.cy + rho * std::sin(ang);
            double z = ground_z(x) + surface_height(spec.crown_model, t, rho, spec.crown_base_frac) +
                       (spec.noise_sigma > 0 ? noise(rng) : 0.0);
            out.cloud.push_point(x, y, z);
            out.cloud.labels.push_back(ClassLabel::Object);
            out.point_tree.push_back(truth_id);
            for (int f = 0; f < k; ++f) out.cloud.features.push_back(fvec[f] + fnoise(rng));
        }
    };

    for (int t = 0; t < spec.n_canopy; ++t) {
        out.truth.push_back({canopy[t].cx, canopy[t].cy, canopy[t].h});
        emit_tree(canopy[t], t, static_cast<uint64_t>(t));
    }
    for (int u = 0; u < spec.n_understory; ++u) {
        out.truth.push_back({under[u].cx, under[u].cy, under[u].h});
        emit_tree(under[u], spec.n_canopy + u, static_cast<uint64_t>(spec.n_canopy + u));
    }

    if (out.cloud.empty()) throw DataError("synth: spec produced no points");
    return out;
}

void save_point_tree_csv(const std::vector<int>& point_tree, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot open for writing: " + path);
    out << "point_index,truth_id\n";
    for (size_t i = 0; i < point_tree.size(); ++i) out << i << ',' << point_tree[i] << '\n';
    if (!out) throw DataError("write failed: " + path);
}

}  // namespace crowncut
