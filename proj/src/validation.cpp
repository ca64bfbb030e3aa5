#include "crowncut/validation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

namespace crowncut {

namespace {

std::string fmt_g(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

}  // namespace

MatchReport match_trees(const std::vector<TreeRecord>& candidates,
                        const std::vector<GroundTruthTree>& truth, double max_xy, double max_dz) {
    MatchReport report;
    report.n_extracted = candidates.size();
    report.n_truth = truth.size();

    struct Scored {
        double score;
        int truth_id;
        int cand_id;
        double d_xy, d_z;
    };
    std::vector<Scored> scored;
    for (size_t t = 0; t < truth.size(); ++t) {
        for (size_t c = 0; c < candidates.size(); ++c) {
            double dx = candidates[c].apex_x - truth[t].x;
            double dy = candidates[c].apex_y - truth[t].y;
            double d_xy = std::sqrt(dx * dx + dy * dy);
            double d_z = candidates[c].height - truth[t].height;
            if (d_xy > max_xy || std::abs(d_z) > max_dz) continue;
            scored.push_back({std::sqrt(d_xy * d_xy + d_z * d_z), static_cast<int>(t),
                              static_cast<int>(c), d_xy, d_z});
        }
    }
    std::sort(scored.begin(), scored.end(), [](const Scored& a, const Scored& b) {
        if (a.score != b.score) return a.score < b.score;
        if (a.truth_id != b.truth_id) return a.truth_id < b.truth_id;
        return a.cand_id < b.cand_id;
    });

    std::vector<char> truth_used(truth.size(), 0), cand_used(candidates.size(), 0);
    for (const Scored& s : scored) {
        if (truth_used[s.truth_id] || cand_used[s.cand_id]) continue;
        truth_used[s.truth_id] = cand_used[s.cand_id] = 1;
        report.pairs.push_back({s.cand_id, s.truth_id, s.d_xy, s.d_z});
    }
    report.n_matched = report.pairs.size();
    return report;
}

std::vector<BandRow> band_summary(const MatchReport& report,
                                  const std::vector<TreeRecord>& candidates,
                                  const std::vector<GroundTruthTree>& truth) {
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<BandRow> rows = {
        {"h>=20", 20.0, inf, 0, 0, 0}, {"15<=h<20", 15.0, 20.0, 0, 0, 0},
        {"10<=h<15", 10.0, 15.0, 0, 0, 0}, {"5<=h<10", 5.0, 10.0, 0, 0, 0},
        {"2<=h<5", 2.0, 5.0, 0, 0, 0}, {"0<=h<2", 0.0, 2.0, 0, 0, 0},
    };
    auto band_of = [&](double h) -> int {
        for (size_t b = 0; b < rows.size(); ++b)
            if (h >= rows[b].lo && h < rows[b].hi) return static_cast<int>(b);
        return static_cast<int>(rows.size()) - 1;  // negative heights: lowest band
    };
    for (const GroundTruthTree& t : truth) ++rows[band_of(t.height)].truth;
    for (const TreeRecord& c : candidates) ++rows[band_of(c.height)].extracted;
    for (const MatchPair& p : report.pairs) ++rows[band_of(candidates[p.candidate_id].height)].matched;

    BandRow overall{"overall", 0.0, inf, 0, 0, 0};
    for (const BandRow& r : rows) {
        overall.truth += r.truth;
        overall.extracted += r.extracted;
        overall.matched += r.matched;
    }
    rows.push_back(overall);
    return rows;
}

std::vector<GroundTruthTree> load_truth_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open truth csv: " + path);
    std::vector<GroundTruthTree> out;
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        auto c1 = line.find(',');
        auto c2 = c1 == std::string::npos ? std::string::npos : line.find(',', c1 + 1);
        if (c2 == std::string::npos)
            throw DataError(path + ":" + std::to_string(lineno) + ": expected x,y,height");
        try {
            GroundTruthTree t;
            t.x = std::stod(line.substr(0, c1));
            t.y = std::stod(line.substr(c1 + 1, c2 - c1 - 1));
            t.height = std::stod(line.substr(c2 + 1));
            out.push_back(t);
        } catch (const std::exception&) {
            if (lineno == 1) continue;  // header
            throw DataError(path + ":" + std::to_string(lineno) + ": bad truth row");
        }
    }
    return out;
}

void save_truth_csv(const std::vector<GroundTruthTree>& truth, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot open for writing: " + path);
    out << "x,y,height\n";
    for (const GroundTruthTree& t : truth)
        out << fmt_g(t.x) << ',' << fmt_g(t.y) << ',' << fmt_g(t.height) << '\n';
    if (!out) throw DataError("write failed: " + path);
}

void write_report_csv(const MatchReport& report, const std::vector<BandRow>& bands,
                      const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot open for writing: " + path);
    out << "pair,candidate_id,truth_id,d_xy,d_z\n";
    for (const MatchPair& p : report.pairs)
        out << "pair," << p.candidate_id << ',' << p.truth_id << ',' << fmt_g(p.d_xy) << ','
            << fmt_g(p.d_z) << '\n';
    out << "band,label,truth,extracted,matched\n";
    for (const BandRow& b : bands)
        out << "band," << b.label << ',' << b.truth << ',' << b.extracted << ',' << b.matched
            << '\n';
    if (!out) throw DataError("write failed: " + path);
}

}  // namespace crowncut
