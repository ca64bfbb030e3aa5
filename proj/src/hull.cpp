#include <algorithm>
#include <cmath>
#include <vector>

#include "crowncut/pipeline.hpp"

namespace crowncut {

// Andrew's monotone chain; area by the shoelace formula.
double convex_hull_area(const std::vector<double>& xs, const std::vector<double>& ys) {
    size_t n = xs.size();
    if (n < 3) return 0.0;
    std::vector<std::pair<double, double>> p(n);
    for (size_t i = 0; i < n; ++i) p[i] = {xs[i], ys[i]};
    std::sort(p.begin(), p.end());
    p.erase(std::unique(p.begin(), p.end()), p.end());
    n = p.size();
    if (n < 3) return 0.0;

    auto cross = [](const std::pair<double, double>& o, const std::pair<double, double>& a,
                    const std::pair<double, double>& b) {
        return (a.first - o.first) * (b.second - o.second) -
               (a.second - o.second) * (b.first - o.first);
    };
    std::vector<std::pair<double, double>> hull(2 * n);
    size_t k = 0;
    for (size_t i = 0; i < n; ++i) {
        while (k >= 2 && cross(hull[k - 2], hull[k - 1], p[i]) <= 0) --k;
        hull[k++] = p[i];
    }
    size_t lower = k + 1;
    for (size_t i = n - 1; i-- > 0;) {
        while (k >= lower && cross(hull[k - 2], hull[k - 1], p[i]) <= 0) --k;
        hull[k++] = p[i];
    }
    hull.resize(k - 1);
    if (hull.size() < 3) return 0.0;

    double area2 = 0;
    for (size_t i = 0; i < hull.size(); ++i) {
        size_t j = (i + 1) % hull.size();
        area2 += hull[i].first * hull[j].second - hull[j].first * hull[i].second;
    }
    return std::abs(area2) * 0.5;
}

}  // namespace crowncut
