#pragma once

#include <cmath>
#include <queue>
#include <utility>
#include <vector>

#include "dpgeo/grid.hpp"
#include "dpgeo/sym.hpp"

namespace dpgeo {

/// Single-source shortest path over the grid graph with the full diagonal
/// stencil (8 neighbors in 2-D, 26 in 3-D, 80 in 4-D). Edge length is the
/// metric length of the straight segment with the metric averaged between the
/// endpoints (the midpoint value available on a node-sampled metric).
inline DiscreteField geodesic_distances(const GridManifold& g, std::size_t source) {
    const int dim = g.dim();
    // neighbor offsets: all nonzero {-1,0,1}^dim
    std::vector<std::array<int, 4>> offs;
    const int total = [&] {
        int t = 1;
        for (int a = 0; a < dim; ++a) t *= 3;
        return t;
    }();
    for (int k = 0; k < total; ++k) {
        std::array<int, 4> o{};
        int rem = k;
        bool nonzero = false;
        for (int a = 0; a < dim; ++a) {
            o[std::size_t(a)] = rem % 3 - 1;
            rem /= 3;
            nonzero = nonzero || o[std::size_t(a)] != 0;
        }
        if (nonzero) offs.push_back(o);
    }

    DiscreteField dist(g, kInf);
    dist[source] = 0.0;
    using QE = std::pair<double, std::size_t>;
    std::priority_queue<QE, std::vector<QE>, std::greater<>> pq;
    pq.push({0.0, source});
    std::vector<char> done(g.n_nodes(), 0);
    while (!pq.empty()) {
        auto [d, id] = pq.top();
        pq.pop();
        if (done[id]) continue;
        done[id] = 1;
        const auto mi = g.multi_index(id);
        for (const auto& o : offs) {
            auto mj = mi;
            bool ok = true;
            for (int a = 0; a < dim && ok; ++a) {
                int i = mj[std::size_t(a)] + o[std::size_t(a)];
                if (g.periodic()[std::size_t(a)]) {
                    if (i < 0) i += g.shape()[std::size_t(a)];
                    if (i >= g.shape()[std::size_t(a)]) i -= g.shape()[std::size_t(a)];
                } else if (i < 0 || i >= g.shape()[std::size_t(a)]) {
                    ok = false;
                }
                mj[std::size_t(a)] = i;
            }
            if (!ok) continue;
            const std::size_t jd = g.index(mj);
            if (done[jd]) continue;
            // segment vector in coordinates
            double seg2 = 0.0;
            const SymMat &ga = g.metric(id), &gb = g.metric(jd);
            for (int a = 0; a < dim; ++a) {
                const double da = double(o[std::size_t(a)]) * g.spacing()[std::size_t(a)];
                for (int b = 0; b < dim; ++b) {
                    const double db = double(o[std::size_t(b)]) * g.spacing()[std::size_t(b)];
                    seg2 += 0.5 * (ga(a, b) + gb(a, b)) * da * db;
                }
            }
            const double w = std::sqrt(std::max(seg2, 0.0));
            if (d + w < dist[jd]) {
                dist[jd] = d + w;
                pq.push({d + w, jd});
            }
        }
    }
    return dist;
}

}  // namespace dpgeo
