// genworld/pathing.hpp
//
// Tour construction over building entrances (nearest neighbour + 2-opt) and
// minimum-cost 4-connected grid paths (A* with a Manhattan heuristic scaled by
// the cheapest tile).
#pragma once

#include <queue>
#include <tuple>
#include <vector>

#include "genworld/core.hpp"

namespace genworld::pathing {

// ------------------------------ TSP ------------------------------

struct Point {
    double x = 0;
    double y = 0;
};

inline double distance(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

// Closed-tour length (the last point returns to the first).
inline double tour_length(const std::vector<Point>& pts, const std::vector<std::size_t>& tour) {
    if (tour.size() < 2) return 0;
    double s = 0;
    for (std::size_t i = 0; i < tour.size(); ++i) s += distance(pts[tour[i]], pts[tour[(i + 1) % tour.size()]]);
    return s;
}

inline constexpr double kTwoOptEpsilon = 1e-9;

// Gain of reversing tour[i+1..j]; positive means the swap shortens the tour.
inline double two_opt_gain(const std::vector<Point>& pts, const std::vector<std::size_t>& tour, std::size_t i,
                           std::size_t j) {
    const std::size_t n = tour.size();
    const Point a = pts[tour[i]];
    const Point b = pts[tour[i + 1]];
    const Point c = pts[tour[j]];
    const Point d = pts[tour[(j + 1) % n]];
    return distance(a, b) + distance(c, d) - distance(a, c) - distance(b, d);
}

inline bool is_two_opt_optimal(const std::vector<Point>& pts, const std::vector<std::size_t>& tour) {
    const std::size_t n = tour.size();
    if (n < 4) return true;
    for (std::size_t i = 0; i + 2 < n; ++i)
        for (std::size_t j = i + 2; j < n; ++j) {
            if (i == 0 && j == n - 1) continue;  // same edge pair
            if (two_opt_gain(pts, tour, i, j) > kTwoOptEpsilon) return false;
        }
    return true;
}

// Nearest neighbour from index 0 (ties to the lower index), then first-improvement
// 2-opt until no swap shortens the tour.
inline std::vector<std::size_t> tsp_route(const std::vector<Point>& pts) {
    const std::size_t n = pts.size();
    std::vector<std::size_t> tour;
    if (n == 0) return tour;
    std::vector<std::uint8_t> used(n, 0);
    tour.push_back(0);
    used[0] = 1;
    while (tour.size() < n) {
        const Point cur = pts[tour.back()];
        std::size_t best = n;
        double best_d = std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < n; ++k) {
            if (used[k]) continue;
            const double d = distance(cur, pts[k]);
            if (d < best_d) {
                best_d = d;
                best = k;
            }
        }
        used[best] = 1;
        tour.push_back(best);
    }
    if (n < 4) return tour;
    bool improved = true;
    while (improved) {
        improved = false;
        for (std::size_t i = 0; i + 2 < n; ++i)
            for (std::size_t j = i + 2; j < n; ++j) {
                if (i == 0 && j == n - 1) continue;
                if (two_opt_gain(pts, tour, i, j) > kTwoOptEpsilon) {
                    std::reverse(tour.begin() + static_cast<std::ptrdiff_t>(i + 1),
                                 tour.begin() + static_cast<std::ptrdiff_t>(j + 1));
                    improved = true;
                }
            }
    }
    return tour;
}

// ------------------------------ Grid paths ------------------------------

// Entering a tile costs cost[tile]; infinite (or non-finite) means blocked.
struct CostGrid {
    int width = 0;
    int height = 0;
    std::vector<double> cost;

    bool in_bounds(Tile t) const { return t.x >= 0 && t.y >= 0 && t.x < width && t.y < height; }
    std::size_t index(Tile t) const { return static_cast<std::size_t>(t.y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(t.x); }
    bool passable(Tile t) const { return in_bounds(t) && std::isfinite(cost[index(t)]); }
    double at(Tile t) const { return cost[index(t)]; }
};

struct Path {
    std::vector<Tile> tiles;  // start..goal inclusive
    double cost = 0;          // sum of entered-tile costs
};

inline constexpr std::array<Tile, 4> kNeighbours4{{{1, 0}, {-1, 0}, {0, 1}, {0, -1}}};

inline Path astar(const CostGrid& grid, Tile start, Tile goal) {
    if (!grid.passable(start) || !grid.passable(goal))
        throw Error(Errc::NoPath, "hephaestus", "endpoint not passable");
    if (start == goal) return {{start}, 0};
    double min_cost = std::numeric_limits<double>::infinity();
    for (double c : grid.cost)
        if (std::isfinite(c)) min_cost = std::min(min_cost, c);
    const auto h = [&](Tile t) { return manhattan(t, goal) * min_cost; };

    const std::size_t n = grid.cost.size();
    std::vector<double> g(n, std::numeric_limits<double>::infinity());
    std::vector<std::int64_t> parent(n, -1);
    std::vector<std::uint8_t> closed(n, 0);
    // (f, y, x): equal f prefers the smaller (y, x)
    using Entry = std::tuple<double, int, int>;
    std::priority_queue<Entry, std::vector<Entry>, std::greater<>> open;
    g[grid.index(start)] = 0;
    open.emplace(h(start), start.y, start.x);
    while (!open.empty()) {
        const auto [f, y, x] = open.top();
        open.pop();
        const Tile cur{x, y};
        const std::size_t ci = grid.index(cur);
        if (closed[ci]) continue;
        closed[ci] = 1;
        if (cur == goal) break;
        for (Tile d : kNeighbours4) {
            const Tile nb{cur.x + d.x, cur.y + d.y};
            if (!grid.passable(nb)) continue;
            const std::size_t ni = grid.index(nb);
            if (closed[ni]) continue;
            const double ng = g[ci] + grid.at(nb);
            if (ng < g[ni]) {
                g[ni] = ng;
                parent[ni] = static_cast<std::int64_t>(ci);
                open.emplace(ng + h(nb), nb.y, nb.x);
            }
        }
    }
    const std::size_t gi = grid.index(goal);
    if (!closed[gi]) throw Error(Errc::NoPath, "hephaestus", "goal unreachable");
    Path p;
    p.cost = g[gi];
    for (std::int64_t i = static_cast<std::int64_t>(gi); i >= 0; i = parent[static_cast<std::size_t>(i)])
        p.tiles.push_back({static_cast<int>(static_cast<std::size_t>(i) % static_cast<std::size_t>(grid.width)),
                           static_cast<int>(static_cast<std::size_t>(i) / static_cast<std::size_t>(grid.width))});
    std::reverse(p.tiles.begin(), p.tiles.end());
    return p;
}

// 4-connected component labels over passable tiles; -1 for blocked tiles.
inline std::vector<int> component_labels(const CostGrid& grid) {
    std::vector<int> label(grid.cost.size(), -1);
    int next = 0;
    std::vector<Tile> stack;
    for (int y = 0; y < grid.height; ++y)
        for (int x = 0; x < grid.width; ++x) {
            const Tile s{x, y};
            if (!grid.passable(s) || label[grid.index(s)] >= 0) continue;
            label[grid.index(s)] = next;
            stack.push_back(s);
            while (!stack.empty()) {
                const Tile t = stack.back();
                stack.pop_back();
                for (Tile d : kNeighbours4) {
                    const Tile nb{t.x + d.x, t.y + d.y};
                    if (grid.passable(nb) && label[grid.index(nb)] < 0) {
                        label[grid.index(nb)] = next;
                        stack.push_back(nb);
                    }
                }
            }
            ++next;
        }
    return label;
}

}  // namespace genworld::pathing
