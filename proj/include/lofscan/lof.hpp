#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "lofscan/errors.hpp"

namespace lofscan {

// n points of dimension d, row major.
struct PointSet {
    std::size_t n = 0;
    std::size_t d = 0;
    std::vector<double> values;  // n * d

    std::span<const double> row(std::size_t i) const { return {values.data() + i * d, d}; }
};

struct Neighbor {
    std::size_t index;
    double distance;
};

// Exact k-nearest neighborhoods under Euclidean distance. A neighborhood
// holds every other point at distance <= the k-th smallest, so ties make it
// larger than k. Neighbors are sorted by (distance, index).
struct NeighborhoodTable {
    std::vector<double> k_distance;
    std::vector<std::vector<Neighbor>> neighbors;
};

// Throws ConfigError unless 1 <= k < n, InputError on non-finite coordinates.
// The result is identical for every thread count.
NeighborhoodTable knn(const PointSet& points, std::size_t k, std::size_t threads = 1);

// max(distance(x, y), k_distance(y)) for a neighbor y of x; InputError when
// y is not in x's neighborhood.
double reachability(std::size_t x, std::size_t y, const NeighborhoodTable& table);

// Mean reachability of x over its whole neighborhood (divisor = neighborhood
// size, which can exceed k on ties).
double avg_reachability(std::size_t x, const NeighborhoodTable& table);

struct LofScores {
    std::vector<double> avg_reach;
    std::vector<double> lof;
};

// Mean over x's neighbors y of avg_reach(x) / avg_reach(y). Duplicate points
// drive avg_reach to 0: a 0/0 ratio counts as 1, and a positive/0 ratio makes
// the score +infinity.
LofScores lof_from_table(const NeighborhoodTable& table);

LofScores lof_scores(const PointSet& points, std::size_t k, std::size_t threads = 1);

}  // namespace lofscan
