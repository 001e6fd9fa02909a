#include "lofscan/lof.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <thread>

namespace lofscan {

namespace {

// Four accumulators so the compiler can keep independent FMA/add chains in
// flight. The summation order is fixed, which keeps results bit-identical
// across thread counts.
double sq_dist(const double* a, const double* b, std::size_t d) {
    double s0 = 0, s1 = 0, s2 = 0, s3 = 0;
    std::size_t j = 0;
    for (; j + 4 <= d; j += 4) {
        const double d0 = a[j] - b[j];
        const double d1 = a[j + 1] - b[j + 1];
        const double d2 = a[j + 2] - b[j + 2];
        const double d3 = a[j + 3] - b[j + 3];
        s0 += d0 * d0;
        s1 += d1 * d1;
        s2 += d2 * d2;
        s3 += d3 * d3;
    }
    for (; j < d; ++j) {
        const double dj = a[j] - b[j];
        s0 += dj * dj;
    }
    return (s0 + s1) + (s2 + s3);
}

// Queries are processed in blocks so each pass over the candidate rows serves
// many queries (the block's rows stay cache resident).
constexpr std::size_t kQueryBlock = 64;

void knn_range(const PointSet& pts, std::size_t k, std::size_t begin, std::size_t end,
               NeighborhoodTable& table) {
    const std::size_t n = pts.n, d = pts.d;
    std::vector<double> dist(kQueryBlock * n);
    std::vector<double> scratch(n);

    for (std::size_t b0 = begin; b0 < end; b0 += kQueryBlock) {
        const std::size_t b1 = std::min(b0 + kQueryBlock, end);
        for (std::size_t j = 0; j < n; ++j) {
            const double* pj = pts.values.data() + j * d;
            for (std::size_t i = b0; i < b1; ++i)
                dist[(i - b0) * n + j] = sq_dist(pts.values.data() + i * d, pj, d);
        }
        for (std::size_t i = b0; i < b1; ++i) {
            double* di = dist.data() + (i - b0) * n;
            di[i] = std::numeric_limits<double>::infinity();  // never own neighbor
            std::copy(di, di + n, scratch.begin());
            std::nth_element(scratch.begin(), scratch.begin() + (k - 1), scratch.end());
            const double kth_sq = scratch[k - 1];  // tie cutoff on squared distances

            auto& nb = table.neighbors[i];
            for (std::size_t j = 0; j < n; ++j)
                if (di[j] <= kth_sq) nb.push_back({j, std::sqrt(di[j])});
            std::sort(nb.begin(), nb.end(), [](const Neighbor& a, const Neighbor& b) {
                return a.distance != b.distance ? a.distance < b.distance : a.index < b.index;
            });
            table.k_distance[i] = std::sqrt(kth_sq);
        }
    }
}

}  // namespace

NeighborhoodTable knn(const PointSet& points, std::size_t k, std::size_t threads) {
    const std::size_t n = points.n;
    if (n == 0 || points.d == 0) throw InputError("point set is empty");
    if (points.values.size() != n * points.d)
        throw InputError("point set storage does not match n * d");
    for (double v : points.values)
        if (!std::isfinite(v)) throw InputError("point set contains a non-finite coordinate");
    if (k < 1 || k >= n)
        throw ConfigError("k must satisfy 1 <= k < n (k=" + std::to_string(k) +
                          ", n=" + std::to_string(n) + ")");

    NeighborhoodTable table;
    table.k_distance.assign(n, 0.0);
    table.neighbors.assign(n, {});

    threads = std::max<std::size_t>(1, std::min(threads, n));
    if (threads == 1) {
        knn_range(points, k, 0, n, table);
        return table;
    }

    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(threads);
    // Ranges are block-aligned so blocking does not depend on the thread count.
    const std::size_t blocks = (n + kQueryBlock - 1) / kQueryBlock;
    const std::size_t per = (blocks + threads - 1) / threads;
    for (std::size_t t = 0; t < threads; ++t) {
        const std::size_t begin = std::min(t * per * kQueryBlock, n);
        const std::size_t end = std::min((t + 1) * per * kQueryBlock, n);
        if (begin >= end) break;
        pool.emplace_back([&, t, begin, end] {
            try {
                knn_range(points, k, begin, end, table);
            } catch (...) {
                errors[t] = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    for (auto& err : errors)
        if (err) std::rethrow_exception(err);
    return table;
}

double reachability(std::size_t x, std::size_t y, const NeighborhoodTable& table) {
    for (const Neighbor& nb : table.neighbors.at(x))
        if (nb.index == y) return std::max(nb.distance, table.k_distance[y]);
    throw InputError("point " + std::to_string(y) + " is not a neighbor of " + std::to_string(x));
}

double avg_reachability(std::size_t x, const NeighborhoodTable& table) {
    const auto& nb = table.neighbors.at(x);
    if (nb.empty()) throw InputError("empty neighborhood");
    double sum = 0.0;
    for (const Neighbor& y : nb) sum += std::max(y.distance, table.k_distance[y.index]);
    return sum / double(nb.size());
}

LofScores lof_from_table(const NeighborhoodTable& table) {
    const std::size_t n = table.neighbors.size();
    LofScores scores;
    scores.avg_reach.resize(n);
    for (std::size_t i = 0; i < n; ++i) scores.avg_reach[i] = avg_reachability(i, table);

    scores.lof.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double ar_x = scores.avg_reach[i];
        double sum = 0.0;
        for (const Neighbor& y : table.neighbors[i]) {
            const double ar_y = scores.avg_reach[y.index];
            if (ar_y == 0.0)
                sum += ar_x == 0.0 ? 1.0 : std::numeric_limits<double>::infinity();
            else
                sum += ar_x / ar_y;
        }
        scores.lof[i] = sum / double(table.neighbors[i].size());
    }
    return scores;
}

LofScores lof_scores(const PointSet& points, std::size_t k, std::size_t threads) {
    return lof_from_table(knn(points, k, threads));
}

}  // namespace lofscan
