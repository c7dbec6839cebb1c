#include "cpasynth/kmeans.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include <fmt/format.h>

#include "cpasynth/errors.hpp"

namespace cpa {

std::uint64_t draw_below(Rng& rng, std::uint64_t bound) {
    // 2^64 mod bound values at the bottom of the range would bias the modulo.
    const std::uint64_t threshold = (0 - bound) % bound;
    for (;;) {
        const std::uint64_t r = rng();
        if (r >= threshold) return r % bound;
    }
}

std::vector<std::size_t> sample_without_replacement(Rng& rng, std::size_t n, std::size_t count) {
    std::vector<std::size_t> pool(n);
    std::iota(pool.begin(), pool.end(), std::size_t{0});
    for (std::size_t i = 0; i < count; ++i) {
        const auto j = i + static_cast<std::size_t>(draw_below(rng, n - i));
        std::swap(pool[i], pool[j]);
    }
    pool.resize(count);
    return pool;
}

namespace {

std::size_t nearest_centroid(Complex p, std::span<const Complex> centroids) {
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t q = 0; q < centroids.size(); ++q) {
        const double d = std::norm(p - centroids[q]);
        if (d < best_d) {
            best_d = d;
            best = q;
        }
    }
    return best;
}

}  // namespace

KMeansResult kmeans_cluster(std::span<const Complex> points, int q_count, std::uint64_t seed,
                            const KMeansOptions& options) {
    const std::size_t n = points.size();
    if (q_count < 1 || static_cast<std::size_t>(q_count) > n)
        throw ArgumentError(fmt::format("cluster count {} must lie in [1..{}]", q_count, n));
    if (options.max_iter < 1) throw ArgumentError("k-means needs at least one iteration");
    const auto q = static_cast<std::size_t>(q_count);

    Rng rng(seed);
    std::vector<Complex> centroids(q);
    {
        const auto init = sample_without_replacement(rng, n, q);
        for (std::size_t k = 0; k < q; ++k) centroids[k] = points[init[k]];
    }

    std::vector<std::size_t> label(n);
    std::vector<std::size_t> count(q);
    std::vector<Complex> next(q);
    KMeansResult result;

    for (int r = 1;; ++r) {
        std::fill(count.begin(), count.end(), 0);
        for (std::size_t i = 0; i < n; ++i) {
            label[i] = nearest_centroid(points[i], centroids);
            ++count[label[i]];
        }
        for (std::size_t k = 0; k < q; ++k) {
            if (count[k] != 0) continue;
            std::size_t far = n;
            double far_d = -1.0;
            for (std::size_t i = 0; i < n; ++i) {
                if (count[label[i]] < 2) continue;
                const double d = std::norm(points[i] - centroids[label[i]]);
                if (d > far_d) {
                    far_d = d;
                    far = i;
                }
            }
            --count[label[far]];
            label[far] = k;
            count[k] = 1;
            centroids[k] = points[far];
        }

        std::fill(next.begin(), next.end(), Complex{});
        for (std::size_t i = 0; i < n; ++i) next[label[i]] += points[i];
        for (std::size_t k = 0; k < q; ++k) next[k] /= static_cast<double>(count[k]);

        double sse = 0.0;
        for (std::size_t i = 0; i < n; ++i) sse += std::norm(points[i] - next[label[i]]);
        result.sse_history.push_back(sse);

        bool stationary = true;
        for (std::size_t k = 0; k < q && stationary; ++k) {
            stationary = std::abs(next[k].real() - centroids[k].real()) <= options.stationarity_tol &&
                         std::abs(next[k].imag() - centroids[k].imag()) <= options.stationarity_tol;
        }
        centroids.swap(next);
        result.iterations = r;
        if (stationary || r >= options.max_iter) break;
    }

    std::vector<int> labels(label.begin(), label.end());
    const ClusteringVector raw(std::move(labels), q_count);
    result.clustering = raw.canonical();
    result.centroids.resize(q);
    for (std::size_t i = 0; i < n; ++i)
        result.centroids[static_cast<std::size_t>(result.clustering[i])] = centroids[static_cast<std::size_t>(raw[i])];
    return result;
}

double within_cluster_sse(std::span<const Complex> points, const ClusteringVector& clustering) {
    if (points.size() != clustering.size()) throw ArgumentError("point count differs from clustering size");
    const auto q = static_cast<std::size_t>(clustering.q_count());
    std::vector<Complex> mean(q);
    std::vector<std::size_t> count(q);
    for (std::size_t i = 0; i < points.size(); ++i) {
        mean[static_cast<std::size_t>(clustering[i])] += points[i];
        ++count[static_cast<std::size_t>(clustering[i])];
    }
    for (std::size_t k = 0; k < q; ++k) mean[k] /= static_cast<double>(count[k]);
    double sse = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) sse += std::norm(points[i] - mean[static_cast<std::size_t>(clustering[i])]);
    return sse;
}

}  // namespace cpa
