#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "cpasynth/core_model.hpp"

namespace cpa {

/// Reproducible generator: std::mt19937_64 is fully specified by the standard,
/// and bounded draws below use rejection on its raw output rather than
/// std::uniform_int_distribution (whose algorithm is implementation-defined).
using Rng = std::mt19937_64;

/// Unbiased draw in [0, bound).
std::uint64_t draw_below(Rng& rng, std::uint64_t bound);

/// `count` distinct indices from [0, n), partial Fisher-Yates order.
std::vector<std::size_t> sample_without_replacement(Rng& rng, std::size_t n, std::size_t count);

struct KMeansOptions {
    int max_iter = 100;
    /// Centroids closer than this (componentwise) to the previous ones are stationary.
    double stationarity_tol = 1e-12;
};

struct KMeansResult {
    ClusteringVector clustering;  // canonical labelling
    std::vector<Complex> centroids;  // indexed by canonical label
    int iterations = 0;
    /// Within-cluster SSE after every centroid update.
    std::vector<double> sse_history;

    double sse() const { return sse_history.empty() ? 0.0 : sse_history.back(); }
};

/// Lloyd iterations over points in the complex plane. Initial centroids are Q
/// distinct points picked with Rng(seed); ties go to the lower cluster index;
/// a cluster left empty is reseeded at the point farthest from its centroid.
KMeansResult kmeans_cluster(std::span<const Complex> points, int q_count, std::uint64_t seed,
                            const KMeansOptions& options = {});

/// Sum of squared distances of the points to their cluster means.
double within_cluster_sse(std::span<const Complex> points, const ClusteringVector& clustering);

}  // namespace cpa
