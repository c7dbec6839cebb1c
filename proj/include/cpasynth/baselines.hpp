#pragma once

// Comparison methods: excitation-matching k-means (EMM) and exhaustive
// enumeration of all partitions into Q blocks with IPM weighting (EPM).

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "cpasynth/driver.hpp"

namespace cpa {

struct EmmConfig {
    int q_count = 1;
    int restarts = 50;
    std::uint64_t base_seed = 0;
    KMeansOptions kmeans{};
    unsigned threads = 1;
};

/// k-means on the raw reference excitations; weights are cluster means of the
/// reference; restarts ranked by k-means SSE. gamma is reported on `grid`.
SynthesisResult emm_synthesize(const ArrayGeometry& geometry, const ExcitationVector& reference_excitations,
                               const AngularGrid& grid, const EmmConfig& config);

/// Stirling number of the second kind, saturating at UINT64_MAX.
std::uint64_t stirling2(std::size_t n, std::size_t q);

/// Calls fn(labels) for every restricted-growth string of length n with
/// exactly q distinct values, in lexicographic order.
void for_each_partition(std::size_t n, std::size_t q, const std::function<void(const std::vector<int>&)>& fn);

struct EpmCheckpoint {
    /// Partitions evaluated so far, all belonging to shards before next_shard.
    std::uint64_t evaluated = 0;
    std::size_t next_shard = 0;
    double best_gamma = 0.0;
    std::vector<int> best_labels;  // empty if nothing evaluated yet
    std::uint64_t optimal_count = 0;
};

struct EpmOptions {
    IpmOptions ipm{};
    std::uint64_t cap = 1'000'000;
    unsigned threads = 1;
    std::uint64_t checkpoint_every = 10'000;
    std::function<void(const EpmCheckpoint&)> on_checkpoint;
    std::optional<EpmCheckpoint> resume;
    /// Partitions whose metric is within this relative distance of the minimum count as optimal ties.
    double tie_tol = 1e-9;
};

struct EpmResult {
    ClusteringVector clustering;
    ExcitationVector weights;
    double gamma = 0.0;
    std::uint64_t partition_count = 0;
    /// How many partitions reach the minimum (within tie_tol).
    std::uint64_t optimal_count = 0;
};

/// Throws EnumerationCapExceeded when S(N, Q) > options.cap.
EpmResult epm_enumerate(const ArrayGeometry& geometry, const ExcitationVector& reference_excitations, int q_count,
                        const AngularGrid& grid, const EpmOptions& options = {});

}  // namespace cpa
