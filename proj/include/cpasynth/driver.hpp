#pragma once

// Power-pattern-matching synthesis: per angular sample, k-means over the
// normalised EP column from several seeds, IPM weighting of every candidate
// clustering, and selection of the lowest power-matching metric.

#include <cstdint>
#include <limits>
#include <vector>

#include "cpasynth/core_model.hpp"
#include "cpasynth/ipm.hpp"
#include "cpasynth/kmeans.hpp"

namespace cpa {

struct PmmConfig {
    /// Samples used to build EP columns for clustering.
    std::size_t clustering_m = 17;
    /// Samples used by IPM and the metric; 0 means "same as clustering_m".
    std::size_t metric_m = 0;
    int q_count = 1;
    int restarts = 50;
    std::uint64_t base_seed = 0;
    KMeansOptions kmeans{};
    IpmOptions ipm{};
    /// Worker threads, 0 = hardware concurrency. Results do not depend on it.
    unsigned threads = 1;
    /// Columns with max |P_n| below this fraction of the pattern peak are skipped.
    double degenerate_threshold = 1e-14;

    std::size_t effective_metric_m() const noexcept { return metric_m == 0 ? clustering_m : metric_m; }
};

struct SampleDiagnostics {
    std::size_t m = 0;
    double u = 0.0;
    bool degenerate = false;
    /// NaN for degenerate samples.
    double gamma = std::numeric_limits<double>::quiet_NaN();
    ClusteringVector clustering;
    ExcitationVector weights;
    /// Restart index that produced the kept clustering.
    int best_restart = -1;
    /// Number of distinct partitions produced by the restarts.
    std::size_t distinct_clusterings = 0;
};

struct SynthesisResult {
    ClusteringVector clustering;
    ExcitationVector weights;
    double gamma = 0.0;
    /// Index into per_sample of the winning sample (PMM only).
    std::size_t best_sample = 0;
    std::vector<SampleDiagnostics> per_sample;
};

SynthesisResult pmm_synthesize(const ArrayGeometry& geometry, const ExcitationVector& reference_excitations,
                               const PmmConfig& config);

/// Convenience: the weights-and-clustering pattern of a result on a grid.
PowerPattern result_pattern(const ArrayGeometry& geometry, const SynthesisResult& result, const AngularGrid& grid);

}  // namespace cpa
