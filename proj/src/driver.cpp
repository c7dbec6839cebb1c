#include "cpasynth/driver.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>

#include <fmt/format.h>

#include "cpasynth/ep_decomp.hpp"
#include "cpasynth/errors.hpp"
#include "cpasynth/parallel.hpp"

namespace cpa {

namespace {

void validate(const ArrayGeometry& geometry, const ExcitationVector& reference, const PmmConfig& config) {
    if (reference.size() != geometry.size())
        throw ArgumentError(fmt::format("expected {} reference excitations, got {}", geometry.size(), reference.size()));
    if (reference.all_zero()) throw ArgumentError("reference excitations are all zero");
    if (config.clustering_m < 2) throw ArgumentError("clustering grid needs at least 2 samples");
    if (config.q_count < 1 || static_cast<std::size_t>(config.q_count) > geometry.size())
        throw ArgumentError(fmt::format("cluster count {} must lie in [1..{}]", config.q_count, geometry.size()));
    if (config.restarts < 1) throw ArgumentError("at least one k-means restart is required");
}

}  // namespace

SynthesisResult pmm_synthesize(const ArrayGeometry& geometry, const ExcitationVector& reference_excitations,
                               const PmmConfig& config) {
    validate(geometry, reference_excitations, config);
    const AngularGrid cluster_grid(config.clustering_m);
    const AngularGrid metric_grid(config.effective_metric_m());
    const EPMatrix ep = ep_matrix(geometry, reference_excitations, cluster_grid);
    const IpmSolver solver(geometry, reference_excitations, metric_grid, config.ipm);

    const std::size_t m_count = cluster_grid.size();
    const auto restarts = static_cast<std::size_t>(config.restarts);

    double scale = 0.0;
    for (std::size_t m = 0; m < m_count; ++m) scale = std::max(scale, std::abs(ep.column_sum(m)));
    std::vector<std::optional<NormalizedEPColumn>> columns(m_count);
    for (std::size_t m = 0; m < m_count; ++m) {
        double peak = 0.0;
        for (const auto& p : ep.column(m)) peak = std::max(peak, std::abs(p));
        if (peak > config.degenerate_threshold * scale) columns[m] = normalize_column(ep, m);
    }

    // Clustering step for every (sample, restart) pair, sample-major.
    std::vector<ClusteringVector> candidates(m_count * restarts);
    parallel_for(candidates.size(), config.threads, [&](std::size_t job) {
        const std::size_t m = job / restarts;
        const std::size_t s = job % restarts;
        if (!columns[m]) return;
        candidates[job] = kmeans_cluster(columns[m]->values, config.q_count, config.base_seed + s, config.kmeans).clustering;
    });

    // Weighting step once per distinct partition.
    std::map<std::vector<int>, std::size_t> index;
    std::vector<const ClusteringVector*> unique;
    for (const auto& c : candidates) {
        if (c.size() == 0) continue;
        if (index.emplace(c.labels(), unique.size()).second) unique.push_back(&c);
    }
    std::vector<IpmTrace> traces(unique.size());
    parallel_for(unique.size(), config.threads, [&](std::size_t i) { traces[i] = solver.run(*unique[i]); });

    SynthesisResult result;
    result.per_sample.resize(m_count);
    bool found = false;
    for (std::size_t m = 0; m < m_count; ++m) {
        auto& diag = result.per_sample[m];
        diag.m = m;
        diag.u = cluster_grid.node(m);
        if (!columns[m]) {
            diag.degenerate = true;
            continue;
        }
        std::vector<std::size_t> seen;
        for (std::size_t s = 0; s < restarts; ++s) {
            const auto& c = candidates[m * restarts + s];
            const std::size_t k = index.at(c.labels());
            if (std::find(seen.begin(), seen.end(), k) == seen.end()) seen.push_back(k);
            const auto& trace = traces[k];
            if (diag.best_restart < 0 || trace.gamma < diag.gamma) {
                diag.gamma = trace.gamma;
                diag.clustering = c;
                diag.weights = trace.final_weights;
                diag.best_restart = static_cast<int>(s);
            }
        }
        diag.distinct_clusterings = seen.size();
        if (!found || diag.gamma < result.gamma) {
            found = true;
            result.gamma = diag.gamma;
            result.best_sample = m;
        }
    }
    if (!found) throw SynthesisFailed("every angular sample is degenerate; no clustering candidate was produced");
    const auto& best = result.per_sample[result.best_sample];
    result.clustering = best.clustering;
    result.weights = best.weights;
    return result;
}

PowerPattern result_pattern(const ArrayGeometry& geometry, const SynthesisResult& result, const AngularGrid& grid) {
    return cpa_power_pattern(geometry, result.clustering, result.weights, grid);
}

}  // namespace cpa
