#include "cpasynth/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "cpasynth/errors.hpp"
#include "cpasynth/ipm.hpp"
#include "cpasynth/parallel.hpp"

namespace cpa {

SynthesisResult emm_synthesize(const ArrayGeometry& geometry, const ExcitationVector& reference_excitations,
                               const AngularGrid& grid, const EmmConfig& config) {
    if (reference_excitations.size() != geometry.size())
        throw ArgumentError(fmt::format("expected {} reference excitations, got {}", geometry.size(), reference_excitations.size()));
    if (reference_excitations.all_zero()) throw ArgumentError("reference excitations are all zero");
    if (config.restarts < 1) throw ArgumentError("at least one k-means restart is required");

    const auto restarts = static_cast<std::size_t>(config.restarts);
    std::vector<KMeansResult> runs(restarts);
    parallel_for(restarts, config.threads, [&](std::size_t s) {
        runs[s] = kmeans_cluster(reference_excitations.values(), config.q_count, config.base_seed + s, config.kmeans);
    });
    std::size_t best = 0;
    for (std::size_t s = 1; s < restarts; ++s) {
        if (runs[s].sse() < runs[best].sse()) best = s;
    }

    SynthesisResult result;
    result.clustering = runs[best].clustering;
    result.weights = subarray_average(reference_excitations.values(), result.clustering);
    result.gamma = pm_metric(fpa_power_pattern(geometry, reference_excitations, grid),
                             cpa_power_pattern(geometry, result.clustering, result.weights, grid));
    return result;
}

std::uint64_t stirling2(std::size_t n, std::size_t q) {
    constexpr auto kMax = std::numeric_limits<std::uint64_t>::max();
    if (q > n) return 0;
    // row[k] = S(i, k), built up over i.
    std::vector<std::uint64_t> row(q + 1, 0);
    row[0] = 1;
    for (std::size_t i = 1; i <= n; ++i) {
        for (std::size_t k = std::min(i, q); k >= 1; --k) {
            const std::uint64_t a = row[k];
            const std::uint64_t b = row[k - 1];
            std::uint64_t prod = 0;
            if (a != 0 && k > kMax / a) prod = kMax;
            else prod = a * k;
            row[k] = (prod > kMax - b) ? kMax : prod + b;
        }
        row[0] = 0;
    }
    return row[q];
}

namespace {

// Extends a restricted-growth prefix to full length, keeping exactly q blocks reachable.
void extend(std::vector<int>& a, std::size_t pos, int used, std::size_t q,
            const std::function<void(const std::vector<int>&)>& fn, std::size_t stop) {
    if (pos == stop) {
        fn(a);
        return;
    }
    const std::size_t remaining = a.size() - pos;  // including pos
    const int q_int = static_cast<int>(q);
    for (int v = 0; v <= used && v < q_int; ++v) {
        const int next_used = v == used ? used + 1 : used;
        if (static_cast<std::size_t>(q_int - next_used) > remaining - 1) continue;
        a[pos] = v;
        extend(a, pos + 1, next_used, q, fn, stop);
    }
}

int blocks_used(const std::vector<int>& a, std::size_t len) {
    int m = -1;
    for (std::size_t i = 0; i < len; ++i) m = std::max(m, a[i]);
    return m + 1;
}

}  // namespace

void for_each_partition(std::size_t n, std::size_t q, const std::function<void(const std::vector<int>&)>& fn) {
    if (q == 0 || q > n) return;
    std::vector<int> a(n, 0);
    extend(a, 1, 1, q, fn, n);
}

EpmResult epm_enumerate(const ArrayGeometry& geometry, const ExcitationVector& reference_excitations, int q_count,
                        const AngularGrid& grid, const EpmOptions& options) {
    const std::size_t n = geometry.size();
    if (q_count < 1 || static_cast<std::size_t>(q_count) > n)
        throw ArgumentError(fmt::format("cluster count {} must lie in [1..{}]", q_count, n));
    const auto q = static_cast<std::size_t>(q_count);
    const std::uint64_t total = stirling2(n, q);
    if (total > options.cap) throw EnumerationCapExceeded(total, options.cap);

    const IpmSolver solver(geometry, reference_excitations, grid, options.ipm);

    // Shards: every valid prefix of length `depth`, in lexicographic order.
    const std::size_t depth = std::min<std::size_t>(n, 6);
    std::vector<std::vector<int>> shards;
    {
        std::vector<int> a(n, 0);
        extend(a, 1, 1, q, [&](const std::vector<int>& p) { shards.emplace_back(p.begin(), p.begin() + depth); }, depth);
    }

    struct ShardResult {
        std::uint64_t count = 0;
        double gamma = std::numeric_limits<double>::infinity();
        std::vector<int> labels;
        std::vector<double> gammas;
    };

    EpmCheckpoint state;
    state.best_gamma = std::numeric_limits<double>::infinity();
    if (options.resume) state = *options.resume;
    if (state.next_shard > shards.size()) throw ArgumentError("checkpoint does not match this enumeration");
    // Near-ties from before a resume are only known by count; they re-enter at the stored minimum.
    std::vector<double> all_gammas(state.optimal_count, state.best_gamma);

    const std::size_t batch = std::max<std::size_t>(1, 4 * std::max(1u, options.threads));
    std::uint64_t next_mark = (state.evaluated / std::max<std::uint64_t>(1, options.checkpoint_every) + 1) *
                              std::max<std::uint64_t>(1, options.checkpoint_every);

    while (state.next_shard < shards.size()) {
        const std::size_t begin = state.next_shard;
        const std::size_t end = std::min(shards.size(), begin + batch);
        std::vector<ShardResult> results(end - begin);
        parallel_for(end - begin, options.threads, [&](std::size_t i) {
            auto& r = results[i];
            const auto& prefix = shards[begin + i];
            std::vector<int> a(n, 0);
            std::copy(prefix.begin(), prefix.end(), a.begin());
            const int used = blocks_used(a, depth);
            auto visit = [&](const std::vector<int>& labels) {
                const ClusteringVector c(labels, q_count);
                const double g = solver.run(c).gamma;
                ++r.count;
                r.gammas.push_back(g);
                if (g < r.gamma) {
                    r.gamma = g;
                    r.labels = labels;
                }
            };
            extend(a, depth, used, q, visit, n);
        });
        for (auto& r : results) {
            state.evaluated += r.count;
            if (r.count == 0) continue;
            if (state.best_labels.empty() || r.gamma < state.best_gamma) {
                state.best_gamma = r.gamma;
                state.best_labels = r.labels;
            }
            all_gammas.insert(all_gammas.end(), r.gammas.begin(), r.gammas.end());
        }
        state.next_shard = end;
        // Tie counting restarts from the current minimum: drop entries that can no longer tie.
        const double limit = state.best_gamma * (1.0 + options.tie_tol);
        std::erase_if(all_gammas, [&](double g) { return g > limit; });
        state.optimal_count = all_gammas.size();
        if (options.on_checkpoint && options.checkpoint_every > 0 && state.evaluated >= next_mark) {
            options.on_checkpoint(state);
            next_mark = (state.evaluated / options.checkpoint_every + 1) * options.checkpoint_every;
        }
    }

    if (state.best_labels.empty()) throw SynthesisFailed("enumeration produced no partitions");
    EpmResult result;
    result.clustering = ClusteringVector(state.best_labels, q_count);
    const auto trace = solver.run(result.clustering);
    result.weights = trace.final_weights;
    result.gamma = trace.gamma;
    result.partition_count = state.evaluated;
    result.optimal_count = state.optimal_count;
    return result;
}

}  // namespace cpa
