#pragma once

// Experiment configuration (flat key = value text), the synth / enumerate /
// compare workflows behind the command-line tool, and their on-disk outputs.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "cpasynth/baselines.hpp"
#include "cpasynth/core_model.hpp"
#include "cpasynth/driver.hpp"

namespace cpa {

enum class ReferenceKind { dolph, taylor, file };

struct ReferenceSpec {
    ReferenceKind kind = ReferenceKind::dolph;
    double sll_db = -20.0;
    double theta0_deg = 0.0;
    int nbar = 3;
    /// Resolved against the config file's directory when relative.
    std::filesystem::path path;
};

struct ExperimentConfig {
    std::size_t n = 0;
    double d = 0.5;
    int q = 0;
    std::size_t grid_m = 17;
    /// 0 = same as grid_m.
    std::size_t metric_m = 0;
    int restarts = 50;
    std::uint64_t seed = 0;
    int kmeans_max_iter = 100;
    int ipm_max_iter = 200;
    double ipm_tol = 1e-6;
    ReferenceSpec reference;

    /// Also run EMM and report R.
    bool compare_emm = false;
    std::uint64_t enumerate_cap = 1'000'000;
    /// Dense grid used for SLL / FNBW and the written pattern files.
    std::size_t pattern_m = 2001;
    /// Optional main-lobe region for shaped beams, degrees.
    std::optional<double> mainlobe_lo_deg;
    std::optional<double> mainlobe_hi_deg;

    std::size_t effective_metric_m() const noexcept { return metric_m == 0 ? grid_m : metric_m; }
    MetricOptions metric_options() const;
};

/// Reads `key = value` lines; `#` starts a comment. Unknown keys, duplicate
/// keys, malformed values and missing required keys (n, q) raise ParseError
/// naming the line; value ranges raise ArgumentError.
ExperimentConfig parse_config(std::istream& is, const std::filesystem::path& base_dir = {});
ExperimentConfig load_config(const std::filesystem::path& path);

/// Generated or loaded reference excitations. A missing file raises ParseError naming it.
ExcitationVector build_reference(const ExperimentConfig& config);

PmmConfig pmm_config(const ExperimentConfig& config, unsigned threads);

struct MethodSummary {
    std::string method;
    SynthesisResult result;
    PatternMetrics metrics;
};

struct SynthOutcome {
    ExperimentConfig config;
    ExcitationVector reference;
    PatternMetrics reference_metrics;
    MethodSummary pmm;
    std::optional<MethodSummary> emm;
    /// Matching improvement over EMM, percent; set when EMM ran.
    std::optional<double> improvement;
};

SynthOutcome run_synth(const ExperimentConfig& config, unsigned threads = 1);

/// Writes summary.json, layout.csv, weights.csv, gamma_curve.csv,
/// pattern.csv and reference_pattern.csv (emm_* files too when EMM ran).
void write_synth_bundle(const SynthOutcome& outcome, const std::filesystem::path& out_dir);

/// Summary JSON with every double printed to 17 significant digits; equal
/// outcomes give byte-identical text.
std::string summary_json(const SynthOutcome& outcome);

struct EnumerateOutcome {
    ExperimentConfig config;
    EpmResult result;
};

/// Writes epm_checkpoint.json to `checkpoint_dir` as the run progresses when
/// the directory is given; `resume` continues from such a file.
EnumerateOutcome run_enumerate(const ExperimentConfig& config, unsigned threads = 1,
                               const std::optional<std::filesystem::path>& checkpoint_dir = {},
                               bool resume = false);

/// enumerate.json, layout.csv, weights.csv.
void write_enumerate_bundle(const EnumerateOutcome& outcome, const std::filesystem::path& out_dir);
std::string enumerate_json(const EnumerateOutcome& outcome);

/// Checkpoints carry N and Q so a resume against another problem is refused.
std::string checkpoint_json(const EpmCheckpoint& checkpoint, std::size_t n, int q);
EpmCheckpoint parse_checkpoint_json(std::istream& is, std::size_t n, int q);

struct CompareRow {
    std::string source;
    std::string method;
    int q = 0;
    std::optional<double> sll_db;
    double gamma = 0.0;
    double r_percent = 0.0;
};

/// One row per method in each summary. R is taken against the EMM row with
/// the same Q, or against the first row with that Q when no EMM row exists.
/// Summaries must share N, spacing, metric grid and reference excitations.
std::vector<CompareRow> compare_summaries(const std::vector<std::filesystem::path>& summaries);
void write_compare_csv(std::ostream& os, const std::vector<CompareRow>& rows);

}  // namespace cpa
