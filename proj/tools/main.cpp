// cpasynth: clustered phased-array synthesis from the command line.
//
//   cpasynth synth     CONFIG   [--seed S] [--threads T] [--out-dir DIR]
//   cpasynth enumerate CONFIG   [--threads T] [--out-dir DIR] [--resume]
//   cpasynth compare   SUMMARY SUMMARY... [--out-dir DIR]
//
// Exit status: 0 success, 1 runtime failure, 2 configuration or input error.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "cpasynth/errors.hpp"
#include "cpasynth/experiment.hpp"

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitConfig = 2;

struct Options {
    std::string config;
    std::vector<std::string> summaries;
    std::optional<std::uint64_t> seed;
    unsigned threads = 1;
    std::string out_dir = "out";
    bool resume = false;
};

int cmd_synth(const Options& o) {
    auto cfg = cpa::load_config(o.config);
    if (o.seed) cfg.seed = *o.seed;
    const auto outcome = cpa::run_synth(cfg, o.threads);
    cpa::write_synth_bundle(outcome, o.out_dir);
    fmt::print("PMM gamma = {:.6e}", outcome.pmm.result.gamma);
    if (outcome.pmm.metrics.sll_db) fmt::print("  SLL = {:.2f} dB", *outcome.pmm.metrics.sll_db);
    fmt::print("\n");
    if (outcome.emm) {
        fmt::print("EMM gamma = {:.6e}", outcome.emm->result.gamma);
        if (outcome.emm->metrics.sll_db) fmt::print("  SLL = {:.2f} dB", *outcome.emm->metrics.sll_db);
        fmt::print("\n");
    }
    if (outcome.improvement) fmt::print("R = {:.1f}%\n", *outcome.improvement);
    fmt::print("results written to {}\n", o.out_dir);
    return 0;
}

int cmd_enumerate(const Options& o) {
    auto cfg = cpa::load_config(o.config);
    if (o.seed) cfg.seed = *o.seed;
    const auto outcome = cpa::run_enumerate(cfg, o.threads, std::filesystem::path(o.out_dir), o.resume);
    cpa::write_enumerate_bundle(outcome, o.out_dir);
    fmt::print("partitions = {}\nminimum gamma = {:.6e} ({} optimal)\n", outcome.result.partition_count,
               outcome.result.gamma, outcome.result.optimal_count);
    return 0;
}

int cmd_compare(const Options& o) {
    std::vector<std::filesystem::path> paths(o.summaries.begin(), o.summaries.end());
    const auto rows = cpa::compare_summaries(paths);
    std::ostringstream table;
    cpa::write_compare_csv(table, rows);
    std::cout << table.str();
    if (!o.out_dir.empty()) {
        std::filesystem::create_directories(o.out_dir);
        std::ofstream(std::filesystem::path(o.out_dir) / "compare.csv") << table.str();
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Clustered linear array synthesis by power-pattern matching"};
    app.require_subcommand(1);
    Options o;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--threads", o.threads, "Worker threads (0 = all cores); results do not depend on it")
            ->check(CLI::NonNegativeNumber);
        sub->add_option("--out-dir", o.out_dir, "Directory for result files")->capture_default_str();
    };

    auto* synth = app.add_subcommand("synth", "Run PMM (and EMM when compare_emm = true) for a config file");
    synth->add_option("config", o.config, "Config file")->required();
    synth->add_option("--seed", o.seed, "Override the config's base seed");
    add_common(synth);

    auto* enumerate = app.add_subcommand("enumerate", "Exhaustive search over all partitions into Q clusters");
    enumerate->add_option("config", o.config, "Config file")->required();
    enumerate->add_option("--seed", o.seed, "Accepted for symmetry; enumeration is not random");
    enumerate->add_flag("--resume", o.resume, "Continue from epm_checkpoint.json in the output directory");
    add_common(enumerate);

    auto* compare = app.add_subcommand("compare", "Tabulate method, Q, SLL, gamma and R across summaries");
    compare->add_option("summaries", o.summaries, "summary.json files")->required()->expected(2, -1);
    compare->add_option("--seed", o.seed, "Unused");
    add_common(compare);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    try {
        if (synth->parsed()) return cmd_synth(o);
        if (enumerate->parsed()) return cmd_enumerate(o);
        return cmd_compare(o);
    } catch (const cpa::EnumerationCapExceeded& e) {
        fmt::print(stderr, "error: {} (raise enumerate_cap to allow it)\n", e.what());
        return kExitConfig;
    } catch (const cpa::ParseError& e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return kExitConfig;
    } catch (const std::invalid_argument& e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return kExitConfig;
    } catch (const std::exception& e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return kExitRuntime;
    }
}
