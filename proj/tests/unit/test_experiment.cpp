#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "cpasynth/errors.hpp"
#include "cpasynth/experiment.hpp"

using namespace cpa;

namespace {

ExperimentConfig parse(const std::string& text, const std::filesystem::path& base = {}) {
    std::istringstream is(text);
    return parse_config(is, base);
}

std::filesystem::path scratch(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / ("cpasynth_exp_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

}  // namespace

TEST_CASE("config parsing") {
    const auto c = parse(R"(# comment
n = 12
q = 8      # trailing comment
d = 0.5
grid_m = 17
metric_m = 0
restarts = 50
seed = 7
kmeans_max_iter = 80
ipm_max_iter = 150
ipm_tol = 1e-7
reference.kind = taylor
reference.sll_db = -25
reference.theta0_deg = 10
reference.nbar = 4
compare_emm = true
)");
    CHECK(c.n == 12);
    CHECK(c.q == 8);
    CHECK(c.seed == 7);
    CHECK(c.kmeans_max_iter == 80);
    CHECK(c.ipm_max_iter == 150);
    CHECK(c.ipm_tol == 1e-7);
    CHECK(c.reference.kind == ReferenceKind::taylor);
    CHECK(c.reference.nbar == 4);
    CHECK(c.compare_emm);
    CHECK(c.effective_metric_m() == 17);
    CHECK(*c.metric_options().mainlobe_hint == doctest::Approx(std::sin(10 * kPi / 180)));

    const auto p = pmm_config(c, 3);
    CHECK(p.q_count == 8);
    CHECK(p.base_seed == 7);
    CHECK(p.threads == 3);
    CHECK(p.ipm.tol == 1e-7);
}

TEST_CASE("config errors name the line") {
    auto line_of = [](const std::string& text) -> std::size_t {
        try {
            parse(text);
        } catch (const ParseError& e) {
            return e.line();
        }
        return 0;
    };
    CHECK(line_of("n = 4\nq = 2\nbogus = 1\n") == 3);
    CHECK(line_of("n = 4\nq = two\n") == 2);
    CHECK(line_of("n = 4\nn = 5\nq = 2\n") == 2);
    CHECK(line_of("n = 4\nq 2\n") == 2);
    CHECK(line_of("n = 4\nreference.kind = woodward\nq = 2\n") == 2);
    CHECK_THROWS_AS(parse("n = 4\n"), ParseError);
    CHECK_THROWS_AS(parse("n = 4\nq = 5\n"), ArgumentError);
    CHECK_THROWS_AS(parse("n = 4\nq = 2\nreference.kind = file\n"), ArgumentError);
    CHECK_THROWS_AS(parse("n = 4\nq = 2\nmainlobe.lo_deg = 3\n"), ArgumentError);
}

TEST_CASE("relative reference path resolves against the config directory") {
    const auto c = parse("n = 4\nq = 2\nreference.kind = file\nreference.path = data/ref.csv\n", "/some/dir");
    CHECK(c.reference.path == std::filesystem::path("/some/dir/data/ref.csv"));
    try {
        build_reference(c);
        FAIL("expected a missing-file error");
    } catch (const ParseError& e) {
        CHECK(std::string(e.what()).find("/some/dir/data/ref.csv") != std::string::npos);
    }
}

TEST_CASE("synth bundle") {
    const auto dir = scratch("synth");
    const auto cfg = parse("n = 8\nq = 4\nrestarts = 5\nreference.theta0_deg = 10\ncompare_emm = true\npattern_m = 401\n");
    const auto o = run_synth(cfg, 1);
    write_synth_bundle(o, dir);
    for (const char* f : {"summary.json", "layout.csv", "weights.csv", "gamma_curve.csv", "pattern.csv",
                          "reference_pattern.csv", "emm_layout.csv", "emm_weights.csv", "emm_pattern.csv"})
        CHECK(std::filesystem::exists(dir / f));

    const auto j = nlohmann::json::parse(slurp(dir / "summary.json"));
    CHECK(j["methods"][0]["method"] == "PMM");
    CHECK(j["methods"][0]["gamma"].get<double>() == o.pmm.result.gamma);  // 17 digits round-trip exactly
    CHECK(j["methods"][1]["method"] == "EMM");
    CHECK(j["R_percent"].get<double>() == doctest::Approx(*o.improvement));
    CHECK(j["methods"][0]["clustering"].size() == 8);

    CHECK(slurp(dir / "layout.csv").rfind("n,cluster\n1,1\n", 0) == 0);
    CHECK(slurp(dir / "weights.csv").rfind("q,amp,phase_deg\n", 0) == 0);
    CHECK(slurp(dir / "gamma_curve.csv").rfind("m,u,gamma\n1,-1,", 0) == 0);

    // Same config, different thread count: identical text.
    CHECK(summary_json(run_synth(cfg, 4)) == summary_json(o));
    std::filesystem::remove_all(dir);
}

TEST_CASE("Q = N synth is exact") {
    const auto o = run_synth(parse("n = 6\nq = 6\nrestarts = 2\n"), 1);
    CHECK(o.pmm.result.gamma <= 1e-10);
}

TEST_CASE("compare") {
    const auto dir = scratch("compare");
    const auto base = run_synth(parse("n = 8\nq = 4\nrestarts = 5\nreference.theta0_deg = 10\n"), 1);
    write_synth_bundle(base, dir / "a");
    write_synth_bundle(base, dir / "b");
    const auto rows = compare_summaries({dir / "a" / "summary.json", dir / "b" / "summary.json"});
    REQUIRE(rows.size() == 2);
    for (const auto& r : rows) CHECK(r.r_percent == 0.0);

    const auto with_emm = run_synth(parse("n = 8\nq = 4\nrestarts = 5\nreference.theta0_deg = 10\ncompare_emm = true\n"), 1);
    write_synth_bundle(with_emm, dir / "c");
    const auto rows2 = compare_summaries({dir / "a" / "summary.json", dir / "c" / "summary.json"});
    REQUIRE(rows2.size() == 3);
    CHECK(rows2[0].r_percent == doctest::Approx(*with_emm.improvement));
    CHECK(rows2[2].method == "EMM");
    CHECK(rows2[2].r_percent == 0.0);

    std::ostringstream csv;
    write_compare_csv(csv, rows2);
    CHECK(csv.str().rfind("method,Q,SLL_dB,gamma,R\nPMM,4,", 0) == 0);

    write_synth_bundle(run_synth(parse("n = 8\nq = 4\nrestarts = 5\ngrid_m = 33\nreference.theta0_deg = 10\n"), 1), dir / "d");
    CHECK_THROWS_AS(compare_summaries({dir / "a" / "summary.json", dir / "d" / "summary.json"}), ArgumentError);
    write_synth_bundle(run_synth(parse("n = 8\nq = 4\nrestarts = 5\nreference.theta0_deg = 20\n"), 1), dir / "e");
    CHECK_THROWS_AS(compare_summaries({dir / "a" / "summary.json", dir / "e" / "summary.json"}), ArgumentError);
    CHECK_THROWS_AS(compare_summaries({dir / "a" / "summary.json"}), ArgumentError);
    std::filesystem::remove_all(dir);
}

TEST_CASE("enumerate bundle and checkpoint round trip") {
    const auto dir = scratch("enumerate");
    const auto cfg = parse("n = 3\nq = 2\ngrid_m = 9\n");
    const auto o = run_enumerate(cfg, 1, dir);
    CHECK(o.result.partition_count == 3);
    write_enumerate_bundle(o, dir);
    const auto j = nlohmann::json::parse(slurp(dir / "enumerate.json"));
    CHECK(j["partition_count"] == 3);
    CHECK_FALSE(std::filesystem::exists(dir / "epm_checkpoint.json"));

    EpmCheckpoint cp;
    cp.evaluated = 12;
    cp.next_shard = 3;
    cp.best_gamma = 0.1234567890123456789;
    cp.best_labels = {0, 1, 0};
    cp.optimal_count = 2;
    std::istringstream is(checkpoint_json(cp, 3, 2));
    const auto back = parse_checkpoint_json(is, 3, 2);
    CHECK(back.evaluated == 12);
    CHECK(back.next_shard == 3);
    CHECK(back.best_gamma == cp.best_gamma);
    CHECK(back.best_labels == cp.best_labels);
    CHECK(back.optimal_count == 2);
    std::istringstream other(checkpoint_json(cp, 3, 2));
    CHECK_THROWS_AS(parse_checkpoint_json(other, 4, 2), ArgumentError);

    CHECK_THROWS_AS(run_enumerate(parse("n = 20\nq = 10\n")), EnumerationCapExceeded);
    std::filesystem::remove_all(dir);
}
