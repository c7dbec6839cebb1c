#include "cpasynth/experiment.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "cpasynth/errors.hpp"
#include "cpasynth/refgen.hpp"

namespace cpa {

namespace {

constexpr double kDeg = kPi / 180.0;

std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

template <class T>
T parse_number(std::string_view key, std::string_view text, std::size_t line) {
    T value{};
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc{} || ptr != end)
        throw ParseError(fmt::format("config line {}: '{}' is not a valid value for {}", line, text, key), line);
    return value;
}

bool parse_bool(std::string_view key, std::string_view text, std::size_t line) {
    if (text == "true" || text == "1" || text == "yes") return true;
    if (text == "false" || text == "0" || text == "no") return false;
    throw ParseError(fmt::format("config line {}: '{}' is not a boolean for {}", line, text, key), line);
}

std::string_view kind_name(ReferenceKind k) {
    switch (k) {
        case ReferenceKind::dolph: return "dolph";
        case ReferenceKind::taylor: return "taylor";
        case ReferenceKind::file: return "file";
    }
    return "?";
}

void validate(const ExperimentConfig& c) {
    if (c.n < 1) throw ArgumentError("n must be at least 1");
    if (c.q < 1 || static_cast<std::size_t>(c.q) > c.n)
        throw ArgumentError(fmt::format("q = {} must lie in [1..n] = [1..{}]", c.q, c.n));
    if (!(c.d > 0.0)) throw ArgumentError(fmt::format("d must be positive, got {}", c.d));
    if (c.grid_m < 2) throw ArgumentError("grid_m must be at least 2");
    if (c.metric_m == 1) throw ArgumentError("metric_m must be 0 (same as grid_m) or at least 2");
    if (c.restarts < 1) throw ArgumentError("restarts must be at least 1");
    if (c.kmeans_max_iter < 1) throw ArgumentError("kmeans_max_iter must be at least 1");
    if (c.ipm_max_iter < 0) throw ArgumentError("ipm_max_iter must be non-negative");
    if (!(c.ipm_tol >= 0.0)) throw ArgumentError("ipm_tol must be non-negative");
    if (c.pattern_m < 3) throw ArgumentError("pattern_m must be at least 3");
    if (c.reference.kind == ReferenceKind::file && c.reference.path.empty())
        throw ArgumentError("reference.kind = file needs reference.path");
    if (c.mainlobe_lo_deg.has_value() != c.mainlobe_hi_deg.has_value())
        throw ArgumentError("mainlobe.lo_deg and mainlobe.hi_deg must be given together");
    if (c.mainlobe_lo_deg && !(*c.mainlobe_lo_deg < *c.mainlobe_hi_deg))
        throw ArgumentError("mainlobe.lo_deg must be below mainlobe.hi_deg");
}

// ---- hand-written JSON, fixed formatting -------------------------------------

std::string num(double v) {
    if (!std::isfinite(v)) return "null";
    return fmt::format("{:.17g}", v);
}

std::string num(const std::optional<double>& v) { return v ? num(*v) : "null"; }

std::string json_string(std::string_view s) {
    std::string out = "\"";
    for (const char ch : s) {
        switch (ch) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\t': out += "\\t"; break;
            default:
                if (static_cast<unsigned char>(ch) < 0x20)
                    out += fmt::format("\\u{:04x}", static_cast<int>(ch));
                else
                    out += ch;
        }
    }
    return out + "\"";
}

std::string complex_list(const std::vector<Complex>& v) {
    std::string out = "[";
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ", ";
        out += fmt::format("[{}, {}]", num(v[i].real()), num(v[i].imag()));
    }
    return out + "]";
}

std::string int_list(const std::vector<int>& v) {
    std::string out = "[";
    for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + std::to_string(v[i]);
    return out + "]";
}

std::string method_json(const MethodSummary& m) {
    std::string s = "    {\n";
    s += fmt::format("      \"method\": {},\n", json_string(m.method));
    s += fmt::format("      \"gamma\": {},\n", num(m.result.gamma));
    s += fmt::format("      \"sll_db\": {},\n", num(m.metrics.sll_db));
    s += fmt::format("      \"fnbw_deg\": {},\n", num(m.metrics.fnbw_deg));
    if (!m.result.per_sample.empty()) {
        const auto& b = m.result.per_sample[m.result.best_sample];
        s += fmt::format("      \"best_sample\": {{\"m\": {}, \"u\": {}}},\n", b.m + 1, num(b.u));
    }
    s += fmt::format("      \"clustering\": {},\n", int_list(m.result.clustering.one_based()));
    s += fmt::format("      \"weights\": {}\n", complex_list(m.result.weights.vector()));
    return s + "    }";
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error(fmt::format("cannot write '{}'", path.string()));
    out << text;
    if (!out) throw std::runtime_error(fmt::format("write to '{}' failed", path.string()));
}

template <class Fn>
void write_with(const std::filesystem::path& path, Fn&& fn) {
    std::ostringstream os;
    fn(os);
    write_text(path, os.str());
}

void write_layout(std::ostream& os, const ClusteringVector& c) {
    os << "n,cluster\n";
    const auto labels = c.one_based();
    for (std::size_t n = 0; n < labels.size(); ++n) os << fmt::format("{},{}\n", n + 1, labels[n]);
}

void write_weights(std::ostream& os, const ExcitationVector& w) {
    os << "q,amp,phase_deg\n";
    for (std::size_t q = 0; q < w.size(); ++q)
        os << fmt::format("{},{:.17g},{:.17g}\n", q + 1, std::abs(w[q]), std::arg(w[q]) / kDeg);
}

void write_gamma_curve(std::ostream& os, const SynthesisResult& r) {
    os << "m,u,gamma\n";
    for (const auto& s : r.per_sample)
        os << fmt::format("{},{:.17g},{}\n", s.m + 1, s.u, s.degenerate ? std::string("nan") : fmt::format("{:.17g}", s.gamma));
}

void make_dir(const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw std::runtime_error(fmt::format("cannot create output directory '{}': {}", dir.string(), ec.message()));
}

nlohmann::json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(fmt::format("cannot open summary '{}'", path.string()));
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(fmt::format("{}: invalid JSON: {}", path.string(), e.what()));
    }
}

}  // namespace

MetricOptions ExperimentConfig::metric_options() const {
    MetricOptions o;
    if (mainlobe_lo_deg && mainlobe_hi_deg) {
        o.mainlobe_window = UWindow{std::sin(*mainlobe_lo_deg * kDeg), std::sin(*mainlobe_hi_deg * kDeg)};
    } else if (reference.kind != ReferenceKind::file) {
        o.mainlobe_hint = std::sin(reference.theta0_deg * kDeg);
    }
    return o;
}

ExperimentConfig parse_config(std::istream& is, const std::filesystem::path& base_dir) {
    ExperimentConfig c;
    std::map<std::string, std::size_t, std::less<>> seen;
    std::string raw;
    std::size_t line = 0;
    while (std::getline(is, raw)) {
        ++line;
        std::string_view text = raw;
        if (const auto hash = text.find('#'); hash != std::string_view::npos) text = text.substr(0, hash);
        text = trim(text);
        if (text.empty()) continue;
        const auto eq = text.find('=');
        if (eq == std::string_view::npos)
            throw ParseError(fmt::format("config line {}: expected 'key = value', got '{}'", line, text), line);
        const auto key = trim(text.substr(0, eq));
        const auto value = trim(text.substr(eq + 1));
        if (value.empty()) throw ParseError(fmt::format("config line {}: empty value for {}", line, key), line);
        if (const auto it = seen.find(key); it != seen.end())
            throw ParseError(fmt::format("config line {}: {} already set on line {}", line, key, it->second), line);
        seen.emplace(std::string(key), line);

        if (key == "n") c.n = parse_number<std::size_t>(key, value, line);
        else if (key == "d") c.d = parse_number<double>(key, value, line);
        else if (key == "q") c.q = parse_number<int>(key, value, line);
        else if (key == "grid_m") c.grid_m = parse_number<std::size_t>(key, value, line);
        else if (key == "metric_m") c.metric_m = parse_number<std::size_t>(key, value, line);
        else if (key == "restarts") c.restarts = parse_number<int>(key, value, line);
        else if (key == "seed") c.seed = parse_number<std::uint64_t>(key, value, line);
        else if (key == "kmeans_max_iter") c.kmeans_max_iter = parse_number<int>(key, value, line);
        else if (key == "ipm_max_iter") c.ipm_max_iter = parse_number<int>(key, value, line);
        else if (key == "ipm_tol") c.ipm_tol = parse_number<double>(key, value, line);
        else if (key == "reference.kind") {
            if (value == "dolph") c.reference.kind = ReferenceKind::dolph;
            else if (value == "taylor") c.reference.kind = ReferenceKind::taylor;
            else if (value == "file") c.reference.kind = ReferenceKind::file;
            else
                throw ParseError(
                    fmt::format("config line {}: reference.kind must be dolph, taylor or file, got '{}'", line, value), line);
        } else if (key == "reference.sll_db") c.reference.sll_db = parse_number<double>(key, value, line);
        else if (key == "reference.theta0_deg") c.reference.theta0_deg = parse_number<double>(key, value, line);
        else if (key == "reference.nbar") c.reference.nbar = parse_number<int>(key, value, line);
        else if (key == "reference.path") {
            std::filesystem::path p{std::string(value)};
            c.reference.path = p.is_relative() && !base_dir.empty() ? base_dir / p : p;
        } else if (key == "compare_emm") c.compare_emm = parse_bool(key, value, line);
        else if (key == "enumerate_cap") c.enumerate_cap = parse_number<std::uint64_t>(key, value, line);
        else if (key == "pattern_m") c.pattern_m = parse_number<std::size_t>(key, value, line);
        else if (key == "mainlobe.lo_deg") c.mainlobe_lo_deg = parse_number<double>(key, value, line);
        else if (key == "mainlobe.hi_deg") c.mainlobe_hi_deg = parse_number<double>(key, value, line);
        else throw ParseError(fmt::format("config line {}: unknown key '{}'", line, key), line);
    }
    for (const char* required : {"n", "q"})
        if (!seen.contains(std::string_view(required))) throw ParseError(fmt::format("config: missing required key '{}'", required));
    validate(c);
    return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(fmt::format("cannot open config file '{}'", path.string()));
    return parse_config(in, path.parent_path());
}

ExcitationVector build_reference(const ExperimentConfig& c) {
    const auto& r = c.reference;
    switch (r.kind) {
        case ReferenceKind::dolph: return dolph_chebyshev(c.n, r.sll_db, r.theta0_deg, c.d);
        case ReferenceKind::taylor: return taylor_nbar(c.n, r.sll_db, r.nbar, r.theta0_deg, c.d);
        case ReferenceKind::file:
            if (!std::filesystem::exists(r.path))
                throw ParseError(fmt::format("reference file '{}' does not exist", r.path.string()));
            return load_reference(r.path, c.n);
    }
    throw ArgumentError("unknown reference kind");
}

PmmConfig pmm_config(const ExperimentConfig& c, unsigned threads) {
    PmmConfig p;
    p.clustering_m = c.grid_m;
    p.metric_m = c.metric_m;
    p.q_count = c.q;
    p.restarts = c.restarts;
    p.base_seed = c.seed;
    p.kmeans.max_iter = c.kmeans_max_iter;
    p.ipm.max_iter = c.ipm_max_iter;
    p.ipm.tol = c.ipm_tol;
    p.threads = threads;
    return p;
}

SynthOutcome run_synth(const ExperimentConfig& config, unsigned threads) {
    SynthOutcome out;
    out.config = config;
    out.reference = build_reference(config);
    const ArrayGeometry geometry(config.n, config.d);
    const AngularGrid dense(config.pattern_m);
    const auto mopt = config.metric_options();
    out.reference_metrics = pattern_metrics(fpa_power_pattern(geometry, out.reference, dense), mopt);

    out.pmm.method = "PMM";
    out.pmm.result = pmm_synthesize(geometry, out.reference, pmm_config(config, threads));
    out.pmm.metrics = pattern_metrics(result_pattern(geometry, out.pmm.result, dense), mopt);

    if (config.compare_emm) {
        EmmConfig e;
        e.q_count = config.q;
        e.restarts = config.restarts;
        e.base_seed = config.seed;
        e.kmeans.max_iter = config.kmeans_max_iter;
        e.threads = threads;
        MethodSummary emm;
        emm.method = "EMM";
        emm.result = emm_synthesize(geometry, out.reference, AngularGrid(config.effective_metric_m()), e);
        emm.metrics = pattern_metrics(result_pattern(geometry, emm.result, dense), mopt);
        if (emm.result.gamma > 0.0) out.improvement = matching_improvement(emm.result.gamma, out.pmm.result.gamma);
        out.emm = std::move(emm);
    }
    return out;
}

std::string summary_json(const SynthOutcome& o) {
    const auto& c = o.config;
    std::string s = "{\n";
    s += "  \"format\": \"cpasynth-summary/1\",\n";
    s += "  \"config\": {\n";
    s += fmt::format("    \"n\": {},\n    \"d\": {},\n    \"q\": {},\n", c.n, num(c.d), c.q);
    s += fmt::format("    \"grid_m\": {},\n    \"metric_m\": {},\n    \"pattern_m\": {},\n", c.grid_m,
                     c.effective_metric_m(), c.pattern_m);
    s += fmt::format("    \"restarts\": {},\n    \"seed\": {},\n", c.restarts, c.seed);
    s += fmt::format("    \"kmeans_max_iter\": {},\n    \"ipm_max_iter\": {},\n    \"ipm_tol\": {},\n",
                     c.kmeans_max_iter, c.ipm_max_iter, num(c.ipm_tol));
    s += fmt::format("    \"reference\": {{\"kind\": {}, \"sll_db\": {}, \"theta0_deg\": {}, \"nbar\": {}, \"path\": {}}}\n",
                     json_string(kind_name(c.reference.kind)), num(c.reference.sll_db), num(c.reference.theta0_deg),
                     c.reference.nbar, json_string(c.reference.path.generic_string()));
    s += "  },\n";
    s += "  \"reference\": {\n";
    s += fmt::format("    \"sll_db\": {},\n    \"fnbw_deg\": {},\n", num(o.reference_metrics.sll_db),
                     num(o.reference_metrics.fnbw_deg));
    s += fmt::format("    \"excitations\": {}\n", complex_list(o.reference.vector()));
    s += "  },\n";
    s += "  \"methods\": [\n";
    s += method_json(o.pmm);
    if (o.emm) s += ",\n" + method_json(*o.emm);
    s += "\n  ],\n";
    s += fmt::format("  \"R_percent\": {}\n", num(o.improvement));
    s += "}\n";
    return s;
}

void write_synth_bundle(const SynthOutcome& o, const std::filesystem::path& dir) {
    make_dir(dir);
    const ArrayGeometry geometry(o.config.n, o.config.d);
    const AngularGrid dense(o.config.pattern_m);
    write_text(dir / "summary.json", summary_json(o));
    write_with(dir / "layout.csv", [&](std::ostream& os) { write_layout(os, o.pmm.result.clustering); });
    write_with(dir / "weights.csv", [&](std::ostream& os) { write_weights(os, o.pmm.result.weights); });
    write_with(dir / "gamma_curve.csv", [&](std::ostream& os) { write_gamma_curve(os, o.pmm.result); });
    write_with(dir / "pattern.csv",
               [&](std::ostream& os) { write_pattern_csv(os, result_pattern(geometry, o.pmm.result, dense)); });
    write_with(dir / "reference_pattern.csv",
               [&](std::ostream& os) { write_pattern_csv(os, fpa_power_pattern(geometry, o.reference, dense)); });
    if (o.emm) {
        write_with(dir / "emm_layout.csv", [&](std::ostream& os) { write_layout(os, o.emm->result.clustering); });
        write_with(dir / "emm_weights.csv", [&](std::ostream& os) { write_weights(os, o.emm->result.weights); });
        write_with(dir / "emm_pattern.csv",
                   [&](std::ostream& os) { write_pattern_csv(os, result_pattern(geometry, o.emm->result, dense)); });
    }
}

// ---- enumeration ----------------------------------------------------------------

std::string checkpoint_json(const EpmCheckpoint& cp, std::size_t n, int q) {
    std::string s = "{\n";
    s += fmt::format("  \"n\": {},\n  \"q\": {},\n", n, q);
    s += fmt::format("  \"evaluated\": {},\n  \"next_shard\": {},\n", cp.evaluated, cp.next_shard);
    s += fmt::format("  \"best_gamma\": {},\n", num(cp.best_gamma));
    s += fmt::format("  \"best_labels\": {},\n", int_list(cp.best_labels));
    s += fmt::format("  \"optimal_count\": {}\n", cp.optimal_count);
    return s + "}\n";
}

EpmCheckpoint parse_checkpoint_json(std::istream& is, std::size_t n, int q) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(is);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(fmt::format("checkpoint: invalid JSON: {}", e.what()));
    }
    EpmCheckpoint cp;
    try {
        if (j.at("n").get<std::size_t>() != n || j.at("q").get<int>() != q)
            throw ArgumentError(fmt::format("checkpoint was written for N = {}, Q = {}; this run has N = {}, Q = {}",
                                            j.at("n").get<std::size_t>(), j.at("q").get<int>(), n, q));
        cp.evaluated = j.at("evaluated").get<std::uint64_t>();
        cp.next_shard = j.at("next_shard").get<std::size_t>();
        cp.best_gamma = j.at("best_gamma").is_null() ? std::numeric_limits<double>::infinity()
                                                      : j.at("best_gamma").get<double>();
        cp.best_labels = j.at("best_labels").get<std::vector<int>>();
        cp.optimal_count = j.at("optimal_count").get<std::uint64_t>();
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(fmt::format("checkpoint: {}", e.what()));
    }
    if (!cp.best_labels.empty() && cp.best_labels.size() != n)
        throw ParseError("checkpoint: best_labels has the wrong length");
    return cp;
}

EnumerateOutcome run_enumerate(const ExperimentConfig& config, unsigned threads,
                               const std::optional<std::filesystem::path>& checkpoint_dir, bool resume) {
    const auto reference = build_reference(config);
    const ArrayGeometry geometry(config.n, config.d);
    EpmOptions opt;
    opt.ipm.max_iter = config.ipm_max_iter;
    opt.ipm.tol = config.ipm_tol;
    opt.cap = config.enumerate_cap;
    opt.threads = threads;
    std::filesystem::path cp_path;
    if (checkpoint_dir) {
        make_dir(*checkpoint_dir);
        cp_path = *checkpoint_dir / "epm_checkpoint.json";
        opt.on_checkpoint = [&](const EpmCheckpoint& cp) {
            const auto tmp = cp_path.string() + ".tmp";
            write_text(tmp, checkpoint_json(cp, config.n, config.q));
            std::filesystem::rename(tmp, cp_path);
        };
        if (resume && std::filesystem::exists(cp_path)) {
            std::ifstream in(cp_path);
            opt.resume = parse_checkpoint_json(in, config.n, config.q);
        }
    }
    EnumerateOutcome out;
    out.config = config;
    out.result = epm_enumerate(geometry, reference, config.q, AngularGrid(config.effective_metric_m()), opt);
    if (checkpoint_dir) std::filesystem::remove(cp_path);
    return out;
}

std::string enumerate_json(const EnumerateOutcome& o) {
    const auto& c = o.config;
    const auto& r = o.result;
    std::string s = "{\n";
    s += "  \"format\": \"cpasynth-enumerate/1\",\n";
    s += fmt::format("  \"n\": {},\n  \"q\": {},\n  \"metric_m\": {},\n", c.n, c.q, c.effective_metric_m());
    s += fmt::format("  \"partition_count\": {},\n", r.partition_count);
    s += fmt::format("  \"optimal_count\": {},\n", r.optimal_count);
    s += fmt::format("  \"gamma\": {},\n", num(r.gamma));
    s += fmt::format("  \"clustering\": {},\n", int_list(r.clustering.one_based()));
    s += fmt::format("  \"weights\": {}\n", complex_list(r.weights.vector()));
    return s + "}\n";
}

void write_enumerate_bundle(const EnumerateOutcome& o, const std::filesystem::path& dir) {
    make_dir(dir);
    write_text(dir / "enumerate.json", enumerate_json(o));
    write_with(dir / "layout.csv", [&](std::ostream& os) { write_layout(os, o.result.clustering); });
    write_with(dir / "weights.csv", [&](std::ostream& os) { write_weights(os, o.result.weights); });
}

// ---- comparison -------------------------------------------------------------------

std::vector<CompareRow> compare_summaries(const std::vector<std::filesystem::path>& summaries) {
    if (summaries.size() < 2) throw ArgumentError("compare needs at least two summary files");
    struct Key {
        std::size_t n;
        double d;
        std::size_t metric_m;
        nlohmann::json excitations;
    };
    std::optional<Key> first;
    std::vector<CompareRow> rows;
    for (const auto& path : summaries) {
        const auto j = read_json_file(path);
        const auto name = path.string();
        try {
            const auto& cfg = j.at("config");
            Key k{cfg.at("n").get<std::size_t>(), cfg.at("d").get<double>(), cfg.at("metric_m").get<std::size_t>(),
                  j.at("reference").at("excitations")};
            if (!first) {
                first = k;
            } else {
                if (k.n != first->n || k.d != first->d)
                    throw ArgumentError(fmt::format("{}: array geometry differs from '{}'", name, summaries.front().string()));
                if (k.metric_m != first->metric_m)
                    throw ArgumentError(fmt::format("{}: metric grid M = {} differs from M = {} in '{}'", name, k.metric_m,
                                                    first->metric_m, summaries.front().string()));
                if (k.excitations != first->excitations)
                    throw ArgumentError(
                        fmt::format("{}: reference excitations differ from '{}'", name, summaries.front().string()));
            }
            const int q = cfg.at("q").get<int>();
            for (const auto& m : j.at("methods")) {
                CompareRow row;
                row.source = name;
                row.method = m.at("method").get<std::string>();
                row.q = q;
                if (!m.at("sll_db").is_null()) row.sll_db = m.at("sll_db").get<double>();
                row.gamma = m.at("gamma").get<double>();
                rows.push_back(std::move(row));
            }
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(fmt::format("{}: not a synth summary: {}", name, e.what()));
        }
    }
    for (auto& row : rows) {
        const CompareRow* base = nullptr;
        for (const auto& r : rows)
            if (r.q == row.q && r.method == "EMM") {
                base = &r;
                break;
            }
        if (!base)
            for (const auto& r : rows)
                if (r.q == row.q) {
                    base = &r;
                    break;
                }
        row.r_percent = base->gamma > 0.0 ? matching_improvement(base->gamma, row.gamma) : 0.0;
    }
    return rows;
}

void write_compare_csv(std::ostream& os, const std::vector<CompareRow>& rows) {
    os << "method,Q,SLL_dB,gamma,R\n";
    for (const auto& r : rows)
        os << fmt::format("{},{},{},{:.6e},{:.2f}\n", r.method, r.q, r.sll_db ? fmt::format("{:.2f}", *r.sll_db) : "",
                          r.gamma, r.r_percent);
}

}  // namespace cpa
