#include <pybind11/complex.h>
#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "cpasynth/baselines.hpp"
#include "cpasynth/driver.hpp"
#include "cpasynth/ep_decomp.hpp"
#include "cpasynth/errors.hpp"
#include "cpasynth/experiment.hpp"
#include "cpasynth/ipm.hpp"
#include "cpasynth/kmeans.hpp"
#include "cpasynth/refgen.hpp"

namespace py = pybind11;
using namespace cpa;

namespace {

ExcitationVector to_excitations(const std::vector<Complex>& w) { return ExcitationVector(w); }

py::array_t<double> to_array(const std::vector<double>& v) { return py::array_t<double>(v.size(), v.data()); }

py::array_t<Complex> to_array(const std::vector<Complex>& v) { return py::array_t<Complex>(v.size(), v.data()); }

ClusteringVector to_clustering(const std::vector<int>& labels, std::optional<int> q) {
    int count = 0;
    for (int l : labels) count = std::max(count, l + 1);
    return ClusteringVector(labels, q.value_or(count));
}

py::dict result_dict(const SynthesisResult& r) {
    py::dict d;
    d["gamma"] = r.gamma;
    d["clustering"] = r.clustering.labels();
    d["weights"] = to_array(r.weights.vector());
    d["best_sample"] = r.best_sample;
    py::list samples;
    for (const auto& s : r.per_sample) {
        py::dict e;
        e["m"] = s.m;
        e["u"] = s.u;
        e["degenerate"] = s.degenerate;
        e["gamma"] = s.gamma;
        e["clustering"] = s.clustering.labels();
        e["distinct_clusterings"] = s.distinct_clusterings;
        samples.append(e);
    }
    d["per_sample"] = samples;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Clustered linear array synthesis by power-pattern matching";

    py::register_exception<ArgumentError>(m, "ArgumentError", PyExc_ValueError);
    py::register_exception<UnsupportedConfiguration>(m, "UnsupportedConfiguration", PyExc_ValueError);
    py::register_exception<DegenerateSample>(m, "DegenerateSample", PyExc_ArithmeticError);
    py::register_exception<SynthesisFailed>(m, "SynthesisFailed", PyExc_RuntimeError);
    py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
    py::register_exception<EnumerationCapExceeded>(m, "EnumerationCapExceeded", PyExc_OverflowError);

    m.def("grid_nodes", [](std::size_t m_samples) { return to_array(AngularGrid(m_samples).nodes()); },
          py::arg("m"), "u_m = -1 + 2 m / (M - 1) for m = 0..M-1.");

    m.def(
        "fpa_power_pattern",
        [](const std::vector<Complex>& w, std::size_t m_samples, double spacing) {
            return to_array(fpa_power_pattern(ArrayGeometry(w.size(), spacing), to_excitations(w), AngularGrid(m_samples)).values);
        },
        py::arg("excitations"), py::arg("m"), py::arg("spacing") = 0.5);

    m.def(
        "cpa_power_pattern",
        [](const std::vector<int>& labels, const std::vector<Complex>& weights, std::size_t m_samples, double spacing) {
            const auto c = to_clustering(labels, static_cast<int>(weights.size()));
            return to_array(
                cpa_power_pattern(ArrayGeometry(labels.size(), spacing), c, to_excitations(weights), AngularGrid(m_samples)).values);
        },
        py::arg("labels"), py::arg("weights"), py::arg("m"), py::arg("spacing") = 0.5,
        "Power pattern of a clustered array; labels are 0-based.");

    m.def(
        "pm_metric",
        [](const std::vector<double>& reference, const std::vector<double>& trial) {
            if (reference.size() != trial.size()) throw ArgumentError("patterns have different lengths");
            const AngularGrid g(reference.size());
            return pm_metric(PowerPattern{g, reference}, PowerPattern{g, trial});
        },
        py::arg("reference"), py::arg("trial"));

    m.def("matching_improvement", &matching_improvement, py::arg("gamma_emm"), py::arg("gamma_pmm"));

    m.def(
        "ep_matrix",
        [](const std::vector<Complex>& w, std::size_t m_samples) {
            const auto ep = ep_matrix(ArrayGeometry(w.size()), to_excitations(w), AngularGrid(m_samples));
            py::array_t<Complex> out({w.size(), m_samples});
            auto v = out.mutable_unchecked<2>();
            for (std::size_t n = 0; n < w.size(); ++n)
                for (std::size_t k = 0; k < m_samples; ++k) v(n, k) = ep(n, k);
            return out;
        },
        py::arg("excitations"), py::arg("m"), "N x M matrix of elementary power patterns.");

    m.def(
        "kmeans",
        [](const std::vector<Complex>& points, int q, std::uint64_t seed, int max_iter) {
            KMeansOptions o;
            o.max_iter = max_iter;
            const auto r = kmeans_cluster(points, q, seed, o);
            py::dict d;
            d["labels"] = r.clustering.labels();
            d["centroids"] = to_array(r.centroids);
            d["sse_history"] = to_array(r.sse_history);
            d["iterations"] = r.iterations;
            return d;
        },
        py::arg("points"), py::arg("q"), py::arg("seed") = 0, py::arg("max_iter") = 100);

    m.def(
        "ipm_weighting",
        [](const std::vector<Complex>& reference, const std::vector<int>& labels, std::optional<int> q, std::size_t m_samples,
           int max_iter, double tol) {
            IpmOptions o;
            o.max_iter = max_iter;
            o.tol = tol;
            const ArrayGeometry geo(reference.size());
            const auto ref = to_excitations(reference);
            const AngularGrid grid(m_samples);
            const auto t = ipm_weighting(geo, to_clustering(labels, q), ref, fpa_power_pattern(geo, ref, grid), o);
            py::dict d;
            d["gamma"] = t.gamma;
            d["weights"] = to_array(t.final_weights.vector());
            d["gamma_history"] = to_array(t.gamma_history);
            d["best_iteration"] = t.best_iteration;
            d["converged"] = t.converged;
            return d;
        },
        py::arg("reference"), py::arg("labels"), py::arg("q") = py::none(), py::arg("m") = 17, py::arg("max_iter") = 200,
        py::arg("tol") = 1e-6);

    m.def(
        "invert_af",
        [](const std::vector<Complex>& af, std::size_t n) {
            return to_array(invert_af_to_excitations(af, ArrayGeometry(n), AngularGrid(af.size())).vector());
        },
        py::arg("array_factor"), py::arg("n"));

    m.def(
        "pmm_synthesize",
        [](const std::vector<Complex>& reference, int q, std::size_t grid_m, std::size_t metric_m, int restarts,
           std::uint64_t seed, unsigned threads) {
            PmmConfig c;
            c.q_count = q;
            c.clustering_m = grid_m;
            c.metric_m = metric_m;
            c.restarts = restarts;
            c.base_seed = seed;
            c.threads = threads;
            SynthesisResult r;
            {
                py::gil_scoped_release release;
                r = pmm_synthesize(ArrayGeometry(reference.size()), to_excitations(reference), c);
            }
            return result_dict(r);
        },
        py::arg("reference"), py::arg("q"), py::arg("grid_m") = 17, py::arg("metric_m") = 0, py::arg("restarts") = 50,
        py::arg("seed") = 0, py::arg("threads") = 1);

    m.def(
        "emm_synthesize",
        [](const std::vector<Complex>& reference, int q, std::size_t metric_m, int restarts, std::uint64_t seed) {
            EmmConfig c;
            c.q_count = q;
            c.restarts = restarts;
            c.base_seed = seed;
            return result_dict(emm_synthesize(ArrayGeometry(reference.size()), to_excitations(reference), AngularGrid(metric_m), c));
        },
        py::arg("reference"), py::arg("q"), py::arg("metric_m") = 17, py::arg("restarts") = 50, py::arg("seed") = 0);

    m.def("stirling2", &stirling2, py::arg("n"), py::arg("q"));

    m.def(
        "epm_enumerate",
        [](const std::vector<Complex>& reference, int q, std::size_t metric_m, std::uint64_t cap, unsigned threads) {
            EpmOptions o;
            o.cap = cap;
            o.threads = threads;
            EpmResult r;
            {
                py::gil_scoped_release release;
                r = epm_enumerate(ArrayGeometry(reference.size()), to_excitations(reference), q, AngularGrid(metric_m), o);
            }
            py::dict d;
            d["gamma"] = r.gamma;
            d["clustering"] = r.clustering.labels();
            d["weights"] = to_array(r.weights.vector());
            d["partition_count"] = r.partition_count;
            d["optimal_count"] = r.optimal_count;
            return d;
        },
        py::arg("reference"), py::arg("q"), py::arg("metric_m") = 17, py::arg("cap") = 1'000'000, py::arg("threads") = 1);

    m.def(
        "dolph_chebyshev",
        [](std::size_t n, double sll_db, double theta0_deg) { return to_array(dolph_chebyshev(n, sll_db, theta0_deg).vector()); },
        py::arg("n"), py::arg("sll_db"), py::arg("theta0_deg") = 0.0);
    m.def(
        "taylor_nbar",
        [](std::size_t n, double sll_db, int nbar, double theta0_deg) {
            return to_array(taylor_nbar(n, sll_db, nbar, theta0_deg).vector());
        },
        py::arg("n"), py::arg("sll_db"), py::arg("nbar") = 3, py::arg("theta0_deg") = 0.0);
    m.def(
        "load_reference",
        [](const std::filesystem::path& path) { return to_array(load_reference(path).vector()); }, py::arg("path"));

    m.def(
        "run_synth_config",
        [](const std::filesystem::path& config, const std::optional<std::filesystem::path>& out_dir, unsigned threads) {
            const auto cfg = load_config(config);
            SynthOutcome o;
            {
                py::gil_scoped_release release;
                o = run_synth(cfg, threads);
            }
            if (out_dir) write_synth_bundle(o, *out_dir);
            return summary_json(o);
        },
        py::arg("config"), py::arg("out_dir") = py::none(), py::arg("threads") = 1,
        "Runs a config file like `cpasynth synth` and returns the summary JSON text.");
}
