#include "cpasynth/ipm.hpp"

#include <cmath>

#include <fmt/format.h>

#include "cpasynth/errors.hpp"

namespace cpa {

ExcitationVector subarray_average(std::span<const Complex> aux, const ClusteringVector& clustering) {
    if (aux.size() != clustering.size())
        throw ArgumentError(fmt::format("{} auxiliary excitations for a {}-element clustering", aux.size(), clustering.size()));
    const auto q = static_cast<std::size_t>(clustering.q_count());
    std::vector<Complex> sum(q);
    std::vector<std::size_t> count(q);
    for (std::size_t n = 0; n < aux.size(); ++n) {
        const auto c = static_cast<std::size_t>(clustering[n]);
        sum[c] += aux[n];
        ++count[c];
    }
    for (std::size_t k = 0; k < q; ++k) {
        if (count[k] == 0) throw ArgumentError(fmt::format("cluster {} is empty", k + 1));
        sum[k] /= static_cast<double>(count[k]);
    }
    return ExcitationVector(std::move(sum));
}

namespace {

Complex project_sample(Complex af, double target_power, double rel_tol) {
    const double power = std::norm(af);
    if (std::abs(power - target_power) <= rel_tol * target_power) return af;
    const double mag = std::abs(af);
    const double target = std::sqrt(target_power);
    if (mag == 0.0) return {target, 0.0};
    return af * (target / mag);
}

void check_invertible(const ArrayGeometry& geometry, const AngularGrid& grid) {
    if (geometry.spacing() != 0.5)
        throw UnsupportedConfiguration(fmt::format(
            "inverse array-factor transform requires half-wavelength spacing (d = 0.5), got d = {}",
            geometry.spacing()));
    if (grid.size() < geometry.size() + 1)
        throw ArgumentError(fmt::format("inverse transform needs M >= N + 1 samples (M = {}, N = {})", grid.size(),
                                        geometry.size()));
}

std::vector<double> trapezoid_weights(const AngularGrid& grid) {
    std::vector<double> w(grid.size(), grid.step());
    w.front() *= 0.5;
    w.back() *= 0.5;
    return w;
}

void invert_into(std::span<const Complex> af, const SteeringTable& table, std::span<const double> weights,
                 std::span<Complex> out) {
    for (std::size_t n = 0; n < table.elements(); ++n) {
        const auto row = table.row(n);
        Complex s{};
        for (std::size_t l = 0; l < af.size(); ++l) s += weights[l] * af[l] * std::conj(row[l]);
        out[n] = 0.5 * s;
    }
}

}  // namespace

std::vector<Complex> project_onto_reference(std::span<const Complex> af, const PowerPattern& reference,
                                            double rel_tol) {
    if (af.size() != reference.values.size()) throw ArgumentError("array factor and reference differ in length");
    std::vector<Complex> out(af.size());
    for (std::size_t l = 0; l < af.size(); ++l) out[l] = project_sample(af[l], reference.values[l], rel_tol);
    return out;
}

ExcitationVector invert_af_to_excitations(std::span<const Complex> projected_af, const ArrayGeometry& geometry,
                                          const AngularGrid& grid) {
    check_invertible(geometry, grid);
    if (projected_af.size() != grid.size()) throw ArgumentError("array factor length differs from grid size");
    const SteeringTable table(geometry, grid);
    const auto weights = trapezoid_weights(grid);
    std::vector<Complex> out(geometry.size());
    invert_into(projected_af, table, weights, out);
    return ExcitationVector(std::move(out));
}

IpmSolver::IpmSolver(const ArrayGeometry& geometry, const ExcitationVector& reference_excitations,
                     const PowerPattern& reference, IpmOptions options)
    : geometry_(geometry),
      excitations_(reference_excitations),
      reference_(reference),
      options_(options),
      table_(geometry, reference.grid),
      trap_weights_(trapezoid_weights(reference.grid)),
      energy_(trapezoid(reference.values, reference.grid.step())) {
    if (excitations_.size() != geometry_.size())
        throw ArgumentError(fmt::format("expected {} reference excitations, got {}", geometry_.size(), excitations_.size()));
    if (reference_.values.size() != reference_.grid.size()) throw ArgumentError("reference pattern inconsistent with its grid");
    if (!(energy_ > 0.0)) throw ArgumentError("reference pattern has zero energy");
    if (options_.max_iter < 0) throw ArgumentError("IPM iteration cap must be non-negative");
    check_invertible(geometry_, reference_.grid);
}

IpmSolver::IpmSolver(const ArrayGeometry& geometry, const ExcitationVector& reference_excitations,
                     const AngularGrid& grid, IpmOptions options)
    : IpmSolver(geometry, reference_excitations, fpa_power_pattern(geometry, reference_excitations, grid), options) {}

IpmTrace IpmSolver::run(const ClusteringVector& clustering) const {
    if (clustering.size() != geometry_.size())
        throw ArgumentError(fmt::format("clustering covers {} elements, array has {}", clustering.size(), geometry_.size()));
    const std::size_t m_count = reference_.values.size();
    const double h = reference_.grid.step();

    std::vector<Complex> aux(excitations_.begin(), excitations_.end());
    std::vector<Complex> af(m_count);
    std::vector<double> diff(m_count);
    IpmTrace trace;

    for (int t = 0;; ++t) {
        ExcitationVector weights = subarray_average(aux, clustering);
        const auto element_weights = expand_weights(clustering, weights);
        table_.array_factor(element_weights, af);
        for (std::size_t l = 0; l < m_count; ++l) diff[l] = std::abs(reference_.values[l] - std::norm(af[l]));
        const double gamma = trapezoid(diff, h) / energy_;
        trace.gamma_history.push_back(gamma);
        if (t == 0 || gamma < trace.gamma) {
            trace.gamma = gamma;
            trace.final_weights = std::move(weights);
            trace.best_iteration = t;
        }
        if (gamma <= options_.gamma_floor) {
            trace.converged = true;
            break;
        }
        if (t > 0) {
            const double prev = trace.gamma_history[static_cast<std::size_t>(t) - 1];
            if (std::abs(gamma - prev) <= options_.tol * prev) {
                trace.converged = true;
                break;
            }
        }
        if (t >= options_.max_iter) break;

        for (std::size_t l = 0; l < m_count; ++l)
            af[l] = project_sample(af[l], reference_.values[l], options_.projection_tol);
        invert_into(af, table_, trap_weights_, aux);
    }
    return trace;
}

IpmTrace ipm_weighting(const ArrayGeometry& geometry, const ClusteringVector& clustering,
                       const ExcitationVector& reference_excitations, const PowerPattern& reference,
                       const IpmOptions& options) {
    return IpmSolver(geometry, reference_excitations, reference, options).run(clustering);
}

}  // namespace cpa
