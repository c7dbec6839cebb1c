#pragma once

// Sub-array weighting for a fixed clustering by alternating projections:
// cluster-mean averaging (CPA-realisable set) <-> magnitude replacement with
// the reference power pattern, closed through an inverse transform back to
// element excitations.

#include <span>
#include <vector>

#include "cpasynth/core_model.hpp"

namespace cpa {

struct IpmOptions {
    /// Iterations t = 0..max_iter are evaluated at most.
    int max_iter = 200;
    /// Stop once |G(t) - G(t-1)| <= tol * G(t-1).
    double tol = 1e-6;
    /// |AF|^2 within this relative distance of P_ref is left untouched.
    double projection_tol = 1e-12;
    /// A metric at or below this is treated as a perfect match and stops the loop.
    double gamma_floor = 1e-15;
};

struct IpmTrace {
    /// Metric of every iterate, index = t.
    std::vector<double> gamma_history;
    /// Weights of the best iterate (lowest metric, earliest on ties).
    ExcitationVector final_weights;
    double gamma = 0.0;
    int best_iteration = 0;
    /// True when the loop stopped on stagnation rather than on the iteration cap.
    bool converged = false;

    int iterations() const { return static_cast<int>(gamma_history.size()); }
};

/// I_q = mean of the auxiliary excitations of the elements in cluster q.
ExcitationVector subarray_average(std::span<const Complex> aux, const ClusteringVector& clustering);

/// Replaces |AF(u_l)| with sqrt(P_ref(u_l)) keeping the phase; zero phase where AF vanishes.
std::vector<Complex> project_onto_reference(std::span<const Complex> af, const PowerPattern& reference,
                                            double rel_tol = 1e-12);

/// I_n = 1/2 int AF(u) e^{-j k d n u} du by trapezoid on the grid. Exact left
/// inverse of the array factor only for half-wavelength spacing and M > N.
ExcitationVector invert_af_to_excitations(std::span<const Complex> projected_af, const ArrayGeometry& geometry,
                                          const AngularGrid& grid);

/// Reusable weighting problem: reference and steering table are built once and
/// shared by every clustering evaluated against them. `run` is const and
/// thread-safe.
class IpmSolver {
public:
    IpmSolver(const ArrayGeometry& geometry, const ExcitationVector& reference_excitations,
              const PowerPattern& reference, IpmOptions options = {});
    /// Reference pattern taken as the FPA pattern of the excitations on `grid`.
    IpmSolver(const ArrayGeometry& geometry, const ExcitationVector& reference_excitations, const AngularGrid& grid,
              IpmOptions options = {});

    IpmTrace run(const ClusteringVector& clustering) const;

    const PowerPattern& reference() const noexcept { return reference_; }
    const ArrayGeometry& geometry() const noexcept { return geometry_; }
    const IpmOptions& options() const noexcept { return options_; }

private:
    ArrayGeometry geometry_;
    ExcitationVector excitations_;
    PowerPattern reference_;
    IpmOptions options_;
    SteeringTable table_;
    std::vector<double> trap_weights_;
    double energy_;
};

IpmTrace ipm_weighting(const ArrayGeometry& geometry, const ClusteringVector& clustering,
                       const ExcitationVector& reference_excitations, const PowerPattern& reference,
                       const IpmOptions& options = {});

}  // namespace cpa
