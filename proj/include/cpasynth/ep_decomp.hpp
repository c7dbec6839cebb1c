#pragma once

// Elementary power patterns: P_n(u) = AF_n(u) * conj(AF(u)), which expands to
// |AF_n|^2 + sum_{l != n} AF_n AF_l^*. Individually complex; their sum over n
// is the (real) reference power pattern.

#include <iosfwd>
#include <span>
#include <vector>

#include "cpasynth/core_model.hpp"

namespace cpa {

/// AF_n(u) = I_n e^{j k d n u} for every element.
std::vector<Complex> elementary_af(const ArrayGeometry& geometry, const ExcitationVector& excitations, double u);

class EPMatrix {
public:
    EPMatrix(AngularGrid grid, std::size_t n_elements, std::vector<Complex> entries);

    const AngularGrid& grid() const noexcept { return grid_; }
    std::size_t elements() const noexcept { return n_; }
    std::size_t samples() const noexcept { return grid_.size(); }

    const Complex& operator()(std::size_t n, std::size_t m) const { return entries_[m * n_ + n]; }
    /// All N entries at sample m.
    std::span<const Complex> column(std::size_t m) const { return {entries_.data() + m * n_, n_}; }
    /// sum_n P_n(u_m).
    Complex column_sum(std::size_t m) const;

private:
    AngularGrid grid_;
    std::size_t n_;
    std::vector<Complex> entries_;  // column-major: sample-contiguous
};

EPMatrix ep_matrix(const ArrayGeometry& geometry, const ExcitationVector& excitations, const AngularGrid& grid);

struct NormalizedEPColumn {
    std::size_t m = 0;
    std::vector<Complex> values;
};

/// P_n(u_m) / max_n |P_n(u_m)|. Throws DegenerateSample for an all-zero column.
NormalizedEPColumn normalize_column(const EPMatrix& ep, std::size_t m);

/// CSV `n,m,u,re,im` with 1-based n and m.
void write_ep_csv(std::ostream& os, const EPMatrix& ep);

}  // namespace cpa
