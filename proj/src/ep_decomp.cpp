#include "cpasynth/ep_decomp.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include <fmt/format.h>

#include "cpasynth/errors.hpp"

namespace cpa {

std::vector<Complex> elementary_af(const ArrayGeometry& geometry, const ExcitationVector& excitations, double u) {
    if (excitations.size() != geometry.size())
        throw ArgumentError(fmt::format("expected {} excitations, got {}", geometry.size(), excitations.size()));
    if (!(std::abs(u) <= 1.0)) throw ArgumentError("u must lie in [-1, 1]");
    std::vector<Complex> af(geometry.size());
    for (std::size_t n = 0; n < af.size(); ++n) af[n] = excitations[n] * geometry.steering(n, u);
    return af;
}

EPMatrix::EPMatrix(AngularGrid grid, std::size_t n_elements, std::vector<Complex> entries)
    : grid_(grid), n_(n_elements), entries_(std::move(entries)) {
    if (entries_.size() != n_ * grid_.size()) throw ArgumentError("EP matrix has the wrong number of entries");
}

Complex EPMatrix::column_sum(std::size_t m) const {
    Complex s{};
    for (const auto& p : column(m)) s += p;
    return s;
}

EPMatrix ep_matrix(const ArrayGeometry& geometry, const ExcitationVector& excitations, const AngularGrid& grid) {
    const std::size_t n_el = geometry.size();
    if (excitations.size() != n_el)
        throw ArgumentError(fmt::format("expected {} excitations, got {}", n_el, excitations.size()));
    std::vector<Complex> entries(n_el * grid.size());
    std::vector<Complex> af(n_el);
    for (std::size_t m = 0; m < grid.size(); ++m) {
        const double u = grid.node(m);
        Complex total{};
        for (std::size_t n = 0; n < n_el; ++n) {
            af[n] = excitations[n] * geometry.steering(n, u);
            total += af[n];
        }
        const Complex total_conj = std::conj(total);
        for (std::size_t n = 0; n < n_el; ++n) entries[m * n_el + n] = af[n] * total_conj;
    }
    return EPMatrix(grid, n_el, std::move(entries));
}

NormalizedEPColumn normalize_column(const EPMatrix& ep, std::size_t m) {
    if (m >= ep.samples()) throw ArgumentError(fmt::format("sample index {} out of range", m + 1));
    const auto col = ep.column(m);
    double peak = 0.0;
    for (const auto& p : col) peak = std::max(peak, std::abs(p));
    if (!(peak > 0.0)) throw DegenerateSample(fmt::format("EP column {} is identically zero", m + 1));
    NormalizedEPColumn out{m, std::vector<Complex>(col.begin(), col.end())};
    for (auto& p : out.values) p /= peak;
    return out;
}

void write_ep_csv(std::ostream& os, const EPMatrix& ep) {
    os << "n,m,u,re,im\n";
    for (std::size_t n = 0; n < ep.elements(); ++n) {
        for (std::size_t m = 0; m < ep.samples(); ++m) {
            const auto p = ep(n, m);
            os << fmt::format("{},{},{:.17g},{:.17g},{:.17g}\n", n + 1, m + 1, ep.grid().node(m), p.real(), p.imag());
        }
    }
}

}  // namespace cpa
