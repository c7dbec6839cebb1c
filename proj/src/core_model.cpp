#include "cpasynth/core_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <string>

#include <fmt/format.h>

#include "cpasynth/errors.hpp"

namespace cpa {

ArrayGeometry::ArrayGeometry(std::size_t n_elements, double spacing) : n_(n_elements), d_(spacing) {
    if (n_ < 1) throw ArgumentError("array needs at least one element");
    if (!(d_ > 0.0) || !std::isfinite(d_)) throw ArgumentError("element spacing must be positive");
}

ExcitationVector::ExcitationVector(std::vector<Complex> weights) : w_(std::move(weights)) {
    for (const auto& w : w_) {
        if (!std::isfinite(w.real()) || !std::isfinite(w.imag()))
            throw ArgumentError("excitation has a non-finite component");
    }
}

bool ExcitationVector::all_zero() const noexcept {
    return std::all_of(w_.begin(), w_.end(), [](const Complex& w) { return w == Complex{}; });
}

ClusteringVector::ClusteringVector(std::vector<int> labels, int q_count)
    : labels_(std::move(labels)), q_(q_count) {
    if (q_ < 1) throw ArgumentError("cluster count must be at least 1");
    if (static_cast<std::size_t>(q_) > labels_.size())
        throw ArgumentError(fmt::format("cluster count {} exceeds element count {}", q_, labels_.size()));
    std::vector<bool> seen(static_cast<std::size_t>(q_), false);
    for (std::size_t n = 0; n < labels_.size(); ++n) {
        const int c = labels_[n];
        if (c < 0 || c >= q_)
            throw ArgumentError(fmt::format("element {} has cluster label {} outside [1..{}]", n + 1, c + 1, q_));
        seen[static_cast<std::size_t>(c)] = true;
    }
    for (int q = 0; q < q_; ++q) {
        if (!seen[static_cast<std::size_t>(q)]) throw ArgumentError(fmt::format("cluster {} is empty", q + 1));
    }
}

ClusteringVector ClusteringVector::from_one_based(std::span<const int> labels, int q_count) {
    std::vector<int> zero_based(labels.begin(), labels.end());
    for (auto& c : zero_based) --c;
    return ClusteringVector(std::move(zero_based), q_count);
}

ClusteringVector ClusteringVector::identity(std::size_t n) {
    std::vector<int> labels(n);
    for (std::size_t i = 0; i < n; ++i) labels[i] = static_cast<int>(i);
    return ClusteringVector(std::move(labels), static_cast<int>(n));
}

std::vector<int> ClusteringVector::one_based() const {
    std::vector<int> out(labels_);
    for (auto& c : out) ++c;
    return out;
}

std::vector<std::size_t> ClusteringVector::cluster_sizes() const {
    std::vector<std::size_t> sizes(static_cast<std::size_t>(q_), 0);
    for (int c : labels_) ++sizes[static_cast<std::size_t>(c)];
    return sizes;
}

ClusteringVector ClusteringVector::canonical() const {
    std::vector<int> remap(static_cast<std::size_t>(q_), -1);
    std::vector<int> out(labels_.size());
    int next = 0;
    for (std::size_t n = 0; n < labels_.size(); ++n) {
        auto& r = remap[static_cast<std::size_t>(labels_[n])];
        if (r < 0) r = next++;
        out[n] = r;
    }
    ClusteringVector result;
    result.labels_ = std::move(out);
    result.q_ = q_;
    return result;
}

AngularGrid::AngularGrid(std::size_t m_samples) : m_(m_samples) {
    if (m_ < 2) throw ArgumentError("angular grid needs at least 2 samples");
}

std::vector<double> AngularGrid::nodes() const {
    std::vector<double> u(m_);
    for (std::size_t m = 0; m < m_; ++m) u[m] = node(m);
    return u;
}

std::size_t AngularGrid::nearest(double u) const noexcept {
    const double pos = (std::clamp(u, -1.0, 1.0) + 1.0) / step();
    return std::min(m_ - 1, static_cast<std::size_t>(std::lround(pos)));
}

double PowerPattern::max() const {
    return values.empty() ? 0.0 : *std::max_element(values.begin(), values.end());
}

SteeringTable::SteeringTable(const ArrayGeometry& geometry, const AngularGrid& grid)
    : n_(geometry.size()), m_(grid.size()), data_(n_ * m_) {
    for (std::size_t n = 0; n < n_; ++n) {
        for (std::size_t m = 0; m < m_; ++m) data_[n * m_ + m] = geometry.steering(n, grid.node(m));
    }
}

void SteeringTable::array_factor(std::span<const Complex> element_weights, std::span<Complex> out) const {
    if (element_weights.size() != n_)
        throw ArgumentError(fmt::format("expected {} element weights, got {}", n_, element_weights.size()));
    if (out.size() != m_) throw ArgumentError("array factor output has the wrong length");
    std::fill(out.begin(), out.end(), Complex{});
    for (std::size_t n = 0; n < n_; ++n) {
        const Complex w = element_weights[n];
        if (w == Complex{}) continue;
        const Complex* s = data_.data() + n * m_;
        for (std::size_t m = 0; m < m_; ++m) out[m] += w * s[m];
    }
}

std::vector<Complex> SteeringTable::array_factor(std::span<const Complex> element_weights) const {
    std::vector<Complex> out(m_);
    array_factor(element_weights, out);
    return out;
}

std::vector<Complex> expand_weights(const ClusteringVector& clustering, const ExcitationVector& weights) {
    if (weights.size() != static_cast<std::size_t>(clustering.q_count()))
        throw ArgumentError(fmt::format("expected {} sub-array weights, got {}", clustering.q_count(), weights.size()));
    std::vector<Complex> out(clustering.size());
    for (std::size_t n = 0; n < out.size(); ++n) out[n] = weights[static_cast<std::size_t>(clustering[n])];
    return out;
}

PowerPattern power_of(const AngularGrid& grid, std::span<const Complex> array_factor) {
    PowerPattern p{grid, std::vector<double>(array_factor.size())};
    for (std::size_t m = 0; m < array_factor.size(); ++m) p.values[m] = std::norm(array_factor[m]);
    return p;
}

PowerPattern fpa_power_pattern(const ArrayGeometry& geometry, const ExcitationVector& excitations,
                               const AngularGrid& grid) {
    if (excitations.size() != geometry.size())
        throw ArgumentError(fmt::format("expected {} excitations, got {}", geometry.size(), excitations.size()));
    const SteeringTable table(geometry, grid);
    return power_of(grid, table.array_factor(excitations.values()));
}

PowerPattern cpa_power_pattern(const ArrayGeometry& geometry, const ClusteringVector& clustering,
                               const ExcitationVector& weights, const AngularGrid& grid) {
    if (clustering.size() != geometry.size())
        throw ArgumentError(fmt::format("clustering covers {} elements, array has {}", clustering.size(), geometry.size()));
    const auto element_weights = expand_weights(clustering, weights);
    const SteeringTable table(geometry, grid);
    return power_of(grid, table.array_factor(element_weights));
}

double trapezoid(std::span<const double> y, double step) {
    if (y.size() < 2) return 0.0;
    double s = 0.5 * (y.front() + y.back());
    for (std::size_t i = 1; i + 1 < y.size(); ++i) s += y[i];
    return s * step;
}

double pm_metric(const PowerPattern& reference, const PowerPattern& trial) {
    if (!(reference.grid == trial.grid) || reference.values.size() != trial.values.size() ||
        reference.values.size() != reference.grid.size())
        throw ArgumentError("patterns are sampled on different grids");
    std::vector<double> diff(reference.values.size());
    for (std::size_t m = 0; m < diff.size(); ++m) diff[m] = std::abs(reference.values[m] - trial.values[m]);
    const double h = reference.grid.step();
    const double energy = trapezoid(reference.values, h);
    if (!(energy > 0.0)) throw ArgumentError("reference pattern has zero energy");
    return trapezoid(diff, h) / energy;
}

namespace {

bool is_local_min(std::span<const double> p, std::size_t i) {
    const bool left = i == 0 || p[i] <= p[i - 1];
    const bool right = i + 1 == p.size() || p[i] <= p[i + 1];
    return left && right;
}

// Walks away from the peak; the first local minimum deep enough is the null,
// otherwise the first local minimum of any depth, otherwise the grid edge.
std::size_t find_null(std::span<const double> p, std::size_t peak, int dir, double floor) {
    std::optional<std::size_t> shallow;
    std::ptrdiff_t i = static_cast<std::ptrdiff_t>(peak) + dir;
    const auto last = static_cast<std::ptrdiff_t>(p.size()) - 1;
    for (; i >= 0 && i <= last; i += dir) {
        const auto k = static_cast<std::size_t>(i);
        if (!is_local_min(p, k)) continue;
        if (p[k] <= floor) return k;
        if (!shallow) shallow = k;
    }
    if (shallow) return *shallow;
    return dir < 0 ? 0 : p.size() - 1;
}

double deg(double u) { return std::asin(std::clamp(u, -1.0, 1.0)) * 180.0 / kPi; }

}  // namespace

PatternMetrics pattern_metrics(const PowerPattern& pattern, const MetricOptions& options) {
    const std::span<const double> p = pattern.values;
    if (p.size() != pattern.grid.size() || p.empty()) throw ArgumentError("pattern is empty or inconsistent with its grid");
    const auto& grid = pattern.grid;

    PatternMetrics out;
    if (options.mainlobe_window) {
        const auto [lo, hi] = *options.mainlobe_window;
        out.null_left = grid.nearest(lo);
        out.null_right = grid.nearest(hi);
        out.peak_index = out.null_left;
        for (std::size_t i = out.null_left; i <= out.null_right; ++i) {
            if (p[i] > p[out.peak_index]) out.peak_index = i;
        }
    } else {
        if (options.mainlobe_hint) {
            std::size_t i = grid.nearest(*options.mainlobe_hint);
            for (;;) {
                if (i > 0 && p[i - 1] > p[i]) --i;
                else if (i + 1 < p.size() && p[i + 1] > p[i]) ++i;
                else break;
            }
            out.peak_index = i;
        } else {
            out.peak_index = static_cast<std::size_t>(std::max_element(p.begin(), p.end()) - p.begin());
        }
        const double floor = p[out.peak_index] * std::pow(10.0, options.null_depth_db / 10.0);
        out.null_left = find_null(p, out.peak_index, -1, floor);
        out.null_right = find_null(p, out.peak_index, +1, floor);
    }
    const double peak = p[out.peak_index];
    if (!(peak > 0.0)) throw ArgumentError("pattern has no positive maximum");
    out.peak_u = grid.node(out.peak_index);

    double side = 0.0;
    bool any = false;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (i >= out.null_left && i <= out.null_right) continue;
        any = true;
        side = std::max(side, p[i]);
    }
    if (any && side > 0.0) out.sll_db = 10.0 * std::log10(side / peak);
    out.fnbw_deg = deg(grid.node(out.null_right)) - deg(grid.node(out.null_left));

    if (options.ripple_window) {
        double lo = std::numeric_limits<double>::infinity();
        double hi = 0.0;
        for (std::size_t i = 0; i < p.size(); ++i) {
            if (!options.ripple_window->contains(grid.node(i))) continue;
            lo = std::min(lo, p[i]);
            hi = std::max(hi, p[i]);
        }
        if (hi > 0.0) out.ripple_db = 10.0 * std::log10(hi / lo);
    }
    return out;
}

double matching_improvement(double gamma_emm, double gamma_pmm) {
    if (!(gamma_emm > 0.0)) throw ArgumentError("EMM gamma must be positive");
    return (gamma_emm - gamma_pmm) / gamma_emm * 100.0;
}

void write_pattern_csv(std::ostream& os, const PowerPattern& pattern) {
    const double peak = pattern.max();
    os << "u,p_linear,p_db\n";
    for (std::size_t m = 0; m < pattern.values.size(); ++m) {
        const double v = pattern.values[m];
        const double db = (peak > 0.0 && v > 0.0) ? 10.0 * std::log10(v / peak) : -std::numeric_limits<double>::infinity();
        os << fmt::format("{:.17g},{:.17g},{:.17g}\n", pattern.grid.node(m), v, db);
    }
}

}  // namespace cpa
