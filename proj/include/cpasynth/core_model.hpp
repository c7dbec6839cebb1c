#pragma once

// Linear array geometry, FPA/CPA power patterns, the power-matching metric
// and scalar pattern figures (SLL, FNBW, ripple).

#include <complex>
#include <cstddef>
#include <initializer_list>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

namespace cpa {

using Complex = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;

/// N isotropic elements on a line, spacing given in wavelengths.
class ArrayGeometry {
public:
    explicit ArrayGeometry(std::size_t n_elements, double spacing = 0.5);

    std::size_t size() const noexcept { return n_; }
    double spacing() const noexcept { return d_; }

    /// k d n u for the 0-based element index n (k d = 2 pi d).
    double phase(std::size_t n, double u) const noexcept {
        return 2.0 * kPi * d_ * static_cast<double>(n) * u;
    }
    Complex steering(std::size_t n, double u) const { return std::polar(1.0, phase(n, u)); }

private:
    std::size_t n_;
    double d_;
};

/// Complex excitations: N element weights for an FPA or Q sub-array weights.
class ExcitationVector {
public:
    ExcitationVector() = default;
    explicit ExcitationVector(std::vector<Complex> weights);
    ExcitationVector(std::initializer_list<Complex> weights)
        : ExcitationVector(std::vector<Complex>(weights)) {}

    std::size_t size() const noexcept { return w_.size(); }
    bool empty() const noexcept { return w_.empty(); }
    const Complex& operator[](std::size_t i) const { return w_[i]; }
    Complex& operator[](std::size_t i) { return w_[i]; }
    auto begin() const noexcept { return w_.begin(); }
    auto end() const noexcept { return w_.end(); }
    std::span<const Complex> values() const noexcept { return w_; }
    const std::vector<Complex>& vector() const noexcept { return w_; }

    bool all_zero() const noexcept;

    friend bool operator==(const ExcitationVector&, const ExcitationVector&) = default;

private:
    std::vector<Complex> w_;
};

/// Element -> cluster map. Labels are 0-based internally; every one of the Q
/// labels occurs at least once.
class ClusteringVector {
public:
    ClusteringVector() = default;
    ClusteringVector(std::vector<int> labels, int q_count);

    static ClusteringVector from_one_based(std::span<const int> labels, int q_count);
    /// Q = N, element n alone in cluster n.
    static ClusteringVector identity(std::size_t n);

    std::size_t size() const noexcept { return labels_.size(); }
    int q_count() const noexcept { return q_; }
    int operator[](std::size_t n) const { return labels_[n]; }
    const std::vector<int>& labels() const noexcept { return labels_; }
    std::vector<int> one_based() const;
    std::vector<std::size_t> cluster_sizes() const;

    /// Relabelled so clusters are numbered in order of their first element.
    ClusteringVector canonical() const;

    friend bool operator==(const ClusteringVector&, const ClusteringVector&) = default;
    friend auto operator<=>(const ClusteringVector& a, const ClusteringVector& b) {
        return a.labels_ <=> b.labels_;
    }

private:
    std::vector<int> labels_;
    int q_ = 0;
};

/// Uniform sampling of u in [-1, 1]; u_m = -1 + 2 m / (M - 1), m 0-based.
class AngularGrid {
public:
    explicit AngularGrid(std::size_t m_samples);

    std::size_t size() const noexcept { return m_; }
    double node(std::size_t m) const noexcept {
        return m + 1 == m_ ? 1.0 : -1.0 + 2.0 * static_cast<double>(m) / static_cast<double>(m_ - 1);
    }
    double step() const noexcept { return 2.0 / static_cast<double>(m_ - 1); }
    std::vector<double> nodes() const;
    /// Index of the node closest to u.
    std::size_t nearest(double u) const noexcept;

    friend bool operator==(const AngularGrid&, const AngularGrid&) = default;

private:
    std::size_t m_;
};

struct PowerPattern {
    AngularGrid grid;
    std::vector<double> values;

    double max() const;
};

/// Precomputed e^{j k d n u_m}, row-major N x M.
class SteeringTable {
public:
    SteeringTable(const ArrayGeometry& geometry, const AngularGrid& grid);

    std::size_t elements() const noexcept { return n_; }
    std::size_t samples() const noexcept { return m_; }
    std::span<const Complex> row(std::size_t n) const { return {data_.data() + n * m_, m_}; }

    /// AF(u_m) = sum_n w_n e^{j k d n u_m}.
    std::vector<Complex> array_factor(std::span<const Complex> element_weights) const;
    void array_factor(std::span<const Complex> element_weights, std::span<Complex> out) const;

private:
    std::size_t n_;
    std::size_t m_;
    std::vector<Complex> data_;
};

/// Expands Q sub-array weights to the N per-element weights they drive.
std::vector<Complex> expand_weights(const ClusteringVector& clustering, const ExcitationVector& weights);

PowerPattern fpa_power_pattern(const ArrayGeometry& geometry, const ExcitationVector& excitations,
                               const AngularGrid& grid);

PowerPattern cpa_power_pattern(const ArrayGeometry& geometry, const ClusteringVector& clustering,
                               const ExcitationVector& weights, const AngularGrid& grid);

PowerPattern power_of(const AngularGrid& grid, std::span<const Complex> array_factor);

/// Composite trapezoid with uniform step.
double trapezoid(std::span<const double> y, double step);

/// Normalised L1 mismatch: int |P_ref - P| du / int P_ref du.
double pm_metric(const PowerPattern& reference, const PowerPattern& trial);

struct UWindow {
    double lo;
    double hi;
    bool contains(double u) const noexcept { return u >= lo && u <= hi; }
};

struct MetricOptions {
    /// Treat the lobe containing this u as the main lobe instead of the global peak.
    std::optional<double> mainlobe_hint;
    /// Explicit main-lobe region; skips null detection.
    std::optional<UWindow> mainlobe_window;
    /// Region over which ripple_db is measured.
    std::optional<UWindow> ripple_window;
    /// A local minimum at least this far below the peak counts as a null.
    double null_depth_db = -30.0;
};

struct PatternMetrics {
    std::size_t peak_index = 0;
    double peak_u = 0.0;
    std::size_t null_left = 0;
    std::size_t null_right = 0;
    /// Empty when nothing lies outside the main lobe.
    std::optional<double> sll_db;
    double fnbw_deg = 0.0;
    std::optional<double> ripple_db;

    bool has_sidelobe() const noexcept { return sll_db.has_value(); }
};

PatternMetrics pattern_metrics(const PowerPattern& pattern, const MetricOptions& options = {});

/// (gamma_emm - gamma_pmm) / gamma_emm * 100.
double matching_improvement(double gamma_emm, double gamma_pmm);

/// CSV `u,p_linear,p_db`, p_db relative to the pattern maximum.
void write_pattern_csv(std::ostream& os, const PowerPattern& pattern);

}  // namespace cpa
