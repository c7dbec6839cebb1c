#pragma once

// Reference FPA excitations: Dolph-Chebyshev and Taylor tapers with
// progressive-phase steering, plus file loaders for externally synthesised
// references (shaped beams) and their acceptance masks.

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <vector>

#include "cpasynth/core_model.hpp"

namespace cpa {

/// Real Chebyshev amplitudes (unit peak) with equal sidelobes at `sll_db` (< 0),
/// steered to theta0 by e^{-j k d n sin(theta0)}.
ExcitationVector dolph_chebyshev(std::size_t n, double sll_db, double theta0_deg, double spacing = 0.5);

/// Taylor n-bar line-source taper sampled at the element positions, unit peak, steered.
ExcitationVector taylor_nbar(std::size_t n, double sll_db, int nbar, double theta0_deg, double spacing = 0.5);

/// Multiplies every excitation by e^{-j k d n u0}.
ExcitationVector steer(const ExcitationVector& amplitudes, double u0, double spacing = 0.5);

/// Reads `n,amp,phase_deg` CSV (optional header) or JSON
/// `{"excitations": [{"n": 1, "amp": 1.0, "phase_deg": 0.0}, ...]}`.
/// The format is chosen by the `.json` extension.
ExcitationVector load_reference(const std::filesystem::path& path, std::optional<std::size_t> expected_n = {});
ExcitationVector parse_reference_csv(std::istream& is);
ExcitationVector parse_reference_json(std::istream& is);

void save_reference(const std::filesystem::path& path, const ExcitationVector& excitations);
void write_reference_csv(std::ostream& os, const ExcitationVector& excitations);

/// One piece of a piecewise-constant pattern mask, bounds in dB relative to the peak.
struct MaskSegment {
    double u_start;
    double u_end;
    double upper_db;
    double lower_db;
};

using PatternMask = std::vector<MaskSegment>;

/// CSV `u_start,u_end,upper_db,lower_db` (optional header).
PatternMask load_mask(const std::filesystem::path& path);
PatternMask parse_mask_csv(std::istream& is);

struct MaskReport {
    std::size_t violations = 0;
    /// Largest excursion outside a bound, dB; 0 when the mask is met.
    double worst_db = 0.0;

    bool ok() const noexcept { return violations == 0; }
};

MaskReport check_mask(const PowerPattern& pattern, const PatternMask& mask, double slack_db = 0.0);

}  // namespace cpa
