#include "cpasynth/refgen.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "cpasynth/errors.hpp"

namespace cpa {

namespace {

constexpr double kDeg = kPi / 180.0;

void normalize_peak(std::vector<double>& a) {
    const double peak = *std::max_element(a.begin(), a.end(), [](double x, double y) { return std::abs(x) < std::abs(y); });
    for (auto& v : a) v /= std::abs(peak);
}

ExcitationVector from_real(const std::vector<double>& a) {
    std::vector<Complex> w(a.begin(), a.end());
    return ExcitationVector(std::move(w));
}

}  // namespace

ExcitationVector steer(const ExcitationVector& amplitudes, double u0, double spacing) {
    const ArrayGeometry geometry(amplitudes.size(), spacing);
    std::vector<Complex> w(amplitudes.size());
    for (std::size_t n = 0; n < w.size(); ++n) w[n] = amplitudes[n] * std::polar(1.0, -geometry.phase(n, u0));
    return ExcitationVector(std::move(w));
}

// Samples T_{N-1}(x0 cos(pi k / N)) and inverts with a length-N DFT; the odd/even
// split reproduces the symmetric taper centred on the array.
ExcitationVector dolph_chebyshev(std::size_t n, double sll_db, double theta0_deg, double spacing) {
    if (n < 3) throw ArgumentError("Dolph-Chebyshev taper needs at least 3 elements");
    if (!(sll_db < 0.0)) throw ArgumentError(fmt::format("sidelobe level must be negative dB, got {}", sll_db));
    const double order = static_cast<double>(n - 1);
    const double ratio = std::pow(10.0, -sll_db / 20.0);
    const double x0 = std::cosh(std::acosh(ratio) / order);
    const auto nn = static_cast<double>(n);

    std::vector<double> p(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double x = x0 * std::cos(kPi * static_cast<double>(k) / nn);
        if (x > 1.0) p[k] = std::cosh(order * std::acosh(x));
        else if (x < -1.0) p[k] = (n % 2 == 1 ? 1.0 : -1.0) * std::cosh(order * std::acosh(-x));
        else p[k] = std::cos(order * std::acos(x));
    }

    auto dft_real = [&](std::size_t i, bool half_shift) {
        Complex s{};
        for (std::size_t k = 0; k < n; ++k) {
            const double kk = static_cast<double>(k);
            const double shift = half_shift ? kPi * kk / nn : 0.0;
            s += p[k] * std::polar(1.0, shift - 2.0 * kPi * kk * static_cast<double>(i) / nn);
        }
        return s.real();
    };

    std::vector<double> a(n);
    if (n % 2 == 1) {
        const std::size_t half = (n + 1) / 2;
        for (std::size_t i = 0; i < half; ++i) {
            const double v = dft_real(i, false);
            a[half - 1 + i] = v;
            a[half - 1 - i] = v;
        }
    } else {
        const std::size_t half = n / 2;
        for (std::size_t i = 1; i <= half; ++i) {
            const double v = dft_real(i, true);
            a[half - 1 + i] = v;
            a[half - i] = v;
        }
    }
    normalize_peak(a);
    return steer(from_real(a), std::sin(theta0_deg * kDeg), spacing);
}

ExcitationVector taylor_nbar(std::size_t n, double sll_db, int nbar, double theta0_deg, double spacing) {
    if (n < 1) throw ArgumentError("Taylor taper needs at least 1 element");
    if (nbar < 1) throw ArgumentError(fmt::format("nbar must be at least 1, got {}", nbar));
    if (!(sll_db < 0.0)) throw ArgumentError(fmt::format("sidelobe level must be negative dB, got {}", sll_db));
    const double ratio = std::pow(10.0, -sll_db / 20.0);
    const double a = std::acosh(ratio) / kPi;
    const double nb = static_cast<double>(nbar);
    const double sigma2 = nb * nb / (a * a + (nb - 0.5) * (nb - 0.5));

    std::vector<double> coeff(static_cast<std::size_t>(nbar - 1));
    for (int m = 1; m < nbar; ++m) {
        const double m2 = static_cast<double>(m) * m;
        double num = (m % 2 == 1) ? 1.0 : -1.0;
        double den = 2.0;
        for (int i = 1; i < nbar; ++i) {
            const double di = static_cast<double>(i);
            num *= 1.0 - m2 / (sigma2 * (a * a + (di - 0.5) * (di - 0.5)));
            if (i != m) den *= 1.0 - m2 / (di * di);
        }
        coeff[static_cast<std::size_t>(m - 1)] = num / den;
    }

    const auto nn = static_cast<double>(n);
    std::vector<double> w(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double x = (static_cast<double>(i) - nn / 2.0 + 0.5) / nn;
        double v = 1.0;
        for (std::size_t m = 0; m < coeff.size(); ++m) v += 2.0 * coeff[m] * std::cos(2.0 * kPi * static_cast<double>(m + 1) * x);
        w[i] = v;
    }
    normalize_peak(w);
    return steer(from_real(w), std::sin(theta0_deg * kDeg), spacing);
}

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

bool parse_double(const std::string& s, double& out) {
    if (s.empty()) return false;
    try {
        std::size_t used = 0;
        out = std::stod(s, &used);
        return used == s.size() && std::isfinite(out);
    } catch (const std::exception&) {
        return false;
    }
}

// Iterates data rows of a numeric CSV, skipping blanks, '#' comments and a
// non-numeric first row (header). Yields (line number, numeric cells).
template <typename Fn>
void for_each_numeric_row(std::istream& is, std::size_t columns, const char* what, Fn&& fn) {
    std::string line;
    std::size_t lineno = 0;
    bool first = true;
    while (std::getline(is, line)) {
        ++lineno;
        const auto t = trim(line);
        if (t.empty() || t.front() == '#') continue;
        const auto cells = split_csv(t);
        std::vector<double> values(cells.size());
        bool numeric = cells.size() == columns;
        for (std::size_t i = 0; numeric && i < cells.size(); ++i) numeric = parse_double(cells[i], values[i]);
        if (!numeric) {
            const bool header = first && std::none_of(cells.begin(), cells.end(), [](const std::string& c) {
                double v;
                return parse_double(c, v);
            });
            first = false;
            if (header) continue;
            throw ParseError(fmt::format("{}: malformed row {} (expected {} numeric columns): '{}'", what, lineno,
                                         columns, t),
                             lineno);
        }
        first = false;
        fn(lineno, values);
    }
}

}  // namespace

ExcitationVector parse_reference_csv(std::istream& is) {
    std::vector<Complex> w;
    for_each_numeric_row(is, 3, "reference", [&](std::size_t lineno, const std::vector<double>& v) {
        const double idx = v[0];
        if (idx != static_cast<double>(w.size() + 1))
            throw ParseError(fmt::format("reference: row {} has element index {}, expected {}", lineno, idx, w.size() + 1),
                             lineno);
        if (v[1] < 0.0) throw ParseError(fmt::format("reference: row {} has negative amplitude", lineno), lineno);
        w.push_back(std::polar(v[1], v[2] * kDeg));
    });
    if (w.empty()) throw ParseError("reference: no excitation rows");
    return ExcitationVector(std::move(w));
}

ExcitationVector parse_reference_json(std::istream& is) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(is);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(fmt::format("reference: invalid JSON: {}", e.what()));
    }
    const auto& rows = doc.is_array() ? doc : doc.value("excitations", nlohmann::json::array());
    std::vector<Complex> w;
    for (const auto& row : rows) {
        const std::size_t k = w.size() + 1;
        if (!row.is_object() || !row.contains("amp") || !row.contains("phase_deg") || !row["amp"].is_number() ||
            !row["phase_deg"].is_number())
            throw ParseError(fmt::format("reference: excitation entry {} needs numeric 'amp' and 'phase_deg'", k), k);
        if (row.contains("n") && row["n"] != k)
            throw ParseError(fmt::format("reference: excitation entry {} has n = {}", k, row["n"].dump()), k);
        w.push_back(std::polar(row["amp"].get<double>(), row["phase_deg"].get<double>() * kDeg));
    }
    if (w.empty()) throw ParseError("reference: no excitations in JSON document");
    return ExcitationVector(std::move(w));
}

ExcitationVector load_reference(const std::filesystem::path& path, std::optional<std::size_t> expected_n) {
    std::ifstream in(path);
    if (!in) throw ParseError(fmt::format("cannot open reference file '{}'", path.string()));
    auto w = path.extension() == ".json" ? parse_reference_json(in) : parse_reference_csv(in);
    if (expected_n && w.size() != *expected_n)
        throw ArgumentError(
            fmt::format("reference file '{}' has {} excitations, configuration expects {}", path.string(), w.size(), *expected_n));
    return w;
}

void write_reference_csv(std::ostream& os, const ExcitationVector& excitations) {
    os << "n,amp,phase_deg\n";
    for (std::size_t n = 0; n < excitations.size(); ++n)
        os << fmt::format("{},{:.17g},{:.17g}\n", n + 1, std::abs(excitations[n]), std::arg(excitations[n]) / kDeg);
}

void save_reference(const std::filesystem::path& path, const ExcitationVector& excitations) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error(fmt::format("cannot write '{}'", path.string()));
    write_reference_csv(out, excitations);
}

PatternMask parse_mask_csv(std::istream& is) {
    PatternMask mask;
    for_each_numeric_row(is, 4, "mask", [&](std::size_t lineno, const std::vector<double>& v) {
        if (!(v[0] <= v[1])) throw ParseError(fmt::format("mask: row {} has u_start > u_end", lineno), lineno);
        if (!(v[3] <= v[2])) throw ParseError(fmt::format("mask: row {} has lower bound above upper bound", lineno), lineno);
        mask.push_back({v[0], v[1], v[2], v[3]});
    });
    return mask;
}

PatternMask load_mask(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(fmt::format("cannot open mask file '{}'", path.string()));
    return parse_mask_csv(in);
}

MaskReport check_mask(const PowerPattern& pattern, const PatternMask& mask, double slack_db) {
    const double peak = pattern.max();
    if (!(peak > 0.0)) throw ArgumentError("pattern has no positive maximum");
    MaskReport report;
    for (std::size_t m = 0; m < pattern.values.size(); ++m) {
        const double u = pattern.grid.node(m);
        const double db = pattern.values[m] > 0.0 ? 10.0 * std::log10(pattern.values[m] / peak)
                                                  : -std::numeric_limits<double>::infinity();
        for (const auto& seg : mask) {
            if (u < seg.u_start || u > seg.u_end) continue;
            const double over = db - seg.upper_db;
            const double under = seg.lower_db - db;
            const double excess = std::max(over, under);
            if (excess > slack_db) {
                ++report.violations;
                report.worst_db = std::max(report.worst_db, std::isfinite(excess) ? excess : 1e300);
            }
        }
    }
    return report;
}

}  // namespace cpa
