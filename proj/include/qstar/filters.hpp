#pragma once

// Threshold-resonance filter devices built on scale-invariant star couplings,
// their closed-form predictors, and numerical sweeps to compare against.
//
// Line numbering is zero-based here. Line 0 is always the input and carries
// no potential.

#include "qstar/numerics.hpp"
#include "qstar/scattering.hpp"
#include "qstar/vertex.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace qstar {

enum class Family {
    DeltaHighPass,
    BandPass3,
    BandStop3,
    DualBand4,
    TunableBandPass4,
    MultiBand2r,
    Branching2r,
};

std::string_view family_name(Family family);
std::optional<Family> parse_family(std::string_view name);

enum class LineRole { Input, Output, Control, Drain, Auxiliary };

std::string_view role_name(LineRole role);

/// Family-specific parameters. Unused fields are ignored.
struct DeviceParams {
    double a = 1.0;
    double b = 0.0;
    double c = 0.0;
    double d = 0.0;
    double alpha = 0.0;  ///< DeltaHighPass strength
    std::size_t r = 0;   ///< MultiBand2r / Branching2r
    ComplexMatrix g;     ///< MultiBand2r; empty means the normalized Sylvester Hadamard
};

/// Controls per family:
///   DeltaHighPass      none
///   BandPass3          {U}               on line 2
///   BandStop3          {U}               on line 2
///   DualBand4          {U, V}            on lines 2, 3
///   TunableBandPass4   {U, V}            on lines 2, 3
///   MultiBand2r        {U_1, ..., U_r}   on lines r..2r-1
///   Branching2r        {U_1, ..., U_r}   on lines r..2r-1; U_1 sits on the drain
struct FilterDevice {
    Family family = Family::BandPass3;
    DeviceParams params;
    std::vector<LineRole> roles;
    std::vector<double> controls;
    Coupling coupling;
    LineEnvironment env;
    std::vector<std::string> warnings;

    [[nodiscard]] std::size_t lines() const noexcept { return roles.size(); }
    [[nodiscard]] std::vector<std::size_t> output_lines() const;
    /// Line 1 for every family.
    [[nodiscard]] std::size_t primary_output() const { return 1; }
};

/// Throws BadShape for a non-unitary G, wrong r or wrong number of controls,
/// InvalidArgument for non-finite parameters.
FilterDevice make_device(Family family, DeviceParams params, std::vector<double> controls);

/// Same device with a different set of control potentials.
FilterDevice with_controls(const FilterDevice& device, std::vector<double> controls);

/// Column labels for sweeps: P_refl, P_out (or P_out{j}), P_ctrl{j}, P_aux{j},
/// P_drain. {j} is the one-based line number.
std::vector<std::string> column_labels(const FilterDevice& device);

/// Probabilities of leaving through every line for a particle entering on line 0.
std::vector<double> line_probabilities(const FilterDevice& device, double energy);

/// Probability of transmission from the input to `line`.
double output_probability(const FilterDevice& device, double energy, std::size_t line);

struct PredictedPeak {
    double position = 0.0;
    double height = 0.0;
    std::size_t output_line = 1;
    std::string kind;  ///< "principal", "secondary", "drain", "notch"
    std::optional<double> limit_height;  ///< a -> infinity value, where it differs
};

struct PredictionReport {
    std::vector<PredictedPeak> peaks;
    std::vector<double> bandwidths;
    std::vector<double> poles;
    double asymptote_at_infinity = 0.0;
    std::vector<std::string> warnings;

    [[nodiscard]] std::vector<double> peak_positions() const;
    [[nodiscard]] std::vector<double> peak_heights() const;
};

PredictionReport predict(const FilterDevice& device);

struct SweepRow {
    double energy = 0.0;
    /// Where the S-matrix was actually evaluated; differs from `energy` after a threshold nudge.
    double evaluated_at = 0.0;
    bool ok = true;
    std::string message;
    std::vector<double> probabilities;
};

struct SweepTable {
    std::vector<std::string> labels;
    std::vector<SweepRow> rows;
};

/// Evaluates every grid point; a point that fails is flagged rather than
/// aborting the sweep. Points on a threshold are moved by 1e-9. Row order
/// follows the grid regardless of `threads` (0 = one per core).
SweepTable sweep(const FilterDevice& device, std::span<const double> grid, unsigned threads = 1);

/// Same for a bare coupling, entering on line 0; `labels` name the columns.
SweepTable sweep(const Coupling& coupling, const LineEnvironment& env,
                 std::vector<std::string> labels, std::span<const double> grid,
                 unsigned threads = 1);

/// Separation of the two crossings of P = 1/2 around `peak`, bisected to
/// relative tolerance 1e-8. Throws NoHalfCrossing when P(peak) <= 1/2 or a
/// crossing cannot be bracketed.
double measured_bandwidth(const FilterDevice& device, double peak);
double measured_bandwidth(const FilterDevice& device, double peak, std::size_t output_line);

struct PeakLocation {
    double position = 0.0;
    double height = 0.0;
};

/// Largest P on a uniform grid of `points` over [lo, hi].
PeakLocation locate_peak(const FilterDevice& device, double lo, double hi, std::size_t points,
                         std::size_t output_line = 1);

struct ModeCheck {
    std::string name;
    double measured = 0.0;
    double predicted = 0.0;
};

/// Documented limit cases of the device family evaluated numerically, next to
/// the closed-form value they should approach.
std::vector<ModeCheck> special_mode_checks(const FilterDevice& device);

/// The eight sign patterns ±(a a; a −a), ±(a a; −a a), ±(a −a; a a), ±(−a a; a a).
std::vector<ComplexMatrix> dual_band_sign_variants(double a);

/// (a, √(1−a²); √(1−a²), −a) for a in (0,1); flat plateau a²(1−a²) below U.
ComplexMatrix flat_passband_rotation(double a);

/// (1/√2)(a, a; 1/a, −1/a) for a > 0; flat plateau 4a⁴/(a²+1)⁴ below U.
ComplexMatrix flat_passband_scaled(double a);

/// a·(bordered matrix): first row and column all ones, −1 on the rest of the diagonal.
ComplexMatrix branching_matrix(std::size_t r, double a);

/// Exact half-transmission width of the three-line band-pass device with
/// a = 1 and β = b²/2.
double bandpass_width(double beta, double u);

}  // namespace qstar
