#pragma once

// On-shell scattering matrices of a star graph with a constant potential on
// each line. Natural units with hbar^2/2m = 1, so k_j = sqrt(E - V_j).

#include "qstar/numerics.hpp"
#include "qstar/vertex.hpp"

#include <cstddef>
#include <vector>

namespace qstar {

struct LineEnvironment {
    std::vector<double> potentials;

    [[nodiscard]] std::size_t lines() const noexcept { return potentials.size(); }
    static LineEnvironment zero(std::size_t n) { return {std::vector<double>(n, 0.0)}; }
};

struct ChannelData {
    double energy = 0.0;
    std::vector<Complex> k;
    std::vector<bool> open_mask;
};

/// Wavenumbers on the principal branch; closed channels get k = +i sqrt(V - E).
ChannelData channel_data(const LineEnvironment& env, double energy);

struct ScatteringMatrix {
    ComplexMatrix s;
    ChannelData channels;
};

/// S = -(A D^-1 + i B D)^-1 (A D^-1 - i B D), D = diag(sqrt k_j).
/// Throws ThresholdEnergy within 1e-12 of any V_j.
ScatteringMatrix smatrix_general(const GeneralBC& bc, const LineEnvironment& env, double energy);

/// Closed form for a scale-invariant coupling. Thresholds E = V_j are allowed,
/// the corresponding fourth root is simply zero. E = 0 is rejected.
ScatteringMatrix smatrix_ft(const FTCoupling& ft, const LineEnvironment& env, double energy);

/// Dispatches FT couplings to smatrix_ft and everything else to smatrix_general.
ScatteringMatrix smatrix(const Coupling& coupling, const LineEnvironment& env, double energy);

/// |S[to, from]|^2, or 0 when `to` is closed. Throws ClosedInputChannel if
/// `from` is closed. Indices are zero-based.
double transmission_probability(const ScatteringMatrix& sm, std::size_t from, std::size_t to);

enum class PoleFamily { BandPass3, DualBand4, MultiBand2r };

struct PoleSpec {
    PoleFamily family = PoleFamily::BandPass3;
    double a = 1.0;
    double b = 0.0;        ///< only used by BandPass3
    double control = 1.0;  ///< U (or U_j)
};

/// Analytic position of the resonance pole on the positive real axis.
double pole_energy(const PoleSpec& spec);

}  // namespace qstar
