#pragma once

// Reflection from a piecewise-constant potential on a half line, and the
// band-pass transmission it induces when placed on the control line.

#include "qstar/numerics.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace qstar {

struct Segment {
    double length = 0.0;
    double height = 0.0;
};

/// Consecutive segments starting at x = 0; zero potential after the last one.
struct PotentialProfile {
    std::vector<Segment> segments;

    /// Height u on [0, length].
    static PotentialProfile strip(double u, double length);
    /// Zero on [0, gap], height u on [gap, end].
    static PotentialProfile gapped_strip(double u, double gap, double end);

    /// Throws InvalidArgument on non-positive or non-finite lengths, or non-finite heights.
    void check() const;
};

struct ReflectionAmplitude {
    Complex r;
    double energy = 0.0;
    /// Some segment had an attenuation exponent |Im(qL)| above 700.
    bool saturated = false;
};

/// Amplitude R of the wave e^{ikx} + R e^{-ikx} that meets the profile, with a
/// purely outgoing wave past the last segment. Propagates (ψ, ψ') backwards
/// through the segments with scaled cos/sin, so deep evanescent segments do
/// not overflow. Throws ThresholdEnergy when E is within 1e-12 of a segment
/// height, InvalidArgument for E <= 0.
ReflectionAmplitude reflection(const PotentialProfile& profile, double energy);

/// R for a single strip of height u on [0, length]:
/// (1−ξ²) sin(ξkL) / ((1+ξ²) sin(ξkL) + 2iξ cos(ξkL)), ξ = sqrt(1 − u/E).
Complex strip_reflection(double u, double length, double energy);

/// |(1+R) / (1+R+β(1−R))|² for the a = 1 band-pass device, β = b²/2.
double transmission_from_reflection(Complex r, double beta);

/// Input-to-output probability of the three-line coupling T = (a b) with the
/// profile on line 3, from a direct solve of the vertex conditions.
double controlled_transmission(double a, double b, const PotentialProfile& profile, double energy);

/// Kernel weights exp(−ε²/(ε²−z²)) at z = k·step for |z| < ε, normalized to sum 1.
/// Index m of the result corresponds to z = 0.
std::vector<double> mollifier_kernel(double step, double epsilon);

/// Discrete convolution of samples on a uniform grid with the mollifier of
/// half-width ε. Near the ends the kernel is renormalized over the points in
/// range. Throws GridTooCoarse if the step exceeds ε/10, InvalidArgument for
/// a non-uniform grid or mismatched sizes.
std::vector<double> mollify(std::span<const double> energies, std::span<const double> values,
                            double epsilon);

/// Default mollifier half-width as a fraction of the peak energy scale.
inline constexpr double default_mollifier_fraction = 0.02;

struct Envelope {
    double p_min = 0.0;
    double p_max = 0.0;
};

/// Envelope of the fast oscillation above a long strip of height u:
/// 1/(1+β)² and 1/(1+(1−u/E)β)². Points with E <= u get NaN.
std::vector<Envelope> oscillation_envelope(double u, double beta, std::span<const double> energies);

}  // namespace qstar
