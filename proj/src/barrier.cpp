#include "qstar/barrier.hpp"

#include "qstar/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace qstar {

namespace {

constexpr double saturation_exponent = 700.0;

Complex principal_k(double e) {
    return e >= 0.0 ? Complex{std::sqrt(e), 0.0} : Complex{0.0, std::sqrt(-e)};
}

// cos z and sin z multiplied by e^{-|Im z|}.
void scaled_cos_sin(Complex z, Complex& c, Complex& s) {
    const double x = z.real();
    const double y = z.imag();
    const double ay = std::abs(y);
    const Complex plus = std::polar(std::exp(-y - ay), x);    // e^{iz} e^{-|y|}
    const Complex minus = std::polar(std::exp(y - ay), -x);   // e^{-iz} e^{-|y|}
    c = 0.5 * (plus + minus);
    s = (plus - minus) / Complex{0.0, 2.0};
}

}  // namespace

PotentialProfile PotentialProfile::strip(double u, double length) {
    PotentialProfile p{{Segment{length, u}}};
    p.check();
    return p;
}

PotentialProfile PotentialProfile::gapped_strip(double u, double gap, double end) {
    if (!(end > gap)) {
        throw InvalidArgument("strip end must lie beyond the gap");
    }
    PotentialProfile p;
    if (gap > 0.0) {
        p.segments.push_back({gap, 0.0});
    }
    p.segments.push_back({end - gap, u});
    p.check();
    return p;
}

void PotentialProfile::check() const {
    for (const auto& s : segments) {
        if (!(s.length > 0.0) || !std::isfinite(s.length)) {
            throw InvalidArgument("segment lengths must be positive and finite");
        }
        if (!std::isfinite(s.height)) {
            throw InvalidArgument("segment heights must be finite");
        }
    }
}

ReflectionAmplitude reflection(const PotentialProfile& profile, double energy) {
    profile.check();
    if (!(energy > 0.0)) {
        throw InvalidArgument("reflection needs a positive energy");
    }
    for (std::size_t i = 0; i < profile.segments.size(); ++i) {
        if (std::abs(energy - profile.segments[i].height) < 1e-12) {
            throw ThresholdEnergy(energy, i);
        }
    }
    ReflectionAmplitude out;
    out.energy = energy;
    const Complex ik{0.0, std::sqrt(energy)};

    // Outgoing wave e^{ikx} beyond the profile.
    Complex psi{1.0, 0.0};
    Complex dpsi = ik;
    for (auto it = profile.segments.rbegin(); it != profile.segments.rend(); ++it) {
        const Complex q = principal_k(energy - it->height);
        const Complex z = q * it->length;
        if (std::abs(z.imag()) > saturation_exponent) {
            out.saturated = true;
        }
        Complex c;
        Complex s;
        scaled_cos_sin(z, c, s);
        // Step from the right end of the segment to its left end.
        const Complex psi_left = psi * c - dpsi * s / q;
        const Complex dpsi_left = psi * q * s + dpsi * c;
        const double norm = std::abs(psi_left) + std::abs(dpsi_left);
        psi = psi_left / norm;
        dpsi = dpsi_left / norm;
    }
    out.r = (ik * psi - dpsi) / (ik * psi + dpsi);
    return out;
}

Complex strip_reflection(double u, double length, double energy) {
    const double k = std::sqrt(energy);
    const Complex xi = principal_k(1.0 - u / energy);
    // Divided through by cos: tan stays bounded for deep evanescent strips.
    const Complex t = std::tan(xi * k * length);
    const Complex i{0.0, 1.0};
    return (1.0 - xi * xi) * t / ((1.0 + xi * xi) * t + 2.0 * i * xi);
}

double transmission_from_reflection(Complex r, double beta) {
    return std::norm((1.0 + r) / (1.0 + r + beta * (1.0 - r)));
}

double controlled_transmission(double a, double b, const PotentialProfile& profile, double energy) {
    profile.check();
    if (!(energy > 0.0)) {
        throw InvalidArgument("controlled transmission needs a positive energy");
    }
    // Boundary value of the line-3 solution that is outgoing past the profile.
    Complex phi{1.0, 0.0};
    const Complex ik{0.0, std::sqrt(energy)};
    Complex dphi = ik;
    for (auto it = profile.segments.rbegin(); it != profile.segments.rend(); ++it) {
        if (std::abs(energy - it->height) < 1e-12) {
            throw ThresholdEnergy(energy, 2);
        }
        const Complex q = principal_k(energy - it->height);
        Complex c;
        Complex s;
        scaled_cos_sin(q * it->length, c, s);
        const Complex l = phi * c - dphi * s / q;
        const Complex dl = phi * q * s + dphi * c;
        const double norm = std::abs(l) + std::abs(dl);
        phi = l / norm;
        dphi = dl / norm;
    }
    // Conditions ψ1' + a ψ2' + b ψ3' = 0, ψ2 = a ψ1, ψ3 = b ψ1 with
    // ψ1 = e^{-ikx} + S11 e^{ikx}, ψ2 = S21 e^{ikx}, ψ3 = c φ(x).
    // Unknowns (S11, S21, c).
    ComplexMatrix m{
        {ik, a * ik, b * dphi},
        {-a, 1.0, 0.0},
        {-b, 0.0, phi},
    };
    ComplexMatrix rhs{{ik}, {a}, {b}};
    const ComplexMatrix x = solve_linear(m, rhs);
    return std::norm(x(1, 0));
}

std::vector<double> mollifier_kernel(double step, double epsilon) {
    if (!(step > 0.0) || !(epsilon > 0.0)) {
        throw InvalidArgument("mollifier needs positive step and epsilon");
    }
    const auto m = static_cast<std::size_t>(std::floor(epsilon / step));
    std::vector<double> w(2 * m + 1, 0.0);
    double total = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        const double z = (static_cast<double>(i) - static_cast<double>(m)) * step;
        const double gap = epsilon * epsilon - z * z;
        w[i] = gap > 0.0 ? std::exp(-epsilon * epsilon / gap) : 0.0;
        total += w[i];
    }
    for (double& x : w) {
        x /= total;
    }
    return w;
}

std::vector<double> mollify(std::span<const double> energies, std::span<const double> values,
                            double epsilon) {
    if (energies.size() != values.size()) {
        throw InvalidArgument("mollify: energies and values differ in length");
    }
    if (!(epsilon > 0.0)) {
        throw InvalidArgument("mollify: epsilon must be positive");
    }
    const std::size_t n = energies.size();
    if (n < 2) {
        return {values.begin(), values.end()};
    }
    const double step = (energies[n - 1] - energies[0]) / static_cast<double>(n - 1);
    if (!(step > 0.0)) {
        throw InvalidArgument("mollify: energies must increase");
    }
    for (std::size_t i = 1; i < n; ++i) {
        if (std::abs(energies[i] - energies[i - 1] - step) > 1e-6 * step) {
            throw InvalidArgument("mollify: grid is not uniform");
        }
    }
    if (step > epsilon / 10.0) {
        throw GridTooCoarse("grid step " + format_number(step) + " exceeds epsilon/10 = " +
                            format_number(epsilon / 10.0));
    }
    const std::vector<double> w = mollifier_kernel(step, epsilon);
    const auto m = static_cast<std::ptrdiff_t>(w.size() / 2);
    const auto size = static_cast<std::ptrdiff_t>(n);
    std::vector<double> out(n);
    for (std::ptrdiff_t i = 0; i < size; ++i) {
        double acc = 0.0;
        double mass = 0.0;
        const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(-m, -i);
        const std::ptrdiff_t hi = std::min<std::ptrdiff_t>(m, size - 1 - i);
        for (std::ptrdiff_t k = lo; k <= hi; ++k) {
            const double wk = w[static_cast<std::size_t>(k + m)];
            acc += wk * values[static_cast<std::size_t>(i + k)];
            mass += wk;
        }
        out[static_cast<std::size_t>(i)] = acc / mass;
    }
    return out;
}

std::vector<Envelope> oscillation_envelope(double u, double beta,
                                           std::span<const double> energies) {
    std::vector<Envelope> out;
    out.reserve(energies.size());
    const double nan = std::numeric_limits<double>::quiet_NaN();
    const double p_min = 1.0 / ((1.0 + beta) * (1.0 + beta));
    for (double e : energies) {
        if (!(e > u)) {
            out.push_back({nan, nan});
            continue;
        }
        const double f = 1.0 + (1.0 - u / e) * beta;
        out.push_back({p_min, 1.0 / (f * f)});
    }
    return out;
}

}  // namespace qstar
