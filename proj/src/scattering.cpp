#include "qstar/scattering.hpp"

#include "qstar/errors.hpp"

#include <cmath>
#include <string>

namespace qstar {

namespace {

constexpr double threshold_tolerance = 1e-12;

void check_environment(const LineEnvironment& env, std::size_t n, double energy) {
    if (env.lines() != n) {
        throw DimensionMismatch("line environment has " + std::to_string(env.lines()) +
                                " potentials, coupling has " + std::to_string(n) + " lines");
    }
    for (double v : env.potentials) {
        if (!std::isfinite(v)) {
            throw InvalidArgument("line potentials must be finite");
        }
    }
    if (!std::isfinite(energy)) {
        throw InvalidArgument("energy must be finite");
    }
}

}  // namespace

ChannelData channel_data(const LineEnvironment& env, double energy) {
    ChannelData ch;
    ch.energy = energy;
    ch.k.reserve(env.lines());
    ch.open_mask.reserve(env.lines());
    for (double v : env.potentials) {
        const double diff = energy - v;
        ch.k.push_back(diff >= 0.0 ? Complex{std::sqrt(diff), 0.0}
                                   : Complex{0.0, std::sqrt(-diff)});
        ch.open_mask.push_back(energy > v);
    }
    return ch;
}

ScatteringMatrix smatrix_general(const GeneralBC& bc, const LineEnvironment& env, double energy) {
    const std::size_t n = bc.lines();
    if (!bc.a.is_square() || !bc.b.is_square() || bc.b.rows() != n) {
        throw DimensionMismatch("boundary condition matrices must be square and equal in size");
    }
    check_environment(env, n, energy);
    for (std::size_t j = 0; j < n; ++j) {
        if (std::abs(energy - env.potentials[j]) < threshold_tolerance) {
            throw ThresholdEnergy(energy, j);
        }
    }
    ScatteringMatrix sm;
    sm.channels = channel_data(env, energy);

    // Column scaling: (A D^-1)_{ij} = A_ij / d_j, (B D)_{ij} = B_ij d_j.
    const Complex i{0.0, 1.0};
    ComplexMatrix lhs(n, n);
    ComplexMatrix rhs(n, n);
    for (std::size_t col = 0; col < n; ++col) {
        const Complex d = std::sqrt(sm.channels.k[col]);
        for (std::size_t row = 0; row < n; ++row) {
            const Complex ad = bc.a(row, col) / d;
            const Complex bd = i * bc.b(row, col) * d;
            lhs(row, col) = ad + bd;
            rhs(row, col) = ad - bd;
        }
    }
    try {
        sm.s = -solve_linear(lhs, rhs);
    } catch (const SingularMatrix&) {
        throw SingularMatrix("scattering matrix undefined at energy " + format_number(energy) +
                             ": A D^-1 + i B D is singular");
    }
    return sm;
}

ScatteringMatrix smatrix_ft(const FTCoupling& ft, const LineEnvironment& env, double energy) {
    const std::size_t r = ft.r();
    const std::size_t n = ft.lines();
    check_environment(env, n, energy);
    if (energy == 0.0) {
        throw InvalidArgument("closed-form scattering matrix needs a nonzero energy");
    }
    ScatteringMatrix sm;
    sm.channels = channel_data(env, energy);

    std::vector<Complex> q(n);
    for (std::size_t j = 0; j < n; ++j) {
        q[j] = std::sqrt(std::sqrt(Complex{1.0 - env.potentials[j] / energy, 0.0}));
    }
    const ComplexMatrix& t = ft.t;
    const std::size_t m = n - r;

    // right = [Q1, T Q2] (r×n), left = [Q1; Q2 T†] (n×r).
    ComplexMatrix right(r, n);
    ComplexMatrix left(n, r);
    for (std::size_t a = 0; a < r; ++a) {
        right(a, a) = q[a];
        left(a, a) = q[a];
        for (std::size_t c = 0; c < m; ++c) {
            right(a, r + c) = t(a, c) * q[r + c];
            left(r + c, a) = q[r + c] * std::conj(t(a, c));
        }
    }
    // M = Q1^2 + T Q2^2 T†
    ComplexMatrix mid(r, r);
    for (std::size_t a = 0; a < r; ++a) {
        mid(a, a) += q[a] * q[a];
        for (std::size_t b = 0; b < r; ++b) {
            Complex acc{};
            for (std::size_t c = 0; c < m; ++c) {
                acc += t(a, c) * q[r + c] * q[r + c] * std::conj(t(b, c));
            }
            mid(a, b) += acc;
        }
    }
    ComplexMatrix x;
    try {
        x = solve_linear(mid, right);
    } catch (const SingularMatrix&) {
        throw SingularMatrix("scattering matrix undefined at energy " + format_number(energy) +
                             ": Q1^2 + T Q2^2 T† is singular");
    }
    sm.s = left * x;
    sm.s *= 2.0;
    sm.s -= ComplexMatrix::identity(n);
    return sm;
}

ScatteringMatrix smatrix(const Coupling& coupling, const LineEnvironment& env, double energy) {
    if (const auto* ft = std::get_if<FTCoupling>(&coupling)) {
        return smatrix_ft(*ft, env, energy);
    }
    return smatrix_general(to_general(coupling), env, energy);
}

double transmission_probability(const ScatteringMatrix& sm, std::size_t from, std::size_t to) {
    const std::size_t n = sm.s.rows();
    if (from >= n || to >= n) {
        throw InvalidArgument("line index out of range");
    }
    if (!sm.channels.open_mask[from]) {
        throw ClosedInputChannel("line " + std::to_string(from + 1) + " is closed at energy " +
                                 format_number(sm.channels.energy));
    }
    if (!sm.channels.open_mask[to]) {
        return 0.0;
    }
    return std::norm(sm.s(to, from));
}

double pole_energy(const PoleSpec& spec) {
    const double a2 = spec.a * spec.a;
    const double a4 = a2 * a2;
    double num = 0.0;
    double den = 0.0;
    switch (spec.family) {
        case PoleFamily::BandPass3: {
            const double b4 = std::pow(spec.b, 4);
            num = b4;
            den = b4 - (1.0 + a2) * (1.0 + a2);
            break;
        }
        case PoleFamily::DualBand4:
            num = 4.0 * a4;
            den = 4.0 * a4 - 1.0;
            break;
        case PoleFamily::MultiBand2r:
            num = a4;
            den = a4 - 1.0;
            break;
    }
    if (!(den > 0.0)) {
        throw DegenerateParameters("pole formula denominator " + format_number(den) +
                                   " is not positive");
    }
    return num / den * spec.control;
}

}  // namespace qstar
