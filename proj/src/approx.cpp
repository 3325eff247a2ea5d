#include "qstar/approx.hpp"

#include "qstar/errors.hpp"
#include "qstar/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace qstar {

namespace {

bool is_zero(Complex z, double scale) { return std::abs(z) <= 1e-12 * std::max(scale, 1.0); }

bool is_real(Complex z) { return std::abs(z.imag()) <= 1e-12 * std::abs(z); }

}  // namespace

DeltaWeb build_web(const FTCoupling& ft, double d) {
    if (!(d > 0.0) || !std::isfinite(d)) {
        throw InvalidArgument("web length parameter d must be positive");
    }
    const ComplexMatrix& t = ft.t;
    if (!t.all_finite()) {
        throw InvalidArgument("T has non-finite entries");
    }
    const std::size_t r = ft.r();
    const std::size_t n = ft.lines();
    const std::size_t m = n - r;
    const double scale = t.max_abs();
    const ComplexMatrix tt = t * t.adjoint();

    DeltaWeb web;
    web.n = n;
    web.r = r;
    web.d = d;
    web.alphas.assign(n, 0.0);

    // Endpoints on the T-row side.
    for (std::size_t i = 0; i < r; ++i) {
        double alpha = 0.0;
        for (std::size_t c = 0; c < m; ++c) {
            const Complex x = t(i, c);
            alpha += std::norm(x) - std::abs(x);
            if (!is_zero(x, scale) && is_real(x) && x.real() < 0.0) {
                alpha += 2.0 * x.real();
            }
        }
        for (std::size_t l = 0; l < r; ++l) {
            if (l == i) {
                continue;
            }
            const Complex z = tt(i, l);
            if (is_zero(z, scale * scale)) {
                continue;
            }
            alpha -= std::abs(z);
            if (is_real(z) && z.real() > 0.0) {
                alpha -= 2.0 * z.real();
            }
        }
        web.alphas[i] = alpha / d;
    }
    // Endpoints on the T-column side.
    for (std::size_t c = 0; c < m; ++c) {
        double alpha = 1.0;
        for (std::size_t k = 0; k < r; ++k) {
            const Complex x = t(k, c);
            alpha -= std::abs(x);
            if (!is_zero(x, scale) && is_real(x) && x.real() < 0.0) {
                alpha += 2.0 * x.real();
            }
        }
        web.alphas[r + c] = alpha / d;
    }

    for (std::size_t i = 0; i < r; ++i) {
        for (std::size_t l = i + 1; l < r; ++l) {
            const Complex z = tt(i, l);
            if (is_zero(z, scale * scale)) {
                continue;
            }
            WebLink link{i, l, std::abs(z), 0.0, 0.0};
            if (is_real(z)) {
                if (z.real() > 0.0) {
                    link.beta = -8.0 * std::abs(z) / d;
                }
            } else {
                link.a = -(2.0 / d) * std::abs(z) * std::arg(-z);
            }
            web.links.push_back(link);
        }
        for (std::size_t c = 0; c < m; ++c) {
            const Complex x = t(i, c);
            if (is_zero(x, scale)) {
                continue;
            }
            WebLink link{i, r + c, std::abs(x), 0.0, 0.0};
            if (is_real(x)) {
                if (x.real() < 0.0) {
                    link.beta = -8.0 * std::abs(x) / d;
                }
            } else {
                link.a = -(2.0 / d) * std::abs(x) * std::arg(x);
            }
            web.links.push_back(link);
        }
    }
    std::sort(web.links.begin(), web.links.end(), [](const WebLink& x, const WebLink& y) {
        return x.j != y.j ? x.j < y.j : x.l < y.l;
    });
    return web;
}

ComplexMatrix zmatrix(const DeltaWeb& web, double energy) {
    if (!(energy > 0.0)) {
        throw InvalidArgument("web Z-matrix needs a positive energy");
    }
    const double k = std::sqrt(energy);
    const double kd = k * web.d;
    ComplexMatrix z(web.n, web.n);
    for (const auto& link : web.links) {
        const double theta = kd / link.gamma;
        const double half = std::sin(theta / 2.0);
        const double den = std::sin(theta) + link.beta / k * half * half;
        if (std::abs(den) < 1e-12 * theta) {
            throw ResonantLength(link.j, link.l, energy);
        }
        const double num = std::cos(theta) + link.beta / (2.0 * k) * std::sin(theta);
        const double phase = web.d / (2.0 * link.gamma) * link.a;
        z(link.j, link.l) += kd * std::polar(1.0, -phase) / den;
        z(link.l, link.j) += kd * std::polar(1.0, phase) / den;
        z(link.j, link.j) -= kd * num / den;
        z(link.l, link.l) -= kd * num / den;
    }
    for (std::size_t j = 0; j < web.n; ++j) {
        z(j, j) -= web.alphas[j] * web.d;
    }
    return z;
}

ScatteringMatrix smatrix_web(const DeltaWeb& web, const LineEnvironment& env, double energy) {
    const std::size_t n = web.n;
    if (env.lines() != n) {
        throw DimensionMismatch("line environment does not match the web");
    }
    for (std::size_t j = 0; j < n; ++j) {
        if (std::abs(energy - env.potentials[j]) < 1e-12) {
            throw ThresholdEnergy(energy, j);
        }
    }
    ScatteringMatrix sm;
    sm.channels = channel_data(env, energy);
    const Complex id{0.0, web.d};

    ComplexMatrix lhs = zmatrix(web, energy);
    std::vector<Complex> dg(n);
    for (std::size_t j = 0; j < n; ++j) {
        dg[j] = std::sqrt(sm.channels.k[j]);
        lhs(j, j) += id * sm.channels.k[j];
    }
    const ComplexMatrix dmat = ComplexMatrix::diagonal(dg);
    ComplexMatrix x;
    try {
        x = solve_linear(lhs, dmat);
    } catch (const SingularMatrix&) {
        throw SingularMatrix("web scattering matrix undefined at energy " + format_number(energy) +
                             ", d = " + format_number(web.d));
    }
    sm.s = dmat * x;
    sm.s *= 2.0 * id;
    sm.s -= ComplexMatrix::identity(n);
    return sm;
}

ConvergenceTable convergence_study(const FTCoupling& ft, const LineEnvironment& env, double energy,
                                   std::span<const double> ds, unsigned threads) {
    const ScatteringMatrix exact = smatrix_ft(ft, env, energy);
    ConvergenceTable table;
    table.rows.resize(ds.size());
    parallel_for(ds.size(), threads, [&](std::size_t i) {
        const DeltaWeb web = build_web(ft, ds[i]);
        const ScatteringMatrix approx = smatrix_web(web, env, energy);
        table.rows[i] = {ds[i], max_abs_diff(approx.s, exact.s)};
    });

    double sx = 0.0;
    double sy = 0.0;
    double sxx = 0.0;
    double sxy = 0.0;
    double count = 0.0;
    for (const auto& row : table.rows) {
        if (!(row.error > 0.0)) {
            continue;
        }
        const double x = std::log(row.d);
        const double y = std::log(row.error);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        count += 1.0;
    }
    const double den = count * sxx - sx * sx;
    if (count >= 2.0 && den > 0.0) {
        table.slope = (count * sxy - sx * sy) / den;
    }
    return table;
}

}  // namespace qstar
