#include <catch_amalgamated.hpp>

#include "qstar/errors.hpp"
#include "qstar/filters.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <random>

using namespace qstar;
using Catch::Approx;

namespace {

// Three-line band-pass with a = 1, straight from the first-column formula.
double bandpass_p(double b, double u, double e) {
    const Complex xi = std::sqrt(Complex{1.0 - u / e, 0.0});
    return std::norm(2.0 / (2.0 + b * b * xi));
}

// Half-crossing by plain bisection on an arbitrary curve.
double half_crossing(const std::function<double(double)>& p, double inside, double outside) {
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (inside + outside);
        (p(mid) > 0.5 ? inside : outside) = mid;
    }
    return 0.5 * (inside + outside);
}

// Width of {P > 1/2} around `peak`, scanning outwards on a fine grid before bisecting.
double reference_width(const std::function<double(double)>& p, double peak, double step) {
    double lo = peak;
    while (p(lo - step) > 0.5) {
        lo -= step;
    }
    double hi = peak;
    while (p(hi + step) > 0.5) {
        hi += step;
    }
    return half_crossing(p, hi, hi + step) - half_crossing(p, lo, lo - step);
}

// |S_21|^2 of an FT device with T = a G, r inputs on zero potential and
// controls `u`, evaluated from S_21 = 2 [(I + a^2 G X G*)^{-1}]_{21}, X = diag(xi).
double multiband_limit(const ComplexMatrix& g, double a, const std::vector<double>& u, double e) {
    const std::size_t r = g.rows();
    ComplexMatrix x(r, r);
    for (std::size_t l = 0; l < r; ++l) {
        x(l, l) = std::sqrt(Complex{1.0 - u[l] / e, 0.0});
    }
    ComplexMatrix m = g * x * g.adjoint();
    m *= a * a;
    m = m + ComplexMatrix::identity(r);
    const ComplexMatrix inv = solve_linear(m, ComplexMatrix::identity(r));
    return std::norm(2.0 * inv(1, 0));
}

ComplexMatrix hadamard4() {
    ComplexMatrix g{{1.0, 1.0, 1.0, 1.0}, {1.0, -1.0, 1.0, -1.0}, {1.0, 1.0, -1.0, -1.0},
                    {1.0, -1.0, -1.0, 1.0}};
    g *= 0.5;
    return g;
}

double open_sum(const FilterDevice& dev, double e) {
    const auto p = line_probabilities(dev, e);
    double s = 0.0;
    for (double x : p) {
        s += x;
    }
    return s;
}

}  // namespace

TEST_CASE("family names round-trip", "[filters]") {
    for (Family f : {Family::DeltaHighPass, Family::BandPass3, Family::BandStop3, Family::DualBand4,
                     Family::TunableBandPass4, Family::MultiBand2r, Family::Branching2r}) {
        CHECK(parse_family(family_name(f)) == f);
    }
    CHECK_FALSE(parse_family("low-pass").has_value());
}

TEST_CASE("delta high-pass", "[filters]") {
    DeviceParams p;
    p.alpha = 3.0;
    const FilterDevice dev = make_device(Family::DeltaHighPass, p, {});
    for (double e : {0.1, 2.25, 40.0}) {
        CHECK(output_probability(dev, e, 1) == Approx(4 * e / (4 * e + 9.0)).epsilon(1e-12));
    }
    CHECK(column_labels(dev) == std::vector<std::string>{"P_refl", "P_out"});
}

TEST_CASE("band-pass device layout", "[filters]") {
    DeviceParams p;
    p.b = 4.0;
    const FilterDevice dev = make_device(Family::BandPass3, p, {1.0});
    CHECK(dev.lines() == 3);
    CHECK(dev.roles == std::vector<LineRole>{LineRole::Input, LineRole::Output, LineRole::Control});
    CHECK(column_labels(dev) == std::vector<std::string>{"P_refl", "P_out", "P_ctrl3"});
    CHECK(dev.warnings.empty());
    const auto& ft = std::get<FTCoupling>(dev.coupling);
    CHECK(ft.t == ComplexMatrix{{1.0, 4.0}});

    DeviceParams weak;
    weak.b = 1.5;
    CHECK_FALSE(make_device(Family::BandPass3, weak, {1.0}).warnings.empty());
    CHECK_THROWS_AS(make_device(Family::BandPass3, p, {1.0, 2.0}), BadShape);
}

TEST_CASE("band-pass peak, tail and shape", "[filters]") {
    DeviceParams p;
    p.b = 4.0;
    const FilterDevice dev = make_device(Family::BandPass3, p, {1.0});
    CHECK(output_probability(dev, 1.0, 1) == Approx(1.0).margin(1e-12));
    CHECK(output_probability(dev, 1e6, 1) == Approx(1.0 / 81.0).margin(1e-6));
    for (double e : {0.1, 0.7, 0.99, 1.01, 2.0, 17.0}) {
        CHECK(output_probability(dev, e, 1) == Approx(bandpass_p(4.0, 1.0, e)).epsilon(1e-12));
    }
    // Rising on (0, U), falling above.
    double prev = 0.0;
    for (int i = 1; i <= 1000; ++i) {
        const double e = i / 1000.0;
        const double v = output_probability(dev, e, 1);
        CHECK(v >= prev);
        prev = v;
    }
    for (int i = 1; i <= 1000; ++i) {
        const double e = 1.0 + i * 0.005;
        const double v = output_probability(dev, e, 1);
        CHECK(v <= prev);
        prev = v;
    }
    // Dense grid near U: maximum within one step of 1 and at least 0.999.
    const PeakLocation pk = locate_peak(dev, 0.95, 1.05, 1001);
    CHECK(std::abs(pk.position - 1.0) <= 1e-4 + 1e-12);
    CHECK(pk.height >= 0.999);
}

TEST_CASE("band-pass predictions", "[filters]") {
    DeviceParams p;
    p.b = 4.0;
    const FilterDevice dev = make_device(Family::BandPass3, p, {1.0});
    const PredictionReport rep = predict(dev);
    REQUIRE(rep.peaks.size() == 1);
    CHECK(rep.peaks[0].position == 1.0);
    CHECK(rep.peaks[0].height == Approx(1.0));
    CHECK(rep.asymptote_at_infinity == Approx(1.0 / 81.0).epsilon(1e-14));
    REQUIRE(rep.bandwidths.size() == 1);
    const double s2 = std::numbers::sqrt2;
    const double exact = 2.0 * (2.0 - s2) * 64.0 / ((64.0 - 3.0 + 2.0 * s2) * 65.0);
    CHECK(rep.bandwidths[0] == Approx(exact).epsilon(1e-12));
    CHECK(exact == Approx(0.01807).epsilon(1e-3));
    REQUIRE(rep.poles.size() == 1);
    CHECK(rep.poles[0] == Approx(256.0 / 252.0));

    DeviceParams skew;
    skew.a = 2.0;
    skew.b = 4.0;
    const PredictionReport r2 = predict(make_device(Family::BandPass3, skew, {0.5}));
    CHECK(r2.peaks[0].height == Approx(16.0 / 25.0));
    CHECK(r2.asymptote_at_infinity == Approx(16.0 / 441.0));
}

TEST_CASE("band-pass width formula against bisection", "[filters]") {
    for (double b : {3.0, 4.0, 6.0}) {
        for (double u : {0.3, 1.0, 2.5}) {
            const double beta = b * b / 2.0;
            auto curve = [&](double e) { return bandpass_p(b, u, e); };
            const double ref = reference_width(curve, u, u / 20000.0);
            CHECK(bandpass_width(beta, u) == Approx(ref).epsilon(1e-6));
            DeviceParams p;
            p.b = b;
            const FilterDevice dev = make_device(Family::BandPass3, p, {u});
            CHECK(measured_bandwidth(dev, u) == Approx(ref).epsilon(1e-6));
        }
    }
    DeviceParams p;
    p.b = 4.0;
    const double w = measured_bandwidth(make_device(Family::BandPass3, p, {1.0}), 1.0);
    CHECK(w == Approx(1.17 / 64.0).epsilon(0.05));
}

TEST_CASE("bandwidth search terminates on degenerate devices", "[filters]") {
    DeviceParams low;
    low.a = 0.2;
    low.b = 4.0;
    CHECK_THROWS_AS(measured_bandwidth(make_device(Family::BandPass3, low, {1.0}), 1.0),
                    NoHalfCrossing);
    // Tail stays above 1/2: no crossing on the high side.
    DeviceParams flat;
    flat.b = 0.5;
    CHECK_THROWS_AS(measured_bandwidth(make_device(Family::BandPass3, flat, {1.0}), 1.0),
                    NoHalfCrossing);
}

TEST_CASE("band-stop notch", "[filters]") {
    DeviceParams p;
    p.c = 5.0;
    p.d = 5.0;
    const FilterDevice dev = make_device(Family::BandStop3, p, {1.0});
    CHECK(dev.warnings.empty());
    CHECK(output_probability(dev, 1.0, 1) <= 1e-12);
    const double asym = 4.0 * 625.0 / (51.0 * 51.0);
    CHECK(output_probability(dev, 1e6, 1) == Approx(asym).margin(1e-5));
    CHECK(predict(dev).asymptote_at_infinity == Approx(asym));
    // Away from U the device transmits well.
    CHECK(output_probability(dev, 0.5, 1) > 0.9);
    CHECK(output_probability(dev, 3.0, 1) > 0.9);
}

TEST_CASE("dual-band heights", "[filters]") {
    DeviceParams p;
    p.a = 4.0;
    const FilterDevice dev = make_device(Family::DualBand4, p, {1.0, 0.5});
    CHECK(dev.warnings.empty());
    CHECK(output_probability(dev, 0.5, 1) == Approx(1024.0 / 1025.0).margin(1e-9));
    const double hi = 512.0 / std::pow(1.0 + 16.0 * std::numbers::sqrt2, 2);
    CHECK(output_probability(dev, 1.0, 1) == Approx(hi).margin(1e-9));
    const PredictionReport rep = predict(dev);
    REQUIRE(rep.peaks.size() == 2);
    CHECK(rep.peaks[0].position == 0.5);
    CHECK(rep.peaks[0].height == Approx(1024.0 / 1025.0).epsilon(1e-14));
    CHECK(rep.peaks[1].height == Approx(hi).epsilon(1e-14));
    CHECK(rep.poles.size() == 2);
}

TEST_CASE("dual-band with V = 0", "[filters]") {
    DeviceParams p;
    p.a = 4.0;
    const FilterDevice dev = make_device(Family::DualBand4, p, {1.0, 0.0});
    CHECK(output_probability(dev, 1e-10, 1) == Approx(1.0 / 1089.0).margin(1e-6));
    const PredictionReport rep = predict(dev);
    REQUIRE(rep.peaks.size() == 1);
    CHECK(rep.peaks[0].position == 1.0);
    int maxima = 0;
    double p0 = output_probability(dev, 1e-4, 1);
    double p1 = output_probability(dev, 2e-4, 1);
    for (int i = 3; i <= 20000; ++i) {
        const double p2 = output_probability(dev, i * 1e-4, 1);
        if (p1 > p0 && p1 >= p2) {
            ++maxima;
        }
        p0 = p1;
        p1 = p2;
    }
    CHECK(maxima == 1);
}

TEST_CASE("dual-band width approaches the asymptotic formula", "[filters]") {
    const double c = 1.0 - 1.0 / std::numbers::sqrt2;
    DeviceParams p;
    p.a = 16.0;
    const FilterDevice dev = make_device(Family::DualBand4, p, {1.0, 0.5});
    CHECK(measured_bandwidth(dev, 1.0) == Approx(c / 65536.0).epsilon(0.05));
    CHECK(measured_bandwidth(dev, 0.5) == Approx(0.5 * c / 65536.0).epsilon(0.05));

    // At a = 4 the formula is only asymptotic; compare against an independent bisection.
    p.a = 4.0;
    const FilterDevice d4 = make_device(Family::DualBand4, p, {1.0, 0.5});
    const GeneralBC bc = to_general(d4.coupling);
    auto curve = [&](double e) {
        if (std::abs(e - 1.0) < 1e-11 || std::abs(e - 0.5) < 1e-11) {
            e += 2e-11;
        }
        return transmission_probability(smatrix_general(bc, d4.env, e), 0, 1);
    };
    const double ref = reference_width(curve, 1.0, 1e-6);
    CHECK(measured_bandwidth(d4, 1.0) == Approx(ref).epsilon(1e-4));
}

TEST_CASE("sign variants give identical transmission", "[filters]") {
    const auto variants = dual_band_sign_variants(3.0);
    REQUIRE(variants.size() == 8);
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> ud(0.05, 2.0);
    for (int i = 0; i < 20; ++i) {
        const double e = ud(rng);
        const LineEnvironment env{{0.0, 0.0, ud(rng), ud(rng)}};
        const double ref = transmission_probability(smatrix_ft(make_ft(variants[0]), env, e), 0, 1);
        for (const auto& t : variants) {
            const double v = transmission_probability(smatrix_ft(make_ft(t), env, e), 0, 1);
            CHECK(std::abs(v - ref) <= 1e-12);
        }
    }
}

TEST_CASE("tunable band-pass plateau", "[filters]") {
    const FilterDevice dev = make_device(Family::TunableBandPass4, {}, {1.0, 0.0});
    CHECK(dev.params.a == Approx(1.0 / std::numbers::sqrt2));
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const double e = 0.01 + 0.98 * i / 999.0;
        worst = std::max(worst, std::abs(output_probability(dev, e, 1) - 0.25));
    }
    CHECK(worst <= 1e-12);
    // Above U the plateau ends.
    CHECK(output_probability(dev, 1.5, 1) < 0.25);
    // Plateau scales with U.
    const FilterDevice d3 = with_controls(dev, {3.0, 0.0});
    CHECK(output_probability(d3, 2.0, 1) == Approx(0.25).margin(1e-12));

    bool found = false;
    for (const auto& c : special_mode_checks(dev)) {
        if (c.name == "sluice flux J/(rho U)") {
            found = true;
            CHECK(c.measured == Approx(0.25).epsilon(0.02));
        }
    }
    CHECK(found);
}

TEST_CASE("alternate flat passbands", "[filters]") {
    for (double a : {0.3, 0.6, 0.9}) {
        const FTCoupling ft = make_ft(flat_passband_rotation(a));
        for (double e : {0.05, 0.4, 0.95}) {
            const double v = transmission_probability(
                smatrix_ft(ft, LineEnvironment{{0.0, 0.0, 1.0, 0.0}}, e), 0, 1);
            CHECK(std::abs(v - a * a * (1.0 - a * a)) <= 1e-12);
        }
    }
    for (double a : {0.5, 1.0, 2.0}) {
        const FTCoupling ft = make_ft(flat_passband_scaled(a));
        const double expect = 4.0 * std::pow(a, 4) / std::pow(a * a + 1.0, 4);
        for (double e : {0.05, 0.4, 0.95}) {
            const double v = transmission_probability(
                smatrix_ft(ft, LineEnvironment{{0.0, 0.0, 1.0, 0.0}}, e), 0, 1);
            CHECK(std::abs(v - expect) <= 1e-12);
        }
    }
}

TEST_CASE("multi-band device construction", "[filters]") {
    DeviceParams p;
    p.a = 4.0;
    p.r = 4;
    const FilterDevice dev = make_device(Family::MultiBand2r, p, {0.1, 0.25, 0.5, 1.0});
    CHECK(dev.lines() == 8);
    CHECK(max_abs_diff(dev.params.g, hadamard4()) < 1e-15);
    CHECK(column_labels(dev) == std::vector<std::string>{"P_refl", "P_out", "P_aux3", "P_aux4",
                                                         "P_ctrl5", "P_ctrl6", "P_ctrl7", "P_ctrl8"});
    DeviceParams bad = p;
    bad.g = ComplexMatrix{{1.0, 1.0}, {1.0, 1.0}};
    bad.r = 2;
    CHECK_THROWS_AS(make_device(Family::MultiBand2r, bad, {1.0, 2.0}), BadShape);
    DeviceParams odd = p;
    odd.r = 3;
    CHECK_THROWS_AS(make_device(Family::MultiBand2r, odd, {1.0, 2.0, 3.0}), NotPowerOfTwo);
    CHECK_THROWS_AS(make_device(Family::MultiBand2r, p, {1.0, 2.0}), BadShape);
}

TEST_CASE("multi-band peaks match the exact threshold values", "[filters]") {
    DeviceParams p;
    p.a = 4.0;
    p.r = 4;
    const std::vector<double> u{0.1, 0.25, 0.5, 1.0};
    const FilterDevice dev = make_device(Family::MultiBand2r, p, u);
    for (double e : u) {
        CHECK(output_probability(dev, e, 1) ==
              Approx(multiband_limit(hadamard4(), 4.0, u, e)).margin(1e-9));
    }
    // Predicted a -> infinity heights are 4/r^2.
    for (double h : predict(dev).peak_heights()) {
        CHECK(h == Approx(0.25).epsilon(1e-14));
    }
    // Peaks grow towards 4/r^2 as the device sharpens.
    DeviceParams sharp = p;
    sharp.a = 64.0;
    const FilterDevice ds = make_device(Family::MultiBand2r, sharp, u);
    for (double e : u) {
        CHECK(output_probability(ds, e, 1) == Approx(0.25).epsilon(0.01));
    }
}

TEST_CASE("multi-band equal controls cancel the output", "[filters]") {
    DeviceParams p;
    p.a = 4.0;
    p.r = 4;
    const FilterDevice dev = make_device(Family::MultiBand2r, p, {0.7, 0.7, 0.7, 0.7});
    for (int i = 1; i <= 500; ++i) {
        CHECK(output_probability(dev, i * 0.005, 1) <= 1e-12);
    }
}

TEST_CASE("multi-band merged and aggregated peaks", "[filters]") {
    DeviceParams p;
    p.a = 32.0;
    p.r = 4;
    // Controls 1 and 3 share a value: merged height 4|g21 g11 + g23 g13|^2 = 1.
    const FilterDevice dev = make_device(Family::MultiBand2r, p, {0.5, 0.2, 0.5, 1.0});
    const ComplexMatrix g = hadamard4();
    const double merged = 4.0 * std::norm(g(1, 0) * g(0, 0) + g(1, 2) * g(0, 2));
    CHECK(merged == Approx(1.0));
    for (const auto& c : special_mode_checks(dev)) {
        CAPTURE(c.name);
        CHECK(c.measured == Approx(c.predicted).margin(0.02));
    }
    const auto probs = line_probabilities(dev, 1.0);
    CHECK(probs[1] + probs[2] + probs[3] == Approx(0.75).epsilon(0.02));
}

TEST_CASE("multi-band zero-energy limit with zeroed controls", "[filters]") {
    DeviceParams p;
    p.a = 4.0;
    p.r = 4;
    const FilterDevice dev = make_device(Family::MultiBand2r, p, {0.0, 0.25, 0.0, 1.0});
    const ComplexMatrix g = hadamard4();
    const Complex amp = 2.0 * (g(1, 0) * g(0, 0) + g(1, 2) * g(0, 2)) / 17.0;
    CHECK(output_probability(dev, 1e-12, 1) == Approx(std::norm(amp)).epsilon(1e-4));
}

TEST_CASE("branching device", "[filters]") {
    DeviceParams p;
    p.a = 4.0;
    p.r = 4;
    const FilterDevice dev = make_device(Family::Branching2r, p, {0.0, 1.0, 0.5, 0.1});
    CHECK(dev.lines() == 8);
    CHECK(column_labels(dev) == std::vector<std::string>{"P_refl", "P_out2", "P_out3", "P_out4",
                                                         "P_drain", "P_ctrl6", "P_ctrl7",
                                                         "P_ctrl8"});
    const ComplexMatrix t = branching_matrix(4, 4.0);
    CHECK(t(0, 0) == Complex{4.0, 0.0});
    CHECK(t(0, 3) == Complex{4.0, 0.0});
    CHECK(t(3, 0) == Complex{4.0, 0.0});
    CHECK(t(2, 2) == Complex{-4.0, 0.0});
    CHECK(t(1, 2) == Complex{0.0, 0.0});

    const double principal = std::pow(2.0 / (1.0 / 16.0 + 4.0), 2);
    const std::vector<double> u{0.0, 1.0, 0.5, 0.1};
    for (std::size_t j = 1; j < 4; ++j) {
        CHECK(output_probability(dev, u[j], j) == Approx(principal).margin(1e-9));
    }
    // Drain amplitude 2a/(1 + a^2 r) at every energy.
    for (double e : {0.05, 0.3, 2.0}) {
        const ScatteringMatrix sm = smatrix(dev.coupling, dev.env, e);
        CHECK(std::abs(sm.s(4, 0)) == Approx(8.0 / 65.0).epsilon(1e-12));
    }
    // Zeroing a control removes its principal peak.
    const FilterDevice cut = with_controls(dev, {0.0, 1.0, 0.0, 0.1});
    CHECK(output_probability(cut, 0.5, 2) < 1e-3);
    CHECK(output_probability(cut, 1.0, 1) == Approx(principal).margin(1e-9));
}

TEST_CASE("branching zero-energy limits", "[filters]") {
    DeviceParams p;
    p.a = 4.0;
    p.r = 4;
    const FilterDevice dev = make_device(Family::Branching2r, p, {0.0, 1.0, 0.5, 0.1});
    // h0 = 0 and k = r - 1 = 3 outputs.
    const double a2 = 16.0;
    const double lim = 2.0 / (1.0 + a2 * 4.0) * (1.0 + 1.0 / a2) / (4.0 + 4.0 / a2);
    for (std::size_t j = 1; j < 4; ++j) {
        CHECK(output_probability(dev, 1e-12, j) == Approx(lim * lim).epsilon(1e-4));
    }
}

TEST_CASE("flux is conserved across families", "[filters][property]") {
    std::mt19937_64 rng(41);
    std::uniform_real_distribution<double> ud(0.05, 2.0);
    std::uniform_real_distribution<double> ua(0.5, 6.0);
    for (int trial = 0; trial < 30; ++trial) {
        DeviceParams p;
        p.a = ua(rng);
        p.b = ua(rng);
        p.c = ua(rng);
        p.d = ua(rng);
        p.alpha = ua(rng);
        p.r = 4;
        std::vector<FilterDevice> devs{
            make_device(Family::DeltaHighPass, p, {}),
            make_device(Family::BandPass3, p, {ud(rng)}),
            make_device(Family::BandStop3, p, {ud(rng)}),
            make_device(Family::DualBand4, p, {ud(rng), ud(rng)}),
            make_device(Family::TunableBandPass4, p, {ud(rng), ud(rng)}),
            make_device(Family::MultiBand2r, p, {ud(rng), ud(rng), ud(rng), ud(rng)}),
            make_device(Family::Branching2r, p, {ud(rng), ud(rng), ud(rng), ud(rng)}),
        };
        for (const auto& dev : devs) {
            const double e = ud(rng);
            CHECK(open_sum(dev, e) == Approx(1.0).margin(1e-9));
        }
    }
}

TEST_CASE("sweep output is independent of thread count", "[filters]") {
    DeviceParams p;
    p.a = 4.0;
    p.r = 4;
    const FilterDevice dev = make_device(Family::MultiBand2r, p, {0.1, 0.25, 0.5, 1.0});
    std::vector<double> grid;
    for (int i = 1; i <= 400; ++i) {
        grid.push_back(i * 0.005);
    }
    const SweepTable one = sweep(dev, grid, 1);
    const SweepTable many = sweep(dev, grid, 4);
    REQUIRE(one.rows.size() == grid.size());
    CHECK(one.labels == column_labels(dev));
    for (std::size_t i = 0; i < grid.size(); ++i) {
        CHECK(one.rows[i].energy == grid[i]);
        CHECK(one.rows[i].ok);
        CHECK(one.rows[i].probabilities == many.rows[i].probabilities);
        double s = 0.0;
        for (double x : one.rows[i].probabilities) {
            CHECK(x >= 0.0);
            CHECK(x <= 1.0 + 1e-9);
            s += x;
        }
        CHECK(s == Approx(1.0).margin(1e-8));
    }
}

TEST_CASE("sweeps nudge off thresholds on the general path", "[filters]") {
    const GeneralBC bc = to_general(make_ft(ComplexMatrix{{1.0, 4.0}}));
    const LineEnvironment env{{0.0, 0.0, 1.0}};
    const std::vector<double> grid{0.5, 1.0, 2.0};
    const SweepTable t = sweep(Coupling{bc}, env, {"P_refl", "P_out", "P_ctrl3"}, grid, 2);
    REQUIRE(t.rows.size() == 3);
    CHECK(t.rows[1].ok);
    CHECK(t.rows[1].evaluated_at == Approx(1.0 + 1e-9).epsilon(1e-15));
    CHECK_FALSE(t.rows[1].message.empty());
    CHECK(t.rows[0].message.empty());
    CHECK(t.rows[1].probabilities[1] > 0.99);
}

TEST_CASE("sweep flags failing points", "[filters]") {
    // A = B = 0 makes the linear system singular at every energy.
    const GeneralBC broken{ComplexMatrix::zeros(2, 2), ComplexMatrix::zeros(2, 2)};
    const std::vector<double> grid{0.5, 1.0};
    const SweepTable t = sweep(Coupling{broken}, LineEnvironment::zero(2), {"P_refl", "P_out"}, grid);
    for (const auto& row : t.rows) {
        CHECK_FALSE(row.ok);
        CHECK(std::isnan(row.probabilities[0]));
        CHECK_FALSE(row.message.empty());
    }
}

TEST_CASE("special mode checks agree for well-separated devices", "[filters]") {
    DeviceParams p;
    p.a = 4.0;
    p.b = 4.0;
    p.r = 4;
    for (const auto& c : special_mode_checks(make_device(Family::BandPass3, p, {1.0}))) {
        CAPTURE(c.name);
        CHECK(c.measured == Approx(c.predicted).epsilon(0.01).margin(1e-6));
    }
    for (const auto& c : special_mode_checks(make_device(Family::DualBand4, p, {1.0, 0.0}))) {
        CAPTURE(c.name);
        CHECK(c.measured == Approx(c.predicted).epsilon(1e-3).margin(1e-6));
    }
    const auto branch = special_mode_checks(make_device(Family::Branching2r, p, {0.0, 1.0, 0.5, 0.1}));
    bool drain = false;
    for (const auto& c : branch) {
        CAPTURE(c.name);
        if (c.name.starts_with("principal") || c.name.starts_with("drain amplitude") ||
            c.name.starts_with("zero-energy")) {
            CHECK(c.measured == Approx(c.predicted).epsilon(1e-4));
        }
        drain = drain || c.name.starts_with("drain amplitude");
    }
    CHECK(drain);
}
