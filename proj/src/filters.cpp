#include "qstar/filters.hpp"

#include "qstar/errors.hpp"
#include "qstar/parallel.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <map>
#include <numbers>
#include <utility>

namespace qstar {

namespace {

constexpr double much_greater = 10.0;  // "x >> 1" is taken as x >= 10
constexpr double nudge = 1e-9;

struct FamilyEntry {
    Family family;
    std::string_view name;
};

constexpr std::array<FamilyEntry, 7> family_table{{
    {Family::DeltaHighPass, "delta-high-pass"},
    {Family::BandPass3, "band-pass-3"},
    {Family::BandStop3, "band-stop-3"},
    {Family::DualBand4, "dual-band-4"},
    {Family::TunableBandPass4, "tunable-band-pass-4"},
    {Family::MultiBand2r, "multi-band-2r"},
    {Family::Branching2r, "branching-2r"},
}};

void require_finite(double x, const char* what) {
    if (!std::isfinite(x)) {
        throw InvalidArgument(std::string(what) + " must be finite");
    }
}

void require_controls(const std::vector<double>& controls, std::size_t expected,
                      std::string_view family) {
    if (controls.size() != expected) {
        throw BadShape(std::string(family) + " expects " + std::to_string(expected) +
                       " control potentials, got " + std::to_string(controls.size()));
    }
    for (double u : controls) {
        require_finite(u, "control potential");
    }
}

// Warn where a^2 sqrt|1 - U_l/U_j| < 10 for nonzero U_j, l != j.
void isolation_warnings(const std::vector<double>& controls, std::size_t first, double a,
                        std::vector<std::string>& warnings) {
    const double a2 = a * a;
    for (std::size_t j = first; j < controls.size(); ++j) {
        if (controls[j] == 0.0) {
            continue;
        }
        for (std::size_t l = first; l < controls.size(); ++l) {
            if (l == j) {
                continue;
            }
            const double v = a2 * std::sqrt(std::abs(1.0 - controls[l] / controls[j]));
            if (v < much_greater) {
                warnings.push_back("controls " + std::to_string(j + 1) + " and " +
                                   std::to_string(l + 1) +
                                   " are not isolated: a^2 sqrt|1 - U_l/U_j| = " +
                                   format_number(v));
            }
        }
    }
}

LineEnvironment controlled_environment(std::size_t n, std::size_t first_control,
                                       const std::vector<double>& controls) {
    LineEnvironment env = LineEnvironment::zero(n);
    for (std::size_t i = 0; i < controls.size(); ++i) {
        env.potentials[first_control + i] = controls[i];
    }
    return env;
}

double dual_band_a(const FilterDevice& device) {
    return device.family == Family::TunableBandPass4 ? 1.0 / std::numbers::sqrt2 : device.params.a;
}

// Distinct positive control values with the indices holding them.
std::map<double, std::vector<std::size_t>> positive_groups(const std::vector<double>& controls,
                                                           std::size_t first = 0) {
    std::map<double, std::vector<std::size_t>> groups;
    for (std::size_t i = first; i < controls.size(); ++i) {
        if (controls[i] > 0.0) {
            groups[controls[i]].push_back(i);
        }
    }
    return groups;
}

double small_energy(const FilterDevice& device) {
    double scale = 1.0;
    for (double u : device.controls) {
        scale = std::max(scale, std::abs(u));
    }
    return 1e-12 * scale;
}

std::string label_energy(double e) { return format_number(e); }

double bisect_crossing(const std::function<double(double)>& above, double inside, double outside) {
    // above(inside) > 1/2 >= above(outside)
    for (int iter = 0; iter < 200; ++iter) {
        const double mid = 0.5 * (inside + outside);
        if (std::abs(outside - inside) <= 1e-8 * std::abs(mid)) {
            break;
        }
        if (above(mid) > 0.5) {
            inside = mid;
        } else {
            outside = mid;
        }
    }
    return 0.5 * (inside + outside);
}

}  // namespace

std::string_view family_name(Family family) {
    for (const auto& e : family_table) {
        if (e.family == family) {
            return e.name;
        }
    }
    return "unknown";
}

std::optional<Family> parse_family(std::string_view name) {
    for (const auto& e : family_table) {
        if (e.name == name) {
            return e.family;
        }
    }
    return std::nullopt;
}

std::string_view role_name(LineRole role) {
    switch (role) {
        case LineRole::Input:
            return "input";
        case LineRole::Output:
            return "output";
        case LineRole::Control:
            return "control";
        case LineRole::Drain:
            return "drain";
        case LineRole::Auxiliary:
            return "auxiliary";
    }
    return "unknown";
}

std::vector<std::size_t> FilterDevice::output_lines() const {
    std::vector<std::size_t> out;
    for (std::size_t j = 0; j < roles.size(); ++j) {
        if (roles[j] == LineRole::Output) {
            out.push_back(j);
        }
    }
    return out;
}

ComplexMatrix branching_matrix(std::size_t r, double a) {
    ComplexMatrix t(r, r);
    for (std::size_t i = 0; i < r; ++i) {
        t(0, i) = a;
        t(i, 0) = a;
        if (i > 0) {
            t(i, i) = -a;
        }
    }
    return t;
}

std::vector<ComplexMatrix> dual_band_sign_variants(double a) {
    const std::array<std::array<double, 4>, 4> patterns{{
        {1, 1, 1, -1},
        {1, 1, -1, 1},
        {1, -1, 1, 1},
        {-1, 1, 1, 1},
    }};
    std::vector<ComplexMatrix> out;
    for (double sign : {1.0, -1.0}) {
        for (const auto& p : patterns) {
            const double s = sign * a;
            out.push_back(ComplexMatrix{{s * p[0], s * p[1]}, {s * p[2], s * p[3]}});
        }
    }
    return out;
}

ComplexMatrix flat_passband_rotation(double a) {
    if (!(a > 0.0 && a < 1.0)) {
        throw InvalidArgument("flat passband rotation needs a in (0, 1)");
    }
    const double s = std::sqrt(1.0 - a * a);
    return ComplexMatrix{{a, s}, {s, -a}};
}

ComplexMatrix flat_passband_scaled(double a) {
    if (!(a > 0.0)) {
        throw InvalidArgument("flat passband scaling needs a > 0");
    }
    const double f = 1.0 / std::numbers::sqrt2;
    return ComplexMatrix{{f * a, f * a}, {f / a, -f / a}};
}

double bandpass_width(double beta, double u) {
    const double b2 = beta * beta;
    const double den = (b2 - 3.0 + 2.0 * std::numbers::sqrt2) * (b2 + 1.0);
    if (!(den > 0.0)) {
        throw DegenerateParameters("band-pass width formula needs beta^2 > 3 - 2 sqrt 2");
    }
    return 2.0 * (2.0 - std::numbers::sqrt2) * b2 * u / den;
}

FilterDevice make_device(Family family, DeviceParams params, std::vector<double> controls) {
    for (double x : {params.a, params.b, params.c, params.d, params.alpha}) {
        require_finite(x, "device parameter");
    }
    FilterDevice dev;
    dev.family = family;
    const std::string_view name = family_name(family);
    using R = LineRole;

    switch (family) {
        case Family::DeltaHighPass:
            require_controls(controls, 0, name);
            dev.roles = {R::Input, R::Output};
            dev.coupling = make_delta(2, params.alpha);
            dev.env = LineEnvironment::zero(2);
            break;
        case Family::BandPass3: {
            require_controls(controls, 1, name);
            dev.roles = {R::Input, R::Output, R::Control};
            dev.coupling = make_ft(ComplexMatrix{{params.a, params.b}});
            dev.env = controlled_environment(3, 2, controls);
            const double q = std::pow(params.b, 4) / 4.0;
            if (q < much_greater) {
                dev.warnings.push_back("b^4/4 = " + format_number(q) +
                                       " is below 10; the passband is not sharp");
            }
            if (params.a != 1.0) {
                dev.warnings.push_back("a != 1: the peak height drops below 1");
            }
            break;
        }
        case Family::BandStop3: {
            require_controls(controls, 1, name);
            dev.roles = {R::Input, R::Output, R::Control};
            dev.coupling = make_ft(ComplexMatrix{{params.c}, {params.d}});
            dev.env = controlled_environment(3, 2, controls);
            if (params.c * params.d < much_greater) {
                dev.warnings.push_back("c*d = " + format_number(params.c * params.d) +
                                       " is below 10; the stop band is wide");
            }
            break;
        }
        case Family::DualBand4:
        case Family::TunableBandPass4: {
            require_controls(controls, 2, name);
            if (family == Family::TunableBandPass4) {
                params.a = 1.0 / std::numbers::sqrt2;
            }
            const double a = params.a;
            dev.roles = {R::Input, R::Output, R::Control, R::Control};
            dev.coupling = make_ft(ComplexMatrix{{a, a}, {a, -a}});
            dev.env = controlled_environment(4, 2, controls);
            if (family == Family::DualBand4 && 2.0 * a * a < much_greater) {
                dev.warnings.push_back("2a^2 = " + format_number(2.0 * a * a) +
                                       " is below 10; passbands are wide and low");
            }
            break;
        }
        case Family::MultiBand2r: {
            std::size_t r = params.r != 0 ? params.r : params.g.rows();
            if (params.g.empty()) {
                if (r < 2) {
                    throw BadShape("multi-band device needs r >= 2");
                }
                params.g = sylvester_hadamard(r);
                params.g *= 1.0 / std::sqrt(static_cast<double>(r));
            }
            if (!params.g.is_square() || params.g.rows() != r || r < 2) {
                throw BadShape("G must be an r x r matrix with r >= 2");
            }
            const double defect = unitarity_defect(params.g);
            if (!(defect <= 1e-12)) {
                throw BadShape("G is not unitary (defect " + format_number(defect) + ")");
            }
            params.r = r;
            require_controls(controls, r, name);
            dev.roles.assign(2 * r, R::Control);
            dev.roles[0] = R::Input;
            dev.roles[1] = R::Output;
            for (std::size_t j = 2; j < r; ++j) {
                dev.roles[j] = R::Auxiliary;
            }
            ComplexMatrix t = params.g;
            t *= params.a;
            dev.coupling = make_ft(std::move(t));
            dev.env = controlled_environment(2 * r, r, controls);
            isolation_warnings(controls, 0, params.a, dev.warnings);
            break;
        }
        case Family::Branching2r: {
            const std::size_t r = params.r;
            if (r < 2) {
                throw BadShape("branching device needs r >= 2");
            }
            require_controls(controls, r, name);
            dev.roles.assign(2 * r, R::Control);
            dev.roles[0] = R::Input;
            for (std::size_t j = 1; j < r; ++j) {
                dev.roles[j] = R::Output;
            }
            dev.roles[r] = R::Drain;
            dev.coupling = make_ft(branching_matrix(r, params.a));
            dev.env = controlled_environment(2 * r, r, controls);
            if (params.a * params.a < much_greater) {
                dev.warnings.push_back("a^2 = " + format_number(params.a * params.a) +
                                       " is below 10");
            }
            isolation_warnings(controls, 0, params.a, dev.warnings);
            break;
        }
    }
    dev.params = std::move(params);
    dev.controls = std::move(controls);
    return dev;
}

FilterDevice with_controls(const FilterDevice& device, std::vector<double> controls) {
    return make_device(device.family, device.params, std::move(controls));
}

std::vector<std::string> column_labels(const FilterDevice& device) {
    const std::size_t outputs = device.output_lines().size();
    std::vector<std::string> labels;
    for (std::size_t j = 0; j < device.lines(); ++j) {
        const std::string num = std::to_string(j + 1);
        switch (device.roles[j]) {
            case LineRole::Input:
                labels.emplace_back("P_refl");
                break;
            case LineRole::Output:
                labels.push_back(outputs == 1 ? "P_out" : "P_out" + num);
                break;
            case LineRole::Control:
                labels.push_back("P_ctrl" + num);
                break;
            case LineRole::Auxiliary:
                labels.push_back("P_aux" + num);
                break;
            case LineRole::Drain:
                labels.emplace_back("P_drain");
                break;
        }
    }
    return labels;
}

std::vector<double> line_probabilities(const FilterDevice& device, double energy) {
    const ScatteringMatrix sm = smatrix(device.coupling, device.env, energy);
    std::vector<double> p(device.lines());
    for (std::size_t j = 0; j < p.size(); ++j) {
        p[j] = transmission_probability(sm, 0, j);
    }
    return p;
}

double output_probability(const FilterDevice& device, double energy, std::size_t line) {
    const ScatteringMatrix sm = smatrix(device.coupling, device.env, energy);
    return transmission_probability(sm, 0, line);
}

std::vector<double> PredictionReport::peak_positions() const {
    std::vector<double> out;
    for (const auto& p : peaks) {
        out.push_back(p.position);
    }
    return out;
}

std::vector<double> PredictionReport::peak_heights() const {
    std::vector<double> out;
    for (const auto& p : peaks) {
        out.push_back(p.height);
    }
    return out;
}

PredictionReport predict(const FilterDevice& device) {
    PredictionReport rep;
    rep.warnings = device.warnings;
    const DeviceParams& p = device.params;
    const auto& u = device.controls;

    switch (device.family) {
        case Family::DeltaHighPass:
            rep.asymptote_at_infinity = 1.0;
            break;

        case Family::BandPass3: {
            const double a2 = p.a * p.a;
            const double h = 2.0 * p.a / (1.0 + a2);
            if (u[0] > 0.0) {
                rep.peaks.push_back({u[0], h * h, 1, "principal", std::nullopt});
                try {
                    rep.bandwidths.push_back(bandpass_width(p.b * p.b / 2.0, u[0]));
                } catch (const DegenerateParameters& e) {
                    rep.warnings.emplace_back(e.what());
                }
                try {
                    rep.poles.push_back(pole_energy({PoleFamily::BandPass3, p.a, p.b, u[0]}));
                } catch (const DegenerateParameters& e) {
                    rep.warnings.emplace_back(e.what());
                }
            }
            const double inf = 2.0 * p.a / (1.0 + a2 + p.b * p.b);
            rep.asymptote_at_infinity = inf * inf;
            break;
        }

        case Family::BandStop3: {
            const double c2 = p.c * p.c;
            const double d2 = p.d * p.d;
            if (u[0] > 0.0) {
                rep.peaks.push_back({u[0], 0.0, 1, "notch", std::nullopt});
            }
            rep.asymptote_at_infinity = 4.0 * c2 * d2 / ((1.0 + c2 + d2) * (1.0 + c2 + d2));
            break;
        }

        case Family::DualBand4:
        case Family::TunableBandPass4: {
            const double a = dual_band_a(device);
            const double a2 = a * a;
            const double a4 = a2 * a2;
            const double lo = std::min(u[0], u[1]);
            const double hi = std::max(u[0], u[1]);
            if (hi > 0.0) {
                if (lo > 0.0) {
                    const double x = hi / lo - 1.0;
                    rep.peaks.push_back(
                        {lo, 4.0 * a4 * x / (1.0 + 4.0 * a4 * x), 1, "principal", std::nullopt});
                }
                const double y = 1.0 - lo / hi;
                const double den = 1.0 + 2.0 * a2 * std::sqrt(y);
                rep.peaks.push_back({hi, 4.0 * a4 * y / (den * den), 1, "principal", std::nullopt});
            }
            for (const auto& pk : rep.peaks) {
                if (pk.height > 0.5) {
                    rep.bandwidths.push_back((1.0 - 1.0 / std::numbers::sqrt2) * pk.position / a4);
                }
                try {
                    rep.poles.push_back(pole_energy({PoleFamily::DualBand4, a, 0.0, pk.position}));
                } catch (const DegenerateParameters& e) {
                    rep.warnings.emplace_back(e.what());
                }
            }
            rep.asymptote_at_infinity = 0.0;
            break;
        }

        case Family::MultiBand2r: {
            const ComplexMatrix& g = p.g;
            for (const auto& [value, members] : positive_groups(u)) {
                Complex amp{};
                for (std::size_t l : members) {
                    amp += g(1, l) * std::conj(g(0, l));
                }
                rep.peaks.push_back({value, 4.0 * std::norm(amp), 1, "principal", std::nullopt});
                try {
                    rep.poles.push_back(pole_energy({PoleFamily::MultiBand2r, p.a, 0.0, value}));
                } catch (const DegenerateParameters& e) {
                    rep.warnings.emplace_back(e.what());
                }
            }
            rep.asymptote_at_infinity = 0.0;
            break;
        }

        case Family::Branching2r: {
            const std::size_t r = p.r;
            const double rd = static_cast<double>(r);
            const double principal = std::pow(2.0 / (1.0 / (p.a * p.a) + rd), 2);
            const double secondary = 4.0 / std::pow(rd * (rd - 1.0), 2);
            for (std::size_t j = 1; j < r; ++j) {
                if (u[j] > 0.0) {
                    rep.peaks.push_back({u[j], principal, j, "principal", 4.0 / (rd * rd)});
                }
            }
            for (std::size_t j = 1; j < r; ++j) {
                if (!(u[j] > 0.0)) {
                    continue;
                }
                for (std::size_t l = 1; l < r; ++l) {
                    if (l != j && u[l] > 0.0 && u[l] != u[j]) {
                        rep.peaks.push_back({u[l], secondary, j, "secondary", secondary});
                    }
                }
                if (u[0] > 0.0) {
                    rep.peaks.push_back({u[0], 4.0 / (rd * rd), j, "drain", 4.0 / (rd * rd)});
                }
            }
            rep.asymptote_at_infinity = 0.0;
            break;
        }
    }
    return rep;
}

SweepTable sweep(const FilterDevice& device, std::span<const double> grid, unsigned threads) {
    return sweep(device.coupling, device.env, column_labels(device), grid, threads);
}

SweepTable sweep(const Coupling& coupling, const LineEnvironment& env,
                 std::vector<std::string> labels, std::span<const double> grid, unsigned threads) {
    const std::size_t n = line_count(coupling);
    if (labels.size() != n) {
        throw DimensionMismatch("sweep needs one label per line");
    }
    auto probabilities = [&](double e) {
        const ScatteringMatrix sm = smatrix(coupling, env, e);
        std::vector<double> p(n);
        for (std::size_t j = 0; j < n; ++j) {
            p[j] = transmission_probability(sm, 0, j);
        }
        return p;
    };
    SweepTable table;
    table.labels = std::move(labels);
    table.rows.resize(grid.size());
    parallel_for(grid.size(), threads, [&](std::size_t i) {
        SweepRow& row = table.rows[i];
        row.energy = grid[i];
        row.evaluated_at = grid[i];
        try {
            try {
                row.probabilities = probabilities(row.evaluated_at);
            } catch (const ThresholdEnergy&) {
                row.evaluated_at = grid[i] + nudge;
                row.message = "threshold: evaluated at " + format_number(row.evaluated_at);
                row.probabilities = probabilities(row.evaluated_at);
            }
        } catch (const Error& e) {
            row.ok = false;
            row.message = e.what();
            row.probabilities.assign(n, std::nan(""));
        }
    });
    return table;
}

double measured_bandwidth(const FilterDevice& device, double peak) {
    return measured_bandwidth(device, peak, device.primary_output());
}

double measured_bandwidth(const FilterDevice& device, double peak, std::size_t output_line) {
    if (!(peak > 0.0)) {
        throw NoHalfCrossing("peak energy must be positive");
    }
    const std::function<double(double)> prob = [&](double e) {
        return output_probability(device, e, output_line);
    };
    if (!(prob(peak) > 0.5)) {
        throw NoHalfCrossing("transmission at " + format_number(peak) + " does not exceed 1/2");
    }
    constexpr int max_doublings = 100;

    double h = 1e-9 * peak;
    double inside = peak;
    double right = 0.0;
    for (int i = 0;; ++i) {
        if (i == max_doublings) {
            throw NoHalfCrossing("no upper half crossing above " + format_number(peak));
        }
        const double x = peak + h;
        if (prob(x) <= 0.5) {
            right = bisect_crossing(prob, inside, x);
            break;
        }
        inside = x;
        h *= 2.0;
    }

    h = 1e-9 * peak;
    inside = peak;
    double left = 0.0;
    for (;;) {
        const double x = peak - h;
        if (!(x > 0.0)) {
            throw NoHalfCrossing("no lower half crossing below " + format_number(peak));
        }
        if (prob(x) <= 0.5) {
            left = bisect_crossing(prob, inside, x);
            break;
        }
        inside = x;
        h *= 2.0;
    }
    return right - left;
}

PeakLocation locate_peak(const FilterDevice& device, double lo, double hi, std::size_t points,
                         std::size_t output_line) {
    if (points < 2 || !(hi > lo)) {
        throw InvalidArgument("locate_peak needs hi > lo and at least two points");
    }
    PeakLocation best{lo, -1.0};
    for (std::size_t i = 0; i < points; ++i) {
        const double e = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(points - 1);
        const double p = output_probability(device, e, output_line);
        if (p > best.height) {
            best = {e, p};
        }
    }
    return best;
}

std::vector<ModeCheck> special_mode_checks(const FilterDevice& device) {
    std::vector<ModeCheck> checks;
    const DeviceParams& p = device.params;
    const auto& u = device.controls;
    const PredictionReport rep = predict(device);
    auto pout = [&](double e, std::size_t line = 1) { return output_probability(device, e, line); };

    switch (device.family) {
        case Family::DeltaHighPass:
            if (p.alpha != 0.0) {
                const double e = p.alpha * p.alpha / 4.0;
                checks.push_back({"half transmission at E = alpha^2/4", pout(e), 0.5});
            }
            checks.push_back({"high-energy limit (E = 1e6)", pout(1e6),
                              4e6 / (4e6 + p.alpha * p.alpha)});
            break;

        case Family::BandPass3:
        case Family::BandStop3:
            for (const auto& pk : rep.peaks) {
                checks.push_back({pk.kind + " at E = " + label_energy(pk.position),
                                  pout(pk.position), pk.height});
            }
            checks.push_back({"high-energy limit (E = 1e6)", pout(1e6), rep.asymptote_at_infinity});
            if (device.family == Family::BandPass3 && !rep.peaks.empty() &&
                !rep.bandwidths.empty()) {
                try {
                    checks.push_back({"bandwidth", measured_bandwidth(device, rep.peaks[0].position),
                                      rep.bandwidths[0]});
                } catch (const NoHalfCrossing&) {
                }
            }
            break;

        case Family::DualBand4:
        case Family::TunableBandPass4: {
            const double a = dual_band_a(device);
            for (const auto& pk : rep.peaks) {
                checks.push_back({"peak at E = " + label_energy(pk.position), pout(pk.position),
                                  pk.height});
            }
            const double lo = std::min(u[0], u[1]);
            const double hi = std::max(u[0], u[1]);
            if (lo == 0.0 && hi > 0.0) {
                const double lim = 1.0 / std::pow(1.0 + 2.0 * a * a, 2);
                checks.push_back({"zero-energy limit", pout(small_energy(device)), lim});

                constexpr std::size_t n = 20000;
                std::vector<double> vals(n);
                for (std::size_t i = 0; i < n; ++i) {
                    vals[i] = pout(2.0 * hi * static_cast<double>(i + 1) / n);
                }
                std::size_t maxima = 0;
                for (std::size_t i = 1; i + 1 < n; ++i) {
                    if (vals[i] > vals[i - 1] && vals[i] >= vals[i + 1] && vals[i] > 1e-3) {
                        ++maxima;
                    }
                }
                checks.push_back({"surviving peaks", static_cast<double>(maxima), 1.0});
            }
            if (device.family == Family::TunableBandPass4 && lo == 0.0 && hi > 0.0) {
                constexpr std::size_t n = 1000;
                double dev = 0.0;
                for (std::size_t i = 0; i < n; ++i) {
                    const double e = hi * (0.01 + 0.98 * static_cast<double>(i) / (n - 1));
                    dev = std::max(dev, std::abs(pout(e) - 0.25));
                }
                checks.push_back({"plateau deviation from 1/4", dev, 0.0});

                // Sluice gate: J = integral of rho P dE over (0, U) with rho = 1.
                constexpr std::size_t m = 2000;
                double integral = 0.0;
                double prev_e = hi * 1e-9;
                double prev_p = pout(prev_e);
                for (std::size_t i = 1; i <= m; ++i) {
                    const double e = hi * static_cast<double>(i) / m;
                    const double pe = pout(e);
                    integral += 0.5 * (pe + prev_p) * (e - prev_e);
                    prev_e = e;
                    prev_p = pe;
                }
                checks.push_back({"sluice flux J/(rho U)", integral / hi, 0.25});
            }
            break;
        }

        case Family::MultiBand2r: {
            const std::size_t r = p.r;
            const ComplexMatrix& g = p.g;
            for (const auto& [value, members] : positive_groups(u)) {
                Complex amp{};
                double aggregate_pred = 0.0;
                for (std::size_t j = 1; j < r; ++j) {
                    Complex s{};
                    for (std::size_t l : members) {
                        s += g(j, l) * std::conj(g(0, l));
                    }
                    aggregate_pred += 4.0 * std::norm(s);
                    if (j == 1) {
                        amp = s;
                    }
                }
                const std::string where = " at E = " + label_energy(value);
                checks.push_back({(members.size() > 1 ? "merged peak" : "peak") + where,
                                  pout(value), 4.0 * std::norm(amp)});
                double aggregate = 0.0;
                const auto probs = line_probabilities(device, value);
                for (std::size_t j = 1; j < r; ++j) {
                    aggregate += probs[j];
                }
                checks.push_back({"aggregated outputs" + where, aggregate, aggregate_pred});
            }
            bool all_equal = true;
            for (double x : u) {
                all_equal = all_equal && x == u[0];
            }
            if (all_equal) {
                double worst = 0.0;
                const double top = std::max(3.0 * std::abs(u[0]), 1.0);
                for (std::size_t i = 1; i <= 3000; ++i) {
                    worst = std::max(worst, pout(top * static_cast<double>(i) / 3000.0));
                }
                checks.push_back({"equal controls suppress the output", worst, 0.0});
            }
            Complex zero_amp{};
            bool any_zero = false;
            for (std::size_t l = 0; l < r; ++l) {
                if (u[l] == 0.0) {
                    any_zero = true;
                    zero_amp += 2.0 * g(1, l) * std::conj(g(0, l)) / (1.0 + p.a * p.a);
                }
            }
            if (any_zero) {
                checks.push_back(
                    {"zero-energy limit", pout(small_energy(device)), std::norm(zero_amp)});
            }
            break;
        }

        case Family::Branching2r: {
            const std::size_t r = p.r;
            const double rd = static_cast<double>(r);
            const double a2 = p.a * p.a;
            for (const auto& pk : rep.peaks) {
                checks.push_back({pk.kind + " P_out" + std::to_string(pk.output_line + 1) +
                                      " at E = " + label_energy(pk.position),
                                  pout(pk.position, pk.output_line), pk.height});
            }
            if (u[0] == 0.0) {
                // Drain amplitude 2a/(1 + a^2(k+1)) with k = r - 1 outputs.
                const ScatteringMatrix sm = smatrix(device.coupling, device.env, 1.0);
                checks.push_back({"drain amplitude |S_drain,in|", std::abs(sm.s(r, 0)),
                                  2.0 * p.a / (1.0 + a2 * rd)});

                double h0 = 0.0;
                for (std::size_t l = 1; l < r; ++l) {
                    h0 += u[l] == 0.0 ? 1.0 : 0.0;
                }
                const double k = rd - 1.0;
                const double lim = 2.0 / (1.0 + a2 * rd) * (1.0 + h0 + 1.0 / a2) /
                                   (1.0 + k + (1.0 + k - h0) / a2);
                const double e0 = small_energy(device);
                for (std::size_t j = 1; j < r; ++j) {
                    checks.push_back({"zero-energy limit P_out" + std::to_string(j + 1) +
                                          (u[j] == 0.0 ? " (zeroed control)" : ""),
                                      pout(e0, j), lim * lim});
                }
            }
            break;
        }
    }
    return checks;
}

}  // namespace qstar
