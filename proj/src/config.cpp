#include "qstar/config.hpp"

#include "qstar/errors.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace qstar {

namespace {

const json& require(const json& j, const char* key) {
    if (!j.is_object() || !j.contains(key)) {
        throw ConfigError(std::string("missing field \"") + key + "\"");
    }
    return j.at(key);
}

double number(const json& j, const char* what) {
    if (!j.is_number()) {
        throw ConfigError(std::string(what) + " must be a number");
    }
    const double x = j.get<double>();
    if (!std::isfinite(x)) {
        throw ConfigError(std::string(what) + " must be finite");
    }
    return x;
}

double number_or(const json& j, const char* key, double fallback) {
    return j.contains(key) ? number(j.at(key), key) : fallback;
}

std::vector<double> number_list(const json& j, const char* what) {
    if (!j.is_array()) {
        throw ConfigError(std::string(what) + " must be an array of numbers");
    }
    std::vector<double> out;
    for (const auto& x : j) {
        out.push_back(number(x, what));
    }
    return out;
}

}  // namespace

std::vector<double> EnergyGrid::values() const {
    std::vector<double> out(points);
    const double span = static_cast<double>(points - 1);
    for (std::size_t i = 0; i < points; ++i) {
        const double t = static_cast<double>(i) / span;
        out[i] = spacing == Spacing::Linear
                     ? e_min + (e_max - e_min) * t
                     : std::exp(std::log(e_min) + (std::log(e_max) - std::log(e_min)) * t);
    }
    out.front() = e_min;
    out.back() = e_max;
    return out;
}

Complex complex_from_json(const json& j) {
    if (j.is_number()) {
        return {number(j, "matrix entry"), 0.0};
    }
    if (j.is_array() && j.size() == 2) {
        return {number(j[0], "real part"), number(j[1], "imaginary part")};
    }
    throw ConfigError("complex entries must be a number or an [re, im] pair");
}

json complex_to_json(Complex z) { return json::array({z.real(), z.imag()}); }

ComplexMatrix matrix_from_json(const json& j) {
    if (!j.is_array() || j.empty()) {
        throw ConfigError("a matrix must be a non-empty array of rows");
    }
    const std::size_t rows = j.size();
    if (!j[0].is_array()) {
        throw ConfigError("matrix rows must be arrays");
    }
    const std::size_t cols = j[0].size();
    ComplexMatrix m(rows, cols);
    for (std::size_t i = 0; i < rows; ++i) {
        if (!j[i].is_array() || j[i].size() != cols) {
            throw ConfigError("matrix rows must all have " + std::to_string(cols) + " entries");
        }
        for (std::size_t k = 0; k < cols; ++k) {
            m(i, k) = complex_from_json(j[i][k]);
        }
    }
    return m;
}

json matrix_to_json(const ComplexMatrix& m) {
    json rows = json::array();
    for (std::size_t i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (std::size_t k = 0; k < m.cols(); ++k) {
            row.push_back(complex_to_json(m(i, k)));
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

Coupling coupling_from_json(const json& j) {
    const std::string type = require(j, "type").get<std::string>();
    try {
        if (type == "general") {
            GeneralBC bc{matrix_from_json(require(j, "A")), matrix_from_json(require(j, "B"))};
            if (!bc.a.is_square() || !bc.b.is_square() || bc.a.rows() != bc.b.rows()) {
                throw ConfigError("A and B must be square and of equal size");
            }
            return bc;
        }
        if (type == "st") {
            return make_st_form(matrix_from_json(require(j, "S")),
                                matrix_from_json(require(j, "T")));
        }
        if (type == "ft") {
            return make_ft(matrix_from_json(require(j, "T")));
        }
        if (type == "delta") {
            const double n = number(require(j, "n"), "n");
            if (n < 1.0 || n != std::floor(n)) {
                throw ConfigError("n must be a positive integer");
            }
            return make_delta(static_cast<std::size_t>(n), number_or(j, "alpha", 0.0));
        }
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        throw ConfigError(std::string("coupling: ") + e.what());
    }
    throw ConfigError("unknown coupling type \"" + type + "\" (general, st, ft, delta)");
}

FilterDevice device_from_json(const json& j) {
    const std::string name = require(j, "family").get<std::string>();
    const auto family = parse_family(name);
    if (!family) {
        throw ConfigError("unknown device family \"" + name + "\"");
    }
    DeviceParams p;
    p.a = number_or(j, "a", p.a);
    p.b = number_or(j, "b", p.b);
    p.c = number_or(j, "c", p.c);
    p.d = number_or(j, "d", p.d);
    p.alpha = number_or(j, "alpha", p.alpha);
    if (j.contains("r")) {
        const double r = number(j.at("r"), "r");
        if (r < 0.0 || r != std::floor(r)) {
            throw ConfigError("r must be a non-negative integer");
        }
        p.r = static_cast<std::size_t>(r);
    }
    if (j.contains("G")) {
        p.g = matrix_from_json(j.at("G"));
    }
    std::vector<double> controls;
    if (j.contains("controls")) {
        controls = number_list(j.at("controls"), "controls");
    }
    try {
        return make_device(*family, std::move(p), std::move(controls));
    } catch (const Error& e) {
        throw ConfigError(std::string("device: ") + e.what());
    }
}

PotentialProfile profile_from_json(const json& j) {
    if (!j.is_array()) {
        throw ConfigError("profile must be an array of [length, height] pairs");
    }
    PotentialProfile p;
    for (const auto& seg : j) {
        if (!seg.is_array() || seg.size() != 2) {
            throw ConfigError("profile segments must be [length, height] pairs");
        }
        p.segments.push_back({number(seg[0], "segment length"), number(seg[1], "segment height")});
    }
    try {
        p.check();
    } catch (const Error& e) {
        throw ConfigError(std::string("profile: ") + e.what());
    }
    return p;
}

EnergyGrid grid_from_json(const json& j) {
    EnergyGrid g;
    g.e_min = number(require(j, "E_min"), "E_min");
    g.e_max = number(require(j, "E_max"), "E_max");
    const double points = number(require(j, "points"), "points");
    if (points < 2.0 || points != std::floor(points)) {
        throw ConfigError("grid needs an integer number of points >= 2");
    }
    g.points = static_cast<std::size_t>(points);
    if (!(g.e_min > 0.0)) {
        throw ConfigError("E_min must be positive");
    }
    if (!(g.e_max > g.e_min)) {
        throw ConfigError("E_max must exceed E_min");
    }
    if (j.contains("spacing")) {
        const std::string s = j.at("spacing").get<std::string>();
        if (s == "linear") {
            g.spacing = Spacing::Linear;
        } else if (s == "log") {
            g.spacing = Spacing::Log;
        } else {
            throw ConfigError("spacing must be \"linear\" or \"log\"");
        }
    }
    return g;
}

RunConfig config_from_json(const json& j) {
    if (!j.is_object()) {
        throw ConfigError("configuration must be a JSON object");
    }
    RunConfig cfg;
    try {
        if (j.contains("device")) {
            cfg.device = device_from_json(j.at("device"));
            cfg.env = cfg.device->env;
        }
        if (j.contains("coupling")) {
            if (cfg.device) {
                throw ConfigError("give either \"device\" or \"coupling\", not both");
            }
            cfg.coupling = coupling_from_json(j.at("coupling"));
            const std::size_t n = line_count(*cfg.coupling);
            cfg.env = LineEnvironment::zero(n);
            if (j.contains("potentials")) {
                cfg.env.potentials = number_list(j.at("potentials"), "potentials");
                if (cfg.env.lines() != n) {
                    throw ConfigError("potentials has " + std::to_string(cfg.env.lines()) +
                                      " entries, the coupling has " + std::to_string(n) +
                                      " lines");
                }
            }
        }
        if (j.contains("grid")) {
            cfg.grid = grid_from_json(j.at("grid"));
        }
        if (j.contains("barrier")) {
            const json& b = j.at("barrier");
            BarrierConfig bc;
            bc.profile = profile_from_json(require(b, "profile"));
            bc.beta = number_or(b, "beta", bc.beta);
            if (b.contains("epsilon")) {
                bc.epsilon = number(b.at("epsilon"), "epsilon");
                if (!(*bc.epsilon > 0.0)) {
                    throw ConfigError("epsilon must be positive");
                }
            }
            if (b.contains("envelope_U")) {
                bc.envelope_u = number(b.at("envelope_U"), "envelope_U");
            }
            cfg.barrier = std::move(bc);
        }
        if (j.contains("approx")) {
            const json& a = j.at("approx");
            ApproxConfig ac;
            ac.d = number_or(a, "d", ac.d);
            ac.energy = number_or(a, "energy", ac.energy);
            if (a.contains("d_list")) {
                ac.d_list = number_list(a.at("d_list"), "d_list");
            }
            if (!(ac.d > 0.0)) {
                throw ConfigError("approx.d must be positive");
            }
            for (double d : ac.d_list) {
                if (!(d > 0.0)) {
                    throw ConfigError("approx.d_list entries must be positive");
                }
            }
            cfg.approx = std::move(ac);
        }
        if (j.contains("output")) {
            const json& o = j.at("output");
            if (o.contains("path")) {
                cfg.out_path = o.at("path").get<std::string>();
            }
            if (o.contains("format")) {
                cfg.format = o.at("format").get<std::string>();
            }
        }
        if (j.contains("threads")) {
            const double t = number(j.at("threads"), "threads");
            if (t < 0.0 || t != std::floor(t)) {
                throw ConfigError("threads must be a non-negative integer");
            }
            cfg.threads = static_cast<unsigned>(t);
        }
    } catch (const json::exception& e) {
        throw ConfigError(e.what());
    }
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config file " + path);
    }
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError(path + ": " + e.what());
    }
    return config_from_json(j);
}

json web_to_json(const DeltaWeb& web) {
    json links = json::array();
    for (const auto& l : web.links) {
        links.push_back({{"j", l.j + 1}, {"l", l.l + 1}, {"gamma", l.gamma}, {"beta", l.beta},
                         {"A", l.a}});
    }
    return {{"n", web.n}, {"r", web.r}, {"d", web.d}, {"alphas", web.alphas}, {"links", links}};
}

json prediction_to_json(const PredictionReport& report) {
    json peaks = json::array();
    for (const auto& p : report.peaks) {
        json pk = {{"position", p.position},
                   {"height", p.height},
                   {"output_line", p.output_line + 1},
                   {"kind", p.kind}};
        if (p.limit_height) {
            pk["limit_height"] = *p.limit_height;
        }
        peaks.push_back(std::move(pk));
    }
    return {{"peak_positions", report.peak_positions()},
            {"peak_heights", report.peak_heights()},
            {"peaks", peaks},
            {"bandwidths", report.bandwidths},
            {"poles", report.poles},
            {"asymptote_at_infinity", report.asymptote_at_infinity},
            {"warnings", report.warnings}};
}

}  // namespace qstar
