#include "qstar/cli.hpp"

#include "qstar/approx.hpp"
#include "qstar/barrier.hpp"
#include "qstar/config.hpp"
#include "qstar/errors.hpp"
#include "qstar/filters.hpp"
#include "qstar/parallel.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

namespace qstar {

namespace {

// CODATA exact values.
constexpr double planck = 6.62607015e-34;         // J s
constexpr double electron_mass = 9.1093837015e-31;  // kg
constexpr double electron_volt = 1.602176634e-19;   // J

struct Options {
    std::string config_path;
    std::optional<std::string> out_path;
    std::optional<std::string> format;
    std::optional<unsigned> threads;
    bool checks = false;
    std::optional<double> mev;
    std::optional<double> nm;
};

/// Thrown by a command whose numerical step failed.
struct NumericalFailure {
    std::string message;
};

std::string csv_line(const std::vector<std::string>& cells) {
    std::string line;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i > 0) {
            line += ',';
        }
        line += cells[i];
    }
    line += '\n';
    return line;
}

std::string resolve_format(const Options& opt, const RunConfig& cfg, const char* fallback) {
    std::string f = opt.format ? *opt.format : cfg.format.value_or(fallback);
    if (f != "csv" && f != "json") {
        throw ConfigError("format must be csv or json, got \"" + f + "\"");
    }
    return f;
}

unsigned resolve_thread_count(const Options& opt, const RunConfig& cfg) {
    if (opt.threads) {
        return *opt.threads;
    }
    if (const char* env = std::getenv("QSTAR_THREADS"); env != nullptr && *env != '\0') {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (*end != '\0' || v < 0) {
            throw ConfigError(std::string("QSTAR_THREADS must be a non-negative integer, got \"") +
                              env + "\"");
        }
        return static_cast<unsigned>(v);
    }
    return cfg.threads.value_or(0);
}

const EnergyGrid& require_grid(const RunConfig& cfg) {
    if (!cfg.grid) {
        throw ConfigError("this command needs a \"grid\" section");
    }
    return *cfg.grid;
}

FTCoupling require_ft(const RunConfig& cfg) {
    const Coupling* c = cfg.device ? &cfg.device->coupling : cfg.coupling ? &*cfg.coupling : nullptr;
    if (c == nullptr) {
        throw ConfigError("this command needs a \"device\" or \"coupling\" section");
    }
    if (const auto* ft = std::get_if<FTCoupling>(c)) {
        return *ft;
    }
    throw ConfigError("the web approximation needs a scale-invariant (ft) coupling");
}

std::string cmd_sweep(const RunConfig& cfg, const Options& opt, int& status, std::ostream& err) {
    const std::string format = resolve_format(opt, cfg, "csv");
    const std::vector<double> grid = require_grid(cfg).values();
    const unsigned threads = resolve_thread_count(opt, cfg);
    SweepTable table;
    if (cfg.device) {
        table = sweep(*cfg.device, grid, threads);
    } else if (cfg.coupling) {
        std::vector<std::string> labels{"P_refl"};
        for (std::size_t j = 1; j < cfg.env.lines(); ++j) {
            labels.push_back("P" + std::to_string(j + 1));
        }
        table = sweep(*cfg.coupling, cfg.env, std::move(labels), grid, threads);
    } else {
        throw ConfigError("sweep needs a \"device\" or \"coupling\" section");
    }

    std::optional<std::string> failure;
    for (const auto& row : table.rows) {
        if (!row.message.empty()) {
            err << "E=" << format_number(row.energy) << ": " << row.message << '\n';
        }
        if (!row.ok && !failure) {
            failure = "evaluation failed at E=" + format_number(row.energy) + ": " + row.message;
        }
    }

    std::string text;
    if (format == "csv") {
        std::vector<std::string> head{"E"};
        head.insert(head.end(), table.labels.begin(), table.labels.end());
        text += csv_line(head);
        for (const auto& row : table.rows) {
            std::vector<std::string> cells{format_number(row.energy)};
            for (double p : row.probabilities) {
                cells.push_back(format_number(p));
            }
            text += csv_line(cells);
        }
    } else {
        nlohmann::ordered_json rows = nlohmann::ordered_json::array();
        for (const auto& row : table.rows) {
            nlohmann::ordered_json rec;
            rec["E"] = row.energy;
            for (std::size_t j = 0; j < table.labels.size(); ++j) {
                rec[table.labels[j]] = row.probabilities[j];
            }
            rec["ok"] = row.ok;
            if (!row.message.empty()) {
                rec["message"] = row.message;
            }
            rows.push_back(std::move(rec));
        }
        nlohmann::ordered_json doc;
        doc["labels"] = table.labels;
        doc["rows"] = std::move(rows);
        text = doc.dump(2) + "\n";
    }
    if (failure) {
        err << "numerical failure: " << *failure << '\n';
        status = exit_numerical;
    }
    return text;
}

std::string cmd_predict(const RunConfig& cfg, const Options& opt) {
    if (!cfg.device) {
        throw ConfigError("predict needs a \"device\" section");
    }
    const std::string format = resolve_format(opt, cfg, "json");
    const PredictionReport rep = predict(*cfg.device);
    std::vector<ModeCheck> checks;
    if (opt.checks) {
        checks = special_mode_checks(*cfg.device);
    }
    if (format == "csv") {
        std::string text = csv_line({"kind", "output_line", "position", "height"});
        for (const auto& p : rep.peaks) {
            text += csv_line({p.kind, std::to_string(p.output_line + 1), format_number(p.position),
                              format_number(p.height)});
        }
        return text;
    }
    json doc = prediction_to_json(rep);
    if (opt.checks) {
        json arr = json::array();
        for (const auto& c : checks) {
            arr.push_back({{"name", c.name}, {"measured", c.measured}, {"predicted", c.predicted}});
        }
        doc["checks"] = std::move(arr);
    }
    return doc.dump(2) + "\n";
}

std::string cmd_barrier(const RunConfig& cfg, const Options& opt, std::ostream& err) {
    if (!cfg.barrier) {
        throw ConfigError("barrier needs a \"barrier\" section");
    }
    const BarrierConfig& bc = *cfg.barrier;
    const EnergyGrid& g = require_grid(cfg);
    const std::string format = resolve_format(opt, cfg, "csv");
    if (bc.epsilon && g.spacing != Spacing::Linear) {
        throw ConfigError("mollification needs a linear grid");
    }
    const std::vector<double> grid = g.values();
    std::vector<Complex> r(grid.size());
    std::vector<std::string> notes(grid.size());
    parallel_for(grid.size(), resolve_thread_count(opt, cfg), [&](std::size_t i) {
        ReflectionAmplitude ra;
        try {
            ra = reflection(bc.profile, grid[i]);
        } catch (const ThresholdEnergy&) {
            ra = reflection(bc.profile, grid[i] + 1e-9);
            notes[i] = "threshold: evaluated at " + format_number(grid[i] + 1e-9);
        }
        if (ra.saturated) {
            notes[i] += notes[i].empty() ? "saturated" : "; saturated";
        }
        r[i] = ra.r;
    });
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!notes[i].empty()) {
            err << "E=" << format_number(grid[i]) << ": " << notes[i] << '\n';
        }
    }
    std::vector<double> p(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        p[i] = transmission_from_reflection(r[i], bc.beta);
    }
    std::vector<double> smooth;
    if (bc.epsilon) {
        smooth = mollify(grid, p, *bc.epsilon);
    }
    std::vector<Envelope> env;
    if (bc.envelope_u) {
        env = oscillation_envelope(*bc.envelope_u, bc.beta, grid);
    }

    std::vector<std::string> head{"E", "R_re", "R_im", "P"};
    if (!smooth.empty()) {
        head.emplace_back("P_mollified");
    }
    if (!env.empty()) {
        head.emplace_back("P_min");
        head.emplace_back("P_max");
    }
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        std::vector<double> row{grid[i], r[i].real(), r[i].imag(), p[i]};
        if (!smooth.empty()) {
            row.push_back(smooth[i]);
        }
        if (!env.empty()) {
            row.push_back(env[i].p_min);
            row.push_back(env[i].p_max);
        }
        rows.push_back(std::move(row));
    }
    if (format == "csv") {
        std::string text = csv_line(head);
        for (const auto& row : rows) {
            std::vector<std::string> cells;
            for (double x : row) {
                cells.push_back(format_number(x));
            }
            text += csv_line(cells);
        }
        return text;
    }
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& row : rows) {
        nlohmann::ordered_json rec;
        for (std::size_t k = 0; k < head.size(); ++k) {
            rec[head[k]] = row[k];
        }
        arr.push_back(std::move(rec));
    }
    nlohmann::ordered_json doc;
    doc["rows"] = std::move(arr);
    return doc.dump(2) + "\n";
}

std::string cmd_approx_build(const RunConfig& cfg, const Options& opt) {
    const FTCoupling ft = require_ft(cfg);
    // The netlist is always JSON; a csv default in the config is ignored.
    if (opt.format && *opt.format != "json") {
        throw ConfigError("approx-build writes a JSON netlist only");
    }
    const double d = cfg.approx ? cfg.approx->d : ApproxConfig{}.d;
    return web_to_json(build_web(ft, d)).dump(2) + "\n";
}

std::string cmd_approx_converge(const RunConfig& cfg, const Options& opt) {
    const FTCoupling ft = require_ft(cfg);
    if (!cfg.approx || cfg.approx->d_list.empty()) {
        throw ConfigError("approx-converge needs approx.d_list");
    }
    const std::string format = resolve_format(opt, cfg, "csv");
    const ApproxConfig& ac = *cfg.approx;
    ConvergenceTable table;
    try {
        table = convergence_study(ft, cfg.env, ac.energy, ac.d_list, resolve_thread_count(opt, cfg));
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        throw NumericalFailure{std::string("convergence study at E=") + format_number(ac.energy) +
                               " failed: " + e.what()};
    }
    if (format == "csv") {
        const std::string slope = table.slope ? format_number(*table.slope) : "";
        std::string text = csv_line({"d", "error", "slope"});
        for (const auto& row : table.rows) {
            text += csv_line({format_number(row.d), format_number(row.error), slope});
        }
        return text;
    }
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (const auto& row : table.rows) {
        nlohmann::ordered_json rec;
        rec["d"] = row.d;
        rec["error"] = row.error;
        rows.push_back(std::move(rec));
    }
    nlohmann::ordered_json doc;
    doc["rows"] = std::move(rows);
    doc["slope"] = table.slope ? nlohmann::ordered_json(*table.slope) : nlohmann::ordered_json();
    return doc.dump(2) + "\n";
}

std::string cmd_validate(const RunConfig& cfg, const Options& opt, int& status,
                         std::ostream& err) {
    const Coupling* c = cfg.device ? &cfg.device->coupling : cfg.coupling ? &*cfg.coupling : nullptr;
    if (c == nullptr) {
        throw ConfigError("validate needs a \"coupling\" or \"device\" section");
    }
    const std::string format = resolve_format(opt, cfg, "json");
    const GeneralBC bc = to_general(*c);
    const ValidationReport rep = validate(bc);
    if (!rep.ok) {
        err << "invalid coupling: rank " << rep.rank << " of " << bc.lines()
            << ", A B^* Hermitian defect " << format_number(rep.hermitian_defect) << '\n';
        status = exit_config;
    }
    if (format == "csv") {
        return csv_line({"n", "rank", "hermitian_defect", "ok"}) +
               csv_line({std::to_string(bc.lines()), std::to_string(rep.rank),
                         format_number(rep.hermitian_defect), rep.ok ? "true" : "false"});
    }
    nlohmann::ordered_json doc;
    doc["n"] = bc.lines();
    doc["rank"] = rep.rank;
    doc["hermitian_defect"] = rep.hermitian_defect;
    doc["ok"] = rep.ok;
    return doc.dump(2) + "\n";
}

std::string cmd_units(const Options& opt) {
    const std::string format = opt.format.value_or("csv");
    if (format != "csv" && format != "json") {
        throw ConfigError("format must be csv or json");
    }
    double mev = 0.0;
    double nm = 0.0;
    if (opt.mev.has_value() == opt.nm.has_value()) {
        throw ConfigError("units needs exactly one of --mev or --nm");
    }
    if (opt.mev) {
        if (!(*opt.mev > 0.0)) {
            throw ConfigError("energy must be positive");
        }
        mev = *opt.mev;
        nm = electron_wavelength_nm(mev);
    } else {
        if (!(*opt.nm > 0.0)) {
            throw ConfigError("wavelength must be positive");
        }
        nm = *opt.nm;
        mev = electron_energy_mev(nm);
    }
    if (format == "csv") {
        return csv_line({"energy_meV", "wavelength_nm"}) +
               csv_line({format_number(mev), format_number(nm)});
    }
    nlohmann::ordered_json doc;
    doc["energy_meV"] = mev;
    doc["wavelength_nm"] = nm;
    return doc.dump(2) + "\n";
}

void emit(const std::string& text, const Options& opt, const RunConfig* cfg, std::ostream& out) {
    std::optional<std::string> path = opt.out_path;
    if (!path && cfg != nullptr) {
        path = cfg->out_path;
    }
    if (!path) {
        out << text;
        return;
    }
    std::ofstream file(*path, std::ios::binary);
    if (!file) {
        throw ConfigError("cannot write " + *path);
    }
    file << text;
}

}  // namespace

double electron_wavelength_nm(double mev) {
    const double joules = mev * 1e-3 * electron_volt;
    return planck / std::sqrt(2.0 * electron_mass * joules) * 1e9;
}

double electron_energy_mev(double nm) {
    const double p = planck / (nm * 1e-9);
    return p * p / (2.0 * electron_mass) / electron_volt * 1e3;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Star-graph spectral filter calculator"};
    app.require_subcommand(1);
    Options opt;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", opt.config_path, "JSON run configuration")->required();
        sub->add_option("--out", opt.out_path, "Output file (default: standard output)");
        sub->add_option("--format", opt.format, "csv or json");
        sub->add_option("--threads", opt.threads, "Worker threads (0 = one per core)");
    };
    CLI::App* sweep_cmd = app.add_subcommand("sweep", "Transmission probabilities over an energy grid");
    CLI::App* predict_cmd = app.add_subcommand("predict", "Closed-form peak, width and pole predictions");
    CLI::App* barrier_cmd = app.add_subcommand("barrier", "Reflection from a control-line profile");
    CLI::App* build_cmd = app.add_subcommand("approx-build", "Delta-web netlist for an FT coupling");
    CLI::App* converge_cmd =
        app.add_subcommand("approx-converge", "Web-to-vertex error as the web shrinks");
    CLI::App* validate_cmd = app.add_subcommand("validate", "Check a coupling's (A, B) condition");
    CLI::App* units_cmd = app.add_subcommand("units", "Electron energy / wavelength conversion");
    for (CLI::App* sub : {sweep_cmd, predict_cmd, barrier_cmd, build_cmd, converge_cmd, validate_cmd}) {
        add_common(sub);
    }
    predict_cmd->add_flag("--checks", opt.checks, "Also evaluate the special-mode checks");
    units_cmd->add_option("--mev", opt.mev, "Energy in meV");
    units_cmd->add_option("--nm", opt.nm, "Wavelength in nm");
    units_cmd->add_option("--out", opt.out_path, "Output file (default: standard output)");
    units_cmd->add_option("--format", opt.format, "csv or json");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? exit_ok : exit_config;
    }

    int status = exit_ok;
    try {
        if (units_cmd->parsed()) {
            emit(cmd_units(opt), opt, nullptr, out);
            return exit_ok;
        }
        const RunConfig cfg = load_config(opt.config_path);
        std::string text;
        if (sweep_cmd->parsed()) {
            text = cmd_sweep(cfg, opt, status, err);
        } else if (predict_cmd->parsed()) {
            text = cmd_predict(cfg, opt);
        } else if (barrier_cmd->parsed()) {
            text = cmd_barrier(cfg, opt, err);
        } else if (build_cmd->parsed()) {
            text = cmd_approx_build(cfg, opt);
        } else if (converge_cmd->parsed()) {
            text = cmd_approx_converge(cfg, opt);
        } else if (validate_cmd->parsed()) {
            text = cmd_validate(cfg, opt, status, err);
        }
        emit(text, opt, &cfg, out);
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return exit_config;
    } catch (const NumericalFailure& f) {
        err << "numerical failure: " << f.message << '\n';
        return exit_numerical;
    } catch (const Error& e) {
        err << "numerical failure: " << e.what() << '\n';
        return exit_numerical;
    }
    return status;
}

}  // namespace qstar
