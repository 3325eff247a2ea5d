#pragma once

// JSON run configuration. Complex numbers are written as [re, im] pairs (a
// plain number is accepted for a real entry); matrices are arrays of rows.
// Line indices in files are one-based.

#include "qstar/approx.hpp"
#include "qstar/barrier.hpp"
#include "qstar/filters.hpp"
#include "qstar/numerics.hpp"
#include "qstar/scattering.hpp"
#include "qstar/vertex.hpp"

#include <json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace qstar {

using json = nlohmann::json;

enum class Spacing { Linear, Log };

struct EnergyGrid {
    double e_min = 0.0;
    double e_max = 0.0;
    std::size_t points = 0;
    Spacing spacing = Spacing::Linear;

    [[nodiscard]] std::vector<double> values() const;
};

struct BarrierConfig {
    PotentialProfile profile;
    double beta = 8.0;
    /// Half-width of the mollifier; absent means no mollified column.
    std::optional<double> epsilon;
    /// Control height used for the oscillation envelope; absent means none.
    std::optional<double> envelope_u;
};

struct ApproxConfig {
    double d = 1e-3;
    std::vector<double> d_list;
    double energy = 1.0;
};

struct RunConfig {
    std::optional<FilterDevice> device;
    std::optional<Coupling> coupling;
    LineEnvironment env;
    std::optional<EnergyGrid> grid;
    std::optional<BarrierConfig> barrier;
    std::optional<ApproxConfig> approx;
    std::optional<std::string> out_path;
    std::optional<std::string> format;
    std::optional<unsigned> threads;
};

Complex complex_from_json(const json& j);
json complex_to_json(Complex z);
ComplexMatrix matrix_from_json(const json& j);
json matrix_to_json(const ComplexMatrix& m);

Coupling coupling_from_json(const json& j);
FilterDevice device_from_json(const json& j);
PotentialProfile profile_from_json(const json& j);
EnergyGrid grid_from_json(const json& j);

/// Throws ConfigError with a message naming the offending field.
RunConfig config_from_json(const json& j);
RunConfig load_config(const std::string& path);

json web_to_json(const DeltaWeb& web);
json prediction_to_json(const PredictionReport& report);

}  // namespace qstar
