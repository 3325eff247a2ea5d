#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace qstar {

/// Exit codes of the command-line tool.
enum ExitCode : int {
    exit_ok = 0,
    exit_config = 1,
    exit_numerical = 2,
};

/// de Broglie wavelength in nm of an electron with kinetic energy `mev` meV.
double electron_wavelength_nm(double mev);

/// Inverse of electron_wavelength_nm.
double electron_energy_mev(double nm);

/// Runs the tool with `args` (not including the program name). Results go to
/// `out` unless --out names a file; diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace qstar
