#pragma once

// A web of short lines with delta couplings and vector potentials whose
// scattering matrix approaches that of a given scale-invariant vertex as the
// length parameter d goes to zero.

#include "qstar/numerics.hpp"
#include "qstar/scattering.hpp"
#include "qstar/vertex.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace qstar {

/// Short line joining endpoints j < l, of length d/gamma. At most one of
/// beta (delta strength at its midpoint) and a (vector potential, stored as
/// (q/hbar)·A, oriented from j to l) is nonzero.
struct WebLink {
    std::size_t j = 0;
    std::size_t l = 0;
    double gamma = 1.0;
    double beta = 0.0;
    double a = 0.0;
};

struct DeltaWeb {
    std::size_t n = 0;
    std::size_t r = 0;
    double d = 0.0;
    std::vector<double> alphas;  ///< delta strength at each endpoint
    std::vector<WebLink> links;  ///< sorted by (j, l)
};

/// Throws InvalidArgument for d <= 0 or non-finite T.
DeltaWeb build_web(const FTCoupling& ft, double d);

/// Throws ResonantLength when a link is at an internal resonance.
ComplexMatrix zmatrix(const DeltaWeb& web, double energy);

/// S_d = −I + 2id·D(Z + idD²)⁻¹D with D = diag(sqrt k_j).
ScatteringMatrix smatrix_web(const DeltaWeb& web, const LineEnvironment& env, double energy);

struct ConvergenceRow {
    double d = 0.0;
    double error = 0.0;
};

struct ConvergenceTable {
    std::vector<ConvergenceRow> rows;
    /// Least-squares slope of log(error) against log(d); empty with fewer than two usable rows.
    std::optional<double> slope;
};

/// error(d) = max |S_d − S_FT| over all entries, for each d in `ds`.
ConvergenceTable convergence_study(const FTCoupling& ft, const LineEnvironment& env, double energy,
                                   std::span<const double> ds, unsigned threads = 1);

}  // namespace qstar
