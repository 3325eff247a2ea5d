#pragma once

// Vertex couplings of a star graph. A coupling of n lines is the condition
// A·Ψ(0) + B·Ψ'(0) = 0; the other representations here all expand to that form.

#include "qstar/numerics.hpp"

#include <cstddef>
#include <variant>

namespace qstar {

/// General boundary condition A·Ψ(0) + B·Ψ'(0) = 0.
struct GeneralBC {
    ComplexMatrix a;
    ComplexMatrix b;

    [[nodiscard]] std::size_t lines() const noexcept { return a.rows(); }
};

/// Block form (I T; 0 0)Ψ' = (S 0; -T† I)Ψ with S Hermitian r×r and T r×(n−r).
struct STForm {
    std::size_t r = 0;
    ComplexMatrix s;
    /// r×(n−r); a 0×n or n×0 matrix still carries its other dimension.
    ComplexMatrix t;

    [[nodiscard]] std::size_t lines() const noexcept { return r + t.cols(); }
};

/// Scale-invariant (Fülöp–Tsutsui) coupling: the ST-form with S = 0.
/// Lines 0..r-1 are the "row" side of T, lines r..n-1 the "column" side.
struct FTCoupling {
    ComplexMatrix t;

    [[nodiscard]] std::size_t r() const noexcept { return t.rows(); }
    [[nodiscard]] std::size_t lines() const noexcept { return t.rows() + t.cols(); }
};

/// Continuous wave function, sum of outgoing derivatives equal to alpha·ψ(0).
struct DeltaCoupling {
    std::size_t n = 2;
    double alpha = 0.0;
};

using Coupling = std::variant<GeneralBC, STForm, FTCoupling, DeltaCoupling>;

struct ValidationReport {
    std::size_t rank = 0;
    double hermitian_defect = 0.0;
    bool ok = false;
};

/// Checks rank(A|B) = n and that A·B† is Hermitian (relative tolerance 1e-12).
ValidationReport validate(const GeneralBC& bc);

STForm make_st_form(ComplexMatrix s, ComplexMatrix t);
FTCoupling make_ft(ComplexMatrix t);
DeltaCoupling make_delta(std::size_t n, double alpha);

GeneralBC to_general(const STForm& st);
GeneralBC to_general(const FTCoupling& ft);
GeneralBC to_general(const DeltaCoupling& delta);
GeneralBC to_general(const Coupling& coupling);

std::size_t line_count(const Coupling& coupling);

/// Unitary U with (U − I)Ψ(0) + i(U + I)Ψ'(0) = 0, i.e. the zero-potential
/// scattering matrix at unit wavenumber.
ComplexMatrix energy_one_form(const GeneralBC& bc);

}  // namespace qstar
