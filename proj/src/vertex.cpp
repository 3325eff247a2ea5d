#include "qstar/vertex.hpp"

#include "qstar/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <type_traits>
#include <utility>

namespace qstar {

ValidationReport validate(const GeneralBC& bc) {
    if (!bc.a.is_square() || !bc.b.is_square() || bc.a.rows() != bc.b.rows()) {
        throw DimensionMismatch("validate: A and B must be square matrices of equal size");
    }
    ValidationReport report;
    report.rank = rank_augmented(bc.a, bc.b);
    const ComplexMatrix abh = bc.a * bc.b.adjoint();
    report.hermitian_defect = hermitian_defect(abh);
    const double scale = std::max(1.0, abh.max_abs());
    report.ok = report.rank == bc.lines() && report.hermitian_defect <= 1e-12 * scale &&
                bc.a.all_finite() && bc.b.all_finite();
    return report;
}

STForm make_st_form(ComplexMatrix s, ComplexMatrix t) {
    if (!s.is_square() || s.rows() != t.rows()) {
        throw DimensionMismatch("ST-form: S must be r×r and T must have r rows");
    }
    const double scale = std::max(1.0, s.max_abs());
    if (hermitian_defect(s) > 1e-12 * scale) {
        throw InvalidArgument("ST-form: S is not Hermitian");
    }
    const std::size_t r = s.rows();
    return STForm{r, std::move(s), std::move(t)};
}

FTCoupling make_ft(ComplexMatrix t) {
    if (!t.all_finite()) {
        throw InvalidArgument("FT coupling: T has non-finite entries");
    }
    return FTCoupling{std::move(t)};
}

DeltaCoupling make_delta(std::size_t n, double alpha) {
    if (n == 0) {
        throw InvalidArgument("delta coupling needs at least one line");
    }
    if (!std::isfinite(alpha)) {
        throw InvalidArgument("delta coupling strength must be finite");
    }
    return DeltaCoupling{n, alpha};
}

GeneralBC to_general(const STForm& st) {
    const std::size_t r = st.r;
    const std::size_t n = st.lines();
    if (st.s.rows() != r || st.s.cols() != r || st.t.rows() != r) {
        throw DimensionMismatch("ST-form: inconsistent block sizes");
    }
    const std::size_t m = n - r;
    // A = −(S 0; −T† I),  B = (I T; 0 0)
    ComplexMatrix a(n, n);
    ComplexMatrix b(n, n);
    a.set_block(0, 0, -st.s);
    a.set_block(r, 0, st.t.adjoint());
    a.set_block(r, r, -ComplexMatrix::identity(m));
    b.set_block(0, 0, ComplexMatrix::identity(r));
    b.set_block(0, r, st.t);
    return GeneralBC{std::move(a), std::move(b)};
}

GeneralBC to_general(const FTCoupling& ft) {
    return to_general(STForm{ft.r(), ComplexMatrix::zeros(ft.r(), ft.r()), ft.t});
}

GeneralBC to_general(const DeltaCoupling& delta) {
    const std::size_t n = delta.n;
    ComplexMatrix a(n, n);
    ComplexMatrix b(n, n);
    // Row 0: Σψ'_j − α ψ_1 = 0. Rows j ≥ 1: ψ_j − ψ_{j+1} = 0 (zero-based j-1, j).
    a(0, 0) = -delta.alpha;
    for (std::size_t j = 0; j < n; ++j) {
        b(0, j) = 1.0;
    }
    for (std::size_t j = 1; j < n; ++j) {
        a(j, j - 1) = 1.0;
        a(j, j) = -1.0;
    }
    return GeneralBC{std::move(a), std::move(b)};
}

GeneralBC to_general(const Coupling& coupling) {
    return std::visit(
        [](const auto& c) -> GeneralBC {
            if constexpr (std::is_same_v<std::decay_t<decltype(c)>, GeneralBC>) {
                return c;
            } else {
                return to_general(c);
            }
        },
        coupling);
}

std::size_t line_count(const Coupling& coupling) {
    return std::visit(
        [](const auto& c) -> std::size_t {
            if constexpr (std::is_same_v<std::decay_t<decltype(c)>, DeltaCoupling>) {
                return c.n;
            } else {
                return c.lines();
            }
        },
        coupling);
}

ComplexMatrix energy_one_form(const GeneralBC& bc) {
    const Complex i{0.0, 1.0};
    const ComplexMatrix lhs = bc.a + i * bc.b;
    const ComplexMatrix rhs = bc.a - i * bc.b;
    return -solve_linear(lhs, rhs);
}

}  // namespace qstar
