#pragma once

// Small dense complex linear algebra. Matrices in this library rarely exceed
// 64x64, so everything is row-major std::vector storage with direct methods.

#include <complex>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace qstar {

using Complex = std::complex<double>;

class ComplexMatrix {
public:
    ComplexMatrix() = default;
    ComplexMatrix(std::size_t rows, std::size_t cols);
    ComplexMatrix(std::size_t rows, std::size_t cols, std::vector<Complex> entries);
    /// Row-wise literal, e.g. {{1, 2}, {3, 4}}. All rows must have equal length.
    ComplexMatrix(std::initializer_list<std::initializer_list<Complex>> rows);

    static ComplexMatrix identity(std::size_t n);
    static ComplexMatrix zeros(std::size_t rows, std::size_t cols);
    static ComplexMatrix diagonal(std::span<const Complex> diag);

    [[nodiscard]] std::size_t rows() const noexcept { return rows_; }
    [[nodiscard]] std::size_t cols() const noexcept { return cols_; }
    [[nodiscard]] bool is_square() const noexcept { return rows_ == cols_; }
    [[nodiscard]] bool empty() const noexcept { return data_.empty(); }

    Complex& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    const Complex& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    [[nodiscard]] std::span<const Complex> entries() const noexcept { return data_; }

    [[nodiscard]] ComplexMatrix adjoint() const;
    [[nodiscard]] ComplexMatrix transpose() const;
    [[nodiscard]] ComplexMatrix block(std::size_t row0, std::size_t col0, std::size_t rows,
                                      std::size_t cols) const;
    void set_block(std::size_t row0, std::size_t col0, const ComplexMatrix& src);

    /// Largest entry modulus; 0 for an empty matrix.
    [[nodiscard]] double max_abs() const noexcept;
    [[nodiscard]] bool all_finite() const noexcept;

    ComplexMatrix& operator+=(const ComplexMatrix& rhs);
    ComplexMatrix& operator-=(const ComplexMatrix& rhs);
    ComplexMatrix& operator*=(Complex s);

    friend bool operator==(const ComplexMatrix&, const ComplexMatrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<Complex> data_;
};

ComplexMatrix operator+(ComplexMatrix lhs, const ComplexMatrix& rhs);
ComplexMatrix operator-(ComplexMatrix lhs, const ComplexMatrix& rhs);
ComplexMatrix operator*(const ComplexMatrix& lhs, const ComplexMatrix& rhs);
ComplexMatrix operator*(Complex s, ComplexMatrix m);
ComplexMatrix operator-(ComplexMatrix m);

/// ‖lhs − rhs‖_max; throws DimensionMismatch on shape mismatch.
double max_abs_diff(const ComplexMatrix& lhs, const ComplexMatrix& rhs);

/// Solves M·X = RHS by Gaussian elimination with partial pivoting.
/// Throws SingularMatrix when a pivot falls below 1e-14 times the largest
/// entry of M, DimensionMismatch on incompatible shapes.
ComplexMatrix solve_linear(const ComplexMatrix& m, const ComplexMatrix& rhs);

/// ‖M − M†‖_max.
double hermitian_defect(const ComplexMatrix& m);

/// Numerical rank of the augmented matrix (A|B), complete-pivoting elimination
/// with relative cutoff 1e-12.
std::size_t rank_augmented(const ComplexMatrix& a, const ComplexMatrix& b);

/// Numerical rank of a single matrix, same cutoff as rank_augmented.
std::size_t numerical_rank(const ComplexMatrix& m, double relative_cutoff = 1e-12);

/// ‖M†M − I‖_max.
double unitarity_defect(const ComplexMatrix& m);

/// r×r Fourier matrix, entry (j,k) = exp(2πi jk / r) for zero-based j, k.
ComplexMatrix dft_hadamard(std::size_t r);

/// Shortest round-trip decimal form of a double ("1.5", "1e-09", "nan").
std::string format_number(double x);

/// Real ±1 Hadamard matrix of order r by the Sylvester doubling; r must be a power of two.
ComplexMatrix sylvester_hadamard(std::size_t r);

}  // namespace qstar
