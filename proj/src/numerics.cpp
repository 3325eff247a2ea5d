#include "qstar/numerics.hpp"

#include "qstar/errors.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <numbers>
#include <string>
#include <utility>

namespace qstar {

namespace {

void require_same_shape(const ComplexMatrix& a, const ComplexMatrix& b, const char* what) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw DimensionMismatch(std::string(what) + ": shapes " + std::to_string(a.rows()) + "x" +
                                std::to_string(a.cols()) + " and " + std::to_string(b.rows()) +
                                "x" + std::to_string(b.cols()) + " differ");
    }
}

// Complete-pivoting row reduction; returns the number of pivots above the cutoff.
std::size_t rank_by_elimination(ComplexMatrix work, double relative_cutoff) {
    const std::size_t rows = work.rows();
    const std::size_t cols = work.cols();
    const double scale = work.max_abs();
    if (scale == 0.0) {
        return 0;
    }
    const double cutoff = relative_cutoff * scale;
    std::vector<std::size_t> col_of(cols);
    for (std::size_t c = 0; c < cols; ++c) {
        col_of[c] = c;
    }

    std::size_t rank = 0;
    for (std::size_t step = 0; step < std::min(rows, cols); ++step) {
        double best = 0.0;
        std::size_t pr = step;
        std::size_t pc = step;
        for (std::size_t i = step; i < rows; ++i) {
            for (std::size_t j = step; j < cols; ++j) {
                const double v = std::abs(work(i, col_of[j]));
                if (v > best) {
                    best = v;
                    pr = i;
                    pc = j;
                }
            }
        }
        if (best <= cutoff) {
            break;
        }
        std::swap(col_of[step], col_of[pc]);
        if (pr != step) {
            for (std::size_t j = 0; j < cols; ++j) {
                std::swap(work(step, j), work(pr, j));
            }
        }
        const Complex pivot = work(step, col_of[step]);
        for (std::size_t i = step + 1; i < rows; ++i) {
            const Complex factor = work(i, col_of[step]) / pivot;
            if (factor == Complex{}) {
                continue;
            }
            for (std::size_t j = step; j < cols; ++j) {
                work(i, col_of[j]) -= factor * work(step, col_of[j]);
            }
        }
        ++rank;
    }
    return rank;
}

}  // namespace

ComplexMatrix::ComplexMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), data_(rows * cols) {}

ComplexMatrix::ComplexMatrix(std::size_t rows, std::size_t cols, std::vector<Complex> entries)
    : rows_(rows), cols_(cols), data_(std::move(entries)) {
    if (data_.size() != rows_ * cols_) {
        throw DimensionMismatch("entry count " + std::to_string(data_.size()) +
                                " does not match " + std::to_string(rows_) + "x" +
                                std::to_string(cols_));
    }
}

ComplexMatrix::ComplexMatrix(std::initializer_list<std::initializer_list<Complex>> rows)
    : rows_(rows.size()), cols_(rows.size() == 0 ? 0 : rows.begin()->size()) {
    data_.reserve(rows_ * cols_);
    for (const auto& row : rows) {
        if (row.size() != cols_) {
            throw DimensionMismatch("ragged matrix literal");
        }
        data_.insert(data_.end(), row.begin(), row.end());
    }
}

ComplexMatrix ComplexMatrix::identity(std::size_t n) {
    ComplexMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        m(i, i) = 1.0;
    }
    return m;
}

ComplexMatrix ComplexMatrix::zeros(std::size_t rows, std::size_t cols) {
    return ComplexMatrix(rows, cols);
}

ComplexMatrix ComplexMatrix::diagonal(std::span<const Complex> diag) {
    ComplexMatrix m(diag.size(), diag.size());
    for (std::size_t i = 0; i < diag.size(); ++i) {
        m(i, i) = diag[i];
    }
    return m;
}

ComplexMatrix ComplexMatrix::adjoint() const {
    ComplexMatrix out(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i) {
        for (std::size_t j = 0; j < cols_; ++j) {
            out(j, i) = std::conj((*this)(i, j));
        }
    }
    return out;
}

ComplexMatrix ComplexMatrix::transpose() const {
    ComplexMatrix out(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i) {
        for (std::size_t j = 0; j < cols_; ++j) {
            out(j, i) = (*this)(i, j);
        }
    }
    return out;
}

ComplexMatrix ComplexMatrix::block(std::size_t row0, std::size_t col0, std::size_t rows,
                                   std::size_t cols) const {
    if (row0 + rows > rows_ || col0 + cols > cols_) {
        throw DimensionMismatch("block exceeds matrix bounds");
    }
    ComplexMatrix out(rows, cols);
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t j = 0; j < cols; ++j) {
            out(i, j) = (*this)(row0 + i, col0 + j);
        }
    }
    return out;
}

void ComplexMatrix::set_block(std::size_t row0, std::size_t col0, const ComplexMatrix& src) {
    if (row0 + src.rows() > rows_ || col0 + src.cols() > cols_) {
        throw DimensionMismatch("block exceeds matrix bounds");
    }
    for (std::size_t i = 0; i < src.rows(); ++i) {
        for (std::size_t j = 0; j < src.cols(); ++j) {
            (*this)(row0 + i, col0 + j) = src(i, j);
        }
    }
}

double ComplexMatrix::max_abs() const noexcept {
    double m = 0.0;
    for (const auto& z : data_) {
        m = std::max(m, std::abs(z));
    }
    return m;
}

bool ComplexMatrix::all_finite() const noexcept {
    return std::all_of(data_.begin(), data_.end(), [](const Complex& z) {
        return std::isfinite(z.real()) && std::isfinite(z.imag());
    });
}

ComplexMatrix& ComplexMatrix::operator+=(const ComplexMatrix& rhs) {
    require_same_shape(*this, rhs, "matrix addition");
    for (std::size_t k = 0; k < data_.size(); ++k) {
        data_[k] += rhs.data_[k];
    }
    return *this;
}

ComplexMatrix& ComplexMatrix::operator-=(const ComplexMatrix& rhs) {
    require_same_shape(*this, rhs, "matrix subtraction");
    for (std::size_t k = 0; k < data_.size(); ++k) {
        data_[k] -= rhs.data_[k];
    }
    return *this;
}

ComplexMatrix& ComplexMatrix::operator*=(Complex s) {
    for (auto& z : data_) {
        z *= s;
    }
    return *this;
}

ComplexMatrix operator+(ComplexMatrix lhs, const ComplexMatrix& rhs) { return lhs += rhs; }

ComplexMatrix operator-(ComplexMatrix lhs, const ComplexMatrix& rhs) { return lhs -= rhs; }

ComplexMatrix operator*(const ComplexMatrix& lhs, const ComplexMatrix& rhs) {
    if (lhs.cols() != rhs.rows()) {
        throw DimensionMismatch("matrix product: inner dimensions " + std::to_string(lhs.cols()) +
                                " and " + std::to_string(rhs.rows()) + " differ");
    }
    ComplexMatrix out(lhs.rows(), rhs.cols());
    for (std::size_t i = 0; i < lhs.rows(); ++i) {
        for (std::size_t k = 0; k < lhs.cols(); ++k) {
            const Complex a = lhs(i, k);
            if (a == Complex{}) {
                continue;
            }
            for (std::size_t j = 0; j < rhs.cols(); ++j) {
                out(i, j) += a * rhs(k, j);
            }
        }
    }
    return out;
}

ComplexMatrix operator*(Complex s, ComplexMatrix m) { return m *= s; }

ComplexMatrix operator-(ComplexMatrix m) { return m *= -1.0; }

double max_abs_diff(const ComplexMatrix& lhs, const ComplexMatrix& rhs) {
    require_same_shape(lhs, rhs, "max_abs_diff");
    return (lhs - rhs).max_abs();
}

ComplexMatrix solve_linear(const ComplexMatrix& m, const ComplexMatrix& rhs) {
    if (!m.is_square()) {
        throw DimensionMismatch("solve_linear: matrix is not square");
    }
    if (rhs.rows() != m.rows()) {
        throw DimensionMismatch("solve_linear: right-hand side has " + std::to_string(rhs.rows()) +
                                " rows, expected " + std::to_string(m.rows()));
    }
    const std::size_t n = m.rows();
    const std::size_t nrhs = rhs.cols();
    ComplexMatrix a = m;
    ComplexMatrix x = rhs;
    const double cutoff = 1e-14 * a.max_abs();

    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        double best = std::abs(a(col, col));
        for (std::size_t i = col + 1; i < n; ++i) {
            const double v = std::abs(a(i, col));
            if (v > best) {
                best = v;
                piv = i;
            }
        }
        if (best <= cutoff || best == 0.0) {
            throw SingularMatrix("solve_linear: pivot " + std::to_string(best) + " in column " +
                                 std::to_string(col) + " below cutoff");
        }
        if (piv != col) {
            for (std::size_t j = 0; j < n; ++j) {
                std::swap(a(col, j), a(piv, j));
            }
            for (std::size_t j = 0; j < nrhs; ++j) {
                std::swap(x(col, j), x(piv, j));
            }
        }
        const Complex pivot = a(col, col);
        for (std::size_t i = col + 1; i < n; ++i) {
            const Complex factor = a(i, col) / pivot;
            if (factor == Complex{}) {
                continue;
            }
            for (std::size_t j = col; j < n; ++j) {
                a(i, j) -= factor * a(col, j);
            }
            for (std::size_t j = 0; j < nrhs; ++j) {
                x(i, j) -= factor * x(col, j);
            }
        }
    }
    for (std::size_t ii = n; ii-- > 0;) {
        for (std::size_t j = 0; j < nrhs; ++j) {
            Complex acc = x(ii, j);
            for (std::size_t k = ii + 1; k < n; ++k) {
                acc -= a(ii, k) * x(k, j);
            }
            x(ii, j) = acc / a(ii, ii);
        }
    }
    return x;
}

double hermitian_defect(const ComplexMatrix& m) {
    if (!m.is_square()) {
        throw DimensionMismatch("hermitian_defect: matrix is not square");
    }
    return max_abs_diff(m, m.adjoint());
}

std::size_t numerical_rank(const ComplexMatrix& m, double relative_cutoff) {
    return rank_by_elimination(m, relative_cutoff);
}

std::size_t rank_augmented(const ComplexMatrix& a, const ComplexMatrix& b) {
    if (a.rows() != b.rows()) {
        throw DimensionMismatch("rank_augmented: row counts differ");
    }
    ComplexMatrix ab(a.rows(), a.cols() + b.cols());
    ab.set_block(0, 0, a);
    ab.set_block(0, a.cols(), b);
    return rank_by_elimination(std::move(ab), 1e-12);
}

double unitarity_defect(const ComplexMatrix& m) {
    if (!m.is_square()) {
        throw DimensionMismatch("unitarity_defect: matrix is not square");
    }
    return max_abs_diff(m.adjoint() * m, ComplexMatrix::identity(m.rows()));
}

ComplexMatrix dft_hadamard(std::size_t r) {
    if (r == 0) {
        throw InvalidArgument("dft_hadamard: order must be at least 1");
    }
    ComplexMatrix h(r, r);
    for (std::size_t j = 0; j < r; ++j) {
        for (std::size_t k = 0; k < r; ++k) {
            // Reduce the exponent mod r first so large orders keep full accuracy.
            const std::size_t e = (j * k) % r;
            if ((4 * e) % r == 0) {
                // Quarter turns are exact: 1, i, -1, -i.
                static constexpr Complex quarter[] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
                h(j, k) = quarter[(4 * e) / r];
            } else {
                h(j, k) = std::polar(1.0, 2.0 * std::numbers::pi * static_cast<double>(e) /
                                              static_cast<double>(r));
            }
        }
    }
    return h;
}

ComplexMatrix sylvester_hadamard(std::size_t r) {
    if (r == 0 || (r & (r - 1)) != 0) {
        throw NotPowerOfTwo("sylvester_hadamard: order " + std::to_string(r) +
                            " is not a power of two");
    }
    ComplexMatrix h{{1.0}};
    while (h.rows() < r) {
        const std::size_t k = h.rows();
        ComplexMatrix next(2 * k, 2 * k);
        next.set_block(0, 0, h);
        next.set_block(0, k, h);
        next.set_block(k, 0, h);
        next.set_block(k, k, -h);
        h = std::move(next);
    }
    return h;
}

}  // namespace qstar

namespace qstar {

std::string format_number(double x) {
    if (std::isnan(x)) {
        return "nan";
    }
    if (std::isinf(x)) {
        return x > 0 ? "inf" : "-inf";
    }
    std::array<char, 64> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), x);
    return std::string(buf.data(), res.ptr);
}

}  // namespace qstar
