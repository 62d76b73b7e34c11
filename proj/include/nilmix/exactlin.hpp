#pragma once

// Exact integer linear algebra and lattice algorithms.
//
// Everything here works on unbounded integers (GMP); floating point only
// appears in the Fincke-Pohst pruning bounds and in reported norms.

#include <gmpxx.h>

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace nilmix {

using Integer = mpz_class;
using Rational = mpq_class;
using IntVector = std::vector<Integer>;

IntVector to_int_vector(std::span<const long> values);
Integer dot(const IntVector& a, const IntVector& b);
Integer norm2(const IntVector& a);
bool is_zero(const IntVector& a);
std::string to_string(const IntVector& v);

/// Dense row-major matrix over the integers.
class IntMatrix {
public:
    IntMatrix(std::size_t rows, std::size_t cols);

    static IntMatrix identity(std::size_t n);
    static IntMatrix from_rows(const std::vector<IntVector>& rows);
    static IntMatrix from_rows(const std::vector<std::vector<long>>& rows);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    bool is_square() const noexcept { return rows_ == cols_; }

    Integer& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    const Integer& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    IntVector row(std::size_t i) const;
    IntVector column(std::size_t j) const;
    std::vector<IntVector> row_vectors() const;

    IntMatrix transpose() const;
    bool is_zero() const;

    /// Bareiss fraction-free determinant.
    Integer determinant() const;

    IntMatrix operator*(const IntMatrix& rhs) const;
    IntVector operator*(const IntVector& v) const;
    IntMatrix operator+(const IntMatrix& rhs) const;
    IntMatrix operator-(const IntMatrix& rhs) const;
    bool operator==(const IntMatrix& rhs) const;

    std::string to_string() const;

private:
    std::size_t rows_;
    std::size_t cols_;
    std::vector<Integer> data_;
};

/// A list of linearly independent integer vectors in Z^ambient_dim.
class LatticeBasis {
public:
    explicit LatticeBasis(std::size_t ambient_dim);
    /// Throws InvalidInput if the vectors are dependent or have the wrong length.
    LatticeBasis(std::size_t ambient_dim, std::vector<IntVector> vectors);

    std::size_t ambient_dim() const noexcept { return ambient_dim_; }
    std::size_t rank() const noexcept { return vectors_.size(); }
    bool empty() const noexcept { return vectors_.empty(); }
    const std::vector<IntVector>& vectors() const noexcept { return vectors_; }
    const IntVector& operator[](std::size_t i) const { return vectors_[i]; }

    /// Rows are the basis vectors. Requires a nonempty basis.
    IntMatrix as_matrix() const;

    /// x_0 b_0 + ... + x_{k-1} b_{k-1}
    IntVector combine(const IntVector& coefficients) const;

private:
    struct Unchecked {};
    LatticeBasis(Unchecked, std::size_t ambient_dim, std::vector<IntVector> vectors);

    std::size_t ambient_dim_;
    std::vector<IntVector> vectors_;

    friend LatticeBasis make_unchecked_basis(std::size_t ambient_dim, std::vector<IntVector> vectors);
};

struct HermiteForm {
    IntMatrix h;        ///< row Hermite normal form, zero rows last
    IntMatrix u;        ///< unimodular, h = u * m
    std::size_t rank;   ///< number of nonzero rows of h
};

/// Row-style HNF: positive pivots, entries above a pivot reduced into [0, pivot).
HermiteForm hnf(const IntMatrix& m);

std::size_t rank(const IntMatrix& m);

/// Z-basis of {v : m v = 0}, LLL-reduced.
LatticeBasis integer_kernel(const IntMatrix& m);

/// True iff both bases generate the same Z-module (compared through their HNFs).
bool same_lattice(const LatticeBasis& a, const LatticeBasis& b);

struct LllResult {
    LatticeBasis basis;
    IntMatrix transform;  ///< reduced rows = transform * input rows
};

/// Integral LLL (exact Gram-Schmidt via subdeterminants). delta must lie in (1/4, 1).
LllResult lll_reduce_with_transform(const LatticeBasis& b, const Rational& delta = Rational(3, 4));
LatticeBasis lll_reduce(const LatticeBasis& b, const Rational& delta = Rational(3, 4));

/// Exact check of size reduction and the Lovasz condition.
bool is_lll_reduced(const LatticeBasis& b, const Rational& delta = Rational(3, 4));

struct ShortVector {
    IntVector vector;
    IntVector coefficients;  ///< w.r.t. the input basis, first nonzero entry positive
    Integer norm2;
    double norm;
};

/// Minimal nonzero lattice vector (LLL then Fincke-Pohst). Among equally short
/// vectors the lexicographically smallest sign-normalized coefficient vector wins.
ShortVector shortest_vector(const LatticeBasis& b);

struct ClosePoint {
    IntVector coefficients;     ///< w.r.t. the input basis
    std::vector<double> point;
    double distance;
};

/// Lattice point nearest to target; ties go to the lexicographically smallest coefficients.
ClosePoint closest_vector(const LatticeBasis& b, std::span<const double> target);

/// Same search for a real basis (used on log-unit lattices). Rows must be independent.
ClosePoint closest_vector(const std::vector<std::vector<double>>& basis,
                          std::span<const double> target);

} // namespace nilmix
