#pragma once

// Number fields K = Q[x]/(p) with their archimedean embeddings, units and
// projective heights.
//
// Conventions:
//  * Elements are stored by rational coordinates in the power basis 1, t, ..., t^{D-1}.
//  * Archimedean places are listed once per embedding, so a complex place
//    appears twice (once per conjugate). Products over places therefore
//    always have D factors and |N(x)| = prod_v |x|_v.
//  * The order used as "ring of integers" is Z[t], except for x^2 - D with
//    D = 1 mod 4, where Z[(1 + t)/2] is used.
//  * Finite places are never materialized. Their combined contribution to a
//    height is N(I)^{-1/D}, with I the ideal generated by the coordinates.

#include "nilmix/exactlin.hpp"
#include "nilmix/poly.hpp"

#include <complex>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace nilmix {

class FieldElement;

namespace detail {
struct FieldData;
}

class NumberField {
public:
    /// Monic, irreducible (checked), degree 1..8.
    static NumberField make(const Polynomial& p);
    /// Q(sqrt(d)) via x^2 - d; d squarefree, d != 0, 1.
    static NumberField quadratic(long d);
    static NumberField rationals();

    std::size_t degree() const;
    const Polynomial& defining_polynomial() const;
    const std::vector<RootEstimate>& embeddings() const;
    int real_places() const;
    int complex_pairs() const;
    int unit_rank() const { return real_places() + complex_pairs() - 1; }
    /// d when the field was built from x^2 - d.
    std::optional<long> quadratic_radicand() const;

    /// Rows: integral basis elements in power-basis coordinates.
    const std::vector<std::vector<Rational>>& integral_basis() const;

    FieldElement element(std::vector<Rational> power_coordinates) const;
    FieldElement element(std::span<const long> power_coordinates) const;
    FieldElement from_integral_coordinates(const IntVector& c) const;
    FieldElement from_rational(const Rational& q) const;
    FieldElement zero() const;
    FieldElement one() const;
    /// The class of x in Q[x]/(p).
    FieldElement generator() const;

    bool operator==(const NumberField& other) const;
    std::string to_string() const;

private:
    explicit NumberField(std::shared_ptr<const detail::FieldData> data) : data_(std::move(data)) {}
    std::shared_ptr<const detail::FieldData> data_;
    friend class FieldElement;
};

NumberField make_field(const Polynomial& p);
NumberField make_field(std::span<const long> coefficients_constant_first);

class FieldElement {
public:
    const NumberField& field() const noexcept { return field_; }
    const std::vector<Rational>& coordinates() const noexcept { return coords_; }

    bool is_zero() const;
    bool is_integral() const;
    /// Coordinates in the integral basis; throws InvalidInput if not integral.
    IntVector integral_coordinates() const;

    FieldElement operator+(const FieldElement& rhs) const;
    FieldElement operator-(const FieldElement& rhs) const;
    FieldElement operator*(const FieldElement& rhs) const;
    FieldElement operator-() const;
    FieldElement inverse() const;
    FieldElement pow(long e) const;
    bool operator==(const FieldElement& rhs) const;

    Rational norm() const;
    Rational trace() const;
    /// Images under the D embeddings, in NumberField::embeddings() order.
    std::vector<std::complex<double>> embed() const;
    /// max_v |x|_v
    double house() const;

    std::string to_string() const;

private:
    FieldElement(NumberField field, std::vector<Rational> coords);
    NumberField field_;
    std::vector<Rational> coords_;
    friend class NumberField;
};

/// |x|_v for each of the D archimedean entries.
std::vector<double> abs_values(const FieldElement& x);

/// Projective height of integral elements, not all zero.
double height(std::span<const FieldElement> xs);

/// Absolute norm of the ideal generated by integral elements (not all zero).
Integer ideal_norm(std::span<const FieldElement> xs);

/// A tuple of n >= 2 units of the order.
class UnitTuple {
public:
    UnitTuple(NumberField field, std::vector<FieldElement> units);

    const NumberField& field() const noexcept { return field_; }
    const std::vector<FieldElement>& units() const noexcept { return units_; }
    std::size_t size() const noexcept { return units_.size(); }
    /// n x D matrix of log|u_i|_v.
    const std::vector<std::vector<double>>& log_moduli() const noexcept { return logs_; }

private:
    NumberField field_;
    std::vector<FieldElement> units_;
    std::vector<std::vector<double>> logs_;
};

std::vector<std::vector<double>> log_embedding(const UnitTuple& u);

struct AlphaResult {
    double value;
    std::vector<std::size_t> subset;  ///< indices achieving the minimum
    bool near_tie;                    ///< another subset within the 1e-7 guard band
};

/// min over I with |I| >= 2 of H(u_I)^{1/(|I|-1)}, exhaustively.
AlphaResult alpha_with_subset(const UnitTuple& u);
double alpha_invariant(const UnitTuple& u);

/// Fundamental unit > 1 of Q(sqrt(d)) from the continued fraction of sqrt(d)
/// (or of (1 + sqrt(d))/2 when d = 1 mod 4). The result lives in NumberField::quadratic(d).
FieldElement fundamental_unit_real_quadratic(long d);

/// Convergent-by-convergent trace of the search above: (p, q, norm) triples up to and
/// including the first unit.
struct ConvergentStep {
    Integer p;
    Integer q;
    Integer norm;
};
std::vector<ConvergentStep> fundamental_unit_trace(long d);

/// Number of near-boundary decisions taken inside the relative guard band.
struct PrecisionWarnings {
    std::size_t count = 0;
};

/// Integral elements with |a|_v <= h at every archimedean place (degree <= 4).
std::vector<FieldElement> enumerate_O_h(const NumberField& field, double h,
                                        PrecisionWarnings* warnings = nullptr);

/// Independent units generating a finite-index subgroup of the unit group
/// modulo torsion (the full group for real quadratic fields). Rank <= 2.
std::vector<FieldElement> unit_group_basis(const NumberField& field);

bool is_squarefree(long d);

} // namespace nilmix
