#pragma once

#include "nilmix/exactlin.hpp"

#include <complex>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace nilmix {

/// Univariate polynomial over Q, coefficients stored constant-first.
class Polynomial {
public:
    Polynomial() = default;
    explicit Polynomial(std::vector<Rational> coefficients);

    static Polynomial from_integers(std::span<const long> coefficients);
    static Polynomial from_integers(const IntVector& coefficients);
    static Polynomial monomial(std::size_t degree, const Rational& c = 1);
    static Polynomial constant(const Rational& c);

    /// -1 for the zero polynomial.
    int degree() const noexcept { return static_cast<int>(coeffs_.size()) - 1; }
    bool is_zero() const noexcept { return coeffs_.empty(); }
    bool is_monic() const { return !is_zero() && coeffs_.back() == 1; }
    const std::vector<Rational>& coefficients() const noexcept { return coeffs_; }
    Rational operator[](std::size_t i) const { return i < coeffs_.size() ? coeffs_[i] : Rational(0); }
    const Rational& leading() const { return coeffs_.back(); }

    bool has_integer_coefficients() const;
    /// Requires has_integer_coefficients().
    IntVector integer_coefficients() const;

    Polynomial operator+(const Polynomial& rhs) const;
    Polynomial operator-(const Polynomial& rhs) const;
    Polynomial operator*(const Polynomial& rhs) const;
    Polynomial operator*(const Rational& c) const;
    Polynomial operator-() const;
    bool operator==(const Polynomial& rhs) const { return coeffs_ == rhs.coeffs_; }

    /// Euclidean division; divisor must be nonzero.
    std::pair<Polynomial, Polynomial> divmod(const Polynomial& divisor) const;
    Polynomial operator%(const Polynomial& divisor) const { return divmod(divisor).second; }
    Polynomial operator/(const Polynomial& divisor) const { return divmod(divisor).first; }

    Polynomial derivative() const;
    Polynomial monic() const;

    Rational evaluate(const Rational& x) const;
    std::complex<long double> evaluate(std::complex<long double> x) const;

    std::string to_string() const;

private:
    void trim();
    std::vector<Rational> coeffs_;
};

/// Monic gcd (zero if both are zero).
Polynomial gcd(const Polynomial& a, const Polynomial& b);

unsigned long euler_phi(unsigned long k);
Polynomial cyclotomic(unsigned long k);

/// det(xI - m), exact (Faddeev-LeVerrier over Z).
Polynomial characteristic_polynomial(const IntMatrix& m);

/// Yun's algorithm on a monic polynomial: pairs (squarefree monic factor, multiplicity).
std::vector<std::pair<Polynomial, int>> squarefree_decomposition(const Polynomial& p);

/// Number of distinct real roots (Sturm sequence, exact).
int count_real_roots(const Polynomial& p);

struct RootEstimate {
    std::complex<double> value;
    double radius;  ///< a root of p lies within this distance of value
};

/// All roots of a squarefree polynomial, ordered: real roots ascending, then
/// conjugate pairs by real part with the positive imaginary part first.
std::vector<RootEstimate> complex_roots(const Polynomial& p);

/// Irreducible factorization over Z of a monic integer polynomial, by
/// reconstructing factors from subsets of numerical roots and confirming
/// each by exact division. Desk scale: degree <= 16.
std::vector<std::pair<Polynomial, int>> factor_integer_polynomial(const Polynomial& p);

bool is_irreducible(const Polynomial& p);

} // namespace nilmix
