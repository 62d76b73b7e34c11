#pragma once

// n-point correlations of band-limited functions on T^d under a toral action.
//
// Frequencies pull back through the transpose: f(A x) has coefficient
// f^(q) at frequency A^T q. For the cat map A = [[2,1],[1,1]] the frequency
// (1,0) of f(A x) sits at A^T (1,0) = (2,1). The n-point integral
//   int prod_i f_i(g_i + A(z_i) x) dx
// therefore keeps exactly the tuples (q_1..q_n) with sum_i A(z_i)^T q_i = 0,
// each weighted by prod_i f_i^(q_i) e^{2 pi i <q_i, g_i>}.

#include "nilmix/action.hpp"
#include "nilmix/exactlin.hpp"

#include <complex>
#include <map>
#include <optional>
#include <span>
#include <vector>

namespace nilmix {

struct ExactComplex {
    Rational re;
    Rational im;

    std::complex<double> value() const { return {re.get_d(), im.get_d()}; }
    bool is_zero() const { return sgn(re) == 0 && sgn(im) == 0; }
    ExactComplex conj() const { return {re, -im}; }
    ExactComplex operator*(const ExactComplex& o) const { return {re * o.re - im * o.im, re * o.im + im * o.re}; }
    ExactComplex operator+(const ExactComplex& o) const { return {re + o.re, im + o.im}; }
    ExactComplex operator-(const ExactComplex& o) const { return {re - o.re, im - o.im}; }
    bool operator==(const ExactComplex& o) const { return re == o.re && im == o.im; }
};

using Frequency = std::vector<long>;

/// Finitely supported Fourier series on T^d with exact rational coefficients.
class TrigPolynomial {
public:
    /// Zero coefficients are dropped. Throws DimensionMismatch on a frequency of the wrong length.
    TrigPolynomial(std::size_t dim, std::map<Frequency, ExactComplex> coefficients);

    static TrigPolynomial constant(std::size_t dim, const Rational& c);
    /// amplitude * cos(2 pi <q, x>)
    static TrigPolynomial cosine(std::size_t dim, const Frequency& q, const Rational& amplitude = 1);
    /// amplitude * sin(2 pi <q, x>)
    static TrigPolynomial sine(std::size_t dim, const Frequency& q, const Rational& amplitude = 1);

    std::size_t dim() const noexcept { return dim_; }
    const std::map<Frequency, ExactComplex>& coefficients() const noexcept { return coeffs_; }
    ExactComplex coefficient(const Frequency& q) const;
    ExactComplex mean() const { return coefficient(Frequency(dim_, 0)); }
    bool is_real_valued() const noexcept { return real_; }
    /// max |q|_2 over the support (0 for constants).
    double support_radius() const noexcept { return radius_; }

    std::complex<double> evaluate(std::span<const double> x) const;

    TrigPolynomial operator+(const TrigPolynomial& o) const;

private:
    std::size_t dim_;
    std::map<Frequency, ExactComplex> coeffs_;
    bool real_ = true;
    double radius_ = 0;
};

/// z_1..z_n in Z^l, n >= 2.
class TupleZ {
public:
    explicit TupleZ(std::vector<std::vector<long>> points);
    std::size_t size() const noexcept { return points_.size(); }
    std::size_t rank() const noexcept { return points_.front().size(); }
    const std::vector<long>& operator[](std::size_t i) const { return points_[i]; }
    const std::vector<std::vector<long>>& points() const noexcept { return points_; }

private:
    std::vector<std::vector<long>> points_;
};

struct Separation {
    double s;  ///< min_{i != j} |z_i - z_j|_2
    double n;  ///< e^s
};

Separation separation(const TupleZ& z);

/// Z-basis of {(q_1..q_n) in Z^{nd} : sum_i A(z_i)^T q_i = 0}; rank (n-1)d.
LatticeBasis kernel_lattice(const ToralAction& action, const TupleZ& z);

/// Euclidean length of the shortest nonzero kernel-lattice vector.
double dio_min(const ToralAction& action, const TupleZ& z);
ShortVector dio_min_vector(const ToralAction& action, const TupleZ& z);

struct CorrelationReport {
    std::complex<double> correlation;
    std::complex<double> product_of_means;
    std::complex<double> error;
    /// Filled when every translation is zero: then the whole report is rational.
    std::optional<ExactComplex> exact_correlation;
    std::optional<ExactComplex> exact_product_of_means;
    std::optional<ExactComplex> exact_error;
    double D = 0;
    double separation = 0;
    bool vanished = false;
    /// Nonzero kernel tuples with every q_i in the support of f_i.
    std::size_t surviving_terms = 0;
    /// sum over those tuples of prod_i |f_i^(q_i)|
    double error_bound = 0;
};

/// Exact n-point correlation. translations may be empty (all zero); otherwise one
/// d-vector per point. Throws DimensionMismatch on inconsistent shapes.
CorrelationReport correlate(const ToralAction& action, const TupleZ& z,
                            const std::vector<std::vector<double>>& translations,
                            const std::vector<TrigPolynomial>& fs);

/// sum |f^(q)| + sum |f^(q)| (2 pi |q|_2)^theta, an upper bound for the flat C^theta norm.
double holder_bound(const TrigPolynomial& f, double theta);

struct RateFitRow {
    double separation;
    double D;
    double abs_error;
};

struct RateFit {
    double eta_lattice = 0;       ///< slope of log D against separation
    double lattice_residual = 0;  ///< RMS residual of that fit
    std::optional<double> eta_error;  ///< slope of -log|error| over rows with nonzero error
    double error_residual = 0;
    std::vector<RateFitRow> table;
};

RateFit rate_fit(const ToralAction& action, std::span<const TupleZ> family,
                 const std::vector<TrigPolynomial>& fs,
                 const std::vector<std::vector<double>>& translations = {});

/// c (1 - epsilon) / ((n - 1) degree L)
double predicted_exponent(double c, std::size_t degree, std::size_t n, double epsilon, double L);

struct LineFit {
    double slope;
    double intercept;
    double rms_residual;
};
LineFit least_squares(std::span<const double> x, std::span<const double> y);

} // namespace nilmix
