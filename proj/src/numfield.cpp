#include "nilmix/numfield.hpp"

#include "nilmix/error.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace nilmix {

namespace detail {

struct FieldData {
    Polynomial poly;
    std::size_t degree = 0;
    std::vector<RootEstimate> embeddings;
    int r1 = 0;
    int r2 = 0;
    std::optional<long> radicand;
    std::vector<std::vector<Rational>> integral_basis;
    std::vector<std::vector<Rational>> integral_basis_inverse;
};

} // namespace detail

namespace {

using RatMatrix = std::vector<std::vector<Rational>>;

RatMatrix rational_inverse(RatMatrix a) {
    const std::size_t n = a.size();
    RatMatrix inv(n, std::vector<Rational>(n));
    for (std::size_t i = 0; i < n; ++i) inv[i][i] = 1;
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        while (piv < n && sgn(a[piv][col]) == 0) ++piv;
        if (piv == n) throw InvalidInput("singular rational matrix");
        std::swap(a[piv], a[col]);
        std::swap(inv[piv], inv[col]);
        Rational s = Rational(1) / a[col][col];
        for (std::size_t j = 0; j < n; ++j) {
            a[col][j] *= s;
            inv[col][j] *= s;
        }
        for (std::size_t i = 0; i < n; ++i) {
            if (i == col || sgn(a[i][col]) == 0) continue;
            Rational f = a[i][col];
            for (std::size_t j = 0; j < n; ++j) {
                a[i][j] -= f * a[col][j];
                inv[i][j] -= f * inv[col][j];
            }
        }
    }
    return inv;
}

Rational rational_det(RatMatrix a) {
    const std::size_t n = a.size();
    Rational det = 1;
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        while (piv < n && sgn(a[piv][col]) == 0) ++piv;
        if (piv == n) return 0;
        if (piv != col) {
            std::swap(a[piv], a[col]);
            det = -det;
        }
        det *= a[col][col];
        for (std::size_t i = col + 1; i < n; ++i) {
            if (sgn(a[i][col]) == 0) continue;
            Rational f = a[i][col] / a[col][col];
            for (std::size_t j = col; j < n; ++j) a[i][j] -= f * a[col][j];
        }
    }
    return det;
}

long mod4(long d) { return ((d % 4) + 4) % 4; }

} // namespace

bool is_squarefree(long d) {
    unsigned long n = static_cast<unsigned long>(d < 0 ? -d : d);
    if (n == 0) return false;
    for (unsigned long p = 2; p * p <= n; ++p)
        if (n % (p * p) == 0) return false;
    return true;
}

// ---------------------------------------------------------------- NumberField

NumberField NumberField::make(const Polynomial& p) {
    if (p.degree() < 1) throw InvalidInput("make_field: polynomial must have degree >= 1");
    if (!p.has_integer_coefficients()) throw InvalidInput("make_field: coefficients must be integers");
    if (!p.is_monic()) throw NonMonic("make_field: polynomial " + p.to_string() + " is not monic");
    if (p.degree() > 8) throw DegreeTooLarge("make_field: degree above 8");
    auto factors = factor_integer_polynomial(p);
    if (factors.size() != 1 || factors.front().second != 1) {
        std::vector<std::string> names;
        for (const auto& [f, m] : factors) names.push_back("(" + f.to_string() + ")^" + std::to_string(m));
        throw ReduciblePolynomial("make_field: " + p.to_string() + " is reducible", std::move(names));
    }

    auto data = std::make_shared<detail::FieldData>();
    data->poly = p;
    data->degree = static_cast<std::size_t>(p.degree());
    data->embeddings = complex_roots(p);
    data->r1 = count_real_roots(p);
    data->r2 = (p.degree() - data->r1) / 2;
    const std::size_t n = data->degree;

    data->integral_basis.assign(n, std::vector<Rational>(n));
    for (std::size_t i = 0; i < n; ++i) data->integral_basis[i][i] = 1;
    if (n == 2 && p[1] == 0) {
        long d = -p[0].get_num().get_si();
        data->radicand = d;
        if (is_squarefree(d) && mod4(d) == 1) data->integral_basis[1] = {Rational(1, 2), Rational(1, 2)};
    }
    data->integral_basis_inverse = rational_inverse(data->integral_basis);
    return NumberField(std::move(data));
}

NumberField NumberField::quadratic(long d) {
    if (d == 0 || d == 1 || !is_squarefree(d)) throw NotSquarefree("quadratic field: radicand must be squarefree and != 0, 1");
    return make(Polynomial::from_integers(std::vector<long>{-d, 0, 1}));
}

NumberField NumberField::rationals() { return make(Polynomial::from_integers(std::vector<long>{0, 1})); }

NumberField make_field(const Polynomial& p) { return NumberField::make(p); }

NumberField make_field(std::span<const long> coefficients) {
    return NumberField::make(Polynomial::from_integers(coefficients));
}

std::size_t NumberField::degree() const { return data_->degree; }
const Polynomial& NumberField::defining_polynomial() const { return data_->poly; }
const std::vector<RootEstimate>& NumberField::embeddings() const { return data_->embeddings; }
int NumberField::real_places() const { return data_->r1; }
int NumberField::complex_pairs() const { return data_->r2; }
std::optional<long> NumberField::quadratic_radicand() const { return data_->radicand; }
const std::vector<std::vector<Rational>>& NumberField::integral_basis() const { return data_->integral_basis; }

FieldElement NumberField::element(std::vector<Rational> coords) const {
    Polynomial q(std::move(coords));
    Polynomial r = q.degree() >= static_cast<int>(degree()) ? q % data_->poly : q;
    std::vector<Rational> c(degree());
    for (std::size_t i = 0; i < degree(); ++i) c[i] = r[i];
    return FieldElement(*this, std::move(c));
}

FieldElement NumberField::element(std::span<const long> coords) const {
    std::vector<Rational> c;
    for (long v : coords) c.emplace_back(v);
    return element(std::move(c));
}

FieldElement NumberField::from_integral_coordinates(const IntVector& c) const {
    if (c.size() != degree()) throw DimensionMismatch("integral coordinates: wrong length");
    std::vector<Rational> coords(degree());
    for (std::size_t k = 0; k < degree(); ++k) {
        if (sgn(c[k]) == 0) continue;
        for (std::size_t j = 0; j < degree(); ++j) coords[j] += Rational(c[k]) * data_->integral_basis[k][j];
    }
    return FieldElement(*this, std::move(coords));
}

FieldElement NumberField::from_rational(const Rational& q) const {
    std::vector<Rational> c(degree());
    c[0] = q;
    return FieldElement(*this, std::move(c));
}

FieldElement NumberField::zero() const { return from_rational(0); }
FieldElement NumberField::one() const { return from_rational(1); }

FieldElement NumberField::generator() const {
    if (degree() == 1) return from_rational(-data_->poly[0]);
    std::vector<Rational> c(degree());
    c[1] = 1;
    return FieldElement(*this, std::move(c));
}

bool NumberField::operator==(const NumberField& other) const {
    return data_ == other.data_ || (data_->poly == other.data_->poly);
}

std::string NumberField::to_string() const { return "Q[x]/(" + data_->poly.to_string() + ")"; }

// ---------------------------------------------------------------- FieldElement

FieldElement::FieldElement(NumberField field, std::vector<Rational> coords)
    : field_(std::move(field)), coords_(std::move(coords)) {}

bool FieldElement::is_zero() const {
    return std::all_of(coords_.begin(), coords_.end(), [](const Rational& c) { return sgn(c) == 0; });
}

bool FieldElement::is_integral() const {
    const auto& inv = field_.data_->integral_basis_inverse;
    const std::size_t n = coords_.size();
    for (std::size_t k = 0; k < n; ++k) {
        Rational s = 0;
        for (std::size_t j = 0; j < n; ++j) s += coords_[j] * inv[j][k];
        if (s.get_den() != 1) return false;
    }
    return true;
}

IntVector FieldElement::integral_coordinates() const {
    const auto& inv = field_.data_->integral_basis_inverse;
    const std::size_t n = coords_.size();
    IntVector out(n);
    for (std::size_t k = 0; k < n; ++k) {
        Rational s = 0;
        for (std::size_t j = 0; j < n; ++j) s += coords_[j] * inv[j][k];
        if (s.get_den() != 1) throw InvalidInput("element " + to_string() + " is not integral");
        out[k] = s.get_num();
    }
    return out;
}

namespace {
void check_same_field(const NumberField& a, const NumberField& b) {
    if (!(a == b)) throw DimensionMismatch("field elements belong to different fields");
}
} // namespace

FieldElement FieldElement::operator+(const FieldElement& rhs) const {
    check_same_field(field_, rhs.field_);
    std::vector<Rational> c = coords_;
    for (std::size_t i = 0; i < c.size(); ++i) c[i] += rhs.coords_[i];
    return FieldElement(field_, std::move(c));
}

FieldElement FieldElement::operator-(const FieldElement& rhs) const {
    check_same_field(field_, rhs.field_);
    std::vector<Rational> c = coords_;
    for (std::size_t i = 0; i < c.size(); ++i) c[i] -= rhs.coords_[i];
    return FieldElement(field_, std::move(c));
}

FieldElement FieldElement::operator-() const {
    std::vector<Rational> c = coords_;
    for (auto& x : c) x = -x;
    return FieldElement(field_, std::move(c));
}

FieldElement FieldElement::operator*(const FieldElement& rhs) const {
    check_same_field(field_, rhs.field_);
    Polynomial prod = Polynomial(coords_) * Polynomial(rhs.coords_);
    return field_.element(prod.coefficients());
}

namespace {

// column j holds x * t^j
RatMatrix multiplication_matrix(const FieldElement& x) {
    const std::size_t n = x.field().degree();
    RatMatrix m(n, std::vector<Rational>(n));
    FieldElement power = x;
    const FieldElement t = x.field().degree() == 1 ? x.field().one() : x.field().generator();
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t i = 0; i < n; ++i) m[i][j] = power.coordinates()[i];
        power = power * t;
    }
    return m;
}

} // namespace

FieldElement FieldElement::inverse() const {
    if (is_zero()) throw InvalidInput("inverse of zero");
    RatMatrix inv = rational_inverse(multiplication_matrix(*this));
    std::vector<Rational> c(coords_.size());
    for (std::size_t i = 0; i < c.size(); ++i) c[i] = inv[i][0];
    return FieldElement(field_, std::move(c));
}

FieldElement FieldElement::pow(long e) const {
    FieldElement base = e < 0 ? inverse() : *this;
    unsigned long k = static_cast<unsigned long>(e < 0 ? -e : e);
    FieldElement acc = field_.one();
    while (k) {
        if (k & 1UL) acc = acc * base;
        k >>= 1;
        if (k) base = base * base;
    }
    return acc;
}

bool FieldElement::operator==(const FieldElement& rhs) const {
    return field_ == rhs.field_ && coords_ == rhs.coords_;
}

Rational FieldElement::norm() const { return rational_det(multiplication_matrix(*this)); }

Rational FieldElement::trace() const {
    RatMatrix m = multiplication_matrix(*this);
    Rational t = 0;
    for (std::size_t i = 0; i < m.size(); ++i) t += m[i][i];
    return t;
}

std::vector<std::complex<double>> FieldElement::embed() const {
    std::vector<std::complex<double>> out;
    const auto& emb = field_.embeddings();
    out.reserve(emb.size());
    if (field_.degree() == 1) {
        out.emplace_back(coords_[0].get_d(), 0.0);
        return out;
    }
    const Polynomial poly(coords_);
    for (const auto& r : emb) {
        auto v = poly.evaluate(std::complex<long double>(r.value.real(), r.value.imag()));
        out.emplace_back(static_cast<double>(v.real()), static_cast<double>(v.imag()));
    }
    return out;
}

double FieldElement::house() const {
    double h = 0;
    for (double a : abs_values(*this)) h = std::max(h, a);
    return h;
}

std::string FieldElement::to_string() const {
    if (field_.degree() == 1) return coords_[0].get_str();
    return Polynomial(coords_).to_string();
}

std::vector<double> abs_values(const FieldElement& x) {
    std::vector<double> out;
    for (const auto& z : x.embed()) out.push_back(std::abs(z));
    return out;
}

// ---------------------------------------------------------------- heights

Integer ideal_norm(std::span<const FieldElement> xs) {
    if (xs.empty()) throw AllZero("ideal_norm: empty tuple");
    const NumberField& k = xs.front().field();
    const std::size_t n = k.degree();
    std::vector<IntVector> gens;
    for (const auto& x : xs) {
        if (x.is_zero()) continue;
        for (std::size_t b = 0; b < n; ++b) {
            IntVector unit(n);
            unit[b] = 1;
            gens.push_back((x * k.from_integral_coordinates(unit)).integral_coordinates());
        }
    }
    if (gens.empty()) throw AllZero("ideal_norm: all coordinates are zero");
    HermiteForm f = hnf(IntMatrix::from_rows(gens));
    Integer norm = 1;
    for (std::size_t i = 0; i < n; ++i) norm *= f.h(i, i);
    return abs(norm);
}

double height(std::span<const FieldElement> xs) {
    if (xs.empty()) throw AllZero("height: empty tuple");
    const NumberField& k = xs.front().field();
    for (const auto& x : xs) {
        if (!(x.field() == k)) throw DimensionMismatch("height: mixed fields");
        if (!x.is_integral()) throw InvalidInput("height: coordinates must be integral");
    }
    if (std::all_of(xs.begin(), xs.end(), [](const FieldElement& x) { return x.is_zero(); }))
        throw AllZero("height: all coordinates are zero");
    const std::size_t n = k.degree();
    std::vector<double> best(n, 0.0);
    for (const auto& x : xs) {
        auto a = abs_values(x);
        for (std::size_t v = 0; v < n; ++v) best[v] = std::max(best[v], a[v]);
    }
    double log_sum = 0;
    for (double b : best) log_sum += std::log(b);
    Integer norm = ideal_norm(xs);
    log_sum -= std::log(norm.get_d());
    return std::exp(log_sum / static_cast<double>(n));
}

// ---------------------------------------------------------------- units

UnitTuple::UnitTuple(NumberField field, std::vector<FieldElement> units)
    : field_(std::move(field)), units_(std::move(units)) {
    if (units_.size() < 2) throw InvalidInput("UnitTuple: need at least two units");
    for (const auto& u : units_) {
        if (!(u.field() == field_)) throw DimensionMismatch("UnitTuple: unit from another field");
        if (!u.is_integral()) throw NotAUnit("UnitTuple: " + u.to_string() + " is not integral");
        Rational nu = u.norm();
        if (nu != 1 && nu != -1) throw NotAUnit("UnitTuple: " + u.to_string() + " has norm " + nu.get_str());
        std::vector<double> row;
        for (double a : abs_values(u)) row.push_back(std::log(a));
        logs_.push_back(std::move(row));
    }
}

std::vector<std::vector<double>> log_embedding(const UnitTuple& u) { return u.log_moduli(); }

AlphaResult alpha_with_subset(const UnitTuple& u) {
    const std::size_t n = u.size();
    if (n > 20) throw InstanceTooLarge("alpha_invariant: more than 20 units");
    const auto& logs = u.log_moduli();
    const std::size_t places = u.field().degree();
    AlphaResult best{std::numeric_limits<double>::infinity(), {}, false};
    std::vector<double> values;
    for (unsigned long mask = 0; mask < (1UL << n); ++mask) {
        const int size = __builtin_popcountl(mask);
        if (size < 2) continue;
        double sum = 0;
        for (std::size_t v = 0; v < places; ++v) {
            double m = -std::numeric_limits<double>::infinity();
            for (std::size_t i = 0; i < n; ++i)
                if (mask & (1UL << i)) m = std::max(m, logs[i][v]);
            sum += m;
        }
        double log_value = sum / static_cast<double>(places) / (size - 1);
        double value = std::exp(log_value);
        values.push_back(value);
        if (value < best.value * (1 - 1e-12)) {
            best.value = value;
            best.subset.clear();
            for (std::size_t i = 0; i < n; ++i)
                if (mask & (1UL << i)) best.subset.push_back(i);
        }
    }
    std::size_t close = 0;
    for (double v : values)
        if (std::abs(v - best.value) <= 1e-7 * best.value) ++close;
    // an exact duplicate (same value to 1e-12) is a genuine tie, not a precision hazard
    std::size_t exact = 0;
    for (double v : values)
        if (std::abs(v - best.value) <= 1e-12 * best.value) ++exact;
    best.near_tie = close > exact;
    return best;
}

double alpha_invariant(const UnitTuple& u) { return alpha_with_subset(u).value; }

std::vector<ConvergentStep> fundamental_unit_trace(long d) {
    if (d <= 1 || !is_squarefree(d)) throw NotSquarefree("fundamental unit: D must be squarefree and > 1");
    const bool half = mod4(d) == 1;
    const Integer big_d = d;
    Integer root;
    mpz_sqrt(root.get_mpz_t(), big_d.get_mpz_t());
    // expand (P + sqrt(D)) / Q
    Integer p_state = half ? 1 : 0;
    Integer q_state = half ? 2 : 1;
    Integer p_prev = 1, p_prev2 = 0, q_prev = 0, q_prev2 = 1;
    std::vector<ConvergentStep> steps;
    for (int iter = 0; iter < 100000; ++iter) {
        Integer a;
        mpz_fdiv_q(a.get_mpz_t(), Integer(p_state + root).get_mpz_t(), q_state.get_mpz_t());
        Integer p = a * p_prev + p_prev2;
        Integer q = a * q_prev + q_prev2;
        p_prev2 = p_prev;
        p_prev = p;
        q_prev2 = q_prev;
        q_prev = q;
        // norm of p - q*xi
        Integer norm = half ? Integer(p * p - p * q + q * q * (1 - big_d) / 4) : Integer(p * p - big_d * q * q);
        steps.push_back({p, q, norm});
        if (norm == 1 || norm == -1) return steps;
        p_state = a * q_state - p_state;
        q_state = (big_d - p_state * p_state) / q_state;
    }
    throw Error("fundamental unit: continued fraction did not close");
}

FieldElement fundamental_unit_real_quadratic(long d) {
    auto steps = fundamental_unit_trace(d);
    const auto& last = steps.back();
    NumberField k = NumberField::quadratic(d);
    // p - q * xi' with xi' the conjugate of the expanded irrational
    if (mod4(d) == 1)
        return k.element(std::vector<Rational>{Rational(last.p) - Rational(last.q, 2), Rational(last.q, 2)});
    return k.element(std::vector<Rational>{Rational(last.p), Rational(last.q)});
}

// ---------------------------------------------------------------- O(K)_h

namespace {

// Rows: real places, then (Re, Im) per complex pair; columns: integral basis.
Eigen::MatrixXd minkowski_matrix(const NumberField& k) {
    const std::size_t n = k.degree();
    Eigen::MatrixXd phi(n, n);
    for (std::size_t b = 0; b < n; ++b) {
        IntVector unit(n);
        unit[b] = 1;
        auto e = k.from_integral_coordinates(unit).embed();
        std::size_t row = 0;
        for (int v = 0; v < k.real_places(); ++v) phi(static_cast<Eigen::Index>(row++), static_cast<Eigen::Index>(b)) = e[static_cast<std::size_t>(v)].real();
        for (int c = 0; c < k.complex_pairs(); ++c) {
            const auto& z = e[static_cast<std::size_t>(k.real_places() + 2 * c)];
            phi(static_cast<Eigen::Index>(row++), static_cast<Eigen::Index>(b)) = z.real();
            phi(static_cast<Eigen::Index>(row++), static_cast<Eigen::Index>(b)) = z.imag();
        }
    }
    return phi;
}

} // namespace

std::vector<FieldElement> enumerate_O_h(const NumberField& k, double h, PrecisionWarnings* warnings) {
    if (!(h >= 0)) throw InvalidInput("enumerate_O_h: h must be >= 0");
    const std::size_t n = k.degree();
    if (n > 4) throw DegreeTooLarge("enumerate_O_h: degree above 4");
    Eigen::MatrixXd phi = minkowski_matrix(k);
    Eigen::MatrixXd inv = phi.inverse();
    std::vector<long> bound(n);
    double box = 1;
    for (std::size_t c = 0; c < n; ++c) {
        double s = 0;
        for (std::size_t r = 0; r < n; ++r) s += std::abs(inv(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(r)));
        bound[c] = static_cast<long>(std::floor(h * s + 1e-9));
        box *= static_cast<double>(2 * bound[c] + 1);
    }
    if (box > 5e7) throw InstanceTooLarge("enumerate_O_h: search box too large");

    const double guard = 1e-7;
    std::vector<FieldElement> out;
    std::vector<long> c(n);
    for (std::size_t i = 0; i < n; ++i) c[i] = -bound[i];
    while (true) {
        Eigen::VectorXd cv(n);
        for (std::size_t i = 0; i < n; ++i) cv(static_cast<Eigen::Index>(i)) = static_cast<double>(c[i]);
        Eigen::VectorXd y = phi * cv;
        bool inside = true;
        bool near = false;
        auto test = [&](double modulus) {
            if (modulus > h * (1 + 1e-12) + 1e-12) inside = false;
            if (std::abs(modulus - h) <= guard * std::max(1.0, h)) near = true;
        };
        std::size_t row = 0;
        for (int v = 0; v < k.real_places(); ++v) test(std::abs(y(static_cast<Eigen::Index>(row++))));
        for (int p = 0; p < k.complex_pairs(); ++p) {
            double re = y(static_cast<Eigen::Index>(row++));
            double im = y(static_cast<Eigen::Index>(row++));
            test(std::hypot(re, im));
        }
        if (near && warnings) {
            // recompute from exact coordinates before counting a hazard
            IntVector ci(c.begin(), c.end());
            double house = k.from_integral_coordinates(ci).house();
            if (std::abs(house - h) <= guard * std::max(1.0, h) && std::abs(house - h) > 1e-12 * std::max(1.0, h))
                ++warnings->count;
        }
        if (inside) {
            IntVector ci;
            for (long v : c) ci.emplace_back(v);
            out.push_back(k.from_integral_coordinates(ci));
        }
        std::size_t i = n;
        while (i > 0) {
            --i;
            if (c[i] < bound[i]) {
                ++c[i];
                for (std::size_t j = i + 1; j < n; ++j) c[j] = -bound[j];
                break;
            }
            if (i == 0) return out;
        }
        if (n == 0) return out;
    }
}

std::vector<FieldElement> unit_group_basis(const NumberField& k) {
    const int rank = k.unit_rank();
    if (rank == 0) return {};
    if (rank > 2) throw RankNotSupported("unit group of rank " + std::to_string(rank) + " is not supported");
    if (auto d = k.quadratic_radicand(); d && *d > 1) {
        FieldElement eps = fundamental_unit_real_quadratic(*d);
        // same defining polynomial, so re-home the element in this field object
        return {k.element(eps.coordinates())};
    }
    if (k.degree() > 4) throw RankNotSupported("unit search limited to degree <= 4");
    for (double h = 2; h <= 64; h *= 2) {
        std::vector<FieldElement> units;
        std::vector<std::vector<double>> logs;
        for (auto& a : enumerate_O_h(k, h)) {
            if (a.is_zero()) continue;
            Rational nu = a.norm();
            if (nu != 1 && nu != -1) continue;
            std::vector<double> lv;
            double mag = 0;
            for (double x : abs_values(a)) {
                lv.push_back(std::log(x));
                mag += std::abs(std::log(x));
            }
            if (mag < 1e-8) continue;  // torsion
            units.push_back(std::move(a));
            logs.push_back(std::move(lv));
        }
        auto gram_det = [&](const std::vector<std::size_t>& idx) {
            Eigen::MatrixXd g(idx.size(), idx.size());
            for (std::size_t i = 0; i < idx.size(); ++i)
                for (std::size_t j = 0; j < idx.size(); ++j) {
                    double s = 0;
                    for (std::size_t v = 0; v < logs[idx[i]].size(); ++v) s += logs[idx[i]][v] * logs[idx[j]][v];
                    g(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = s;
                }
            return g.determinant();
        };
        std::vector<std::size_t> best;
        double best_det = std::numeric_limits<double>::infinity();
        if (rank == 1) {
            for (std::size_t i = 0; i < units.size(); ++i) {
                double g = gram_det({i});
                if (g > 1e-8 && g < best_det * (1 - 1e-9)) {
                    best_det = g;
                    best = {i};
                }
            }
        } else {
            for (std::size_t i = 0; i < units.size(); ++i)
                for (std::size_t j = i + 1; j < units.size(); ++j) {
                    double g = gram_det({i, j});
                    if (g > 1e-6 && g < best_det * (1 - 1e-9)) {
                        best_det = g;
                        best = {i, j};
                    }
                }
        }
        if (!best.empty()) {
            std::vector<FieldElement> out;
            for (auto i : best) out.push_back(units[i]);
            return out;
        }
    }
    throw RankNotSupported("unit search found no independent units up to house 64");
}

} // namespace nilmix
