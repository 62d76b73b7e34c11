#include "nilmix/poly.hpp"

#include "nilmix/error.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>

namespace nilmix {

using cld = std::complex<long double>;

Polynomial::Polynomial(std::vector<Rational> coefficients) : coeffs_(std::move(coefficients)) { trim(); }

Polynomial Polynomial::from_integers(std::span<const long> coefficients) {
    std::vector<Rational> c;
    for (long v : coefficients) c.emplace_back(v);
    return Polynomial(std::move(c));
}

Polynomial Polynomial::from_integers(const IntVector& coefficients) {
    std::vector<Rational> c;
    for (const auto& v : coefficients) c.emplace_back(v);
    return Polynomial(std::move(c));
}

Polynomial Polynomial::monomial(std::size_t degree, const Rational& c) {
    std::vector<Rational> v(degree + 1);
    v[degree] = c;
    return Polynomial(std::move(v));
}

Polynomial Polynomial::constant(const Rational& c) { return Polynomial(std::vector<Rational>{c}); }

void Polynomial::trim() {
    while (!coeffs_.empty() && sgn(coeffs_.back()) == 0) coeffs_.pop_back();
}

bool Polynomial::has_integer_coefficients() const {
    return std::all_of(coeffs_.begin(), coeffs_.end(), [](const Rational& c) { return c.get_den() == 1; });
}

IntVector Polynomial::integer_coefficients() const {
    IntVector out;
    for (const auto& c : coeffs_) {
        if (c.get_den() != 1) throw InvalidInput("polynomial has non-integer coefficients");
        out.push_back(c.get_num());
    }
    return out;
}

Polynomial Polynomial::operator+(const Polynomial& rhs) const {
    std::vector<Rational> c(std::max(coeffs_.size(), rhs.coeffs_.size()));
    for (std::size_t i = 0; i < c.size(); ++i) c[i] = (*this)[i] + rhs[i];
    return Polynomial(std::move(c));
}

Polynomial Polynomial::operator-(const Polynomial& rhs) const {
    std::vector<Rational> c(std::max(coeffs_.size(), rhs.coeffs_.size()));
    for (std::size_t i = 0; i < c.size(); ++i) c[i] = (*this)[i] - rhs[i];
    return Polynomial(std::move(c));
}

Polynomial Polynomial::operator*(const Polynomial& rhs) const {
    if (is_zero() || rhs.is_zero()) return {};
    std::vector<Rational> c(coeffs_.size() + rhs.coeffs_.size() - 1);
    for (std::size_t i = 0; i < coeffs_.size(); ++i) {
        if (sgn(coeffs_[i]) == 0) continue;
        for (std::size_t j = 0; j < rhs.coeffs_.size(); ++j) c[i + j] += coeffs_[i] * rhs.coeffs_[j];
    }
    return Polynomial(std::move(c));
}

Polynomial Polynomial::operator*(const Rational& s) const {
    std::vector<Rational> c = coeffs_;
    for (auto& x : c) x *= s;
    return Polynomial(std::move(c));
}

Polynomial Polynomial::operator-() const { return *this * Rational(-1); }

std::pair<Polynomial, Polynomial> Polynomial::divmod(const Polynomial& divisor) const {
    if (divisor.is_zero()) throw InvalidInput("polynomial division by zero");
    std::vector<Rational> rem = coeffs_;
    const int dd = divisor.degree();
    if (degree() < dd) return {Polynomial{}, *this};
    std::vector<Rational> quot(static_cast<std::size_t>(degree() - dd + 1));
    for (int k = degree(); k >= dd; --k) {
        Rational c = rem[static_cast<std::size_t>(k)] / divisor.leading();
        quot[static_cast<std::size_t>(k - dd)] = c;
        if (sgn(c) == 0) continue;
        for (int j = 0; j <= dd; ++j) rem[static_cast<std::size_t>(k - dd + j)] -= c * divisor.coeffs_[static_cast<std::size_t>(j)];
    }
    rem.resize(static_cast<std::size_t>(dd));
    return {Polynomial(std::move(quot)), Polynomial(std::move(rem))};
}

Polynomial Polynomial::derivative() const {
    if (coeffs_.size() <= 1) return {};
    std::vector<Rational> c(coeffs_.size() - 1);
    for (std::size_t i = 1; i < coeffs_.size(); ++i) c[i - 1] = coeffs_[i] * static_cast<long>(i);
    return Polynomial(std::move(c));
}

Polynomial Polynomial::monic() const {
    if (is_zero()) return {};
    return *this * (Rational(1) / leading());
}

Rational Polynomial::evaluate(const Rational& x) const {
    Rational acc = 0;
    for (std::size_t i = coeffs_.size(); i-- > 0;) acc = acc * x + coeffs_[i];
    return acc;
}

cld Polynomial::evaluate(cld x) const {
    cld acc = 0;
    for (std::size_t i = coeffs_.size(); i-- > 0;) acc = acc * x + static_cast<long double>(coeffs_[i].get_d());
    return acc;
}

std::string Polynomial::to_string() const {
    if (is_zero()) return "0";
    std::ostringstream os;
    bool first = true;
    for (std::size_t i = coeffs_.size(); i-- > 0;) {
        const Rational& c = coeffs_[i];
        if (sgn(c) == 0) continue;
        Rational a = abs(c);
        os << (sgn(c) < 0 ? (first ? "-" : " - ") : (first ? "" : " + "));
        if (a != 1 || i == 0) os << a.get_str() << (i ? "*" : "");
        if (i >= 1) os << 'x';
        if (i >= 2) os << '^' << i;
        first = false;
    }
    return os.str();
}

Polynomial gcd(const Polynomial& a, const Polynomial& b) {
    Polynomial x = a;
    Polynomial y = b;
    while (!y.is_zero()) {
        Polynomial r = x % y;
        x = std::move(y);
        y = std::move(r);
    }
    return x.monic();
}

unsigned long euler_phi(unsigned long k) {
    unsigned long result = k;
    unsigned long n = k;
    for (unsigned long p = 2; p * p <= n; ++p) {
        if (n % p) continue;
        while (n % p == 0) n /= p;
        result -= result / p;
    }
    if (n > 1) result -= result / n;
    return result;
}

Polynomial cyclotomic(unsigned long k) {
    if (k == 0) throw InvalidInput("cyclotomic: index must be positive");
    std::map<unsigned long, Polynomial> memo;
    auto build = [&](auto&& self, unsigned long n) -> Polynomial {
        if (auto it = memo.find(n); it != memo.end()) return it->second;
        Polynomial p = Polynomial::monomial(n) - Polynomial::constant(1);
        for (unsigned long d = 1; d < n; ++d)
            if (n % d == 0) p = p / self(self, d);
        memo.emplace(n, p);
        return p;
    };
    return build(build, k);
}

Polynomial characteristic_polynomial(const IntMatrix& a) {
    if (!a.is_square()) throw DimensionMismatch("characteristic_polynomial: matrix not square");
    const std::size_t n = a.rows();
    IntVector c(n + 1);
    c[n] = 1;
    IntMatrix m(n, n);  // M_0 = 0
    for (std::size_t k = 1; k <= n; ++k) {
        IntMatrix next = a * m;
        for (std::size_t i = 0; i < n; ++i) next(i, i) += c[n - k + 1];
        m = std::move(next);
        IntMatrix am = a * m;
        Integer tr = 0;
        for (std::size_t i = 0; i < n; ++i) tr += am(i, i);
        Integer q = -tr;
        mpz_divexact_ui(q.get_mpz_t(), q.get_mpz_t(), k);
        c[n - k] = q;
    }
    return Polynomial::from_integers(c);
}

std::vector<std::pair<Polynomial, int>> squarefree_decomposition(const Polynomial& p) {
    if (p.degree() < 1) return {};
    Polynomial f = p.monic();
    std::vector<std::pair<Polynomial, int>> out;
    Polynomial a = gcd(f, f.derivative());
    Polynomial b = f / a;
    Polynomial c = f.derivative() * (Rational(1) / f.leading()) / a;
    Polynomial d = c - b.derivative();
    int i = 1;
    while (b.degree() >= 1) {
        Polynomial g = gcd(b, d);
        if (g.degree() >= 1) out.emplace_back(g, i);
        b = b / g;
        c = d / g;
        d = c - b.derivative();
        ++i;
    }
    return out;
}

int count_real_roots(const Polynomial& p) {
    if (p.degree() < 1) return 0;
    std::vector<Polynomial> seq{p, p.derivative()};
    while (!seq.back().is_zero()) {
        Polynomial r = -(seq[seq.size() - 2] % seq.back());
        if (r.is_zero()) break;
        seq.push_back(std::move(r));
    }
    auto changes = [&](bool at_plus_infinity) {
        int count = 0;
        int prev = 0;
        for (const auto& q : seq) {
            int s = sgn(q.leading());
            if (!at_plus_infinity && (q.degree() % 2 == 1)) s = -s;
            if (s == 0) continue;
            if (prev != 0 && s != prev) ++count;
            prev = s;
        }
        return count;
    };
    return changes(false) - changes(true);
}

namespace {

cld polish(const Polynomial& p, const Polynomial& dp, cld z) {
    for (int it = 0; it < 60; ++it) {
        cld fz = p.evaluate(z);
        cld dz = dp.evaluate(z);
        if (std::abs(dz) == 0) break;
        cld step = fz / dz;
        z -= step;
        if (std::abs(step) <= 1e-19L * std::max<long double>(1, std::abs(z))) break;
    }
    return z;
}

} // namespace

std::vector<RootEstimate> complex_roots(const Polynomial& p) {
    const int n = p.degree();
    if (n < 1) return {};
    Polynomial f = p.monic();
    Polynomial df = f.derivative();
    std::vector<cld> roots;
    if (n == 1) {
        roots.emplace_back(static_cast<long double>(-f[0].get_d()), 0);
    } else {
        Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(n, n);
        for (int i = 1; i < n; ++i) companion(i, i - 1) = 1.0;
        for (int i = 0; i < n; ++i) companion(i, n - 1) = -f[static_cast<std::size_t>(i)].get_d();
        Eigen::EigenSolver<Eigen::MatrixXd> solver(companion, false);
        if (solver.info() != Eigen::Success) throw Error("complex_roots: eigenvalue iteration failed");
        for (int i = 0; i < n; ++i) {
            auto ev = solver.eigenvalues()[i];
            roots.push_back(polish(f, df, cld(ev.real(), ev.imag())));
        }
    }

    const int real_count = count_real_roots(f);
    std::sort(roots.begin(), roots.end(),
              [](const cld& a, const cld& b) { return std::abs(a.imag()) < std::abs(b.imag()); });
    std::vector<cld> reals(roots.begin(), roots.begin() + real_count);
    for (auto& r : reals) r = polish(f, df, cld(r.real(), 0));
    std::sort(reals.begin(), reals.end(), [](const cld& a, const cld& b) { return a.real() < b.real(); });
    std::vector<cld> upper;
    for (auto it = roots.begin() + real_count; it != roots.end(); ++it)
        if (it->imag() > 0) upper.push_back(*it);
    if (static_cast<int>(upper.size()) * 2 + real_count != n)
        throw Error("complex_roots: could not pair complex roots of " + f.to_string());
    std::sort(upper.begin(), upper.end(), [](const cld& a, const cld& b) {
        return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
    });

    std::vector<RootEstimate> out;
    auto certify = [&](cld z) {
        long double fz = std::abs(f.evaluate(z));
        long double dz = std::abs(df.evaluate(z));
        long double radius = dz > 0 ? n * fz / dz : std::numeric_limits<long double>::infinity();
        long double scale = std::max<long double>(1, std::abs(z));
        if (!(radius <= 1e-9L * scale))
            throw Error("complex_roots: residual certification failed for " + f.to_string());
        out.push_back({std::complex<double>(static_cast<double>(z.real()), static_cast<double>(z.imag())),
                       static_cast<double>(std::max(radius, 1e-18L * scale))});
    };
    for (const auto& r : reals) certify(cld(r.real(), 0));
    for (const auto& r : upper) {
        certify(r);
        certify(std::conj(r));
    }
    return out;
}

namespace {

bool poly_less(const Polynomial& a, const Polynomial& b) {
    if (a.degree() != b.degree()) return a.degree() < b.degree();
    for (std::size_t i = 0; i < a.coefficients().size(); ++i)
        if (a[i] != b[i]) return a[i] < b[i];
    return false;
}

// Irreducible factors of a monic squarefree integer polynomial.
std::vector<Polynomial> factor_squarefree(const Polynomial& p) {
    if (p.degree() <= 1) return {p};
    std::vector<cld> roots;
    for (const auto& r : complex_roots(p)) roots.emplace_back(r.value.real(), r.value.imag());
    Polynomial rest = p;
    std::vector<Polynomial> factors;
    std::size_t size = 1;
    while (rest.degree() >= 2 && size <= static_cast<std::size_t>(rest.degree()) / 2) {
        const std::size_t m = roots.size();
        std::vector<std::size_t> idx(size);
        std::iota(idx.begin(), idx.end(), 0);
        bool found = false;
        while (true) {
            // product of (x - r) over the subset
            std::vector<cld> prod{cld(1)};
            for (std::size_t k : idx) {
                std::vector<cld> next(prod.size() + 1, cld(0));
                for (std::size_t j = 0; j < prod.size(); ++j) {
                    next[j + 1] += prod[j];
                    next[j] -= prod[j] * roots[k];
                }
                prod = std::move(next);
            }
            bool near_integer = true;
            IntVector rounded;
            for (const auto& c : prod) {
                long double scale = std::max<long double>(1, std::abs(c));
                if (scale > 1e15L) throw InstanceTooLarge("factor: coefficients too large for root-subset factoring");
                long double r = std::round(c.real());
                if (std::abs(c.imag()) > 1e-6L * scale || std::abs(c.real() - r) > 1e-6L * scale) {
                    near_integer = false;
                    break;
                }
                rounded.emplace_back(static_cast<double>(r));
            }
            if (near_integer) {
                Polynomial g = Polynomial::from_integers(rounded);
                auto [quot, rem] = rest.divmod(g);
                if (rem.is_zero()) {
                    factors.push_back(g);
                    rest = quot;
                    std::vector<cld> left;
                    for (std::size_t k = 0; k < m; ++k)
                        if (std::find(idx.begin(), idx.end(), k) == idx.end()) left.push_back(roots[k]);
                    roots = std::move(left);
                    found = true;
                    break;
                }
            }
            // next combination
            std::size_t i = size;
            while (i > 0 && idx[i - 1] == m - size + i - 1) --i;
            if (i == 0) break;
            ++idx[i - 1];
            for (std::size_t j = i; j < size; ++j) idx[j] = idx[j - 1] + 1;
        }
        if (!found) ++size;
    }
    if (rest.degree() >= 1) factors.push_back(rest);
    return factors;
}

} // namespace

std::vector<std::pair<Polynomial, int>> factor_integer_polynomial(const Polynomial& p) {
    if (!p.is_monic() || !p.has_integer_coefficients())
        throw InvalidInput("factor_integer_polynomial: expected a monic integer polynomial");
    if (p.degree() > 16) throw DegreeTooLarge("factor_integer_polynomial: degree above 16");
    std::vector<std::pair<Polynomial, int>> out;
    for (const auto& [part, mult] : squarefree_decomposition(p))
        for (auto& f : factor_squarefree(part)) out.emplace_back(std::move(f), mult);
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
        if (poly_less(a.first, b.first)) return true;
        if (poly_less(b.first, a.first)) return false;
        return a.second < b.second;
    });
    return out;
}

bool is_irreducible(const Polynomial& p) {
    if (p.degree() < 1) return false;
    auto f = factor_integer_polynomial(p);
    return f.size() == 1 && f.front().second == 1;
}

} // namespace nilmix
