#include "nilmix/exactlin.hpp"

#include "nilmix/detail/enumeration.hpp"
#include "nilmix/error.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <utility>

namespace nilmix {

IntVector to_int_vector(std::span<const long> values) {
    IntVector out;
    out.reserve(values.size());
    for (long v : values) out.emplace_back(v);
    return out;
}

Integer dot(const IntVector& a, const IntVector& b) {
    if (a.size() != b.size()) throw DimensionMismatch("dot: length mismatch");
    Integer s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

Integer norm2(const IntVector& a) { return dot(a, a); }

bool is_zero(const IntVector& a) {
    return std::all_of(a.begin(), a.end(), [](const Integer& x) { return sgn(x) == 0; });
}

std::string to_string(const IntVector& v) {
    std::ostringstream os;
    os << '(';
    for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i].get_str();
    os << ')';
    return os.str();
}

// ---------------------------------------------------------------- IntMatrix

IntMatrix::IntMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), data_(rows * cols) {
    if (rows == 0 || cols == 0) throw InvalidInput("IntMatrix: dimensions must be positive");
}

IntMatrix IntMatrix::identity(std::size_t n) {
    IntMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1;
    return m;
}

IntMatrix IntMatrix::from_rows(const std::vector<IntVector>& rows) {
    if (rows.empty() || rows.front().empty()) throw InvalidInput("IntMatrix: empty rows");
    IntMatrix m(rows.size(), rows.front().size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != m.cols_) throw InvalidInput("IntMatrix: ragged rows");
        for (std::size_t j = 0; j < m.cols_; ++j) m(i, j) = rows[i][j];
    }
    return m;
}

IntMatrix IntMatrix::from_rows(const std::vector<std::vector<long>>& rows) {
    std::vector<IntVector> big;
    big.reserve(rows.size());
    for (const auto& r : rows) big.push_back(to_int_vector(r));
    return from_rows(big);
}

IntVector IntMatrix::row(std::size_t i) const {
    return IntVector(data_.begin() + static_cast<std::ptrdiff_t>(i * cols_),
                     data_.begin() + static_cast<std::ptrdiff_t>((i + 1) * cols_));
}

IntVector IntMatrix::column(std::size_t j) const {
    IntVector c(rows_);
    for (std::size_t i = 0; i < rows_; ++i) c[i] = (*this)(i, j);
    return c;
}

std::vector<IntVector> IntMatrix::row_vectors() const {
    std::vector<IntVector> out;
    out.reserve(rows_);
    for (std::size_t i = 0; i < rows_; ++i) out.push_back(row(i));
    return out;
}

IntMatrix IntMatrix::transpose() const {
    IntMatrix t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
}

bool IntMatrix::is_zero() const {
    return std::all_of(data_.begin(), data_.end(), [](const Integer& x) { return sgn(x) == 0; });
}

Integer IntMatrix::determinant() const {
    if (!is_square()) throw DimensionMismatch("determinant of a non-square matrix");
    const std::size_t n = rows_;
    std::vector<Integer> a = data_;
    auto at = [&](std::size_t i, std::size_t j) -> Integer& { return a[i * n + j]; };
    Integer prev = 1;
    int sign = 1;
    for (std::size_t k = 0; k + 1 < n; ++k) {
        if (sgn(at(k, k)) == 0) {
            std::size_t p = k + 1;
            while (p < n && sgn(at(p, k)) == 0) ++p;
            if (p == n) return 0;
            for (std::size_t j = 0; j < n; ++j) std::swap(at(k, j), at(p, j));
            sign = -sign;
        }
        for (std::size_t i = k + 1; i < n; ++i) {
            for (std::size_t j = k + 1; j < n; ++j) {
                Integer t = at(i, j) * at(k, k) - at(i, k) * at(k, j);
                mpz_divexact(t.get_mpz_t(), t.get_mpz_t(), prev.get_mpz_t());
                at(i, j) = t;
            }
            at(i, k) = 0;
        }
        prev = at(k, k);
    }
    Integer d = at(n - 1, n - 1);
    return sign > 0 ? d : Integer(-d);
}

IntMatrix IntMatrix::operator*(const IntMatrix& rhs) const {
    if (cols_ != rhs.rows_) throw DimensionMismatch("matrix product: inner dimensions differ");
    IntMatrix out(rows_, rhs.cols_);
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t k = 0; k < cols_; ++k) {
            const Integer& a = (*this)(i, k);
            if (sgn(a) == 0) continue;
            for (std::size_t j = 0; j < rhs.cols_; ++j) out(i, j) += a * rhs(k, j);
        }
    return out;
}

IntVector IntMatrix::operator*(const IntVector& v) const {
    if (cols_ != v.size()) throw DimensionMismatch("matrix-vector product: length mismatch");
    IntVector out(rows_);
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t j = 0; j < cols_; ++j) out[i] += (*this)(i, j) * v[j];
    return out;
}

IntMatrix IntMatrix::operator+(const IntMatrix& rhs) const {
    if (rows_ != rhs.rows_ || cols_ != rhs.cols_) throw DimensionMismatch("matrix sum: shape mismatch");
    IntMatrix out = *this;
    for (std::size_t i = 0; i < data_.size(); ++i) out.data_[i] += rhs.data_[i];
    return out;
}

IntMatrix IntMatrix::operator-(const IntMatrix& rhs) const {
    if (rows_ != rhs.rows_ || cols_ != rhs.cols_) throw DimensionMismatch("matrix difference: shape mismatch");
    IntMatrix out = *this;
    for (std::size_t i = 0; i < data_.size(); ++i) out.data_[i] -= rhs.data_[i];
    return out;
}

bool IntMatrix::operator==(const IntMatrix& rhs) const {
    return rows_ == rhs.rows_ && cols_ == rhs.cols_ && data_ == rhs.data_;
}

std::string IntMatrix::to_string() const {
    std::ostringstream os;
    os << '[';
    for (std::size_t i = 0; i < rows_; ++i) {
        os << (i ? "," : "") << '[';
        for (std::size_t j = 0; j < cols_; ++j) os << (j ? "," : "") << (*this)(i, j).get_str();
        os << ']';
    }
    os << ']';
    return os.str();
}

// ---------------------------------------------------------------- LatticeBasis

LatticeBasis::LatticeBasis(std::size_t ambient_dim) : ambient_dim_(ambient_dim) {}

LatticeBasis::LatticeBasis(Unchecked, std::size_t ambient_dim, std::vector<IntVector> vectors)
    : ambient_dim_(ambient_dim), vectors_(std::move(vectors)) {}

LatticeBasis::LatticeBasis(std::size_t ambient_dim, std::vector<IntVector> vectors)
    : ambient_dim_(ambient_dim), vectors_(std::move(vectors)) {
    for (const auto& v : vectors_)
        if (v.size() != ambient_dim_) throw DimensionMismatch("LatticeBasis: vector has wrong length");
    if (vectors_.size() > ambient_dim_) throw InvalidInput("LatticeBasis: more vectors than ambient dimension");
    if (!vectors_.empty() && nilmix::rank(as_matrix()) != vectors_.size())
        throw InvalidInput("LatticeBasis: vectors are linearly dependent");
}

LatticeBasis make_unchecked_basis(std::size_t ambient_dim, std::vector<IntVector> vectors) {
    return LatticeBasis(LatticeBasis::Unchecked{}, ambient_dim, std::move(vectors));
}

IntMatrix LatticeBasis::as_matrix() const { return IntMatrix::from_rows(vectors_); }

IntVector LatticeBasis::combine(const IntVector& coefficients) const {
    if (coefficients.size() != vectors_.size()) throw DimensionMismatch("combine: coefficient count");
    IntVector out(ambient_dim_);
    for (std::size_t i = 0; i < vectors_.size(); ++i) {
        if (sgn(coefficients[i]) == 0) continue;
        for (std::size_t j = 0; j < ambient_dim_; ++j) out[j] += coefficients[i] * vectors_[i][j];
    }
    return out;
}

// ---------------------------------------------------------------- HNF

namespace {

void swap_rows(IntMatrix& m, std::size_t a, std::size_t b) {
    if (a == b) return;
    for (std::size_t j = 0; j < m.cols(); ++j) std::swap(m(a, j), m(b, j));
}

// row[dst] -= q * row[src]
void sub_row(IntMatrix& m, std::size_t dst, std::size_t src, const Integer& q) {
    if (sgn(q) == 0) return;
    for (std::size_t j = 0; j < m.cols(); ++j) m(dst, j) -= q * m(src, j);
}

void negate_row(IntMatrix& m, std::size_t r) {
    for (std::size_t j = 0; j < m.cols(); ++j) m(r, j) = -m(r, j);
}

Integer floor_div(const Integer& a, const Integer& b) {
    Integer q;
    mpz_fdiv_q(q.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
    return q;
}

// nearest integer to a/b, halves rounded up
Integer round_div(const Integer& a, const Integer& b) {
    Integer twice_a = 2 * a + b;
    Integer twice_b = 2 * b;
    if (sgn(twice_b) < 0) {
        twice_a = -twice_a;
        twice_b = -twice_b;
    }
    return floor_div(twice_a, twice_b);
}

} // namespace

HermiteForm hnf(const IntMatrix& m) {
    IntMatrix h = m;
    IntMatrix u = IntMatrix::identity(m.rows());
    std::size_t pivot_row = 0;
    for (std::size_t col = 0; col < h.cols() && pivot_row < h.rows(); ++col) {
        // Euclid on the column below pivot_row until a single nonzero remains.
        while (true) {
            std::size_t best = h.rows();
            for (std::size_t i = pivot_row; i < h.rows(); ++i) {
                if (sgn(h(i, col)) == 0) continue;
                if (best == h.rows() || abs(h(i, col)) < abs(h(best, col))) best = i;
            }
            if (best == h.rows()) break;
            swap_rows(h, pivot_row, best);
            swap_rows(u, pivot_row, best);
            bool done = true;
            for (std::size_t i = pivot_row + 1; i < h.rows(); ++i) {
                if (sgn(h(i, col)) == 0) continue;
                Integer q = floor_div(h(i, col), h(pivot_row, col));
                sub_row(h, i, pivot_row, q);
                sub_row(u, i, pivot_row, q);
                if (sgn(h(i, col)) != 0) done = false;
            }
            if (done) break;
        }
        if (sgn(h(pivot_row, col)) == 0) continue;
        if (sgn(h(pivot_row, col)) < 0) {
            negate_row(h, pivot_row);
            negate_row(u, pivot_row);
        }
        const Integer pivot = h(pivot_row, col);
        for (std::size_t i = 0; i < pivot_row; ++i) {
            Integer q = floor_div(h(i, col), pivot);
            sub_row(h, i, pivot_row, q);
            sub_row(u, i, pivot_row, q);
        }
        ++pivot_row;
    }
    return {std::move(h), std::move(u), pivot_row};
}

std::size_t rank(const IntMatrix& m) { return hnf(m).rank; }

LatticeBasis integer_kernel(const IntMatrix& m) {
    // u * m^T = h; rows of u past the rank annihilate m.
    HermiteForm f = hnf(m.transpose());
    std::vector<IntVector> kernel;
    for (std::size_t i = f.rank; i < f.u.rows(); ++i) kernel.push_back(f.u.row(i));
    LatticeBasis basis = make_unchecked_basis(m.cols(), std::move(kernel));
    if (basis.empty()) return basis;
    return lll_reduce(basis);
}

bool same_lattice(const LatticeBasis& a, const LatticeBasis& b) {
    if (a.ambient_dim() != b.ambient_dim() || a.rank() != b.rank()) return false;
    if (a.empty()) return true;
    return hnf(a.as_matrix()).h == hnf(b.as_matrix()).h;
}

// ---------------------------------------------------------------- LLL

LllResult lll_reduce_with_transform(const LatticeBasis& input, const Rational& delta) {
    if (delta <= Rational(1, 4) || delta >= 1) throw InvalidInput("lll_reduce: delta must lie in (1/4, 1)");
    const std::size_t n = input.rank();
    if (n == 0) return {input, IntMatrix::identity(1)};

    // Cohen's integral LLL, 1-based indices internally.
    std::vector<IntVector> b(n + 1);
    for (std::size_t i = 0; i < n; ++i) b[i + 1] = input[i];
    std::vector<IntVector> t(n + 1, IntVector(n));
    for (std::size_t i = 0; i < n; ++i) t[i + 1][i] = 1;
    std::vector<Integer> d(n + 1);
    std::vector<std::vector<Integer>> lambda(n + 1, std::vector<Integer>(n + 1));
    const Integer p = delta.get_num();
    const Integer q = delta.get_den();

    auto redi = [&](std::size_t k, std::size_t l) {
        if (2 * abs(lambda[k][l]) <= d[l]) return;
        Integer r = round_div(lambda[k][l], d[l]);
        for (std::size_t j = 0; j < input.ambient_dim(); ++j) b[k][j] -= r * b[l][j];
        for (std::size_t j = 0; j < n; ++j) t[k][j] -= r * t[l][j];
        lambda[k][l] -= r * d[l];
        for (std::size_t i = 1; i < l; ++i) lambda[k][i] -= r * lambda[l][i];
    };

    std::size_t kmax = 1;
    auto swapi = [&](std::size_t k) {
        std::swap(b[k], b[k - 1]);
        std::swap(t[k], t[k - 1]);
        for (std::size_t j = 1; j + 1 < k; ++j) std::swap(lambda[k][j], lambda[k - 1][j]);
        const Integer lam = lambda[k][k - 1];
        Integer big_b = (d[k - 2] * d[k] + lam * lam);
        mpz_divexact(big_b.get_mpz_t(), big_b.get_mpz_t(), d[k - 1].get_mpz_t());
        for (std::size_t i = k + 1; i <= kmax; ++i) {
            const Integer tt = lambda[i][k];
            Integer a = d[k] * lambda[i][k - 1] - lam * tt;
            mpz_divexact(a.get_mpz_t(), a.get_mpz_t(), d[k - 1].get_mpz_t());
            lambda[i][k] = a;
            Integer c = big_b * tt + lam * lambda[i][k];
            mpz_divexact(c.get_mpz_t(), c.get_mpz_t(), d[k].get_mpz_t());
            lambda[i][k - 1] = c;
        }
        d[k - 1] = big_b;
    };

    d[0] = 1;
    d[1] = dot(b[1], b[1]);
    std::size_t k = 2;
    while (k <= n) {
        if (k > kmax) {
            kmax = k;
            for (std::size_t j = 1; j <= k; ++j) {
                Integer u = dot(b[k], b[j]);
                for (std::size_t i = 1; i < j; ++i) {
                    u = d[i] * u - lambda[k][i] * lambda[j][i];
                    mpz_divexact(u.get_mpz_t(), u.get_mpz_t(), d[i - 1].get_mpz_t());
                }
                if (j < k) lambda[k][j] = u;
                else d[k] = u;
            }
            if (sgn(d[k]) == 0) throw InvalidInput("lll_reduce: vectors are linearly dependent");
        }
        redi(k, k - 1);
        const Integer lam = lambda[k][k - 1];
        if (q * (d[k] * d[k - 2] + lam * lam) < p * d[k - 1] * d[k - 1]) {
            swapi(k);
            k = std::max<std::size_t>(2, k - 1);
        } else {
            for (std::size_t l = k - 1; l-- > 1;) redi(k, l);
            ++k;
        }
    }
    std::vector<IntVector> out(b.begin() + 1, b.end());
    std::vector<IntVector> trans(t.begin() + 1, t.end());
    return {make_unchecked_basis(input.ambient_dim(), std::move(out)), IntMatrix::from_rows(trans)};
}

LatticeBasis lll_reduce(const LatticeBasis& b, const Rational& delta) {
    return lll_reduce_with_transform(b, delta).basis;
}

bool is_lll_reduced(const LatticeBasis& b, const Rational& delta) {
    const std::size_t n = b.rank();
    // exact rational Gram-Schmidt
    std::vector<std::vector<Rational>> bstar(n);
    std::vector<Rational> bn(n);
    std::vector<std::vector<Rational>> mu(n, std::vector<Rational>(n));
    for (std::size_t i = 0; i < n; ++i) {
        bstar[i].assign(b.ambient_dim(), 0);
        for (std::size_t j = 0; j < b.ambient_dim(); ++j) bstar[i][j] = b[i][j];
        for (std::size_t j = 0; j < i; ++j) {
            Rational num = 0;
            for (std::size_t c = 0; c < b.ambient_dim(); ++c) num += Rational(b[i][c]) * bstar[j][c];
            mu[i][j] = num / bn[j];
            for (std::size_t c = 0; c < b.ambient_dim(); ++c) bstar[i][c] -= mu[i][j] * bstar[j][c];
        }
        bn[i] = 0;
        for (const auto& x : bstar[i]) bn[i] += x * x;
    }
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < i; ++j)
            if (abs(mu[i][j]) > Rational(1, 2)) return false;
    for (std::size_t k = 1; k < n; ++k)
        if (bn[k] < (delta - mu[k][k - 1] * mu[k][k - 1]) * bn[k - 1]) return false;
    return true;
}

// ---------------------------------------------------------------- enumeration core

namespace detail {

std::vector<std::vector<Real>> to_real(const std::vector<IntVector>& vectors) {
    std::vector<std::vector<Real>> out;
    out.reserve(vectors.size());
    for (const auto& v : vectors) {
        std::vector<Real> r(v.size());
        for (std::size_t i = 0; i < v.size(); ++i) r[i] = static_cast<Real>(v[i].get_d());
        out.push_back(std::move(r));
    }
    return out;
}

GramSchmidt gram_schmidt(const std::vector<IntVector>& basis) {
    const std::size_t n = basis.size();
    const std::size_t dim = n ? basis[0].size() : 0;
    std::vector<std::vector<Rational>> bstar(n, std::vector<Rational>(dim));
    std::vector<Rational> bn(n);
    GramSchmidt gs;
    gs.mu.assign(n, std::vector<Real>(n, 0));
    gs.bstar2.assign(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t c = 0; c < dim; ++c) bstar[i][c] = basis[i][c];
        for (std::size_t j = 0; j < i; ++j) {
            Rational num = 0;
            for (std::size_t c = 0; c < dim; ++c) num += Rational(basis[i][c]) * bstar[j][c];
            Rational m = num / bn[j];
            gs.mu[i][j] = static_cast<Real>(m.get_d());
            for (std::size_t c = 0; c < dim; ++c) bstar[i][c] -= m * bstar[j][c];
        }
        for (const auto& x : bstar[i]) bn[i] += x * x;
        gs.bstar2[i] = static_cast<Real>(bn[i].get_d());
    }
    return gs;
}

GramSchmidt gram_schmidt(const std::vector<std::vector<Real>>& basis) {
    const std::size_t n = basis.size();
    const std::size_t dim = n ? basis[0].size() : 0;
    std::vector<std::vector<Real>> bstar = basis;
    GramSchmidt gs;
    gs.mu.assign(n, std::vector<Real>(n, 0));
    gs.bstar2.assign(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < i; ++j) {
            Real num = 0;
            for (std::size_t c = 0; c < dim; ++c) num += basis[i][c] * bstar[j][c];
            Real m = num / gs.bstar2[j];
            gs.mu[i][j] = m;
            for (std::size_t c = 0; c < dim; ++c) bstar[i][c] -= m * bstar[j][c];
        }
        Real s = 0;
        for (Real x : bstar[i]) s += x * x;
        gs.bstar2[i] = s;
    }
    return gs;
}

std::pair<std::vector<Real>, Real> project_target(const std::vector<std::vector<Real>>& basis,
                                                  const GramSchmidt& gs,
                                                  std::span<const Real> target) {
    const std::size_t n = basis.size();
    const std::size_t dim = target.size();
    std::vector<std::vector<Real>> bstar = basis;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < i; ++j)
            for (std::size_t c = 0; c < dim; ++c) bstar[i][c] -= gs.mu[i][j] * bstar[j][c];
    std::vector<Real> coords(n);
    std::vector<Real> rest(target.begin(), target.end());
    for (std::size_t i = 0; i < n; ++i) {
        Real num = 0;
        for (std::size_t c = 0; c < dim; ++c) num += target[c] * bstar[i][c];
        coords[i] = num / gs.bstar2[i];
        for (std::size_t c = 0; c < dim; ++c) rest[c] -= coords[i] * bstar[i][c];
    }
    Real perp = 0;
    for (Real x : rest) perp += x * x;
    return {coords, perp};
}

namespace {

struct Enumerator {
    const GramSchmidt& gs;
    std::span<const Real> center;
    Real bound;
    const EllipsoidVisitor& visit;
    std::vector<long> x;

    void recurse(std::size_t level_plus_one, Real partial) {
        if (level_plus_one == 0) {
            bound = visit(x, partial);
            return;
        }
        const std::size_t i = level_plus_one - 1;
        Real c = center[i];
        for (std::size_t j = i + 1; j < x.size(); ++j) c -= gs.mu[j][i] * static_cast<Real>(x[j]);
        const Real b = gs.bstar2[i];
        Real room = bound - partial;
        if (room < 0) return;
        Real half = std::sqrt(room / b);
        long lo = static_cast<long>(std::ceil(c - half - 1e-12L));
        long hi = static_cast<long>(std::floor(c + half + 1e-12L));
        for (long xi = lo; xi <= hi; ++xi) {
            Real diff = static_cast<Real>(xi) - c;
            Real next = partial + b * diff * diff;
            if (next > bound) continue;
            x[i] = xi;
            recurse(i, next);
        }
        x[i] = 0;
    }
};

} // namespace

void enumerate_ellipsoid(const GramSchmidt& gs, std::span<const Real> center, Real bound,
                         const EllipsoidVisitor& visit) {
    Enumerator e{gs, center, bound, visit, std::vector<long>(gs.bstar2.size(), 0)};
    e.recurse(gs.bstar2.size(), 0);
}

} // namespace detail

// ---------------------------------------------------------------- SVP / CVP

namespace {

IntVector row_times(const std::vector<long>& x, const IntMatrix& t) {
    IntVector out(t.cols());
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i] == 0) continue;
        for (std::size_t j = 0; j < t.cols(); ++j) out[j] += x[i] * t(i, j);
    }
    return out;
}

IntVector combine_long(const std::vector<IntVector>& basis, const std::vector<long>& x, std::size_t dim) {
    IntVector out(dim);
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i] == 0) continue;
        for (std::size_t j = 0; j < dim; ++j) out[j] += x[i] * basis[i][j];
    }
    return out;
}

void sign_normalize(IntVector& coeffs, IntVector& vec) {
    for (const auto& c : coeffs) {
        if (sgn(c) == 0) continue;
        if (sgn(c) < 0) {
            for (auto& x : coeffs) x = -x;
            for (auto& x : vec) x = -x;
        }
        return;
    }
}

} // namespace

ShortVector shortest_vector(const LatticeBasis& input) {
    if (input.empty()) throw InvalidInput("shortest_vector: empty basis");
    LllResult red = lll_reduce_with_transform(input);
    const auto& basis = red.basis.vectors();
    const std::size_t dim = input.ambient_dim();

    Integer best = norm2(basis[0]);
    for (const auto& v : basis) best = std::min(best, norm2(v));
    std::vector<std::vector<long>> ties;

    auto slack = [](const Integer& n2) {
        detail::Real v = static_cast<detail::Real>(n2.get_d());
        return v * (1 + 1e-9L) + 1e-9L;
    };
    detail::GramSchmidt gs = detail::gram_schmidt(basis);
    std::vector<detail::Real> center(basis.size(), 0);
    detail::enumerate_ellipsoid(gs, center, slack(best), [&](const std::vector<long>& x, detail::Real) {
        if (std::all_of(x.begin(), x.end(), [](long c) { return c == 0; })) return slack(best);
        Integer n2 = norm2(combine_long(basis, x, dim));
        if (n2 < best) {
            best = n2;
            ties.clear();
        }
        if (n2 == best) ties.push_back(x);
        return slack(best);
    });

    ShortVector out;
    bool have = false;
    for (const auto& x : ties) {
        IntVector coeffs = row_times(x, red.transform);
        IntVector vec = combine_long(basis, x, dim);
        sign_normalize(coeffs, vec);
        if (!have || coeffs < out.coefficients) {
            out.coefficients = std::move(coeffs);
            out.vector = std::move(vec);
            have = true;
        }
    }
    if (!have) throw Error("shortest_vector: enumeration found no vector");
    out.norm2 = best;
    out.norm = std::sqrt(best.get_d());
    return out;
}

namespace {

struct CvpCandidate {
    std::vector<long> x;
    detail::Real dist2;
};

// Enumerates around the target and keeps every point within a relative 1e-9 of the optimum.
std::vector<CvpCandidate> cvp_candidates(const std::vector<std::vector<detail::Real>>& basis,
                                         std::span<const double> target) {
    const std::size_t n = basis.size();
    const std::size_t dim = target.size();
    std::vector<detail::Real> t(target.begin(), target.end());
    detail::GramSchmidt gs = detail::gram_schmidt(basis);
    auto [coords, perp] = detail::project_target(basis, gs, t);

    auto distance2 = [&](const std::vector<long>& x) {
        detail::Real s = 0;
        for (std::size_t c = 0; c < dim; ++c) {
            detail::Real v = -t[c];
            for (std::size_t i = 0; i < n; ++i) v += static_cast<detail::Real>(x[i]) * basis[i][c];
            s += v * v;
        }
        return s;
    };

    // Babai nearest plane for the starting radius.
    std::vector<long> babai(n, 0);
    for (std::size_t i = n; i-- > 0;) {
        detail::Real c = coords[i];
        for (std::size_t j = i + 1; j < n; ++j) c -= gs.mu[j][i] * static_cast<detail::Real>(babai[j]);
        babai[i] = static_cast<long>(std::llround(c));
    }
    detail::Real best = distance2(babai);
    auto slack = [&](detail::Real d2) { return d2 * (1 + 1e-9L) + 1e-12L; };

    std::vector<CvpCandidate> found;
    detail::enumerate_ellipsoid(gs, coords, slack(best - perp), [&](const std::vector<long>& x, detail::Real) {
        detail::Real d2 = distance2(x);
        if (d2 < best) best = d2;
        if (d2 <= slack(best)) found.push_back({x, d2});
        return slack(best - perp);
    });
    found.push_back({babai, distance2(babai)});
    std::vector<CvpCandidate> ties;
    for (auto& c : found)
        if (c.dist2 <= slack(best)) ties.push_back(std::move(c));
    return ties;
}

} // namespace

ClosePoint closest_vector(const LatticeBasis& input, std::span<const double> target) {
    if (input.empty()) throw InvalidInput("closest_vector: empty basis");
    if (target.size() != input.ambient_dim()) throw DimensionMismatch("closest_vector: target length");
    LllResult red = lll_reduce_with_transform(input);
    auto real_basis = detail::to_real(red.basis.vectors());
    auto ties = cvp_candidates(real_basis, target);

    ClosePoint out;
    bool have = false;
    for (const auto& c : ties) {
        IntVector coeffs = row_times(c.x, red.transform);
        if (!have || coeffs < out.coefficients) {
            out.coefficients = std::move(coeffs);
            have = true;
        }
    }
    IntVector point = input.combine(out.coefficients);
    out.point.resize(point.size());
    double d2 = 0;
    for (std::size_t i = 0; i < point.size(); ++i) {
        out.point[i] = point[i].get_d();
        d2 += (out.point[i] - target[i]) * (out.point[i] - target[i]);
    }
    out.distance = std::sqrt(d2);
    return out;
}

ClosePoint closest_vector(const std::vector<std::vector<double>>& basis, std::span<const double> target) {
    if (basis.empty()) throw InvalidInput("closest_vector: empty basis");
    std::vector<std::vector<detail::Real>> real_basis;
    for (const auto& row : basis) {
        if (row.size() != target.size()) throw DimensionMismatch("closest_vector: target length");
        real_basis.emplace_back(row.begin(), row.end());
    }
    auto gs = detail::gram_schmidt(real_basis);
    for (auto b : gs.bstar2)
        if (!(b > 1e-24L)) throw InvalidInput("closest_vector: basis is (numerically) dependent");
    auto ties = cvp_candidates(real_basis, target);

    ClosePoint out;
    bool have = false;
    for (const auto& c : ties) {
        IntVector coeffs;
        for (long v : c.x) coeffs.emplace_back(v);
        if (!have || coeffs < out.coefficients) {
            out.coefficients = std::move(coeffs);
            have = true;
        }
    }
    out.point.assign(target.size(), 0.0);
    for (std::size_t i = 0; i < basis.size(); ++i)
        for (std::size_t c = 0; c < target.size(); ++c) out.point[c] += out.coefficients[i].get_d() * basis[i][c];
    double d2 = 0;
    for (std::size_t c = 0; c < target.size(); ++c) d2 += (out.point[c] - target[c]) * (out.point[c] - target[c]);
    out.distance = std::sqrt(d2);
    return out;
}

} // namespace nilmix
