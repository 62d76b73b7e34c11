#include "nilmix/mixing.hpp"

#include "nilmix/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace nilmix {

// ---------------------------------------------------------------- TrigPolynomial

TrigPolynomial::TrigPolynomial(std::size_t dim, std::map<Frequency, ExactComplex> coefficients) : dim_(dim) {
    if (dim == 0) throw InvalidInput("TrigPolynomial: dimension must be positive");
    for (auto& [q, c] : coefficients) {
        if (q.size() != dim) throw DimensionMismatch("TrigPolynomial: frequency of wrong length");
        if (c.is_zero()) continue;
        double r = 0;
        for (long x : q) r += static_cast<double>(x) * static_cast<double>(x);
        radius_ = std::max(radius_, std::sqrt(r));
        coeffs_.emplace(q, c);
    }
    for (const auto& [q, c] : coeffs_) {
        Frequency neg = q;
        for (auto& x : neg) x = -x;
        if (!(coefficient(neg) == c.conj())) {
            real_ = false;
            break;
        }
    }
}

TrigPolynomial TrigPolynomial::constant(std::size_t dim, const Rational& c) {
    return TrigPolynomial(dim, {{Frequency(dim, 0), {c, 0}}});
}

TrigPolynomial TrigPolynomial::cosine(std::size_t dim, const Frequency& q, const Rational& amplitude) {
    Frequency neg = q;
    for (auto& x : neg) x = -x;
    if (q == neg) return constant(dim, amplitude);
    return TrigPolynomial(dim, {{q, {amplitude / 2, 0}}, {neg, {amplitude / 2, 0}}});
}

TrigPolynomial TrigPolynomial::sine(std::size_t dim, const Frequency& q, const Rational& amplitude) {
    Frequency neg = q;
    for (auto& x : neg) x = -x;
    if (q == neg) return constant(dim, 0);
    // sin u = (e^{iu} - e^{-iu}) / 2i
    return TrigPolynomial(dim, {{q, {0, -amplitude / 2}}, {neg, {0, amplitude / 2}}});
}

ExactComplex TrigPolynomial::coefficient(const Frequency& q) const {
    auto it = coeffs_.find(q);
    return it == coeffs_.end() ? ExactComplex{0, 0} : it->second;
}

std::complex<double> TrigPolynomial::evaluate(std::span<const double> x) const {
    if (x.size() != dim_) throw DimensionMismatch("TrigPolynomial::evaluate: point of wrong length");
    std::complex<double> s = 0;
    for (const auto& [q, c] : coeffs_) {
        double phase = 0;
        for (std::size_t i = 0; i < dim_; ++i) phase += static_cast<double>(q[i]) * x[i];
        s += c.value() * std::polar(1.0, 2 * std::numbers::pi * phase);
    }
    return s;
}

TrigPolynomial TrigPolynomial::operator+(const TrigPolynomial& o) const {
    if (o.dim_ != dim_) throw DimensionMismatch("TrigPolynomial sum: dimensions differ");
    std::map<Frequency, ExactComplex> sum = coeffs_;
    for (const auto& [q, c] : o.coeffs_) {
        auto [it, inserted] = sum.emplace(q, c);
        if (!inserted) it->second = it->second + c;
    }
    return TrigPolynomial(dim_, std::move(sum));
}

// ---------------------------------------------------------------- tuples

TupleZ::TupleZ(std::vector<std::vector<long>> points) : points_(std::move(points)) {
    if (points_.size() < 2) throw InvalidInput("TupleZ: need at least two points");
    for (const auto& p : points_)
        if (p.size() != points_.front().size() || p.empty()) throw DimensionMismatch("TupleZ: points of unequal length");
}

Separation separation(const TupleZ& z) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < z.size(); ++i)
        for (std::size_t j = i + 1; j < z.size(); ++j) {
            double s = 0;
            for (std::size_t k = 0; k < z.rank(); ++k) {
                double diff = static_cast<double>(z[i][k] - z[j][k]);
                s += diff * diff;
            }
            best = std::min(best, std::sqrt(s));
        }
    return {best, std::exp(best)};
}

namespace {

void check_action_tuple(const ToralAction& action, const TupleZ& z) {
    if (z.rank() != action.rank())
        throw DimensionMismatch("tuple points have length " + std::to_string(z.rank()) + " but the action has rank " +
                                std::to_string(action.rank()));
}

} // namespace

LatticeBasis kernel_lattice(const ToralAction& action, const TupleZ& z) {
    check_action_tuple(action, z);
    const std::size_t d = action.dim();
    const std::size_t n = z.size();
    IntMatrix m(d, n * d);
    for (std::size_t i = 0; i < n; ++i) {
        IntMatrix at = action.apply(z[i]).transpose();
        for (std::size_t r = 0; r < d; ++r)
            for (std::size_t c = 0; c < d; ++c) m(r, i * d + c) = at(r, c);
    }
    return integer_kernel(m);
}

ShortVector dio_min_vector(const ToralAction& action, const TupleZ& z) {
    return shortest_vector(kernel_lattice(action, z));
}

double dio_min(const ToralAction& action, const TupleZ& z) { return dio_min_vector(action, z).norm; }

// ---------------------------------------------------------------- correlations

namespace {

struct Term {
    std::vector<const Frequency*> q;
    std::vector<const ExactComplex*> c;
};

// Nonzero tuples with q_i in supp(f_i) and sum_i A(z_i)^T q_i = 0. The last frequency is
// solved from the others: q_last = -sum_{i<last} A(z_i - z_last)^T q_i.
std::vector<Term> surviving_terms(const ToralAction& action, const TupleZ& z, const std::vector<TrigPolynomial>& fs) {
    const std::size_t n = z.size();
    const std::size_t d = action.dim();
    const std::size_t last = n - 1;
    std::vector<IntMatrix> pull;
    for (std::size_t i = 0; i < last; ++i) {
        std::vector<long> diff(z.rank());
        for (std::size_t k = 0; k < z.rank(); ++k) diff[k] = z[i][k] - z[last][k];
        pull.push_back(action.apply(diff).transpose());
    }
    std::vector<std::vector<std::pair<const Frequency*, const ExactComplex*>>> supports(n);
    for (std::size_t i = 0; i < n; ++i)
        for (const auto& [q, c] : fs[i].coefficients()) supports[i].emplace_back(&q, &c);

    std::vector<Term> out;
    Term current;
    current.q.resize(n);
    current.c.resize(n);
    auto rec = [&](auto&& self, std::size_t i, const IntVector& partial) -> void {
        if (i == last) {
            Frequency q_last(d);
            for (std::size_t r = 0; r < d; ++r) {
                Integer v = -partial[r];
                if (!v.fits_slong_p()) return;
                q_last[r] = v.get_si();
            }
            auto it = fs[last].coefficients().find(q_last);
            if (it == fs[last].coefficients().end()) return;
            current.q[last] = &it->first;
            current.c[last] = &it->second;
            bool all_zero = true;
            for (std::size_t k = 0; k < n && all_zero; ++k)
                all_zero = std::all_of(current.q[k]->begin(), current.q[k]->end(), [](long x) { return x == 0; });
            if (!all_zero) out.push_back(current);
            return;
        }
        for (const auto& [q, c] : supports[i]) {
            IntVector next = partial;
            for (std::size_t r = 0; r < d; ++r)
                for (std::size_t k = 0; k < d; ++k)
                    if ((*q)[k] != 0) next[r] += pull[i](r, k) * (*q)[k];
            current.q[i] = q;
            current.c[i] = c;
            self(self, i + 1, next);
        }
    };
    rec(rec, 0, IntVector(d));
    return out;
}

} // namespace

CorrelationReport correlate(const ToralAction& action, const TupleZ& z,
                            const std::vector<std::vector<double>>& translations,
                            const std::vector<TrigPolynomial>& fs) {
    check_action_tuple(action, z);
    const std::size_t n = z.size();
    const std::size_t d = action.dim();
    if (fs.size() != n) throw DimensionMismatch("correlate: need one function per point");
    for (const auto& f : fs)
        if (f.dim() != d) throw DimensionMismatch("correlate: function dimension differs from the torus dimension");
    if (!translations.empty()) {
        if (translations.size() != n) throw DimensionMismatch("correlate: need one translation per point");
        for (const auto& g : translations)
            if (g.size() != d) throw DimensionMismatch("correlate: translation of wrong length");
    }
    const bool zero_shift =
        std::all_of(translations.begin(), translations.end(),
                    [](const auto& g) { return std::all_of(g.begin(), g.end(), [](double x) { return x == 0.0; }); });

    CorrelationReport report;
    report.separation = separation(z).s;
    report.D = dio_min(action, z);
    double max_radius = 0;
    for (const auto& f : fs) max_radius = std::max(max_radius, f.support_radius());
    report.vanished = report.D > std::sqrt(static_cast<double>(n)) * max_radius;

    ExactComplex means{1, 0};
    for (const auto& f : fs) means = means * f.mean();

    auto terms = surviving_terms(action, z, fs);
    report.surviving_terms = terms.size();

    ExactComplex exact_error{0, 0};
    std::complex<double> error = 0;
    for (const auto& t : terms) {
        ExactComplex prod{1, 0};
        double magnitude = 1;
        double phase = 0;
        for (std::size_t i = 0; i < n; ++i) {
            prod = prod * *t.c[i];
            magnitude *= std::abs(t.c[i]->value());
            if (!zero_shift)
                for (std::size_t k = 0; k < d; ++k) phase += static_cast<double>((*t.q[i])[k]) * translations[i][k];
        }
        report.error_bound += magnitude;
        if (zero_shift) {
            exact_error = exact_error + prod;
        } else {
            phase -= std::floor(phase);
            error += prod.value() * std::polar(1.0, 2 * std::numbers::pi * phase);
        }
    }

    report.product_of_means = means.value();
    if (zero_shift) {
        report.exact_product_of_means = means;
        report.exact_error = exact_error;
        report.exact_correlation = means + exact_error;
        report.error = exact_error.value();
        report.correlation = report.exact_correlation->value();
    } else {
        report.error = error;
        report.correlation = report.product_of_means + error;
    }
    return report;
}

double holder_bound(const TrigPolynomial& f, double theta) {
    if (!(theta > 0 && theta <= 1)) throw InvalidInput("holder_bound: theta must lie in (0, 1]");
    if (!f.is_real_valued()) throw InvalidInput("holder_bound: function must be real-valued");
    double sup = 0;
    double lip = 0;
    for (const auto& [q, c] : f.coefficients()) {
        double a = std::abs(c.value());
        double r = 0;
        for (long x : q) r += static_cast<double>(x) * static_cast<double>(x);
        sup += a;
        if (r > 0) lip += a * std::pow(2 * std::numbers::pi * std::sqrt(r), theta);
    }
    return sup + lip;
}

// ---------------------------------------------------------------- fits

LineFit least_squares(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) throw InsufficientData("least_squares: need at least two points");
    const double n = static_cast<double>(x.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (sxx == 0) throw InsufficientData("least_squares: abscissae are all equal");
    LineFit fit{sxy / sxx, 0, 0};
    fit.intercept = my - fit.slope * mx;
    double ss = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        double r = y[i] - (fit.intercept + fit.slope * x[i]);
        ss += r * r;
    }
    fit.rms_residual = std::sqrt(ss / n);
    return fit;
}

RateFit rate_fit(const ToralAction& action, std::span<const TupleZ> family, const std::vector<TrigPolynomial>& fs,
                 const std::vector<std::vector<double>>& translations) {
    if (family.size() < 4) throw InsufficientData("rate_fit: need at least 4 tuples");
    RateFit fit;
    for (const auto& z : family) {
        CorrelationReport r = correlate(action, z, translations, fs);
        if (!fit.table.empty() && !(r.separation > fit.table.back().separation))
            throw InsufficientData("rate_fit: separations must be strictly increasing");
        fit.table.push_back({r.separation, r.D, std::abs(r.error)});
    }
    std::vector<double> xs, ys, ex, ey;
    for (const auto& row : fit.table) {
        xs.push_back(row.separation);
        ys.push_back(std::log(row.D));
        if (row.abs_error > 0) {
            ex.push_back(row.separation);
            ey.push_back(-std::log(row.abs_error));
        }
    }
    LineFit lattice = least_squares(xs, ys);
    fit.eta_lattice = lattice.slope;
    fit.lattice_residual = lattice.rms_residual;
    if (ex.size() >= 2) {
        bool distinct = std::adjacent_find(ex.begin(), ex.end(), std::not_equal_to<>()) != ex.end();
        if (distinct) {
            LineFit err = least_squares(ex, ey);
            fit.eta_error = err.slope;
            fit.error_residual = err.rms_residual;
        }
    }
    return fit;
}

double predicted_exponent(double c, std::size_t degree, std::size_t n, double epsilon, double L) {
    if (!(c > 0) || degree == 0 || n < 2 || !(L > 0)) throw InvalidInput("predicted_exponent: c, degree, L must be positive and n >= 2");
    if (!(epsilon >= 0 && epsilon <= 1)) throw InvalidInput("predicted_exponent: epsilon must lie in [0, 1]");
    return c * (1 - epsilon) / (static_cast<double>(n - 1) * static_cast<double>(degree) * L);
}

} // namespace nilmix
