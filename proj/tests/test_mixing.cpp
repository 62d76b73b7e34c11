#include "nilmix/error.hpp"
#include "nilmix/mixing.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace nilmix;

namespace {

IntMatrix M(const std::vector<std::vector<long>>& rows) { return IntMatrix::from_rows(rows); }
const IntMatrix cat = M({{2, 1}, {1, 1}});
const oracle::Mat2 cat2{{{2, 1}, {1, 1}}};

TupleZ T1(std::vector<long> z) {
    std::vector<std::vector<long>> pts;
    for (long x : z) pts.push_back({x});
    return TupleZ(pts);
}

std::vector<long> kernel_contains(const LatticeBasis& b, std::vector<long> v) {
    std::vector<IntVector> rows = b.vectors();
    rows.push_back(to_int_vector(v));
    return {static_cast<long>(rank(IntMatrix::from_rows(rows)))};
}

// Riemann sum on an N x N grid; exact for trig polynomials of degree < N.
std::complex<double> grid_integral(const ToralAction& a, const TupleZ& z, const std::vector<TrigPolynomial>& fs,
                                   const std::vector<std::vector<double>>& g, int N) {
    std::vector<IntMatrix> mats;
    for (std::size_t i = 0; i < z.size(); ++i) mats.push_back(a.apply(z[i]));
    std::complex<double> s = 0;
    for (int u = 0; u < N; ++u)
        for (int v = 0; v < N; ++v) {
            double x[2] = {double(u) / N, double(v) / N};
            std::complex<double> p = 1;
            for (std::size_t i = 0; i < z.size(); ++i) {
                double y[2];
                for (int r = 0; r < 2; ++r) {
                    y[r] = mats[i](r, 0).get_d() * x[0] + mats[i](r, 1).get_d() * x[1];
                    if (!g.empty()) y[r] += g[i][r];
                    y[r] -= std::floor(y[r]);
                }
                p *= fs[i].evaluate(y);
            }
            s += p;
        }
    return s / double(N * N);
}

} // namespace

TEST_CASE("trig polynomials") {
    auto c = TrigPolynomial::cosine(2, {1, 0});
    CHECK(c.is_real_valued());
    CHECK(c.support_radius() == doctest::Approx(1));
    CHECK(c.mean().is_zero());
    double x[2] = {0.25, 0.1};
    CHECK(c.evaluate(x).real() == doctest::Approx(std::cos(2 * std::numbers::pi * 0.25)));
    auto s = TrigPolynomial::sine(2, {0, 1});
    CHECK(s.evaluate(x).real() == doctest::Approx(std::sin(2 * std::numbers::pi * 0.1)));
    CHECK(s.evaluate(x).imag() == doctest::Approx(0));
    TrigPolynomial z(2, {{{1, 0}, {1, 0}}});
    CHECK(!z.is_real_valued());
    CHECK_THROWS_AS(TrigPolynomial(2, {{{1}, {1, 0}}}), DimensionMismatch);
}

TEST_CASE("separation") {
    CHECK(separation(T1({0, 0})).s == 0);
    CHECK(separation(T1({0, 0})).n == doctest::Approx(1));
    CHECK(separation(T1({0, 5, 10})).s == doctest::Approx(5));
    CHECK(separation(TupleZ({{0, 0}, {3, 4}})).s == doctest::Approx(5));
    CHECK_THROWS_AS(TupleZ(std::vector<std::vector<long>>{{0}}), InvalidInput);
}

TEST_CASE("kernel lattice") {
    auto a = validate_action({cat});
    auto k0 = kernel_lattice(a, T1({0, 0}));
    CHECK(k0.rank() == 2);
    auto k1 = kernel_lattice(a, T1({0, 1}));
    CHECK(k1.rank() == 2);
    CHECK(kernel_contains(k1, {-1, -1, 0, 1})[0] == 2);
    auto k2 = kernel_lattice(a, T1({0, 1, 2}));
    CHECK(k2.rank() == 4);
    for (const auto& v : k2.vectors()) {
        IntVector s(2);
        for (std::size_t i = 0; i < 3; ++i) {
            IntMatrix at = a.apply(std::vector<long>{static_cast<long>(i)}).transpose();
            IntVector q{v[2 * i], v[2 * i + 1]};
            IntVector w = at * q;
            s[0] += w[0];
            s[1] += w[1];
        }
        CHECK(is_zero(s));
    }
    CHECK_THROWS_AS(kernel_lattice(a, TupleZ({{0, 0}, {1, 1}})), DimensionMismatch);
}

TEST_CASE("dio_min") {
    auto a = validate_action({cat});
    CHECK(dio_min(a, T1({0, 0})) == doctest::Approx(std::sqrt(2.0)));
    CHECK(dio_min(a, T1({0, 1})) == doctest::Approx(std::sqrt(3.0)));
    double prev = 0;
    for (long k = 1; k <= 12; ++k) {
        double d = dio_min(a, T1({0, k}));
        CHECK(d >= prev);
        prev = d;
    }
}

TEST_CASE("dio_min matches a direct frequency search") {
    auto a = validate_action({cat});
    for (const auto& z : std::vector<std::vector<long>>{{0, 1}, {0, 2}, {0, 3}, {0, 1, 2}, {0, 1, 3}, {0, 2, 4}, {1, 0, -1}}) {
        double d = dio_min(a, T1(z));
        long box = z.size() == 2 ? 5 : 3;
        auto best = oracle::dio_min2_box(cat2, z, box);
        // the box certifies the minimum only when it is smaller than the box radius
        if (best && std::sqrt(double(*best)) <= double(box)) {
            CHECK(d * d == doctest::Approx(double(*best)));
        } else {
            CHECK(d > double(box) - 1e-9);
        }
    }
}

TEST_CASE("correlate examples") {
    auto a = validate_action({cat});
    auto f = TrigPolynomial::cosine(2, {1, 0});
    auto r0 = correlate(a, T1({0, 0}), {}, {f, f});
    REQUIRE(r0.exact_correlation);
    CHECK(r0.exact_correlation->re == Rational(1, 2));
    CHECK(r0.exact_product_of_means->is_zero());
    CHECK(r0.exact_error->re == Rational(1, 2));
    CHECK(!r0.vanished);

    auto r1 = correlate(a, T1({0, 1}), {}, {f, f});
    CHECK(r1.exact_correlation->is_zero());
    CHECK(r1.vanished);
    CHECK(r1.surviving_terms == 0);

    std::mt19937_64 gen(4);
    std::uniform_real_distribution<double> u(0, 1);
    auto c1 = TrigPolynomial::constant(2, Rational(2, 3));
    auto c2 = TrigPolynomial::constant(2, Rational(-3, 5));
    for (long k = 0; k < 4; ++k) {
        std::vector<std::vector<double>> g{{u(gen), u(gen)}, {u(gen), u(gen)}};
        auto r = correlate(a, T1({0, k}), g, {c1, c2});
        CHECK(r.error == std::complex<double>(0, 0));
        CHECK(r.correlation.real() == doctest::Approx(-0.4));
    }
    CHECK_THROWS_AS(correlate(a, T1({0, 1}), {}, {f}), DimensionMismatch);
}

TEST_CASE("correlate agrees with grid integration") {
    auto a = validate_action({cat});
    std::mt19937_64 gen(21);
    std::uniform_int_distribution<long> q(-2, 2), num(-4, 4), zs(-2, 2);
    std::uniform_real_distribution<double> u(0, 1);
    auto random_f = [&] {
        std::map<Frequency, ExactComplex> c;
        for (int t = 0; t < 3; ++t) {
            Frequency f{q(gen), q(gen)};
            Frequency nf{-f[0], -f[1]};
            Rational re(num(gen), 4), im(num(gen), 4);
            if (f == nf) im = 0;
            c[f] = {re, im};
            c[nf] = {re, -im};
        }
        return TrigPolynomial(2, c);
    };
    for (int trial = 0; trial < 12; ++trial) {
        std::vector<long> z{zs(gen), zs(gen)};
        if (trial % 3 == 0) z.push_back(zs(gen));
        TupleZ tz = T1(z);
        std::vector<TrigPolynomial> fs;
        for (std::size_t i = 0; i < z.size(); ++i) fs.push_back(random_f());
        std::vector<std::vector<double>> g;
        if (trial % 2) g.assign(z.size(), {u(gen), u(gen)});
        auto r = correlate(a, tz, g, fs);
        auto grid = grid_integral(a, tz, fs, g, 128);
        CHECK(std::abs(r.correlation - grid) < 1e-6);
        CHECK(std::abs(r.error) <= r.error_bound + 1e-12);
    }
}

TEST_CASE("vanishing beyond the diophantine threshold") {
    auto a = validate_action({cat});
    auto f = TrigPolynomial::cosine(2, {1, 1}) + TrigPolynomial::cosine(2, {2, -1}, Rational(1, 3));
    std::mt19937_64 gen(9);
    std::uniform_real_distribution<double> u(0, 1);
    bool vanished_before = false;
    for (long k = 1; k <= 8; ++k) {
        for (int s = 0; s < 5; ++s) {
            std::vector<std::vector<double>> g{{u(gen), u(gen)}, {u(gen), u(gen)}};
            auto r = correlate(a, T1({0, k}), g, {f, f});
            if (r.vanished) CHECK(r.error == std::complex<double>(0, 0));
            if (vanished_before) CHECK(r.vanished);
            if (s == 4) vanished_before = vanished_before || r.vanished;
        }
    }
    CHECK(vanished_before);
}

TEST_CASE("holder bound") {
    CHECK(holder_bound(TrigPolynomial::constant(2, Rational(-3, 2)), 0.5) == doctest::Approx(1.5));
    auto f = TrigPolynomial::cosine(2, {1, 0});
    CHECK(holder_bound(f, 1) == doctest::Approx(1 + 2 * std::numbers::pi));
    CHECK(holder_bound(f, 0.5) == doctest::Approx(1 + std::sqrt(2 * std::numbers::pi)));
    CHECK(holder_bound(f, 0.5) == doctest::Approx(3.5066).epsilon(1e-4));
    CHECK_THROWS_AS(holder_bound(f, 0), InvalidInput);
}

TEST_CASE("rate fit") {
    auto a = validate_action({cat});
    auto f = TrigPolynomial::cosine(2, {1, 0});
    std::vector<TupleZ> fam;
    for (long k = 2; k <= 12; ++k) fam.push_back(T1({0, k}));
    auto fit = rate_fit(a, fam, {f, f});
    CHECK(fit.table.size() == 11);
    CHECK(fit.eta_lattice == doctest::Approx(0.48).epsilon(0.1 / 0.48));
    CHECK(fit.eta_lattice >= 0.38);
    CHECK(fit.eta_lattice <= 0.58);

    std::vector<TupleZ> flat(5, T1({0, 3}));
    CHECK_THROWS_AS(rate_fit(a, flat, {f, f}), InsufficientData);
    std::vector<TupleZ> shortfam(fam.begin(), fam.begin() + 3);
    CHECK_THROWS_AS(rate_fit(a, shortfam, {f, f}), InsufficientData);

    std::vector<TupleZ> fam3;
    for (long k = 2; k <= 9; ++k) fam3.push_back(T1({0, k, 2 * k}));
    CHECK(rate_fit(a, fam3, {f, f, f}).eta_lattice > 0);
}

TEST_CASE("predicted exponent") {
    CHECK(predicted_exponent(0.9624, 2, 2, 0.1, 1) == doctest::Approx(0.43308));
    CHECK(predicted_exponent(0.9624, 2, 2, 1.0, 1) == doctest::Approx(0));
    CHECK(predicted_exponent(1, 1, 2, 0, 1) == doctest::Approx(1));
    CHECK_THROWS_AS(predicted_exponent(1, 1, 1, 0.1, 1), InvalidInput);
    CHECK_THROWS_AS(predicted_exponent(1, 1, 2, 1.5, 1), InvalidInput);
}
