// Acceptance suite: one PASS/FAIL line per criterion.

#include "nilmix/action.hpp"
#include "nilmix/error.hpp"
#include "nilmix/mixing.hpp"
#include "nilmix/numfield.hpp"
#include "nilmix/uniteq.hpp"
#include "nilmix_cli.hpp"
#include "oracles.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>
#include <unistd.h>

using namespace nilmix;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool ok = true;
    std::string detail;
    void require(bool cond, const std::string& what) {
        if (!cond && ok) {
            ok = false;
            detail = what;
        }
    }
};

const IntMatrix cat = IntMatrix::from_rows(std::vector<std::vector<long>>{{2, 1}, {1, 1}});
const double log_lambda = std::log((3 + std::sqrt(5.0)) / 2);

TupleZ progression(std::size_t n, long k) {
    std::vector<std::vector<long>> pts;
    for (std::size_t i = 0; i < n; ++i) pts.push_back({static_cast<long>(i) * k});
    return TupleZ(pts);
}

TrigPolynomial random_real_poly(std::mt19937_64& gen, long qmax, double radius, int terms) {
    std::uniform_int_distribution<long> q(-qmax, qmax), num(-6, 6), den(1, 5);
    std::map<Frequency, ExactComplex> c;
    for (int t = 0; t < terms; ++t) {
        Frequency f{q(gen), q(gen)};
        if (std::hypot(double(f[0]), double(f[1])) > radius) continue;
        Frequency nf{-f[0], -f[1]};
        Rational re(num(gen), den(gen)), im(num(gen), den(gen));
        re.canonicalize();
        im.canonicalize();
        if (f == nf) im = 0;
        c[f] = {re, im};
        c[nf] = {re, -im};
    }
    return TrigPolynomial(2, c);
}

std::string str(double x) {
    std::ostringstream s;
    s.precision(6);
    s << x;
    return s.str();
}

// 1
Outcome vanishing() {
    Outcome o;
    auto a = validate_action({cat});
    std::mt19937_64 gen(1001);
    std::uniform_real_distribution<double> u(0, 1);
    std::size_t vanished = 0;
    for (std::size_t n : {2u, 3u, 4u}) {
        std::vector<TrigPolynomial> fs;
        for (std::size_t i = 0; i < n; ++i) fs.push_back(random_real_poly(gen, 3, 3.0, 4));
        double M = 0;
        for (const auto& f : fs) M = std::max(M, f.support_radius());
        o.require(M <= 3, "support radius above 3");
        for (long k = 1; k <= 8; ++k) {
            TupleZ z = progression(n, k);
            double D = dio_min(a, z);
            if (!(D > std::sqrt(double(n)) * M)) continue;
            for (int s = 0; s < 20; ++s) {
                std::vector<std::vector<double>> g(n, std::vector<double>(2));
                for (auto& v : g)
                    for (auto& x : v) x = u(gen);
                auto r = correlate(a, z, g, fs);
                o.require(r.vanished, "vanished flag disagrees with D at n=" + std::to_string(n));
                o.require(r.error == std::complex<double>(0, 0) && r.surviving_terms == 0,
                          "nonzero error at n=" + std::to_string(n) + " k=" + std::to_string(k));
                ++vanished;
            }
        }
    }
    o.require(vanished >= 100, "too few vanishing instances");
    if (o.ok) o.detail = std::to_string(vanished) + " translated instances with error exactly 0";
    return o;
}

// 2
Outcome diophantine_growth() {
    Outcome o;
    auto a = validate_action({cat});
    std::vector<TupleZ> fam;
    for (long k = 2; k <= 12; ++k) fam.push_back(progression(2, k));
    auto f = TrigPolynomial::cosine(2, {1, 0});
    RateFit fit = rate_fit(a, fam, {f, f});
    o.require(fit.eta_lattice >= 0.38 && fit.eta_lattice <= 0.58, "slope " + str(fit.eta_lattice));
    if (o.ok) o.detail = "slope " + str(fit.eta_lattice) + " (log lambda / 2 = " + str(log_lambda / 2) + ")";
    return o;
}

// 3
Outcome growth_constant_check() {
    Outcome o;
    auto a = validate_action({cat});
    GrowthConstant gc = growth_constant(a);
    o.require(std::abs(gc.c - log_lambda) <= 1e-6, "c = " + str(gc.c));
    for (long z = -3; z <= 3; ++z) {
        if (z == 0) continue;
        std::vector<long> zz{z};
        IntMatrix m = a.apply(zz);
        // spectral radius of a 2x2 matrix with determinant 1
        double t = std::abs(m(0, 0).get_d() + m(1, 1).get_d());
        double rho = (t + std::sqrt(t * t - 4)) / 2;
        o.require(rho >= std::exp(gc.c * std::abs(double(z)) - 1e-6), "bound fails at z=" + std::to_string(z));
    }
    if (o.ok) o.detail = "c = " + str(gc.c);
    return o;
}

// 4
Outcome ergodicity_oracle() {
    Outcome o;
    int count = 0;
    for (long a = -3; a <= 3; ++a)
        for (long b = -3; b <= 3; ++b)
            for (long c = -3; c <= 3; ++c)
                for (long d = -3; d <= 3; ++d) {
                    long det = a * d - b * c;
                    if (det != 1 && det != -1) continue;
                    IntMatrix m = IntMatrix::from_rows(std::vector<std::vector<long>>{{a, b}, {c, d}});
                    o.require(is_ergodic_single(m) == oracle::ergodic_2x2(a, b, c, d), "disagreement at " + m.to_string());
                    ++count;
                }
    if (o.ok) o.detail = std::to_string(count) + " matrices";
    return o;
}

// 5
Outcome unit_identity() {
    Outcome o;
    int solutions = 0;
    for (long d : {5, 2}) {
        auto k = NumberField::quadratic(d);
        FieldElement e = fundamental_unit_real_quadratic(d);
        for (long p = 1; p <= 8; ++p) {
            UnitEquationInstance inst(UnitTuple(k, {k.one(), e.pow(p)}));
            const double hu = height(inst.units().units());
            auto check = [&](const SolutionRecord& r, const char* who) {
                o.require(verify_solution(inst, r.a), std::string(who) + " returned a non-solution");
                o.require(std::abs(height(r.a) - hu) <= 1e-9 * hu, std::string(who) + " breaks H(a) = H(u) at k=" + std::to_string(p));
                ++solutions;
            };
            check(min_coeff_height(inst), "min_coeff_height");
            check(dirichlet_construct(inst).solution, "dirichlet_construct");
        }
    }
    if (o.ok) o.detail = std::to_string(solutions) + " solutions verified exactly";
    return o;
}

// 6
Outcome sandwich() {
    Outcome o;
    auto k = NumberField::quadratic(5);
    FieldElement e = fundamental_unit_real_quadratic(5);
    auto sweep = [&](long kmax) {
        std::vector<UnitEquationInstance> s;
        for (long kk = 2; kk <= kmax; ++kk)
            for (long j = 1; j < kk; ++j) s.emplace_back(UnitTuple(k, {k.one(), e.pow(j), e.pow(kk)}));
        return s;
    };
    auto small = sweep(6);
    auto large = sweep(8);
    BoundsReport b6 = verify_bounds(small, 0.1);
    BoundsReport b8 = verify_bounds(large, 0.1);
    for (const auto& row : b8.table) o.require(row.h_min <= row.h_construct + 1e-9, "h_min > h_construct");
    o.require(b6.r_hat > 0, "r_hat not positive");
    o.require(std::abs(b8.r_hat - b6.r_hat) <= 0.2 * b6.r_hat, "r_hat moved from " + str(b6.r_hat) + " to " + str(b8.r_hat));
    o.require(std::isfinite(b6.R_hat) && std::isfinite(b8.R_hat), "R_hat not finite");
    if (o.ok)
        o.detail = "r_hat " + str(b6.r_hat) + " -> " + str(b8.r_hat) + ", R_hat " + str(b6.R_hat) + " -> " + str(b8.R_hat);
    return o;
}

// 7
Outcome heights() {
    Outcome o;
    auto k = NumberField::quadratic(5);
    std::mt19937_64 gen(77);
    std::uniform_int_distribution<long> c(-40, 40);
    auto rand_elem = [&] {
        while (true) {
            FieldElement x = k.from_integral_coordinates(IntVector{c(gen), c(gen)});
            if (!x.is_zero()) return x;
        }
    };
    for (int i = 0; i < 100; ++i) {
        FieldElement x = rand_elem();
        double prod = 1;
        for (double v : abs_values(x)) prod *= v;
        double nrm = std::abs(x.norm().get_d());
        o.require(std::abs(prod - nrm) <= 1e-9 * nrm, "product formula fails for " + x.to_string());
        std::vector<FieldElement> t{rand_elem(), rand_elem()}, s;
        for (const auto& y : t) s.push_back(x * y);
        o.require(std::abs(height(s) - height(t)) <= 1e-9 * height(t), "projective invariance fails");
    }
    FieldElement eps = fundamental_unit_real_quadratic(5);
    std::vector<FieldElement> t{k.one(), k.element(eps.coordinates())};
    double h = height(t);
    o.require(std::abs(h - 1.2720) <= 1e-4, "H(1, eps) = " + str(h));
    if (o.ok) o.detail = "H(1, eps) = " + str(h);
    return o;
}

// 8
Outcome correlation_oracle() {
    Outcome o;
    auto a = validate_action({cat});
    std::mt19937_64 gen(808);
    std::uniform_int_distribution<long> zs(-3, 3);
    std::uniform_int_distribution<int> ns(2, 3);
    std::uniform_real_distribution<double> u(0, 1);
    const int N = 256;
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = static_cast<std::size_t>(ns(gen));
        std::vector<std::vector<long>> pts;
        for (std::size_t i = 0; i < n; ++i) pts.push_back({zs(gen)});
        TupleZ z(pts);
        std::vector<TrigPolynomial> fs;
        for (std::size_t i = 0; i < n; ++i) fs.push_back(random_real_poly(gen, 2, 3.0, 3));
        std::vector<std::vector<double>> g;
        if (trial % 2) g.assign(n, {u(gen), u(gen)});
        auto r = correlate(a, z, g, fs);

        // largest frequency of the integrand, to confirm the grid is alias-free
        std::vector<IntMatrix> mats;
        long reach = 0;
        for (std::size_t i = 0; i < n; ++i) {
            mats.push_back(a.apply(z[i]));
            long qi = 0;
            for (const auto& [q, c] : fs[i].coefficients())
                for (std::size_t col = 0; col < 2; ++col) {
                    long s = 0;
                    for (std::size_t row = 0; row < 2; ++row) s += std::abs(mats[i](row, col).get_si() * q[row]);
                    qi = std::max(qi, s);
                }
            reach += qi;
        }
        o.require(reach < N, "grid too coarse");
        std::complex<double> s = 0;
        for (int p = 0; p < N; ++p)
            for (int q = 0; q < N; ++q) {
                std::complex<double> prod = 1;
                for (std::size_t i = 0; i < n; ++i) {
                    double y[2];
                    for (std::size_t row = 0; row < 2; ++row) {
                        y[row] = (mats[i](row, 0).get_d() * p + mats[i](row, 1).get_d() * q) / N;
                        if (!g.empty()) y[row] += g[i][row];
                        y[row] -= std::floor(y[row]);
                    }
                    prod *= fs[i].evaluate(y);
                }
                s += prod;
            }
        s /= double(N) * N;
        o.require(std::abs(s - r.correlation) <= 1e-6, "trial " + std::to_string(trial) + " differs by " + str(std::abs(s - r.correlation)));
    }
    if (o.ok) o.detail = "50 instances";
    return o;
}

// 9
Outcome lattice_equivalence() {
    Outcome o;
    auto a = validate_action({cat});
    const oracle::Mat2 c2{{{2, 1}, {1, 1}}};
    int dio_cases = 0;
    std::vector<std::vector<long>> tuples;
    for (long k = 0; k <= 6; ++k) tuples.push_back({0, k});
    for (long k = 1; k <= 3; ++k) tuples.push_back({0, k, 2 * k});
    tuples.push_back({0, 1, 3});
    tuples.push_back({0, 1, 2, 3});
    tuples.push_back({0, 2, 1, -1});
    for (const auto& zv : tuples) {
        std::vector<std::vector<long>> pts;
        for (long x : zv) pts.push_back({x});
        TupleZ z(pts);
        ShortVector sv = dio_min_vector(a, z);
        LatticeBasis reduced = lll_reduce(kernel_lattice(a, z));
        Integer combos = oracle::min_norm2_combinations(reduced.vectors(), zv.size() == 4 ? 2 : 4);
        o.require(combos == sv.norm2, "combination oracle disagrees for " + std::to_string(zv.size()) + "-tuple");
        long box = zv.size() == 2 ? 4 : 2;
        auto direct = oracle::dio_min2_box(c2, zv, box);
        if (direct && std::sqrt(double(*direct)) <= double(box))
            o.require(Integer(*direct) == sv.norm2, "frequency-box oracle disagrees");
        ++dio_cases;
    }
    int unit_cases = 0;
    for (long d : {5, 2}) {
        auto k = NumberField::quadratic(d);
        FieldElement e = fundamental_unit_real_quadratic(d);
        for (const auto& pw : std::vector<std::vector<long>>{{0, 1}, {0, 2}, {0, 3}, {0, 4}, {0, 1, 2}, {0, 1, 3}, {0, 2, 3}, {0, 1, 2, 3}}) {
            std::vector<FieldElement> u;
            for (long p : pw) u.push_back(e.pow(p));
            UnitEquationInstance inst(UnitTuple(k, u));
            SolutionRecord r = min_coeff_height(inst);
            auto elems = enumerate_O_h(k, r.h + 0.01);
            std::vector<std::size_t> idx(pw.size(), 0);
            double best = INFINITY;
            while (true) {
                std::vector<FieldElement> cand;
                for (std::size_t i = 0; i < pw.size(); ++i) cand.push_back(elems[idx[i]]);
                if (verify_solution(inst, cand)) best = std::min(best, coefficient_height(cand));
                std::size_t p = 0;
                while (p < pw.size() && ++idx[p] == elems.size()) idx[p++] = 0;
                if (p == pw.size()) break;
            }
            o.require(std::abs(best - r.h) <= 1e-9 * r.h, "min_coeff_height disagrees with O_h enumeration");
            ++unit_cases;
        }
    }
    if (o.ok) o.detail = std::to_string(dio_cases) + " kernel lattices, " + std::to_string(unit_cases) + " unit equations";
    return o;
}

// 10
Outcome reproducibility() {
    Outcome o;
    fs::path base = fs::temp_directory_path() / ("nilmix_accept_" + std::to_string(::getpid()));
    fs::remove_all(base);
    const std::string configs = NILMIX_CONFIG_DIR;
    auto slurp = [](const fs::path& p) {
        std::ifstream f(p, std::ios::binary);
        std::stringstream s;
        s << f.rdbuf();
        return s.str();
    };
    for (const auto& [cmd, cfg] : std::vector<std::pair<std::string, std::string>>{
             {"correlate", "catmap_n3.json"}, {"dio", "catmap_n2.json"}, {"verify-bounds", "golden_units_n3.json"}}) {
        std::string first;
        for (int run = 0; run < 2; ++run) {
            fs::path dir = base / (cmd + std::to_string(run));
            std::ostringstream out, err;
            int code = cli::run({cmd, "--config", configs + "/" + cfg, "--out", dir.string(), "--seed", "3", "--quiet"}, out, err);
            o.require(code == 0, cmd + " failed: " + err.str());
            std::string csv = slurp(dir / (cmd + ".csv"));
            o.require(!csv.empty(), cmd + " wrote no CSV");
            if (run == 0) first = csv;
            else o.require(csv == first, cmd + " CSV differs between runs");
        }
    }
    fs::remove_all(base);
    if (o.ok) o.detail = "3 commands, byte-identical CSV";
    return o;
}

} // namespace

int main() {
    struct Criterion {
        int id;
        const char* name;
        double budget;
        std::function<Outcome()> run;
    };
    std::vector<Criterion> all{
        {1, "vanishing of the band-limited mixing error", 10, vanishing},
        {2, "exponential diophantine growth", 5, diophantine_growth},
        {3, "growth constant of the cat map", 1, growth_constant_check},
        {4, "ergodicity oracle on 2x2 matrices", 30, ergodicity_oracle},
        {5, "unit equation exactness and n=2 identity", 20, unit_identity},
        {6, "minimal versus constructed heights", 60, sandwich},
        {7, "heights and the product formula", 5, heights},
        {8, "correlations against grid integration", 30, correlation_oracle},
        {9, "brute-force lattice equivalence", 60, lattice_equivalence},
        {10, "reproducible CSV output", 30, reproducibility},
    };
    int failures = 0;
    for (const auto& c : all) {
        auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o.ok = false;
            o.detail = std::string("exception: ") + e.what();
        }
        double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (o.ok && secs > c.budget) {
            o.ok = false;
            o.detail += " (over the " + str(c.budget) + " s budget)";
        }
        if (!o.ok) ++failures;
        std::cout << (o.ok ? "PASS" : "FAIL") << " " << c.id << " " << c.name << ": " << o.detail << " [" << str(secs)
                  << " s]" << std::endl;
    }
    return failures == 0 ? 0 : 1;
}
