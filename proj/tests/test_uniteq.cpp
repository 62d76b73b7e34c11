#include "nilmix/error.hpp"
#include "nilmix/uniteq.hpp"

#include <doctest.h>

#include <cmath>

using namespace nilmix;

namespace {

const double phi = (1 + std::sqrt(5.0)) / 2;

UnitEquationInstance golden_instance(std::vector<long> powers) {
    auto k = NumberField::quadratic(5);
    FieldElement e = fundamental_unit_real_quadratic(5);
    std::vector<FieldElement> u;
    for (long p : powers) u.push_back(e.pow(p));
    return UnitEquationInstance(UnitTuple(k, u));
}

bool lattice_contains(const LatticeBasis& b, const IntVector& v) {
    std::vector<IntVector> rows = b.vectors();
    rows.push_back(v);
    return rank(IntMatrix::from_rows(rows)) == b.rank();
}

// smallest h over all nonzero (a_1..a_n) in O_{h*}^n solving the equation
double brute_min_height(const UnitEquationInstance& inst, double hstar) {
    auto elems = enumerate_O_h(inst.field(), hstar);
    const std::size_t n = inst.size();
    std::vector<std::size_t> idx(n, 0);
    double best = INFINITY;
    while (true) {
        std::vector<FieldElement> a;
        for (std::size_t i = 0; i < n; ++i) a.push_back(elems[idx[i]]);
        if (verify_solution(inst, a)) best = std::min(best, coefficient_height(a));
        std::size_t p = 0;
        while (p < n && ++idx[p] == elems.size()) idx[p++] = 0;
        if (p == n) break;
    }
    return best;
}

} // namespace

TEST_CASE("solution lattice") {
    auto q = NumberField::rationals();
    UnitEquationInstance triv(UnitTuple(q, {q.one(), q.one()}));
    auto l = solution_lattice(triv);
    CHECK(l.rank() == 1);
    CHECK(lattice_contains(l, IntVector{1, -1}));

    auto l3 = solution_lattice(golden_instance({0, 1, 2}));
    CHECK(l3.rank() == 4);
    CHECK(lattice_contains(l3, IntVector{1, 0, 1, 0, -1, 0}));

    auto inst2 = golden_instance({0, 1});
    auto l2 = solution_lattice(inst2);
    CHECK(l2.rank() == 2);
    // a_1 = -eps, a_2 = 1 in the integral basis {1, eps}
    CHECK(lattice_contains(l2, IntVector{0, -1, 1, 0}));
    for (const auto& v : l2.vectors()) CHECK(verify_solution(inst2, coefficients_from_vector(inst2, v)));
}

TEST_CASE("minimal height") {
    auto inst = golden_instance({0, 1, 2});
    auto r = min_coeff_height(inst);
    CHECK(r.exact);
    CHECK(r.h == doctest::Approx(1));
    auto k = inst.field();
    CHECK(r.a == std::vector<FieldElement>{k.one(), k.one(), -k.one()});

    auto r2 = min_coeff_height(golden_instance({0, 1}));
    CHECK(r2.exact);
    CHECK(r2.h == doctest::Approx(phi));

    auto q = NumberField::rationals();
    auto r3 = min_coeff_height(UnitEquationInstance(UnitTuple(q, {q.one(), q.one()})));
    CHECK(r3.h == doctest::Approx(1));
    CHECK(r3.a == std::vector<FieldElement>{q.one(), -q.one()});
}

TEST_CASE("minimal height matches brute force") {
    for (long d : {5, 2}) {
        auto k = NumberField::quadratic(d);
        FieldElement e = fundamental_unit_real_quadratic(d);
        std::vector<std::vector<long>> cases{{0, 1}, {0, 2}, {0, 3}, {0, 1, 2}, {0, 1, 3}};
        for (const auto& pw : cases) {
            if (d == 2 && pw.size() == 3 && pw.back() == 3) continue;
            std::vector<FieldElement> u;
            for (long p : pw) u.push_back(e.pow(p));
            UnitEquationInstance inst(UnitTuple(k, u));
            auto r = min_coeff_height(inst);
            CHECK(r.exact);
            CHECK(brute_min_height(inst, r.h + 0.01) == doctest::Approx(r.h).epsilon(1e-9));
        }
    }
}

TEST_CASE("n = 2 height identity") {
    for (long d : {5, 2}) {
        auto k = NumberField::quadratic(d);
        FieldElement e = fundamental_unit_real_quadratic(d);
        for (long p = 1; p <= 6; ++p) {
            UnitEquationInstance inst(UnitTuple(k, {k.one(), e.pow(p)}));
            auto r = min_coeff_height(inst);
            auto c = dirichlet_construct(inst);
            CHECK(height(r.a) == doctest::Approx(height(inst.units().units())).epsilon(1e-9));
            CHECK(height(c.solution.a) == doctest::Approx(height(inst.units().units())).epsilon(1e-9));
        }
    }
}

TEST_CASE("dirichlet construction") {
    auto inst = golden_instance({0, 1, 2});
    auto c = dirichlet_construct(inst);
    CHECK(c.solution.exact);
    CHECK(c.solution.h <= 2 * inst.alpha() + 1e-9);

    auto q = NumberField::rationals();
    auto t = dirichlet_construct(UnitEquationInstance(UnitTuple(q, {q.one(), q.one()})));
    CHECK(t.solution.h == doctest::Approx(1));
    CHECK(t.solution.exact);

    for (long k = 1; k <= 8; ++k) {
        auto i = golden_instance({0, k});
        double hmin = min_coeff_height(i).h;
        auto ck = dirichlet_construct(i);
        CHECK(ck.solution.exact);
        CHECK(ck.solution.h >= hmin - 1e-9);
        CHECK(ck.solution.h / hmin <= 4);
    }
}

TEST_CASE("scaling by a common unit") {
    auto base = golden_instance({0, 1, 3});
    auto shifted = golden_instance({2, 3, 5});
    CHECK(shifted.alpha() == doctest::Approx(base.alpha()).epsilon(1e-9));
    CHECK(min_coeff_height(shifted).h == doctest::Approx(min_coeff_height(base).h).epsilon(1e-9));
    CHECK(dirichlet_construct(shifted).solution.h == doctest::Approx(dirichlet_construct(base).solution.h).epsilon(1e-9));
}

TEST_CASE("verify bounds") {
    std::vector<UnitEquationInstance> sweep;
    for (long k = 1; k <= 8; ++k) sweep.push_back(golden_instance({0, k}));
    auto b = verify_bounds(sweep, 0.0);
    CHECK(b.table.size() == 8);
    CHECK(b.r_hat > 0);
    for (const auto& row : b.table) {
        CHECK(row.h_min / row.alpha >= 1 - 1e-9);
        CHECK(row.h_min / row.alpha <= phi + 1e-9);
        CHECK(row.h_min >= b.r_hat * row.alpha - 1e-9);
        CHECK(row.h_construct >= row.h_min - 1e-9);
    }
    std::vector<UnitEquationInstance> none;
    CHECK_THROWS_AS(verify_bounds(none), InsufficientData);
}

TEST_CASE("guards") {
    auto k = NumberField::quadratic(5);
    FieldElement e = fundamental_unit_real_quadratic(5);
    std::vector<FieldElement> many;
    for (long p = 0; p < 7; ++p) many.push_back(e.pow(p));
    CHECK_THROWS_AS(min_coeff_height(UnitEquationInstance(UnitTuple(k, many))), InstanceTooLarge);
}
