#include "nilmix/action.hpp"
#include "nilmix/error.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace nilmix;

namespace {

IntMatrix M(const std::vector<std::vector<long>>& rows) { return IntMatrix::from_rows(rows); }
const IntMatrix cat = M({{2, 1}, {1, 1}});
const double log_lambda = std::log((3 + std::sqrt(5.0)) / 2);

std::vector<long> up_to_sign(std::vector<long> v) {
    for (long x : v)
        if (x != 0) {
            if (x < 0)
                for (auto& y : v) y = -y;
            break;
        }
    return v;
}

} // namespace

TEST_CASE("validate") {
    auto a = validate_action({cat});
    CHECK(a.rank() == 1);
    CHECK(a.dim() == 2);
    CHECK_NOTHROW(validate_action({cat, M({{1, 1}, {1, 0}})}));
    CHECK_THROWS_AS(validate_action({M({{2, 0}, {0, 1}})}), NotUnimodular);
    try {
        validate_action({cat, M({{1, 1}, {0, 1}})});
        FAIL("expected NotCommuting");
    } catch (const NotCommuting& e) {
        CHECK(e.first() == 0);
        CHECK(e.second() == 1);
    }
    CHECK_THROWS_AS(validate_action({cat, IntMatrix::identity(3)}), DimensionMismatch);
}

TEST_CASE("apply") {
    auto a = validate_action({cat});
    std::vector<long> z0{0}, z2{2}, zm{-1};
    CHECK(a.apply(z0) == IntMatrix::identity(2));
    CHECK(a.apply(z2) == M({{5, 3}, {3, 2}}));
    CHECK(a.apply(zm) == M({{1, -1}, {-1, 2}}));

    auto b = validate_action({cat, M({{1, 1}, {1, 0}})});
    std::mt19937_64 gen(8);
    std::uniform_int_distribution<long> e(-5, 5);
    for (int i = 0; i < 50; ++i) {
        std::vector<long> z{e(gen), e(gen)}, w{e(gen), e(gen)}, s{z[0] + w[0], z[1] + w[1]};
        CHECK(b.apply(s) == b.apply(z) * b.apply(w));
    }
}

TEST_CASE("single ergodicity") {
    CHECK(is_ergodic_single(cat));
    CHECK(!is_ergodic_single(M({{0, 1}, {-1, 0}})));
    CHECK(!is_ergodic_single(IntMatrix::identity(2)));
    CHECK(cyclotomic_factor_index(M({{0, 1}, {-1, 0}})) == 4u);
    CHECK(!cyclotomic_factor_index(cat));
    CHECK(!is_ergodic_single(M({{1, 1}, {0, 1}})));
}

TEST_CASE("ergodicity agrees with numeric eigenvalues on 2x2") {
    int checked = 0;
    for (long a = -3; a <= 3; ++a)
        for (long b = -3; b <= 3; ++b)
            for (long c = -3; c <= 3; ++c)
                for (long d = -3; d <= 3; ++d) {
                    long det = a * d - b * c;
                    if (det != 1 && det != -1) continue;
                    CHECK(is_ergodic_single(M({{a, b}, {c, d}})) == oracle::ergodic_2x2(a, b, c, d));
                    ++checked;
                }
    CHECK(checked > 100);
}

TEST_CASE("eigencharacter orbits") {
    auto o = validate_action({cat}).orbits();
    REQUIRE(o.size() == 1);
    CHECK(o[0].size() == 2);
    std::vector<double> logs{o[0].log_matrix[0][0], o[0].log_matrix[1][0]};
    std::sort(logs.begin(), logs.end());
    CHECK(logs[0] == doctest::Approx(-log_lambda));
    CHECK(logs[1] == doctest::Approx(log_lambda));

    auto id = eigencharacter_orbits(validate_action({IntMatrix::identity(2)}));
    REQUIRE(id.size() == 1);
    CHECK(id[0].size() == 1);
    CHECK(id[0].multiplicity == 2);
    CHECK(id[0].log_matrix[0][0] == doctest::Approx(0));

    IntMatrix block = M({{2, 1, 0, 0}, {1, 1, 0, 0}, {0, 0, 1, 1}, {0, 0, 0, 1}});
    auto bo = eigencharacter_orbits(validate_action({block}));
    REQUIRE(bo.size() == 2);
    std::size_t total = 0;
    for (const auto& orb : bo) total += orb.size() * static_cast<std::size_t>(orb.multiplicity);
    CHECK(total == 4);
}

TEST_CASE("orbit sizes add up to the dimension") {
    auto cubic = M({{0, 0, 1}, {1, 0, 3}, {0, 1, 0}});  // x^3 - 3x - 1
    IntMatrix second = cubic * cubic - IntMatrix::identity(3) - IntMatrix::identity(3);
    for (const auto& gens : std::vector<std::vector<IntMatrix>>{{cubic}, {cubic, second}, {cat}}) {
        auto a = validate_action(gens);
        std::size_t total = 0;
        for (const auto& orb : a.orbits()) total += orb.size() * static_cast<std::size_t>(orb.multiplicity);
        CHECK(total == a.dim());
        // seed independence of the orbit data
        auto other = eigencharacter_orbits(a, 99);
        CHECK(other.size() == a.orbits().size());
    }
}

TEST_CASE("total ergodicity") {
    auto a = validate_action({cat});
    CHECK(assert_totally_ergodic(a).totally_ergodic);

    auto sq = assert_totally_ergodic(validate_action({cat, cat * cat}));
    CHECK(!sq.totally_ergodic);
    REQUIRE(sq.witness);
    CHECK(up_to_sign(*sq.witness) == std::vector<long>{2, -1});

    auto dup = assert_totally_ergodic(validate_action({cat, cat}));
    CHECK(!dup.totally_ergodic);
    REQUIRE(dup.witness);
    CHECK(up_to_sign(*dup.witness) == std::vector<long>{1, -1});

    auto rot = assert_totally_ergodic(validate_action({M({{0, 1}, {-1, 0}})}));
    CHECK(!rot.totally_ergodic);
    CHECK(up_to_sign(*rot.witness) == std::vector<long>{1});
}

TEST_CASE("growth constant") {
    auto g = growth_constant(validate_action({cat}));
    CHECK(g.c == doctest::Approx(log_lambda).epsilon(1e-9));
    CHECK(g.exact);
    try {
        growth_constant(validate_action({cat, cat * cat}));
        FAIL("expected NotTotallyErgodic");
    } catch (const NotTotallyErgodic& e) {
        CHECK(up_to_sign(e.witness()) == std::vector<long>{2, -1});
    }

    auto cubic = M({{0, 0, 1}, {1, 0, 3}, {0, 1, 0}});
    IntMatrix second = cubic * cubic - IntMatrix::identity(3) - IntMatrix::identity(3);
    auto a = validate_action({cubic, second});
    auto gc = growth_constant(a);
    CHECK(gc.c > 0);
    CHECK(gc.lower_bound <= gc.c + 1e-12);
    // finite check of max_chi |chi(z)| >= exp(c |z|) on a small box
    for (const auto& orb : a.orbits())
        for (long z0 = -3; z0 <= 3; ++z0)
            for (long z1 = -3; z1 <= 3; ++z1) {
                if (z0 == 0 && z1 == 0) continue;
                double best = -1e300;
                for (const auto& row : orb.log_matrix) best = std::max(best, row[0] * z0 + row[1] * z1);
                CHECK(best >= gc.c * std::hypot(double(z0), double(z1)) - 1e-6);
            }
}

TEST_CASE("sphere min max") {
    auto g = sphere_min_max({{1.0}, {-1.0}});
    CHECK(g.c == doctest::Approx(1));
    auto h = sphere_min_max({{1.0, 0.0}, {-1.0, 0.0}, {0.0, 1.0}, {0.0, -1.0}});
    CHECK(h.c == doctest::Approx(std::sqrt(0.5)));
}
