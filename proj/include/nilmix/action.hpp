#pragma once

// Z^l actions on the torus T^d by commuting matrices in GL_d(Z).

#include "nilmix/exactlin.hpp"
#include "nilmix/poly.hpp"

#include <complex>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

namespace nilmix {

/// One Galois orbit of joint eigenvalue systems chi(z) = prod_j lambda_{chi,j}^{z_j}.
struct EigencharacterOrbit {
    /// Irreducible factor of the characteristic polynomial of the generic combination.
    Polynomial minimal_poly;
    /// Per generator, the irreducible polynomial of lambda_{chi,j}.
    std::vector<Polynomial> generator_polys;
    int multiplicity = 1;
    /// characters[chi][j] = lambda_{chi,j}
    std::vector<std::vector<std::complex<double>>> characters;
    /// log_matrix[chi][j] = log |lambda_{chi,j}|
    std::vector<std::vector<double>> log_matrix;
    /// Coefficients t of the combination sum_j t_j A_j used to separate the orbit.
    std::vector<long> combination;

    std::size_t size() const noexcept { return characters.size(); }
};

namespace detail {
struct ActionCache;
}

class ToralAction {
public:
    /// Checks |det A_j| = 1 and A_j A_k = A_k A_j exactly.
    static ToralAction validate(std::vector<IntMatrix> generators);

    std::size_t dim() const noexcept { return dim_; }
    std::size_t rank() const noexcept { return generators_.size(); }
    const std::vector<IntMatrix>& generators() const noexcept { return generators_; }
    const std::vector<IntMatrix>& inverses() const noexcept { return inverses_; }

    /// prod_j A_j^{z_j}
    IntMatrix apply(std::span<const long> z) const;

    /// Orbits for the default seed, computed once and shared by copies of this action.
    const std::vector<EigencharacterOrbit>& orbits() const;

private:
    ToralAction() = default;
    std::size_t dim_ = 0;
    std::vector<IntMatrix> generators_;
    std::vector<IntMatrix> inverses_;
    std::shared_ptr<detail::ActionCache> cache_;
};

ToralAction validate_action(std::vector<IntMatrix> generators);
IntMatrix apply(const ToralAction& action, std::span<const long> z);

/// Exact inverse of a unimodular matrix.
IntMatrix unimodular_inverse(const IntMatrix& m);

/// Smallest k with Phi_k dividing the characteristic polynomial, if any.
std::optional<unsigned long> cyclotomic_factor_index(const IntMatrix& m);

/// Ergodic on the torus iff no eigenvalue is a root of unity.
bool is_ergodic_single(const IntMatrix& m);

/// Factor the characteristic polynomial of a generic combination sum t_j A_j and split the
/// roots into joint eigenvalue systems. t is drawn from [-9, 9]^l; after 20 failed draws
/// DegenerateCombination is thrown.
std::vector<EigencharacterOrbit> eigencharacter_orbits(const ToralAction& action, std::uint64_t seed = 0);

struct ErgodicityCheck {
    bool totally_ergodic = true;
    std::optional<std::vector<long>> witness;  ///< z != 0 with a root-of-unity eigenvalue
    int search_radius = 0;                     ///< every z with |z|_inf <= radius was tested exactly
    std::size_t candidates_tested = 0;
};

/// Exhaustive exact test on the box |z|_inf <= search_radius, plus exact tests of
/// near-kernel vectors of each orbit's log matrix found by LLL.
ErgodicityCheck assert_totally_ergodic(const ToralAction& action, int search_radius = 3);

struct GrowthConstant {
    double c = 0;
    std::size_t witness_orbit = 0;
    std::vector<double> per_orbit;
    /// Proven lower bound for c (equals c when the minimization is exact, l <= 2).
    double lower_bound = 0;
    /// Unit direction z attaining c.
    std::vector<double> direction;
    bool exact = true;
};

/// min over orbits of min_{|z|_2 = 1} max_chi <log_row_chi, z>, so that
/// max_chi |chi(z)| >= exp(c |z|_2) for every z in Z^l.
/// Throws NotTotallyErgodic with a witness when the action is not totally ergodic.
GrowthConstant growth_constant(const ToralAction& action);

/// The sphere minimization for a single log matrix (rows = characters).
GrowthConstant sphere_min_max(const std::vector<std::vector<double>>& rows);

} // namespace nilmix
