#pragma once

#include "nilmix/exactlin.hpp"

#include <functional>
#include <span>
#include <vector>

namespace nilmix {

/// Skips the independence check; callers guarantee it.
LatticeBasis make_unchecked_basis(std::size_t ambient_dim, std::vector<IntVector> vectors);

namespace detail {

using Real = long double;

struct GramSchmidt {
    std::vector<std::vector<Real>> mu;  ///< mu[i][j] for j < i
    std::vector<Real> bstar2;           ///< |b*_i|^2
};

/// Exact rational Gram-Schmidt of an integer basis, rounded at the end.
GramSchmidt gram_schmidt(const std::vector<IntVector>& basis);
GramSchmidt gram_schmidt(const std::vector<std::vector<Real>>& basis);

/// Coordinates c_i of target along b*_i, plus the squared length of the part orthogonal to the span.
std::pair<std::vector<Real>, Real> project_target(const std::vector<std::vector<Real>>& basis,
                                                  const GramSchmidt& gs,
                                                  std::span<const Real> target);

/// Called with each integer x inside the current ellipsoid and its squared distance;
/// returns the (possibly smaller) bound to continue with.
using EllipsoidVisitor = std::function<Real(const std::vector<long>& x, Real dist2)>;

/// Fincke-Pohst enumeration of all x with
///   sum_i bstar2_i (x_i + sum_{j>i} mu_ji x_j - c_i)^2 <= bound.
void enumerate_ellipsoid(const GramSchmidt& gs, std::span<const Real> center, Real bound,
                         const EllipsoidVisitor& visit);

std::vector<std::vector<Real>> to_real(const std::vector<IntVector>& vectors);

} // namespace detail
} // namespace nilmix
