#pragma once

// Small solutions of a_1 u_1 + ... + a_n u_n = 0 with integral a_i.

#include "nilmix/exactlin.hpp"
#include "nilmix/numfield.hpp"

#include <span>
#include <vector>

namespace nilmix {

class UnitEquationInstance {
public:
    explicit UnitEquationInstance(UnitTuple u);

    const NumberField& field() const noexcept { return u_.field(); }
    const UnitTuple& units() const noexcept { return u_; }
    std::size_t size() const noexcept { return u_.size(); }
    double alpha() const noexcept { return alpha_.value; }
    const AlphaResult& alpha_result() const noexcept { return alpha_; }

private:
    UnitTuple u_;
    AlphaResult alpha_;
};

struct SolutionRecord {
    std::vector<FieldElement> a;
    double h = 0;        ///< max_{i,v} |a_i|_v
    bool exact = false;  ///< sum a_i u_i == 0 re-verified in exact arithmetic
};

/// True iff not all a_i vanish and sum a_i u_i = 0 exactly.
bool verify_solution(const UnitEquationInstance& inst, std::span<const FieldElement> a);

/// max_{i,v} |a_i|_v
double coefficient_height(std::span<const FieldElement> a);

/// Integral-basis coordinates of (a_1..a_n), concatenated, length nD.
LatticeBasis solution_lattice(const UnitEquationInstance& inst);

std::vector<FieldElement> coefficients_from_vector(const UnitEquationInstance& inst, const IntVector& c);

/// Minimal-height nonzero solution; nD <= 12 else InstanceTooLarge.
SolutionRecord min_coeff_height(const UnitEquationInstance& inst);

struct Construction {
    SolutionRecord solution;
    std::vector<std::size_t> subset;  ///< units actually used (the alpha subset)
    FieldElement normalizer;          ///< lambda
    double c0 = 0;                    ///< max_{i in I, v} |lambda u_i|_v / H(u_I)
    double threshold_h = 0;           ///< h suggested by the counting inequality
    double final_h = 0;               ///< box parameter at the first collision
    double R = 0;                     ///< solution.h / alpha
    std::size_t tuples_hashed = 0;
};

/// Pigeonhole construction; unit rank <= 2.
Construction dirichlet_construct(const UnitEquationInstance& inst);

struct BoundsRow {
    double alpha;
    double h_min;
    double h_construct;
};

struct BoundsReport {
    double r_hat = 0;
    double R_hat = 0;
    std::vector<BoundsRow> table;
};

BoundsReport verify_bounds(std::span<const UnitEquationInstance> sweep, double epsilon = 0.1);

} // namespace nilmix
