#include "nilmix/action.hpp"

#include "nilmix/error.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <numbers>
#include <random>
#include <set>

namespace nilmix {

namespace detail {
struct ActionCache {
    std::once_flag once;
    std::vector<EigencharacterOrbit> orbits;
    std::exception_ptr error;
};
} // namespace detail

IntMatrix unimodular_inverse(const IntMatrix& m) {
    if (!m.is_square()) throw DimensionMismatch("inverse of a non-square matrix");
    HermiteForm f = hnf(m);
    // for |det m| = 1 the HNF is the identity, so u = m^{-1}
    if (!(f.h == IntMatrix::identity(m.rows()))) throw NotUnimodular("matrix is not unimodular", 0);
    return f.u;
}

ToralAction ToralAction::validate(std::vector<IntMatrix> generators) {
    if (generators.empty()) throw InvalidInput("action needs at least one generator");
    const std::size_t d = generators.front().rows();
    for (std::size_t j = 0; j < generators.size(); ++j) {
        const auto& a = generators[j];
        if (!a.is_square() || a.rows() != d)
            throw DimensionMismatch("generator " + std::to_string(j) + " is not a " + std::to_string(d) + "x" +
                                    std::to_string(d) + " matrix");
        Integer det = a.determinant();
        if (det != 1 && det != -1)
            throw NotUnimodular("generator " + std::to_string(j) + " has determinant " + det.get_str(), j);
    }
    for (std::size_t j = 0; j < generators.size(); ++j)
        for (std::size_t k = j + 1; k < generators.size(); ++k)
            if (!(generators[j] * generators[k] == generators[k] * generators[j]))
                throw NotCommuting("generators " + std::to_string(j) + " and " + std::to_string(k) + " do not commute",
                                   j, k);
    ToralAction action;
    action.dim_ = d;
    for (const auto& a : generators) action.inverses_.push_back(unimodular_inverse(a));
    action.generators_ = std::move(generators);
    action.cache_ = std::make_shared<detail::ActionCache>();
    return action;
}

ToralAction validate_action(std::vector<IntMatrix> generators) { return ToralAction::validate(std::move(generators)); }

IntMatrix ToralAction::apply(std::span<const long> z) const {
    if (z.size() != rank()) throw DimensionMismatch("apply: z must have length " + std::to_string(rank()));
    IntMatrix acc = IntMatrix::identity(dim_);
    for (std::size_t j = 0; j < z.size(); ++j) {
        if (z[j] == 0) continue;
        IntMatrix base = z[j] < 0 ? inverses_[j] : generators_[j];
        unsigned long e = static_cast<unsigned long>(z[j] < 0 ? -z[j] : z[j]);
        IntMatrix pw = IntMatrix::identity(dim_);
        while (e) {
            if (e & 1UL) pw = pw * base;
            e >>= 1;
            if (e) base = base * base;
        }
        acc = acc * pw;
    }
    return acc;
}

IntMatrix apply(const ToralAction& action, std::span<const long> z) { return action.apply(z); }

const std::vector<EigencharacterOrbit>& ToralAction::orbits() const {
    std::call_once(cache_->once, [this] {
        try {
            cache_->orbits = eigencharacter_orbits(*this, 0);
        } catch (...) {
            cache_->error = std::current_exception();
        }
    });
    if (cache_->error) std::rethrow_exception(cache_->error);
    return cache_->orbits;
}

// ---------------------------------------------------------------- ergodicity

std::optional<unsigned long> cyclotomic_factor_index(const IntMatrix& m) {
    if (!m.is_square()) throw DimensionMismatch("cyclotomic_factor_index: matrix not square");
    const unsigned long d = m.rows();
    Polynomial chi = characteristic_polynomial(m);
    // phi(k) >= sqrt(k/2), so phi(k) <= d forces k <= 2 d^2
    for (unsigned long k = 1; k <= 2 * d * d + 2; ++k) {
        if (euler_phi(k) > d) continue;
        if ((chi % cyclotomic(k)).is_zero()) return k;
    }
    return std::nullopt;
}

bool is_ergodic_single(const IntMatrix& m) { return !cyclotomic_factor_index(m).has_value(); }

// ---------------------------------------------------------------- orbits

namespace {

using Eigen::MatrixXcd;
using Eigen::VectorXcd;

MatrixXcd to_complex(const IntMatrix& m) {
    MatrixXcd out(static_cast<Eigen::Index>(m.rows()), static_cast<Eigen::Index>(m.cols()));
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j)
            out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = m(i, j).get_d();
    return out;
}

bool poly_has_root(const Polynomial& p, std::complex<double> z) {
    auto v = p.evaluate(std::complex<long double>(z.real(), z.imag()));
    auto dv = p.derivative().evaluate(std::complex<long double>(z.real(), z.imag()));
    long double scale = std::max<long double>(1, std::abs(dv)) * std::max<long double>(1, std::abs(std::complex<long double>(z.real(), z.imag())));
    return std::abs(v) <= 1e-6L * scale;
}

} // namespace

std::vector<EigencharacterOrbit> eigencharacter_orbits(const ToralAction& action, std::uint64_t seed) {
    const std::size_t l = action.rank();
    const std::size_t d = action.dim();
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<long> draw(-9, 9);

    std::vector<MatrixXcd> gens;
    std::vector<double> gen_scale;
    std::vector<std::vector<std::pair<Polynomial, int>>> gen_factors;
    for (const auto& a : action.generators()) {
        gens.push_back(to_complex(a));
        gen_scale.push_back(1 + gens.back().norm());
        gen_factors.push_back(factor_integer_polynomial(characteristic_polynomial(a)));
    }

    for (int attempt = 0; attempt < 20; ++attempt) {
        std::vector<long> t(l);
        do {
            for (auto& x : t) x = draw(rng);
        } while (std::all_of(t.begin(), t.end(), [](long x) { return x == 0; }));

        IntMatrix combo(d, d);
        for (std::size_t j = 0; j < l; ++j)
            for (std::size_t r = 0; r < d; ++r)
                for (std::size_t c = 0; c < d; ++c) combo(r, c) += t[j] * action.generators()[j](r, c);
        MatrixXcd combo_c = to_complex(combo);

        bool degenerate = false;
        std::vector<EigencharacterOrbit> orbits;
        for (const auto& [factor, mult] : factor_integer_polynomial(characteristic_polynomial(combo))) {
            EigencharacterOrbit orbit;
            orbit.minimal_poly = factor;
            orbit.multiplicity = mult;
            orbit.combination = t;
            for (const auto& root : complex_roots(factor)) {
                MatrixXcd shifted = combo_c - root.value * MatrixXcd::Identity(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
                Eigen::JacobiSVD<MatrixXcd> svd(shifted, Eigen::ComputeFullV);
                VectorXcd v = svd.matrixV().col(static_cast<Eigen::Index>(d) - 1);
                std::vector<std::complex<double>> lambdas;
                std::vector<double> logs;
                for (std::size_t j = 0; j < l; ++j) {
                    VectorXcd av = gens[j] * v;
                    std::complex<double> lam = v.dot(av) / v.dot(v);
                    if ((av - lam * v).norm() > 1e-7 * gen_scale[j]) {
                        degenerate = true;
                        break;
                    }
                    lambdas.push_back(lam);
                    logs.push_back(std::log(std::abs(lam)));
                }
                if (degenerate) break;
                orbit.characters.push_back(std::move(lambdas));
                orbit.log_matrix.push_back(std::move(logs));
            }
            if (degenerate) break;
            for (std::size_t j = 0; j < l; ++j) {
                const auto lam = orbit.characters.front()[j];
                auto it = std::find_if(gen_factors[j].begin(), gen_factors[j].end(),
                                       [&](const auto& f) { return poly_has_root(f.first, lam); });
                if (it == gen_factors[j].end()) {
                    degenerate = true;
                    break;
                }
                orbit.generator_polys.push_back(it->first);
            }
            if (degenerate) break;
            orbits.push_back(std::move(orbit));
        }
        if (!degenerate) return orbits;
    }
    throw DegenerateCombination("eigencharacter_orbits: no separating combination after 20 draws");
}

// ---------------------------------------------------------------- totally ergodic

namespace {

// last nonzero entry positive
std::vector<long> normalize_witness(std::vector<long> z) {
    for (std::size_t i = z.size(); i-- > 0;) {
        if (z[i] == 0) continue;
        if (z[i] < 0)
            for (auto& x : z) x = -x;
        break;
    }
    return z;
}

bool witness_less(const std::vector<long>& a, const std::vector<long>& b) {
    long na = 0, nb = 0;
    for (long x : a) na += x * x;
    for (long x : b) nb += x * x;
    if (na != nb) return na < nb;
    return a < b;
}

} // namespace

ErgodicityCheck assert_totally_ergodic(const ToralAction& action, int search_radius) {
    const std::size_t l = action.rank();
    std::set<std::vector<long>> candidates;

    double box = std::pow(2.0 * search_radius + 1, static_cast<double>(l));
    if (box > 2e5) throw InstanceTooLarge("assert_totally_ergodic: search box too large; lower the radius");
    {
        std::vector<long> z(l, -search_radius);
        while (true) {
            if (std::any_of(z.begin(), z.end(), [](long x) { return x != 0; })) candidates.insert(normalize_witness(z));
            std::size_t i = l;
            bool done = true;
            while (i-- > 0) {
                if (z[i] < search_radius) {
                    ++z[i];
                    for (std::size_t j = i + 1; j < l; ++j) z[j] = -search_radius;
                    done = false;
                    break;
                }
            }
            if (done) break;
        }
    }

    // near-kernel vectors of each orbit's log matrix
    try {
        const double scale = 1e6;
        for (const auto& orbit : action.orbits()) {
            const std::size_t m = orbit.size();
            std::vector<IntVector> rows;
            for (std::size_t j = 0; j < l; ++j) {
                IntVector r(l + m);
                r[j] = 1;
                for (std::size_t c = 0; c < m; ++c) r[l + c] = Integer(std::lround(scale * orbit.log_matrix[c][j]));
                rows.push_back(std::move(r));
            }
            LatticeBasis reduced = lll_reduce(LatticeBasis(l + m, rows));
            for (const auto& v : reduced.vectors()) {
                std::vector<long> z(l);
                double head = 0, tail = 0;
                bool fits = true;
                for (std::size_t j = 0; j < l; ++j) {
                    if (!v[j].fits_slong_p() || abs(v[j]) > 10000) fits = false;
                    else z[j] = v[j].get_si();
                    head += v[j].get_d() * v[j].get_d();
                }
                for (std::size_t c = 0; c < m; ++c) tail += v[l + c].get_d() * v[l + c].get_d();
                if (!fits || head == 0) continue;
                if (std::sqrt(tail) <= 1e-3 * scale * std::sqrt(head)) candidates.insert(normalize_witness(z));
            }
        }
    } catch (const DegenerateCombination&) {
        // the exhaustive box still gives an exact answer on its radius
    }

    ErgodicityCheck result;
    result.search_radius = search_radius;
    for (const auto& z : candidates) {
        ++result.candidates_tested;
        if (is_ergodic_single(action.apply(z))) continue;
        if (!result.witness || witness_less(z, *result.witness)) result.witness = z;
    }
    result.totally_ergodic = !result.witness.has_value();
    return result;
}

// ---------------------------------------------------------------- growth constant

namespace {

double max_dot(const std::vector<std::vector<double>>& rows, const std::vector<double>& z) {
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& r : rows) {
        double s = 0;
        for (std::size_t j = 0; j < z.size(); ++j) s += r[j] * z[j];
        best = std::max(best, s);
    }
    return best;
}

void normalize(std::vector<double>& z) {
    double n = 0;
    for (double x : z) n += x * x;
    n = std::sqrt(n);
    for (auto& x : z) x /= n;
}

} // namespace

GrowthConstant sphere_min_max(const std::vector<std::vector<double>>& rows) {
    if (rows.empty()) throw InvalidInput("sphere_min_max: no rows");
    const std::size_t l = rows.front().size();
    GrowthConstant out;
    out.c = std::numeric_limits<double>::infinity();
    auto consider = [&](std::vector<double> z) {
        normalize(z);
        double v = max_dot(rows, z);
        if (v < out.c) {
            out.c = v;
            out.direction = z;
        }
    };

    if (l == 1) {
        consider({1.0});
        consider({-1.0});
        out.lower_bound = out.c;
    } else if (l == 2) {
        // f(theta) = max of sinusoids: the minimum sits at a crossing of two pieces
        // or at the bottom of a single piece.
        for (const auto& r : rows) {
            if (std::hypot(r[0], r[1]) > 0) consider({-r[0], -r[1]});
        }
        for (std::size_t a = 0; a < rows.size(); ++a)
            for (std::size_t b = a + 1; b < rows.size(); ++b) {
                double dx = rows[a][0] - rows[b][0];
                double dy = rows[a][1] - rows[b][1];
                if (std::hypot(dx, dy) == 0) continue;
                consider({-dy, dx});
                consider({dy, -dx});
            }
        if (out.direction.empty()) consider({1.0, 0.0});
        out.lower_bound = out.c;
    } else {
        // grid on the faces of the cube [-1,1]^l, radially projected, then pattern search
        const std::size_t per_axis = l == 3 ? 48 : (l == 4 ? 16 : 6);
        double lipschitz = 0;
        for (const auto& r : rows) {
            double s = 0;
            for (double x : r) s += x * x;
            lipschitz = std::max(lipschitz, std::sqrt(s));
        }
        std::vector<std::pair<double, std::vector<double>>> grid_best;
        double grid_min = std::numeric_limits<double>::infinity();
        std::vector<double> z(l);
        std::vector<std::size_t> idx(l - 1);
        for (std::size_t face = 0; face < l; ++face)
            for (double side : {-1.0, 1.0}) {
                std::fill(idx.begin(), idx.end(), 0);
                while (true) {
                    std::size_t k = 0;
                    for (std::size_t j = 0; j < l; ++j) {
                        if (j == face) z[j] = side;
                        else z[j] = -1.0 + 2.0 * static_cast<double>(idx[k++]) / static_cast<double>(per_axis);
                    }
                    std::vector<double> u = z;
                    normalize(u);
                    double v = max_dot(rows, u);
                    grid_min = std::min(grid_min, v);
                    grid_best.emplace_back(v, u);
                    std::size_t i = l - 1;
                    bool done = true;
                    while (i-- > 0) {
                        if (idx[i] < per_axis) {
                            ++idx[i];
                            for (std::size_t j = i + 1; j < l - 1; ++j) idx[j] = 0;
                            done = false;
                            break;
                        }
                    }
                    if (done) break;
                }
            }
        std::sort(grid_best.begin(), grid_best.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
        grid_best.resize(std::min<std::size_t>(grid_best.size(), 8));
        for (auto& [value, start] : grid_best) {
            std::vector<double> cur = start;
            double cur_v = value;
            for (double step = 2.0 / static_cast<double>(per_axis); step > 1e-12; step *= 0.5) {
                bool improved = true;
                while (improved) {
                    improved = false;
                    for (std::size_t j = 0; j < l; ++j)
                        for (double s : {-step, step}) {
                            std::vector<double> trial = cur;
                            trial[j] += s;
                            normalize(trial);
                            double tv = max_dot(rows, trial);
                            if (tv < cur_v) {
                                cur = trial;
                                cur_v = tv;
                                improved = true;
                            }
                        }
                }
            }
            consider(cur);
        }
        double spacing = 2.0 / static_cast<double>(per_axis);
        double cover = spacing * std::sqrt(static_cast<double>(l - 1)) / 2.0;
        out.lower_bound = grid_min - lipschitz * cover;
        out.exact = false;
    }
    out.per_orbit = {out.c};
    return out;
}

GrowthConstant growth_constant(const ToralAction& action) {
    ErgodicityCheck check = assert_totally_ergodic(action);
    if (!check.totally_ergodic)
        throw NotTotallyErgodic("growth_constant: action is not totally ergodic", *check.witness);
    const auto& orbits = action.orbits();
    GrowthConstant out;
    out.c = std::numeric_limits<double>::infinity();
    out.lower_bound = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < orbits.size(); ++i) {
        GrowthConstant g = sphere_min_max(orbits[i].log_matrix);
        out.per_orbit.push_back(g.c);
        out.lower_bound = std::min(out.lower_bound, g.lower_bound);
        out.exact = out.exact && g.exact;
        if (g.c < out.c) {
            out.c = g.c;
            out.direction = g.direction;
            out.witness_orbit = i;
        }
    }
    return out;
}

} // namespace nilmix
