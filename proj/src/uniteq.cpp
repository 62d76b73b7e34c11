#include "nilmix/uniteq.hpp"

#include "nilmix/detail/enumeration.hpp"
#include "nilmix/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <optional>

namespace nilmix {

UnitEquationInstance::UnitEquationInstance(UnitTuple u) : u_(std::move(u)), alpha_(alpha_with_subset(u_)) {}

double coefficient_height(std::span<const FieldElement> a) {
    double h = 0;
    for (const auto& x : a) h = std::max(h, x.house());
    return h;
}

bool verify_solution(const UnitEquationInstance& inst, std::span<const FieldElement> a) {
    if (a.size() != inst.size()) return false;
    FieldElement sum = inst.field().zero();
    bool nonzero = false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (!(a[i].field() == inst.field()) || !a[i].is_integral()) return false;
        nonzero = nonzero || !a[i].is_zero();
        sum = sum + a[i] * inst.units().units()[i];
    }
    return nonzero && sum.is_zero();
}

LatticeBasis solution_lattice(const UnitEquationInstance& inst) {
    const NumberField& k = inst.field();
    const std::size_t D = k.degree();
    const std::size_t n = inst.size();
    // column (i, k) holds the power coordinates of omega_k u_i
    std::vector<std::vector<Rational>> cols;
    Integer den = 1;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t b = 0; b < D; ++b) {
            IntVector unit(D);
            unit[b] = 1;
            FieldElement x = k.from_integral_coordinates(unit) * inst.units().units()[i];
            for (const auto& c : x.coordinates()) den = lcm(den, c.get_den());
            cols.push_back(x.coordinates());
        }
    IntMatrix m(D, n * D);
    for (std::size_t c = 0; c < n * D; ++c)
        for (std::size_t r = 0; r < D; ++r) {
            Rational v = cols[c][r] * den;
            m(r, c) = v.get_num();
        }
    return integer_kernel(m);
}

std::vector<FieldElement> coefficients_from_vector(const UnitEquationInstance& inst, const IntVector& c) {
    const std::size_t D = inst.field().degree();
    if (c.size() != inst.size() * D) throw DimensionMismatch("coefficient vector of wrong length");
    std::vector<FieldElement> out;
    for (std::size_t i = 0; i < inst.size(); ++i)
        out.push_back(inst.field().from_integral_coordinates(IntVector(c.begin() + static_cast<long>(i * D),
                                                                       c.begin() + static_cast<long>((i + 1) * D))));
    return out;
}

namespace {

// Minkowski coordinates: real places as is, complex pairs as sqrt2 (Re, Im).
std::vector<detail::Real> minkowski(const NumberField& k, const IntVector& c) {
    const std::size_t D = k.degree();
    const std::size_t n = c.size() / D;
    std::vector<detail::Real> out;
    out.reserve(c.size());
    for (std::size_t i = 0; i < n; ++i) {
        auto e = k.from_integral_coordinates(IntVector(c.begin() + static_cast<long>(i * D),
                                                       c.begin() + static_cast<long>((i + 1) * D)))
                     .embed();
        for (int v = 0; v < k.real_places(); ++v) out.push_back(e[static_cast<std::size_t>(v)].real());
        for (int p = 0; p < k.complex_pairs(); ++p) {
            const auto& z = e[static_cast<std::size_t>(k.real_places() + 2 * p)];
            out.push_back(std::numbers::sqrt2 * z.real());
            out.push_back(std::numbers::sqrt2 * z.imag());
        }
    }
    return out;
}

double minkowski_house(const NumberField& k, std::span<const detail::Real> m) {
    const std::size_t D = k.degree();
    const std::size_t r1 = static_cast<std::size_t>(k.real_places());
    double h = 0;
    for (std::size_t off = 0; off < m.size(); off += D) {
        for (std::size_t v = 0; v < r1; ++v) h = std::max(h, static_cast<double>(std::abs(m[off + v])));
        for (std::size_t v = r1; v < D; v += 2)
            h = std::max(h, static_cast<double>(std::hypot(m[off + v], m[off + v + 1]) / std::numbers::sqrt2));
    }
    return h;
}

IntVector sign_normalized(IntVector v) {
    for (const auto& x : v) {
        if (sgn(x) == 0) continue;
        if (sgn(x) < 0)
            for (auto& y : v) y = -y;
        break;
    }
    return v;
}

SolutionRecord make_record(const UnitEquationInstance& inst, std::vector<FieldElement> a) {
    SolutionRecord r;
    r.exact = verify_solution(inst, a);
    r.h = coefficient_height(a);
    r.a = std::move(a);
    return r;
}

} // namespace

SolutionRecord min_coeff_height(const UnitEquationInstance& inst) {
    const NumberField& k = inst.field();
    const std::size_t nD = inst.size() * k.degree();
    if (nD > 12) throw InstanceTooLarge("min_coeff_height: n*D = " + std::to_string(nD) + " exceeds 12");
    LatticeBasis lattice = solution_lattice(inst);
    const auto& basis = lattice.vectors();

    std::vector<std::vector<detail::Real>> emb;
    double best = std::numeric_limits<double>::infinity();
    for (const auto& b : basis) {
        emb.push_back(minkowski(k, b));
        best = std::min(best, minkowski_house(k, emb.back()));
    }
    const detail::Real slack = 1e-9L;
    auto bound_for = [&](double h) { return static_cast<detail::Real>(nD) * h * h * (1 + slack) + slack; };

    detail::GramSchmidt gs = detail::gram_schmidt(emb);
    std::vector<detail::Real> center(basis.size(), 0);
    std::vector<std::vector<long>> ties;
    detail::enumerate_ellipsoid(gs, center, bound_for(best), [&](const std::vector<long>& x, detail::Real) {
        if (std::all_of(x.begin(), x.end(), [](long v) { return v == 0; })) return bound_for(best);
        std::vector<detail::Real> p(nD, 0);
        for (std::size_t j = 0; j < x.size(); ++j)
            if (x[j] != 0)
                for (std::size_t t = 0; t < nD; ++t) p[t] += static_cast<detail::Real>(x[j]) * emb[j][t];
        double h = minkowski_house(k, p);
        double tol = 1e-9 * std::max(1.0, best);
        if (h < best - tol) {
            best = h;
            ties.clear();
            ties.push_back(x);
        } else if (h <= best + tol) {
            ties.push_back(x);
        }
        return bound_for(best);
    });

    // exact re-evaluation; keep the minimum, then the lexicographically smallest normalized vector
    std::optional<IntVector> chosen;
    double chosen_h = std::numeric_limits<double>::infinity();
    for (const auto& x : ties) {
        IntVector c(nD);
        for (std::size_t j = 0; j < x.size(); ++j)
            if (x[j] != 0)
                for (std::size_t t = 0; t < nD; ++t) c[t] += Integer(x[j]) * basis[j][t];
        c = sign_normalized(std::move(c));
        double h = coefficient_height(coefficients_from_vector(inst, c));
        double tol = 1e-9 * std::max(1.0, h);
        if (!chosen || h < chosen_h - tol || (h <= chosen_h + tol && c < *chosen)) {
            if (!chosen || h < chosen_h - tol) chosen_h = h;
            chosen = c;
        }
    }
    if (!chosen) {
        // best came from a basis vector that the enumeration never revisited
        for (const auto& b : basis) {
            IntVector c = sign_normalized(b);
            double h = coefficient_height(coefficients_from_vector(inst, c));
            if (!chosen || h < chosen_h) {
                chosen_h = h;
                chosen = c;
            }
        }
    }
    return make_record(inst, coefficients_from_vector(inst, *chosen));
}

// ---------------------------------------------------------------- pigeonhole

Construction dirichlet_construct(const UnitEquationInstance& inst) {
    const NumberField& k = inst.field();
    const std::size_t D = k.degree();
    if (k.unit_rank() > 2) throw RankNotSupported("dirichlet_construct: unit rank above 2");
    const auto& subset = inst.alpha_result().subset;
    const std::size_t m = subset.size();
    const auto& logs = inst.units().log_moduli();

    // lambda: bring the places' maxima of log|u_i|_v, i in I, close to their mean
    std::vector<double> top(D, -std::numeric_limits<double>::infinity());
    for (std::size_t i : subset)
        for (std::size_t v = 0; v < D; ++v) top[v] = std::max(top[v], logs[i][v]);
    double mean = 0;
    for (double t : top) mean += t;
    mean /= static_cast<double>(D);
    FieldElement lambda = k.one();
    std::vector<FieldElement> fundamental = unit_group_basis(k);
    if (!fundamental.empty()) {
        std::vector<std::vector<double>> rows;
        for (const auto& e : fundamental) {
            std::vector<double> r;
            for (double a : abs_values(e)) r.push_back(std::log(a));
            rows.push_back(std::move(r));
        }
        std::vector<double> target(D);
        for (std::size_t v = 0; v < D; ++v) target[v] = -(top[v] - mean);
        ClosePoint cp = closest_vector(rows, target);
        for (std::size_t j = 0; j < fundamental.size(); ++j)
            lambda = lambda * fundamental[j].pow(cp.coefficients[j].get_si());
    }

    std::vector<FieldElement> w;
    std::vector<FieldElement> u_sub;
    for (std::size_t i : subset) {
        u_sub.push_back(inst.units().units()[i]);
        w.push_back(lambda * u_sub.back());
    }
    const double H = height(u_sub);
    double c0 = 0;
    for (const auto& x : w) c0 = std::max(c0, x.house());
    c0 /= H;

    // counting inequality c2^m (h/2)^{mD} > C2 (C1 h H)^D, with |O_h| ~ c h^D measured at h = 4
    const double ref = 4;
    const double c2 = static_cast<double>(enumerate_O_h(k, ref).size()) / std::pow(ref, static_cast<double>(D));
    const double C1 = static_cast<double>(m) * c0;
    const double md = static_cast<double>(m * D);
    const double threshold_h =
        std::pow(c2 * std::pow(C1 * H, static_cast<double>(D)) * std::pow(2.0, md) / std::pow(c2, static_cast<double>(m)),
                 1.0 / (static_cast<double>((m - 1) * D)));

    std::size_t hashed = 0;
    for (double h = 2; h <= 1024; h *= 2) {
        std::vector<FieldElement> elems = enumerate_O_h(k, h / 2);
        const double total = std::pow(static_cast<double>(elems.size()), static_cast<double>(m));
        if (total > 4e6) break;
        std::vector<std::vector<IntVector>> products(m);
        for (std::size_t i = 0; i < m; ++i)
            for (const auto& e : elems) products[i].push_back((e * w[i]).integral_coordinates());

        std::map<IntVector, std::vector<std::size_t>> seen;
        std::vector<std::size_t> idx(m, 0);
        while (true) {
            IntVector sum(D);
            for (std::size_t i = 0; i < m; ++i)
                for (std::size_t t = 0; t < D; ++t) sum[t] += products[i][idx[i]][t];
            ++hashed;
            auto [it, inserted] = seen.emplace(std::move(sum), idx);
            if (!inserted) {
                std::vector<FieldElement> a(inst.size(), k.zero());
                for (std::size_t i = 0; i < m; ++i) a[subset[i]] = elems[idx[i]] - elems[it->second[i]];
                SolutionRecord sol = make_record(inst, std::move(a));
                double R = sol.h / inst.alpha();
                return Construction{std::move(sol), subset, lambda, c0, threshold_h, h, R, hashed};
            }
            std::size_t pos = m;
            while (pos > 0) {
                --pos;
                if (++idx[pos] < elems.size()) break;
                idx[pos] = 0;
                if (pos == 0) {
                    pos = m + 1;
                    break;
                }
            }
            if (pos == m + 1) break;
        }
    }
    throw InstanceTooLarge("dirichlet_construct: no collision before the enumeration limit");
}

BoundsReport verify_bounds(std::span<const UnitEquationInstance> sweep, double epsilon) {
    if (sweep.empty()) throw InsufficientData("verify_bounds: empty sweep");
    if (!(epsilon >= 0 && epsilon < 1)) throw InvalidInput("verify_bounds: epsilon must lie in [0, 1)");
    BoundsReport report;
    report.r_hat = std::numeric_limits<double>::infinity();
    for (const auto& inst : sweep) {
        SolutionRecord best = min_coeff_height(inst);
        Construction built = dirichlet_construct(inst);
        if (!best.exact || !built.solution.exact)
            throw PreconditionFailure("verify_bounds: solver returned an invalid solution");
        double a = inst.alpha();
        report.table.push_back({a, best.h, built.solution.h});
        report.r_hat = std::min(report.r_hat, best.h / std::pow(a, 1 - epsilon));
        report.R_hat = std::max(report.R_hat, built.solution.h / a);
    }
    if (!(report.r_hat > 0)) throw PreconditionFailure("verify_bounds: r_hat is not positive");
    return report;
}

} // namespace nilmix
