#include "nilmix_cli.hpp"

#include "nilmix/action.hpp"
#include "nilmix/error.hpp"
#include "nilmix/mixing.hpp"
#include "nilmix/numfield.hpp"
#include "nilmix/uniteq.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <thread>

namespace nilmix::cli {

const char* version() { return NILMIX_VERSION; }

namespace {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

class ConfigError : public InvalidInput {
public:
    using InvalidInput::InvalidInput;
};

// ---------------------------------------------------------------- config parsing

const json& need(const json& j, const std::string& key, const std::string& path) {
    if (!j.is_object()) throw ConfigError(path + ": expected an object");
    auto it = j.find(key);
    if (it == j.end()) throw ConfigError(path + "." + key + ": missing");
    return *it;
}

long as_long(const json& j, const std::string& path) {
    if (!j.is_number_integer()) throw ConfigError(path + ": expected an integer");
    return j.get<long>();
}

double as_double(const json& j, const std::string& path) {
    if (!j.is_number()) throw ConfigError(path + ": expected a number");
    return j.get<double>();
}

Rational as_rational(const json& j, const std::string& path) {
    if (j.is_number_integer()) return Rational(j.get<long>());
    if (j.is_string()) {
        try {
            Rational q(j.get<std::string>());
            if (sgn(q.get_den()) == 0) throw ConfigError(path + ": zero denominator");
            q.canonicalize();
            return q;
        } catch (const std::invalid_argument&) {
            throw ConfigError(path + ": not a rational \"" + j.get<std::string>() + "\"");
        }
    }
    throw ConfigError(path + ": expected an integer or a rational string such as \"1/2\"");
}

std::vector<long> long_array(const json& j, const std::string& path) {
    if (!j.is_array()) throw ConfigError(path + ": expected an array of integers");
    std::vector<long> out;
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(as_long(j[i], path + "[" + std::to_string(i) + "]"));
    return out;
}

std::string idx(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }

ToralAction parse_action(const json& cfg) {
    const json& gens = need(need(cfg, "action", "config"), "generators", "config.action");
    const std::string path = "config.action.generators";
    if (!gens.is_array() || gens.empty()) throw ConfigError(path + ": expected a nonempty array of matrices");
    std::vector<IntMatrix> mats;
    for (std::size_t g = 0; g < gens.size(); ++g) {
        const json& m = gens[g];
        if (!m.is_array() || m.empty()) throw ConfigError(idx(path, g) + ": expected a row-major integer matrix");
        std::vector<std::vector<long>> rows;
        for (std::size_t r = 0; r < m.size(); ++r) rows.push_back(long_array(m[r], idx(idx(path, g), r)));
        for (const auto& r : rows)
            if (r.size() != rows.size()) throw ConfigError(idx(path, g) + ": matrix must be square");
        mats.push_back(IntMatrix::from_rows(rows));
    }
    return validate_action(std::move(mats));
}

NumberField parse_field(const json& cfg) {
    const json& f = need(cfg, "field", "config");
    if (f.contains("quadratic")) return NumberField::quadratic(as_long(f["quadratic"], "config.field.quadratic"));
    if (f.contains("polynomial")) {
        const json& p = f["polynomial"];
        if (!p.is_array()) throw ConfigError("config.field.polynomial: expected a constant-first coefficient array");
        std::vector<Rational> c;
        for (std::size_t i = 0; i < p.size(); ++i) c.push_back(as_rational(p[i], idx("config.field.polynomial", i)));
        return NumberField::make(Polynomial(std::move(c)));
    }
    throw ConfigError("config.field: expected \"quadratic\" or \"polynomial\"");
}

TrigPolynomial parse_function(const json& f, std::size_t dim, const std::string& path) {
    if (!f.is_object()) throw ConfigError(path + ": expected an object");
    Rational amp = f.contains("amplitude") ? as_rational(f["amplitude"], path + ".amplitude") : Rational(1);
    auto freq = [&](const char* key) {
        auto q = long_array(f[key], path + "." + key);
        if (q.size() != dim) throw ConfigError(path + "." + key + ": frequency must have length " + std::to_string(dim));
        return q;
    };
    if (f.contains("cosine")) return TrigPolynomial::cosine(dim, freq("cosine"), amp);
    if (f.contains("sine")) return TrigPolynomial::sine(dim, freq("sine"), amp);
    if (f.contains("constant")) return TrigPolynomial::constant(dim, as_rational(f["constant"], path + ".constant"));
    if (f.contains("sum")) {
        const json& s = f["sum"];
        if (!s.is_array() || s.empty()) throw ConfigError(path + ".sum: expected a nonempty array");
        TrigPolynomial acc = parse_function(s[0], dim, idx(path + ".sum", 0));
        for (std::size_t i = 1; i < s.size(); ++i) acc = acc + parse_function(s[i], dim, idx(path + ".sum", i));
        return acc;
    }
    if (f.contains("terms")) {
        const json& t = f["terms"];
        if (!t.is_array()) throw ConfigError(path + ".terms: expected an array");
        std::map<Frequency, ExactComplex> coeffs;
        for (std::size_t i = 0; i < t.size(); ++i) {
            const std::string p = idx(path + ".terms", i);
            auto q = long_array(need(t[i], "q", p), p + ".q");
            if (q.size() != dim) throw ConfigError(p + ".q: frequency must have length " + std::to_string(dim));
            const json& c = need(t[i], "c", p);
            ExactComplex v{0, 0};
            if (c.is_array()) {
                if (c.size() != 2) throw ConfigError(p + ".c: expected [re, im]");
                v = {as_rational(c[0], p + ".c[0]"), as_rational(c[1], p + ".c[1]")};
            } else {
                v = {as_rational(c, p + ".c"), 0};
            }
            auto [it, inserted] = coeffs.emplace(q, v);
            if (!inserted) it->second = it->second + v;
        }
        return TrigPolynomial(dim, std::move(coeffs));
    }
    throw ConfigError(path + ": expected one of cosine, sine, constant, sum, terms");
}

std::vector<TrigPolynomial> parse_functions(const json& cfg, std::size_t n, std::size_t dim) {
    if (cfg.contains("function")) return std::vector<TrigPolynomial>(n, parse_function(cfg["function"], dim, "config.function"));
    const json& fs = need(cfg, "functions", "config");
    if (!fs.is_array() || fs.size() != n)
        throw ConfigError("config.functions: expected " + std::to_string(n) + " functions, one per tuple point");
    std::vector<TrigPolynomial> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back(parse_function(fs[i], dim, idx("config.functions", i)));
    return out;
}

// affine expressions in j and k: "0", "k", "-2k+1", "3*j - k"
long eval_affine(const std::string& expr, long j, long k, const std::string& path) {
    std::string s;
    for (char ch : expr)
        if (ch != ' ') s += ch;
    if (s.empty()) throw ConfigError(path + ": empty expression");
    long total = 0;
    std::size_t i = 0;
    while (i < s.size()) {
        long sign = 1;
        if (s[i] == '+' || s[i] == '-') {
            sign = s[i] == '-' ? -1 : 1;
            ++i;
        }
        std::size_t start = i;
        while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
        bool has_num = i > start;
        long coef = has_num ? std::stol(s.substr(start, i - start)) : 1;
        if (i < s.size() && s[i] == '*') {
            if (!has_num) throw ConfigError(path + ": malformed expression \"" + expr + "\"");
            ++i;
        }
        if (i < s.size() && (s[i] == 'k' || s[i] == 'j')) {
            total += sign * coef * (s[i] == 'k' ? k : j);
            ++i;
        } else if (has_num && (i == s.size() || s[i] == '+' || s[i] == '-')) {
            total += sign * coef;
        } else {
            throw ConfigError(path + ": malformed expression \"" + expr + "\"");
        }
    }
    return total;
}

std::pair<long, long> parse_range(const json& j, const std::string& path) {
    auto r = long_array(j, path);
    if (r.size() != 2 || r[0] > r[1]) throw ConfigError(path + ": expected [first, last] with first <= last");
    return {r[0], r[1]};
}

struct Param {
    std::optional<long> j;
    long k;
};

std::vector<Param> parse_params(const json& node, const std::string& path) {
    auto [k0, k1] = parse_range(need(node, "k_range", path), path + ".k_range");
    std::vector<Param> out;
    if (node.contains("j_range")) {
        auto [j0, j1] = parse_range(node["j_range"], path + ".j_range");
        for (long k = k0; k <= k1; ++k)
            for (long j = j0; j <= j1 && j < k; ++j) out.push_back({j, k});
    } else {
        for (long k = k0; k <= k1; ++k) out.push_back({std::nullopt, k});
    }
    if (out.empty()) throw ConfigError(path + ": the ranges produce no instances");
    return out;
}

struct TupleFamily {
    std::vector<Param> params;
    std::vector<TupleZ> tuples;
};

TupleFamily parse_tuples(const json& cfg, std::size_t rank) {
    const std::string path = "config.tuples";
    const json& t = need(cfg, "tuples", "config");
    const json& pts = need(t, "points", path);
    if (!pts.is_array() || pts.size() < 2) throw ConfigError(path + ".points: expected at least two point expressions");
    TupleFamily fam;
    fam.params = parse_params(t, path);
    for (const auto& p : fam.params) {
        std::vector<std::vector<long>> points;
        for (std::size_t i = 0; i < pts.size(); ++i) {
            const std::string pp = idx(path + ".points", i);
            std::vector<long> z;
            if (pts[i].is_string()) {
                z.push_back(eval_affine(pts[i].get<std::string>(), p.j.value_or(0), p.k, pp));
            } else if (pts[i].is_array()) {
                for (std::size_t c = 0; c < pts[i].size(); ++c) {
                    if (!pts[i][c].is_string()) throw ConfigError(idx(pp, c) + ": expected an expression string");
                    z.push_back(eval_affine(pts[i][c].get<std::string>(), p.j.value_or(0), p.k, idx(pp, c)));
                }
            } else {
                throw ConfigError(pp + ": expected an expression or an array of expressions");
            }
            if (z.size() != rank)
                throw ConfigError(pp + ": point has length " + std::to_string(z.size()) + " but the action has rank " +
                                  std::to_string(rank));
            points.push_back(std::move(z));
        }
        fam.tuples.emplace_back(std::move(points));
    }
    return fam;
}

FieldElement fundamental_unit(const NumberField& k) {
    if (k.quadratic_radicand() && *k.quadratic_radicand() > 1) {
        FieldElement e = fundamental_unit_real_quadratic(*k.quadratic_radicand());
        return k.element(e.coordinates());
    }
    auto basis = unit_group_basis(k);
    if (basis.empty()) throw ConfigError("config.units: the field has no unit of infinite order");
    return basis.front();
}

FieldElement parse_element(const json& e, const NumberField& k, const std::string& path) {
    if (e.is_object()) {
        long p = as_long(need(e, "unit_power", path), path + ".unit_power");
        return fundamental_unit(k).pow(p);
    }
    if (!e.is_array()) throw ConfigError(path + ": expected power-basis coordinates or {\"unit_power\": n}");
    std::vector<Rational> c;
    for (std::size_t i = 0; i < e.size(); ++i) c.push_back(as_rational(e[i], idx(path, i)));
    if (c.size() > k.degree()) throw ConfigError(path + ": more coordinates than the field degree");
    c.resize(k.degree());
    return k.element(std::move(c));
}

struct ElementFamily {
    std::vector<Param> params;
    std::vector<std::vector<FieldElement>> tuples;
};

ElementFamily parse_element_family(const json& cfg, const NumberField& k, const char* key) {
    const std::string path = std::string("config.") + key;
    const json& u = need(cfg, key, "config");
    ElementFamily fam;
    if (u.is_object() && u.contains("powers")) {
        const json& pw = u["powers"];
        if (!pw.is_array() || pw.empty()) throw ConfigError(path + ".powers: expected an array of exponent expressions");
        fam.params = parse_params(u, path);
        FieldElement eps = fundamental_unit(k);
        for (const auto& p : fam.params) {
            std::vector<FieldElement> t;
            for (std::size_t i = 0; i < pw.size(); ++i) {
                if (!pw[i].is_string()) throw ConfigError(idx(path + ".powers", i) + ": expected an expression string");
                t.push_back(eps.pow(eval_affine(pw[i].get<std::string>(), p.j.value_or(0), p.k, idx(path + ".powers", i))));
            }
            fam.tuples.push_back(std::move(t));
        }
        return fam;
    }
    const json& list = u.is_object() ? need(u, "tuples", path) : u;
    if (!list.is_array() || list.empty()) throw ConfigError(path + ": expected {\"powers\": ...} or a list of tuples");
    for (std::size_t t = 0; t < list.size(); ++t) {
        if (!list[t].is_array()) throw ConfigError(idx(path, t) + ": expected a list of elements");
        std::vector<FieldElement> tuple;
        for (std::size_t i = 0; i < list[t].size(); ++i) tuple.push_back(parse_element(list[t][i], k, idx(idx(path, t), i)));
        fam.params.push_back({std::nullopt, static_cast<long>(t)});
        fam.tuples.push_back(std::move(tuple));
    }
    return fam;
}

std::vector<UnitEquationInstance> make_instances(const NumberField& k, const ElementFamily& fam) {
    std::vector<UnitEquationInstance> out;
    for (const auto& t : fam.tuples) out.emplace_back(UnitTuple(k, t));
    return out;
}

// ---------------------------------------------------------------- reports

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<json>> rows;
};

struct Report {
    Table table;
    json summary = json::object();
    std::vector<std::string> lines;  // human summary for stdout
};

struct Context {
    std::uint64_t seed = 0;
    std::size_t threads = 1;
};

std::string fmt_double(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string fixed(double x, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, x);
    return buf;
}

std::string csv_cell(const json& v) {
    std::string s;
    if (v.is_null()) return "";
    if (v.is_string()) s = v.get<std::string>();
    else if (v.is_boolean()) s = v.get<bool>() ? "true" : "false";
    else if (v.is_number_integer()) s = v.dump();
    else if (v.is_number_float()) s = fmt_double(v.get<double>());
    else s = v.dump();
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) {
        if (c == '"') q += '"';
        q += c;
    }
    return q + "\"";
}

std::string render_csv(const Table& t) {
    std::string out;
    for (std::size_t c = 0; c < t.columns.size(); ++c) out += (c ? "," : "") + csv_cell(t.columns[c]);
    out += '\n';
    for (const auto& row : t.rows) {
        for (std::size_t c = 0; c < row.size(); ++c) out += (c ? "," : "") + csv_cell(row[c]);
        out += '\n';
    }
    return out;
}

json num(double x) {
    if (std::isfinite(x)) return x;
    return fmt_double(x);
}

std::string vec_str(const std::vector<long>& v) {
    std::string s = "(";
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
    return s + ")";
}

std::string vec_str(const IntVector& v) {
    std::string s = "(";
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + v[i].get_str();
    return s + ")";
}

std::string tuple_str(const std::vector<FieldElement>& a) {
    std::string s = "(";
    for (std::size_t i = 0; i < a.size(); ++i) s += (i ? ", " : "") + a[i].to_string();
    return s + ")";
}

std::string exact_str(const ExactComplex& c) {
    if (sgn(c.im) == 0) return c.re.get_str();
    return c.re.get_str() + (sgn(c.im) > 0 ? "+" : "-") + Rational(abs(c.im)).get_str() + "i";
}

std::vector<json> param_cells(const Param& p, bool with_j) {
    std::vector<json> v;
    if (with_j) v.push_back(p.j ? json(*p.j) : json());
    v.push_back(p.k);
    return v;
}

std::string label(const Param& p) {
    return (p.j ? "j=" + std::to_string(*p.j) + " " : std::string()) + "k=" + std::to_string(p.k);
}

std::vector<std::string> param_columns(const std::vector<Param>& ps) {
    if (!ps.empty() && ps.front().j) return {"j", "k"};
    return {"k"};
}

template <class F>
auto parallel_map(std::size_t n, std::size_t threads, F f) -> std::vector<decltype(f(std::size_t{}))> {
    using R = decltype(f(std::size_t{}));
    std::vector<std::optional<R>> slots(n);
    std::vector<std::exception_ptr> errors(n);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                slots[i].emplace(f(i));
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    std::size_t count = std::min(threads, n);
    if (count <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t t = 0; t < count; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    std::vector<R> out;
    out.reserve(n);
    for (auto& s : slots) out.push_back(std::move(*s));
    return out;
}

// ---------------------------------------------------------------- subcommands

Report cmd_check_action(const json& cfg, const Context&) {
    ToralAction action = parse_action(cfg);
    int radius = cfg.contains("search_radius") ? static_cast<int>(as_long(cfg["search_radius"], "config.search_radius")) : 3;
    if (radius < 1) throw ConfigError("config.search_radius: must be positive");
    ErgodicityCheck ec = assert_totally_ergodic(action, radius);
    if (!ec.totally_ergodic)
        throw NotTotallyErgodic("action is not totally ergodic: A(z) has a root-of-unity eigenvalue at z = " +
                                    vec_str(*ec.witness),
                                *ec.witness);
    Report r;
    r.table.columns = {"dim", "rank", "totally_ergodic", "search_radius", "candidates_tested"};
    r.table.rows.push_back({action.dim(), action.rank(), true, radius, ec.candidates_tested});
    r.summary["totally_ergodic"] = true;
    r.lines.push_back("totally ergodic (exhaustive up to |z|_inf <= " + std::to_string(radius) + ")");
    return r;
}

Report cmd_orbits(const json& cfg, const Context& ctx) {
    ToralAction action = parse_action(cfg);
    auto orbits = eigencharacter_orbits(action, ctx.seed);
    Report r;
    r.table.columns = {"orbit", "character", "generator", "generator_poly", "multiplicity", "lambda_re", "lambda_im", "log_abs"};
    for (std::size_t o = 0; o < orbits.size(); ++o) {
        const auto& orb = orbits[o];
        for (std::size_t c = 0; c < orb.size(); ++c)
            for (std::size_t j = 0; j < action.rank(); ++j)
                r.table.rows.push_back({o, c, j, orb.generator_polys[j].to_string(), orb.multiplicity,
                                        num(orb.characters[c][j].real()), num(orb.characters[c][j].imag()),
                                        num(orb.log_matrix[c][j])});
    }
    r.summary["orbits"] = orbits.size();
    r.lines.push_back("orbits: " + std::to_string(orbits.size()));
    return r;
}

Report cmd_growth_constant(const json& cfg, const Context&) {
    ToralAction action = parse_action(cfg);
    GrowthConstant gc = growth_constant(action);
    Report r;
    r.table.columns = {"orbit", "c_orbit"};
    for (std::size_t o = 0; o < gc.per_orbit.size(); ++o) r.table.rows.push_back({o, num(gc.per_orbit[o])});
    r.summary["c"] = num(gc.c);
    r.summary["lower_bound"] = num(gc.lower_bound);
    r.summary["exact"] = gc.exact;
    r.summary["witness_orbit"] = gc.witness_orbit;
    r.summary["direction"] = gc.direction;
    r.lines.push_back("c = " + fixed(gc.c, 10));
    return r;
}

Report cmd_dio(const json& cfg, const Context& ctx) {
    ToralAction action = parse_action(cfg);
    TupleFamily fam = parse_tuples(cfg, action.rank());
    auto rows = parallel_map(fam.tuples.size(), ctx.threads, [&](std::size_t i) {
        ShortVector sv = dio_min_vector(action, fam.tuples[i]);
        return std::make_pair(separation(fam.tuples[i]).s, sv);
    });
    Report r;
    bool with_j = fam.params.front().j.has_value();
    r.table.columns = param_columns(fam.params);
    for (const char* c : {"separation", "D", "vector"}) r.table.columns.push_back(c);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        auto row = param_cells(fam.params[i], with_j);
        row.push_back(num(rows[i].first));
        row.push_back(num(rows[i].second.norm));
        row.push_back(vec_str(rows[i].second.vector));
        r.table.rows.push_back(std::move(row));
    }
    for (std::size_t i = 0; i < rows.size(); ++i)
        r.lines.push_back(label(fam.params[i]) + "  D=" + fixed(rows[i].second.norm, 6));
    return r;
}

std::vector<std::vector<std::vector<double>>> parse_translations(const json& cfg, std::size_t n, std::size_t d,
                                                                 std::uint64_t seed) {
    std::vector<std::vector<std::vector<double>>> samples;
    if (!cfg.contains("translations")) return {{}};
    const json& t = cfg["translations"];
    const std::string path = "config.translations";
    if (t.is_string() && t.get<std::string>() == "zero") return {{}};
    if (t.is_object()) {
        long count = as_long(need(t, "random", path), path + ".random");
        if (count < 1) throw ConfigError(path + ".random: must be positive");
        std::mt19937_64 gen(seed);
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        for (long s = 0; s < count; ++s) {
            std::vector<std::vector<double>> g(n, std::vector<double>(d));
            for (auto& v : g)
                for (auto& x : v) x = unif(gen);
            samples.push_back(std::move(g));
        }
        return samples;
    }
    if (t.is_array()) {
        for (std::size_t s = 0; s < t.size(); ++s) {
            const json& g = t[s];
            if (!g.is_array() || g.size() != n) throw ConfigError(idx(path, s) + ": expected one translation per point");
            std::vector<std::vector<double>> tuple;
            for (std::size_t i = 0; i < n; ++i) {
                if (!g[i].is_array() || g[i].size() != d)
                    throw ConfigError(idx(idx(path, s), i) + ": expected a vector of length " + std::to_string(d));
                std::vector<double> v;
                for (std::size_t c = 0; c < d; ++c) v.push_back(as_double(g[i][c], idx(idx(idx(path, s), i), c)));
                tuple.push_back(std::move(v));
            }
            samples.push_back(std::move(tuple));
        }
        if (samples.empty()) throw ConfigError(path + ": empty list");
        return samples;
    }
    throw ConfigError(path + ": expected \"zero\", {\"random\": count} or a list of translation tuples");
}

Report cmd_correlate(const json& cfg, const Context& ctx) {
    ToralAction action = parse_action(cfg);
    TupleFamily fam = parse_tuples(cfg, action.rank());
    const std::size_t n = fam.tuples.front().size();
    auto fs = parse_functions(cfg, n, action.dim());
    auto samples = parse_translations(cfg, n, action.dim(), ctx.seed);
    const std::size_t jobs = fam.tuples.size() * samples.size();
    auto reports = parallel_map(jobs, ctx.threads, [&](std::size_t i) {
        return correlate(action, fam.tuples[i / samples.size()], samples[i % samples.size()], fs);
    });
    Report r;
    bool with_j = fam.params.front().j.has_value();
    r.table.columns = param_columns(fam.params);
    for (const char* c : {"sample", "separation", "D", "vanished", "surviving_terms", "error_re", "error_im",
                          "abs_error", "exact_error", "error_bound"})
        r.table.columns.push_back(c);
    std::size_t vanished = 0, vanished_nonzero = 0;
    for (std::size_t i = 0; i < jobs; ++i) {
        const auto& rep = reports[i];
        auto row = param_cells(fam.params[i / samples.size()], with_j);
        row.push_back(i % samples.size());
        row.push_back(num(rep.separation));
        row.push_back(num(rep.D));
        row.push_back(rep.vanished);
        row.push_back(rep.surviving_terms);
        row.push_back(num(rep.error.real()));
        row.push_back(num(rep.error.imag()));
        row.push_back(num(std::abs(rep.error)));
        row.push_back(rep.exact_error ? json(exact_str(*rep.exact_error)) : json());
        row.push_back(num(rep.error_bound));
        r.table.rows.push_back(std::move(row));
        if (rep.vanished) {
            ++vanished;
            if (rep.surviving_terms != 0) ++vanished_nonzero;
        }
    }
    r.summary["rows"] = jobs;
    r.summary["vanished_rows"] = vanished;
    r.summary["vanished_rows_with_terms"] = vanished_nonzero;
    r.lines.push_back("vanished rows: " + std::to_string(vanished) + " of " + std::to_string(jobs) +
                      ", with surviving terms: " + std::to_string(vanished_nonzero));
    return r;
}

Report cmd_rate_fit(const json& cfg, const Context& ctx) {
    ToralAction action = parse_action(cfg);
    TupleFamily fam = parse_tuples(cfg, action.rank());
    const std::size_t n = fam.tuples.front().size();
    auto fs = parse_functions(cfg, n, action.dim());
    auto samples = parse_translations(cfg, n, action.dim(), ctx.seed);
    if (samples.size() != 1) throw ConfigError("config.translations: rate-fit uses a single translation tuple");
    RateFit fit = rate_fit(action, fam.tuples, fs, samples.front());
    Report r;
    bool with_j = fam.params.front().j.has_value();
    r.table.columns = param_columns(fam.params);
    for (const char* c : {"separation", "D", "abs_error"}) r.table.columns.push_back(c);
    for (std::size_t i = 0; i < fit.table.size(); ++i) {
        auto row = param_cells(fam.params[i], with_j);
        row.push_back(num(fit.table[i].separation));
        row.push_back(num(fit.table[i].D));
        row.push_back(num(fit.table[i].abs_error));
        r.table.rows.push_back(std::move(row));
    }
    r.summary["eta_lattice"] = num(fit.eta_lattice);
    r.summary["lattice_residual"] = num(fit.lattice_residual);
    r.summary["eta_error"] = fit.eta_error ? num(*fit.eta_error) : json();
    r.summary["error_residual"] = num(fit.error_residual);
    r.lines.push_back("eta_lattice = " + fixed(fit.eta_lattice, 6));
    if (fit.eta_error) r.lines.push_back("eta_error = " + fixed(*fit.eta_error, 6));
    if (cfg.contains("prediction")) {
        const json& p = cfg["prediction"];
        double L = as_double(need(p, "L", "config.prediction"), "config.prediction.L");
        double eps = p.contains("epsilon") ? as_double(p["epsilon"], "config.prediction.epsilon") : 0.0;
        GrowthConstant gc = growth_constant(action);
        std::size_t degree = 1;
        for (const auto& o : action.orbits()) degree = std::max<std::size_t>(degree, static_cast<std::size_t>(o.minimal_poly.degree()));
        double eta = predicted_exponent(gc.c, degree, n, eps, L);
        r.summary["predicted_exponent"] = num(eta);
        r.lines.push_back("predicted exponent = " + fixed(eta, 6));
    }
    return r;
}

Report cmd_unit_search(const json& cfg, const Context& ctx) {
    NumberField k = parse_field(cfg);
    ElementFamily fam = parse_element_family(cfg, k, "units");
    auto inst = make_instances(k, fam);
    auto sols = parallel_map(inst.size(), ctx.threads, [&](std::size_t i) { return min_coeff_height(inst[i]); });
    Report r;
    bool with_j = fam.params.front().j.has_value();
    r.table.columns = param_columns(fam.params);
    for (const char* c : {"alpha", "h_min", "exact", "a"}) r.table.columns.push_back(c);
    for (std::size_t i = 0; i < sols.size(); ++i) {
        auto row = param_cells(fam.params[i], with_j);
        row.push_back(num(inst[i].alpha()));
        row.push_back(num(sols[i].h));
        row.push_back(sols[i].exact);
        row.push_back(tuple_str(sols[i].a));
        r.table.rows.push_back(std::move(row));
        r.lines.push_back(label(fam.params[i]) + "  h_min=" + fixed(sols[i].h, 6));
    }
    return r;
}

Report cmd_unit_construct(const json& cfg, const Context& ctx) {
    NumberField k = parse_field(cfg);
    ElementFamily fam = parse_element_family(cfg, k, "units");
    auto inst = make_instances(k, fam);
    auto res = parallel_map(inst.size(), ctx.threads, [&](std::size_t i) { return dirichlet_construct(inst[i]); });
    Report r;
    bool with_j = fam.params.front().j.has_value();
    r.table.columns = param_columns(fam.params);
    for (const char* c : {"alpha", "h", "R", "final_h", "threshold_h", "c0", "exact", "a"}) r.table.columns.push_back(c);
    double R_max = 0;
    for (std::size_t i = 0; i < res.size(); ++i) {
        const auto& c = res[i];
        auto row = param_cells(fam.params[i], with_j);
        row.push_back(num(inst[i].alpha()));
        row.push_back(num(c.solution.h));
        row.push_back(num(c.R));
        row.push_back(num(c.final_h));
        row.push_back(num(c.threshold_h));
        row.push_back(num(c.c0));
        row.push_back(c.solution.exact);
        row.push_back(tuple_str(c.solution.a));
        r.table.rows.push_back(std::move(row));
        R_max = std::max(R_max, c.R);
    }
    r.summary["R_max"] = num(R_max);
    r.lines.push_back("max h/alpha = " + fixed(R_max, 6));
    return r;
}

Report cmd_verify_bounds(const json& cfg, const Context&) {
    NumberField k = parse_field(cfg);
    ElementFamily fam = parse_element_family(cfg, k, "units");
    auto inst = make_instances(k, fam);
    double eps = cfg.contains("epsilon") ? as_double(cfg["epsilon"], "config.epsilon") : 0.1;
    BoundsReport b = verify_bounds(inst, eps);
    Report r;
    bool with_j = fam.params.front().j.has_value();
    r.table.columns = param_columns(fam.params);
    for (const char* c : {"alpha", "h_min", "h_construct"}) r.table.columns.push_back(c);
    for (std::size_t i = 0; i < b.table.size(); ++i) {
        auto row = param_cells(fam.params[i], with_j);
        row.push_back(num(b.table[i].alpha));
        row.push_back(num(b.table[i].h_min));
        row.push_back(num(b.table[i].h_construct));
        r.table.rows.push_back(std::move(row));
    }
    r.summary["epsilon"] = eps;
    r.summary["r_hat"] = num(b.r_hat);
    r.summary["R_hat"] = num(b.R_hat);
    r.lines.push_back("r_hat = " + fixed(b.r_hat, 6));
    r.lines.push_back("R_hat = " + fixed(b.R_hat, 6));
    return r;
}

Report cmd_height(const json& cfg, const Context&) {
    NumberField k = parse_field(cfg);
    ElementFamily fam;
    if (cfg.contains("elements")) {
        const json& e = cfg["elements"];
        if (!e.is_array() || e.empty()) throw ConfigError("config.elements: expected a nonempty list of elements");
        std::vector<FieldElement> t;
        for (std::size_t i = 0; i < e.size(); ++i) t.push_back(parse_element(e[i], k, idx("config.elements", i)));
        fam.params.push_back({std::nullopt, 0});
        fam.tuples.push_back(std::move(t));
    } else {
        fam = parse_element_family(cfg, k, "units");
    }
    Report r;
    bool with_j = fam.params.front().j.has_value();
    r.table.columns = param_columns(fam.params);
    for (const char* c : {"tuple", "height", "ideal_norm"}) r.table.columns.push_back(c);
    for (std::size_t i = 0; i < fam.tuples.size(); ++i) {
        const auto& t = fam.tuples[i];
        double h = height(t);
        auto row = param_cells(fam.params[i], with_j);
        row.push_back(tuple_str(t));
        row.push_back(num(h));
        row.push_back(ideal_norm(t).get_str());
        r.table.rows.push_back(std::move(row));
        r.lines.push_back("H" + tuple_str(t) + " = " + fixed(h, 4));
    }
    return r;
}

using Command = Report (*)(const json&, const Context&);

const std::vector<std::pair<std::string, std::pair<Command, const char*>>>& commands() {
    static const std::vector<std::pair<std::string, std::pair<Command, const char*>>> table = {
        {"check-action", {cmd_check_action, "validate the action and test total ergodicity"}},
        {"orbits", {cmd_orbits, "eigencharacter orbits of the action"}},
        {"growth-constant", {cmd_growth_constant, "exponential growth constant of the characters"}},
        {"dio", {cmd_dio, "shortest kernel-lattice vector D for each tuple"}},
        {"correlate", {cmd_correlate, "exact n-point correlations of band-limited functions"}},
        {"rate-fit", {cmd_rate_fit, "fit decay rates of D and of the mixing error"}},
        {"unit-search", {cmd_unit_search, "minimal-height solutions of the unit equation"}},
        {"unit-construct", {cmd_unit_construct, "pigeonhole construction of small solutions"}},
        {"verify-bounds", {cmd_verify_bounds, "compare minimal and constructed heights with alpha"}},
        {"height", {cmd_height, "projective heights of element tuples"}},
    };
    return table;
}

// ---------------------------------------------------------------- files

void write_file(const fs::path& p, const std::string& data) {
    fs::path tmp = p;
    tmp += ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw std::runtime_error("cannot write " + tmp.string());
        f << data;
        if (!f) throw std::runtime_error("cannot write " + tmp.string());
    }
    fs::rename(tmp, p);
}

json table_rows_json(const Table& t) {
    json rows = json::array();
    for (const auto& row : t.rows) {
        json o = json::object();
        for (std::size_t c = 0; c < t.columns.size(); ++c) o[t.columns[c]] = row[c];
        rows.push_back(std::move(o));
    }
    return rows;
}

std::size_t thread_cap() {
    std::size_t hw = std::max(1u, std::thread::hardware_concurrency());
    const char* env = std::getenv("NILMIX_THREADS");
    if (!env) return hw;
    char* end = nullptr;
    long v = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || v < 1) throw ConfigError("NILMIX_THREADS must be a positive integer");
    return static_cast<std::size_t>(v);
}

json load_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot read config file " + path);
    json j;
    try {
        j = json::parse(f);
    } catch (const json::parse_error& e) {
        throw ConfigError(path + ": " + e.what());
    }
    if (!j.is_object()) throw ConfigError(path + ": top level must be an object");
    // a previous report: re-run its resolved config
    if (j.contains("config") && j.contains("version") && j["config"].is_object()) return j["config"];
    return j;
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Toral action mixing and unit equation experiments", "nilmix"};
    app.set_version_flag("--version", std::string(version()));
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path;
    std::string out_dir = "./out";
    std::string format = "both";
    std::uint64_t seed = 0;
    bool quiet = false;
    auto* config_opt = app.add_option("--config", config_path, "experiment config (JSON)");
    app.add_option("--out", out_dir, "output directory")->capture_default_str();
    app.add_option("--format", format, "csv, json or both")
        ->check(CLI::IsMember({"csv", "json", "both"}))
        ->capture_default_str();
    auto* seed_opt = app.add_option("--seed", seed, "seed for all randomized choices")->capture_default_str();
    app.add_flag("--quiet", quiet, "suppress the stdout summary");

    for (const auto& [name, cmd] : commands()) app.add_subcommand(name, cmd.second);

    std::vector<std::string> rev(args.rbegin(), args.rend());
    try {
        app.parse(rev);
        if (config_opt->count() == 0) throw CLI::RequiredError("--config");
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForVersion&) {
        out << version() << '\n';
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n' << app.help();
        return 2;
    }

    const CLI::App* sub = app.get_subcommands().front();
    const std::string name = sub->get_name();
    Command cmd = nullptr;
    for (const auto& [n, c] : commands())
        if (n == name) cmd = c.first;

    const fs::path dir(out_dir);
    json status = json::object();
    status["command"] = name;
    auto fail = [&](int code, const std::string& kind, const std::string& message,
                    const std::optional<std::vector<long>>& witness) {
        err << "error: " << message << '\n';
        status["STATUS"] = "FAILED";
        status["exit_code"] = code;
        status["error"] = kind;
        status["message"] = message;
        if (witness) {
            status["witness"] = *witness;
            err << "witness: z = " << vec_str(*witness) << '\n';
        }
        try {
            fs::create_directories(dir);
            write_file(dir / (name + ".status.json"), status.dump(2) + "\n");
        } catch (const std::exception& e) {
            err << "error: " << e.what() << '\n';
        }
        return code;
    };

    try {
        json cfg = load_config(config_path);
        Context ctx;
        if (seed_opt->count() > 0) {
            ctx.seed = seed;
        } else if (cfg.contains("seed")) {
            long s = as_long(cfg["seed"], "config.seed");
            if (s < 0) throw ConfigError("config.seed: must be nonnegative");
            ctx.seed = static_cast<std::uint64_t>(s);
        }
        cfg["seed"] = ctx.seed;
        ctx.threads = thread_cap();

        auto t0 = std::chrono::steady_clock::now();
        Report report = cmd(cfg, ctx);
        double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

        fs::create_directories(dir);
        if (format != "json") write_file(dir / (name + ".csv"), render_csv(report.table));
        if (format != "csv") {
            json j = json::object();
            j["command"] = name;
            j["version"] = version();
            j["seed"] = ctx.seed;
            j["config"] = cfg;
            j["columns"] = report.table.columns;
            j["rows"] = table_rows_json(report.table);
            j["summary"] = report.summary;
            j["timing_seconds"] = seconds;
            write_file(dir / (name + ".json"), j.dump(2) + "\n");
        }
        status["STATUS"] = "OK";
        status["exit_code"] = 0;
        write_file(dir / (name + ".status.json"), status.dump(2) + "\n");
        if (!quiet) {
            out << render_csv(report.table);
            for (const auto& l : report.lines) out << l << '\n';
        }
        return 0;
    } catch (const NotTotallyErgodic& e) {
        return fail(3, "NotTotallyErgodic", e.what(), e.witness());
    } catch (const PreconditionFailure& e) {
        return fail(3, "PreconditionFailure", e.what(), std::nullopt);
    } catch (const InvalidInput& e) {
        return fail(2, "InvalidInput", e.what(), std::nullopt);
    } catch (const std::exception& e) {
        return fail(1, "Error", e.what(), std::nullopt);
    }
}

} // namespace nilmix::cli
