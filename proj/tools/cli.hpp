#pragma once

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <stablemult/acceptance.hpp>
#include <stablemult/harmonic_extension.hpp>
#include <stablemult/multiplier.hpp>
#include <stablemult/spectral.hpp>
#include <stablemult/stable_density.hpp>
#include <stablemult/stable_mc.hpp>

namespace stablemult::cli {

inline constexpr const char* kVersion = "1.0.0";

// bad flag value or combination; exit code 2
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------- config keys

struct KeyInfo {
    const char* name;
    const char* fallback;
    const char* help;
};

inline const std::vector<KeyInfo>& keys() {
    static const std::vector<KeyInfo> k{
        {"alpha", "1", "stability index in (0, 2)"},
        {"d", "1", "dimension"},
        {"s", "1", "time s > 0"},
        {"x", "0", "point, comma separated coordinates"},
        {"x-max", "", "sweep the first coordinate of x up to this value"},
        {"count", "1", "number of sweep points"},
        {"j", "1", "coordinate index (1-based)"},
        {"k", "1", "derivative order 1 or 2"},
        {"beta", "0.5", "subordinator index in (0, 1)"},
        {"t", "1", "extension height"},
        {"method", "fourier", "density route: fourier | subordination"},
        {"rel-tol", "1e-10", "density relative tolerance"},
        {"n-nodes", "4096", "density quadrature panel budget"},
        {"cutoff", "64", "real-axis half-periods before the contour rotates"},
        {"n", "1024", "grid size (power of two)"},
        {"length", "64", "grid period"},
        {"origin", "auto", "grid origin (auto: -length/2)"},
        {"field", "bump", "test field: bump | gaussian | one"},
        {"center", "0", "field center"},
        {"width", "4", "bump half-width or gaussian sigma"},
        {"g-center", "1", "second field center (pairing)"},
        {"g-width", "3", "second field width (pairing)"},
        {"r", "exp", "profile r(t): exp | one | table"},
        {"r-t", "", "tabulated profile t values, comma separated"},
        {"r-values", "", "tabulated profile values, comma separated"},
        {"h-policy", "full", "h-range: full | truncated"},
        {"singular-cell", "taylor", "small-|h| cell: taylor | omit"},
        {"t-min", "auto", "t-quadrature lower end"},
        {"t-max", "auto", "t-quadrature upper end"},
        {"n-t", "auto", "t-quadrature nodes"},
        {"xi-min", "0.1", "symbol table start"},
        {"xi-max", "10", "symbol table end"},
        {"a", "1", "starting height"},
        {"dt", "0.001", "time step"},
        {"max-steps", "auto", "step budget; horizon is max-steps * dt"},
        {"step-ratio", "4", "steps grow to (z / step-ratio)^2 away from 0"},
        {"n-paths", "10000", "number of paths"},
        {"p", "2", "exponent p > 1"},
        {"f", "exp", "green test function: exp | indicator | zero"},
        {"f-cut", "1", "indicator support [0, f-cut]"},
        {"jumps", "0", "simulate: 1 prints the jump table"},
        {"widths", "1,2,4", "lp-probe bump half-widths"},
        {"shifts", "0,157", "lp-probe translations in grid cells"},
        {"suite", "fast", "verify suite: fast | full"},
        {"seed", "42", "random seed"},
        {"format", "csv", "output format: csv | json"},
    };
    return k;
}

inline const std::map<std::string, std::vector<std::string>>& subcommand_keys() {
    static const std::vector<std::string> density{"alpha", "d", "s", "x", "x-max", "count", "method", "rel-tol",
                                                  "n-nodes", "cutoff"};
    static const std::vector<std::string> grid{"alpha", "n", "length", "origin", "field", "center", "width"};
    static const std::vector<std::string> quad{"r", "r-t", "r-values", "h-policy", "singular-cell", "t-min", "t-max", "n-t"};
    static const std::vector<std::string> path{"alpha", "d", "x", "a", "dt", "max-steps", "step-ratio"};
    auto cat = [](std::initializer_list<std::vector<std::string>> parts) {
        std::vector<std::string> v;
        for (const auto& p : parts) v.insert(v.end(), p.begin(), p.end());
        return v;
    };
    static const std::map<std::string, std::vector<std::string>> m{
        {"density", density},
        {"derivative", cat({density, {"j", "k"}})},
        {"subordinator", {"beta", "s", "x-max", "count"}},
        {"kernel", {"alpha", "d", "t", "x", "x-max", "count", "rel-tol", "n-nodes", "cutoff"}},
        {"extend", cat({grid, {"t"}})},
        {"apply-t", cat({grid, quad})},
        {"symbol", {"alpha", "r", "r-t", "r-values", "xi-min", "xi-max", "count"}},
        {"symbol-truncated", cat({{"alpha", "n", "length", "origin", "xi-min", "xi-max", "count"}, quad})},
        {"gfunction", cat({grid, quad})},
        {"pairing", cat({grid, quad, {"g-center", "g-width"}})},
        {"simulate", cat({path, {"jumps"}})},
        {"green", cat({path, {"n-paths", "f", "f-cut"}})},
        {"harmonic", cat({path, {"n-paths", "n", "length", "origin", "field", "center", "width"}})},
        {"jumps", cat({path, {"n-paths", "p", "n", "length", "origin", "field", "center", "width"}})},
        {"lp-probe", cat({{"alpha", "n", "length", "origin", "p", "widths", "shifts"}, quad})},
        {"verify", {"suite"}},
    };
    return m;
}

using Config = std::map<std::string, std::string>;

// Every key of the subcommand, resolved as defaults < config < flags.
struct Resolved {
    std::string sub;
    Config values;

    const std::string& raw(const std::string& k) const {
        auto it = values.find(k);
        if (it == values.end()) throw UsageError("internal: unknown key " + k);
        return it->second;
    }
    double num(const std::string& k) const {
        const std::string& v = raw(k);
        try {
            std::size_t pos = 0;
            const double x = std::stod(v, &pos);
            if (pos != v.size()) throw std::invalid_argument(v);
            return x;
        } catch (const std::exception&) {
            throw UsageError("--" + k + " expects a number, got '" + v + "'");
        }
    }
    long long integer(const std::string& k) const {
        const std::string& v = raw(k);
        try {
            std::size_t pos = 0;
            const long long i = std::stoll(v, &pos);
            if (pos == v.size()) return i;
        } catch (const std::exception&) {
        }
        const double x = num(k);  // accepts forms such as 1e5
        if (x != std::floor(x) || std::abs(x) > 9.2e18) throw UsageError("--" + k + " expects an integer, got '" + raw(k) + "'");
        return static_cast<long long>(x);
    }
    bool is_auto(const std::string& k) const { return raw(k) == "auto" || raw(k).empty(); }
    std::vector<double> list(const std::string& k) const {
        std::vector<double> out;
        std::stringstream ss(raw(k));
        std::string item;
        while (std::getline(ss, item, ',')) {
            try {
                std::size_t pos = 0;
                out.push_back(std::stod(item, &pos));
                if (pos != item.size()) throw std::invalid_argument(item);
            } catch (const std::exception&) {
                throw UsageError("--" + k + " expects comma separated numbers, got '" + raw(k) + "'");
            }
        }
        return out;
    }
    std::string choice(const std::string& k, std::initializer_list<const char*> allowed) const {
        const std::string& v = raw(k);
        std::string opts;
        for (const char* a : allowed) {
            if (v == a) return v;
            opts += std::string(opts.empty() ? "" : " | ") + a;
        }
        throw UsageError("--" + k + " must be one of " + opts + ", got '" + v + "'");
    }
};

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

inline std::string json_scalar(const nlohmann::json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number_integer()) return std::to_string(v.get<long long>());
    if (v.is_number_unsigned()) return std::to_string(v.get<unsigned long long>());
    if (v.is_number_float()) {
        char b[40];
        std::snprintf(b, sizeof b, "%.17g", v.get<double>());
        return b;
    }
    if (v.is_boolean()) return v.get<bool>() ? "1" : "0";
    throw UsageError("config values must be scalars");
}

// key=value lines (# comments) or a JSON object; an emitted JSON result is
// accepted too, its meta.config block is replayed.
inline Config read_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read config file '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    const std::string text = buf.str();
    Config c;
    if (trim(text).rfind('{', 0) == 0) {
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(text);
        } catch (const std::exception& e) {
            throw UsageError("config file '" + path + "' is not valid JSON: " + e.what());
        }
        const nlohmann::json* src = &j;
        if (j.contains("meta") && j["meta"].contains("config")) src = &j["meta"]["config"];
        for (auto it = src->begin(); it != src->end(); ++it) c[it.key()] = json_scalar(it.value());
        return c;
    }
    std::stringstream ss(text);
    std::string line;
    int no = 0;
    while (std::getline(ss, line)) {
        ++no;
        line = trim(line);
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw UsageError("config file '" + path + "' line " + std::to_string(no) + ": expected key=value");
        c[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    return c;
}

// ---------------------------------------------------------------- output

using Cell = std::variant<double, long long, std::string>;

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;
};

inline std::string fmt9(double x) {
    char b[40];
    std::snprintf(b, sizeof b, "%.9g", x);
    return b;
}

inline std::string csv_field(const Cell& c) {
    if (const double* d = std::get_if<double>(&c)) return fmt9(*d);
    if (const long long* i = std::get_if<long long>(&c)) return std::to_string(*i);
    const std::string& s = std::get<std::string>(c);
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char ch : s) {
        if (ch == '"') q += '"';
        q += ch;
    }
    return q + "\"";
}

inline std::string to_csv(const Table& t) {
    std::string s;
    for (std::size_t i = 0; i < t.columns.size(); ++i) s += (i ? "," : "") + csv_field(t.columns[i]);
    s += "\n";
    for (const auto& row : t.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) s += (i ? "," : "") + csv_field(row[i]);
        s += "\n";
    }
    return s;
}

inline nlohmann::json json_cell(const Cell& c) {
    if (const double* d = std::get_if<double>(&c)) {
        if (!std::isfinite(*d)) return fmt9(*d);
        return std::stod(fmt9(*d));  // 9 significant digits, printed shortest
    }
    if (const long long* i = std::get_if<long long>(&c)) return *i;
    return std::get<std::string>(c);
}

inline nlohmann::json meta_json(const Resolved& r) {
    nlohmann::json cfg = nlohmann::json::object();
    for (const auto& k : subcommand_keys().at(r.sub)) cfg[k] = r.raw(k);
    cfg["seed"] = r.raw("seed");
    cfg["format"] = r.raw("format");
    return nlohmann::json{{"subcommand", r.sub}, {"config", cfg}, {"seed", r.raw("seed")}, {"version", kVersion}};
}

inline std::string to_json(const Table& t, const Resolved& r) {
    nlohmann::json data = nlohmann::json::array();
    for (const auto& row : t.rows) {
        nlohmann::json o = nlohmann::json::object();
        for (std::size_t i = 0; i < row.size(); ++i) o[t.columns[i]] = json_cell(row[i]);
        data.push_back(std::move(o));
    }
    nlohmann::json doc{{"meta", meta_json(r)}, {"data", std::move(data)}};
    return doc.dump(2) + "\n";
}

inline void emit(const Table& t, const Resolved& r, const std::string& path, std::ostream& out) {
    const std::string text = r.raw("format") == "json" ? to_json(t, r) : to_csv(t);
    if (path.empty()) {
        out << text;
        return;
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open output file '" + path + "'");
    f << text;
    if (!f) throw IoError("write failed for output file '" + path + "'");
}

// ---------------------------------------------------------------- builders

inline StableParams params_of(const Resolved& r, int max_d = 3) {
    StableParams p{r.num("alpha"), static_cast<int>(r.integer("d"))};
    p.validate(max_d);
    return p;
}

inline StableParams params_1d(const Resolved& r) {
    StableParams p{r.num("alpha"), 1};
    p.validate();
    return p;
}

inline DensityEvalSpec spec_of(const Resolved& r) {
    DensityEvalSpec s;
    s.method = r.choice("method", {"fourier", "subordination"}) == "fourier" ? DensityMethod::fourier_inversion
                                                                              : DensityMethod::subordination;
    s.rel_tol = r.num("rel-tol");
    s.n_nodes = static_cast<int>(r.integer("n-nodes"));
    s.cutoff = r.num("cutoff");
    s.validate();
    return s;
}

inline DensityEvalSpec kernel_spec_of(const Resolved& r) {
    DensityEvalSpec s = kernel_spec();
    s.rel_tol = r.num("rel-tol");
    s.n_nodes = static_cast<int>(r.integer("n-nodes"));
    s.cutoff = r.num("cutoff");
    s.validate();
    return s;
}

inline GridSpec grid_of(const Resolved& r) {
    GridSpec g;
    g.n = static_cast<int>(r.integer("n"));
    g.length = r.num("length");
    g.origin = r.is_auto("origin") ? -0.5 * g.length : r.num("origin");
    g.validate();
    return g;
}

inline SampledField field_of(const GridSpec& g, const Resolved& r, const std::string& center_key = "center",
                             const std::string& width_key = "width") {
    const std::string kind = r.choice("field", {"bump", "gaussian", "one"});
    if (kind == "one") return SampledField(g, 1.0);
    const double c = r.num(center_key), w = r.num(width_key);
    return kind == "bump" ? smooth_bump(g, c, w) : gaussian_bump(g, c, w);
}

inline MultiplierProfile profile_of(const Resolved& r) {
    const std::string kind = r.choice("r", {"exp", "one", "table"});
    if (kind == "exp") return MultiplierProfile::exp_decay();
    if (kind == "one") return MultiplierProfile::one();
    return MultiplierProfile::tabulated(r.list("r-t"), r.list("r-values"));
}

inline TQuadSpec quad_of(const GridSpec& g, const StableParams& p, const MultiplierProfile& prof, const Resolved& r) {
    const HPolicy pol = r.choice("h-policy", {"full", "truncated"}) == "full" ? HPolicy::full : HPolicy::truncated;
    const SingularCell cell =
        r.choice("singular-cell", {"taylor", "omit"}) == "taylor" ? SingularCell::taylor_correct : SingularCell::omit;
    TQuadSpec q = default_quad(g, p, prof, pol, cell);
    if (!r.is_auto("t-min")) q.t_min = r.num("t-min");
    if (!r.is_auto("t-max")) q.t_max = r.num("t-max");
    if (!r.is_auto("n-t")) q.n_t = static_cast<int>(r.integer("n-t"));
    q.validate();
    return q;
}

inline Point point_of(const Resolved& r, int d) {
    Point x = r.list("x");
    if (static_cast<int>(x.size()) != d)
        throw UsageError("--x needs " + std::to_string(d) + " comma separated coordinates");
    return x;
}

// x itself, or count points with the first coordinate running to x-max
inline std::vector<Point> sweep_of(const Resolved& r, int d) {
    const Point x0 = point_of(r, d);
    const long long n = r.integer("count");
    if (n < 1) throw UsageError("--count must be at least 1");
    if (r.is_auto("x-max") || n == 1) return std::vector<Point>(static_cast<std::size_t>(n), x0);
    const double hi = r.num("x-max");
    std::vector<Point> v;
    for (long long i = 0; i < n; ++i) {
        Point x = x0;
        x[0] = x0[0] + (hi - x0[0]) * static_cast<double>(i) / static_cast<double>(n - 1);
        v.push_back(std::move(x));
    }
    return v;
}

inline std::vector<double> xi_sweep(const Resolved& r) {
    const double lo = r.num("xi-min"), hi = r.num("xi-max");
    const long long n = r.integer("count");
    if (n < 1) throw UsageError("--count must be at least 1");
    std::vector<double> v;
    for (long long i = 0; i < n; ++i) v.push_back(n == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / (n - 1));
    return v;
}

inline PathConfig path_of(const Resolved& r, const StableParams& p) {
    PathConfig c;
    c.params = p;
    c.start_x = point_of(r, p.d);
    c.a = r.num("a");
    c.dt = r.num("dt");
    require(c.a > 0.0 && c.dt > 0.0, "start height a and time step dt must be positive");
    c.max_steps = r.is_auto("max-steps") ? PathConfig::default_max_steps(c.a, c.dt) : r.integer("max-steps");
    c.step_ratio = r.num("step-ratio");
    const long long seed = r.integer("seed");
    c.seed = static_cast<std::uint64_t>(seed);
    c.validate();
    return c;
}

inline long long paths_of(const Resolved& r) {
    const long long n = r.integer("n-paths");
    if (n < 1) throw UsageError("--n-paths must be at least 1");
    return n;
}

inline void add_point_columns(Table& t, int d) {
    if (d == 1) {
        t.columns.push_back("x");
        return;
    }
    for (int i = 1; i <= d; ++i) t.columns.push_back("x" + std::to_string(i));
}

inline void push_point(std::vector<Cell>& row, const Point& x) {
    for (double v : x) row.push_back(v);
}

inline Table grid_table(const SampledField& f, const std::vector<std::pair<std::string, const SampledField*>>& cols) {
    Table t;
    t.columns = {"x"};
    for (const auto& c : cols) t.columns.push_back(c.first);
    for (int i = 0; i < f.grid.n; ++i) {
        std::vector<Cell> row{f.grid.x(i)};
        for (const auto& c : cols) row.push_back(c.second->values[i]);
        t.rows.push_back(std::move(row));
    }
    return t;
}

// ---------------------------------------------------------------- commands

inline Table cmd_density(const Resolved& r) {
    const StableParams p = params_of(r);
    const DensityEvalSpec spec = spec_of(r);
    const double s = r.num("s");
    require(s > 0.0, "time s must be positive");
    const auto pts = sweep_of(r, p.d);
    Table t;
    t.columns = {"s"};
    add_point_columns(t, p.d);
    t.columns.push_back("density");
    for (const auto& x : pts) {
        std::vector<Cell> row{s};
        push_point(row, x);
        row.push_back(density(p, s, x, spec));
        t.rows.push_back(std::move(row));
    }
    return t;
}

inline Table cmd_derivative(const Resolved& r) {
    const StableParams p = params_of(r);
    const DensityEvalSpec spec = spec_of(r);
    const double s = r.num("s");
    const int j = static_cast<int>(r.integer("j")), k = static_cast<int>(r.integer("k"));
    require(k == 1 || k == 2, "derivative order k must be 1 or 2");
    require(j >= 1 && j <= p.d, "coordinate index j must lie in [1, d]");
    require(s > 0.0, "time s must be positive");
    Table t;
    t.columns = {"s"};
    add_point_columns(t, p.d);
    t.columns.insert(t.columns.end(), {"j", "k", "derivative"});
    for (const auto& x : sweep_of(r, p.d)) {
        std::vector<Cell> row{s};
        push_point(row, x);
        row.push_back(static_cast<long long>(j));
        row.push_back(static_cast<long long>(k));
        row.push_back(density_partial(p, s, x, j, k, spec));
        t.rows.push_back(std::move(row));
    }
    return t;
}

inline Table cmd_subordinator(const Resolved& r) {
    const double beta = r.num("beta"), s0 = r.num("s");
    require(beta > 0.0 && beta < 1.0, "beta must lie in (0, 1)");
    require(s0 > 0.0, "s must be positive");
    const long long n = r.integer("count");
    if (n < 1) throw UsageError("--count must be at least 1");
    const double s1 = r.is_auto("x-max") ? s0 : r.num("x-max");
    require(s1 > 0.0, "sweep end must be positive");
    Table t;
    t.columns = {"beta", "s", "density", "cdf"};
    for (long long i = 0; i < n; ++i) {
        const double s = n == 1 ? s0 : s0 + (s1 - s0) * static_cast<double>(i) / (n - 1);
        t.rows.push_back({beta, s, subordinator_density(beta, s), subordinator_cdf(beta, s)});
    }
    return t;
}

inline Table cmd_kernel(const Resolved& r) {
    const StableParams p = params_of(r);
    const DensityEvalSpec spec = kernel_spec_of(r);
    const double tt = r.num("t");
    require(tt > 0.0, "extension height t must be positive");
    Table t;
    t.columns = {"t"};
    add_point_columns(t, p.d);
    t.columns.push_back("q_t");
    for (const auto& x : sweep_of(r, p.d)) {
        std::vector<Cell> row{tt};
        push_point(row, x);
        row.push_back(qt_kernel(p, tt, x, spec));
        t.rows.push_back(std::move(row));
    }
    return t;
}

inline Table cmd_extend(const Resolved& r) {
    const StableParams p = params_1d(r);
    const GridSpec g = grid_of(r);
    const SampledField f = field_of(g, r);
    const SampledField u = extend(f, p, r.num("t"));
    return grid_table(f, {{"f", &f}, {"extended", &u}});
}

inline Table cmd_apply_t(const Resolved& r) {
    const double a = r.num("alpha");
    require(a > 0.0 && a < 1.0, "operator T is only defined for alpha in (0, 1), got alpha = " + r.raw("alpha"));
    const StableParams p = params_1d(r);
    const GridSpec g = grid_of(r);
    const MultiplierProfile prof = profile_of(r);
    const TQuadSpec q = quad_of(g, p, prof, r);
    const SampledField f = field_of(g, r);
    const SampledField Tf = apply_T(f, prof, p, q);
    return grid_table(f, {{"f", &f}, {"Tf", &Tf}});
}

inline Table cmd_symbol(const Resolved& r) {
    const StableParams p = params_1d(r);
    const MultiplierProfile prof = profile_of(r);
    Table t;
    t.columns = {"xi", "m"};
    for (double xi : xi_sweep(r)) t.rows.push_back({xi, symbol_m(xi, prof, p)});
    return t;
}

inline Table cmd_symbol_truncated(const Resolved& r) {
    const StableParams p = params_1d(r);
    const GridSpec g = grid_of(r);
    const MultiplierProfile prof = profile_of(r);
    const TQuadSpec q = quad_of(g, p, prof, r);
    Table t;
    t.columns = {"xi", "m"};
    for (double xi : xi_sweep(r)) t.rows.push_back({xi, symbol_m_truncated(xi, prof, p, q)});
    return t;
}

inline Table cmd_gfunction(const Resolved& r) {
    const StableParams p = params_1d(r);
    const GridSpec g = grid_of(r);
    const TQuadSpec q = quad_of(g, p, profile_of(r), r);
    const SampledField f = field_of(g, r);
    const SampledField G = g_function(f, p, q);
    return grid_table(f, {{"f", &f}, {"G", &G}});
}

inline Table cmd_pairing(const Resolved& r) {
    const double a = r.num("alpha");
    require(a > 0.0 && a < 1.0, "operator T is only defined for alpha in (0, 1), got alpha = " + r.raw("alpha"));
    const StableParams p = params_1d(r);
    const GridSpec g = grid_of(r);
    const TQuadSpec q = quad_of(g, p, MultiplierProfile::one(), r);
    const SampledField f = field_of(g, r), h = field_of(g, r, "g-center", "g-width");
    const Pairing pr = pairing_check(f, h, p, q);
    Table t;
    t.columns = {"lhs", "rhs", "rel_gap"};
    t.rows.push_back({pr.lhs, pr.rhs, std::abs(pr.lhs / pr.rhs - 1.0)});
    return t;
}

inline Table cmd_simulate(const Resolved& r) {
    const StableParams p = params_of(r);
    const PathConfig c = path_of(r, p);
    const ExitRecord rec = simulate_until_exit(c);
    Table t;
    if (r.integer("jumps") != 0) {
        t.columns = {"step"};
        for (int i = 1; i <= p.d; ++i) t.columns.push_back(p.d == 1 ? "delta_y" : "delta_y" + std::to_string(i));
        t.columns.insert(t.columns.end(), {"z", "class"});
        for (const auto& j : rec.jumps) {
            std::vector<Cell> row{j.step};
            push_point(row, j.delta_y);
            row.push_back(j.z_value);
            row.push_back(std::string(j.classification == JumpClass::small ? "small" : "large"));
            t.rows.push_back(std::move(row));
        }
        return t;
    }
    t.columns = {"exit_step", "exit_time"};
    for (int i = 1; i <= p.d; ++i) t.columns.push_back(p.d == 1 ? "exit_y" : "exit_y" + std::to_string(i));
    t.columns.insert(t.columns.end(), {"n_jumps", "u_qv", "m_qv"});
    std::vector<Cell> row{rec.exit_step, rec.exit_time};
    push_point(row, rec.exit_position);
    row.push_back(static_cast<long long>(rec.jumps.size()));
    row.push_back(rec.u_quadratic_variation);
    row.push_back(rec.m_quadratic_variation);
    t.rows.push_back(std::move(row));
    return t;
}

inline Table cmd_green(const Resolved& r) {
    const StableParams p = params_of(r);
    const PathConfig c = path_of(r, p);
    const std::string kind = r.choice("f", {"exp", "indicator", "zero"});
    const double cut = r.num("f-cut");
    require(cut > 0.0, "f-cut must be positive");
    std::function<double(double)> f;
    std::vector<double> breaks;
    if (kind == "exp") f = [](double s) { return std::exp(-s); };
    if (kind == "indicator") {
        f = [cut](double s) { return s <= cut ? 1.0 : 0.0; };
        breaks.push_back(cut);
    }
    if (kind == "zero") f = [](double) { return 0.0; };
    const MCEstimate e = green_functional(c, f, paths_of(r));
    Table t;
    t.columns = {"mean", "std_error", "n", "excluded", "reference"};
    t.rows.push_back({e.mean, e.std_error, e.n, e.excluded, green_reference(f, c.a, breaks)});
    return t;
}

inline Table cmd_harmonic(const Resolved& r) {
    const StableParams p = params_of(r, 1);
    const PathConfig c = path_of(r, p);
    const GridSpec g = grid_of(r);
    const HarmonicCheck h = harmonic_check(c, field_of(g, r), paths_of(r));
    Table t;
    t.columns = {"mc_mean", "std_error", "n", "excluded", "analytic"};
    t.rows.push_back({h.mc.mean, h.mc.std_error, h.mc.n, h.mc.excluded, h.analytic});
    return t;
}

inline Table cmd_jumps(const Resolved& r) {
    const StableParams p = params_of(r, 1);
    const PathConfig c = path_of(r, p);
    const GridSpec g = grid_of(r);
    const JumpMartingaleReport j = jump_martingale_stats(c, field_of(g, r), paths_of(r), r.num("p"));
    Table t;
    t.columns = {"p", "ratio", "abs_u_p", "std_error", "mean_u_qv", "mean_m_qv", "small_fraction", "n", "excluded",
                 "qv_violations"};
    t.rows.push_back({j.p, j.ratio, j.abs_u_p.mean, j.abs_u_p.std_error, j.mean_u_qv, j.mean_m_qv, j.small_fraction,
                      j.abs_u_p.n, j.excluded, j.qv_violations});
    return t;
}

inline Table cmd_lp_probe(const Resolved& r) {
    const double a = r.num("alpha");
    require(a > 0.0 && a < 1.0, "operator T is only defined for alpha in (0, 1), got alpha = " + r.raw("alpha"));
    const StableParams p = params_1d(r);
    const GridSpec g = grid_of(r);
    const MultiplierProfile prof = profile_of(r);
    const TQuadSpec q = quad_of(g, p, prof, r);
    const double pp = r.num("p");
    std::vector<SampledField> fam;
    std::vector<std::pair<double, long long>> labels;
    for (double w : r.list("widths"))
        for (double s : r.list("shifts")) {
            if (s != std::floor(s)) throw UsageError("--shifts must be whole grid cells");
            fam.push_back(translate(smooth_bump(g, 0.0, w), static_cast<long long>(s)));
            labels.emplace_back(w, static_cast<long long>(s));
        }
    const LpReport rep = lp_probe(fam, prof, p, q, pp);
    Table t;
    t.columns = {"width", "shift", "p", "ratio"};
    for (std::size_t i = 0; i < fam.size(); ++i) t.rows.push_back({labels[i].first, labels[i].second, pp, rep.ratios[i]});
    return t;
}

// ---------------------------------------------------------------- dispatch

inline const std::vector<std::string>& subcommands() {
    static const std::vector<std::string> v{"density", "derivative", "subordinator", "kernel", "extend", "apply-t",
                                            "symbol", "symbol-truncated", "gfunction", "pairing", "simulate", "green",
                                            "harmonic", "jumps", "lp-probe", "verify"};
    return v;
}

inline const char* describe(const std::string& s) {
    static const std::map<std::string, const char*> d{
        {"density", "stable density p(s, x)"},
        {"derivative", "partial derivative of p(s, x) by dimension lifting"},
        {"subordinator", "one-sided beta-stable density and cdf"},
        {"kernel", "harmonic-extension kernel q_t(x)"},
        {"extend", "harmonic extension Q_t f on a periodic grid"},
        {"apply-t", "the multiplier operator T f (alpha < 1)"},
        {"symbol", "closed-form multiplier symbol m(xi)"},
        {"symbol-truncated", "symbol of the truncated operator on a t-range"},
        {"gfunction", "Littlewood-Paley G-function"},
        {"pairing", "<T f, g> against the bilinear integral"},
        {"simulate", "one path of (Y, Z) to the exit time"},
        {"green", "vertical Green functional by Monte Carlo"},
        {"harmonic", "E f(Y_T0) against extend(f, a)"},
        {"jumps", "small-jump martingale statistics"},
        {"lp-probe", "||T f||_p / ||f||_p over a bump family"},
        {"verify", "acceptance suite; nonzero exit if a criterion fails"},
    };
    return d.at(s);
}

inline std::map<std::string, const KeyInfo*> key_index() {
    std::map<std::string, const KeyInfo*> m;
    for (const auto& k : keys()) m[k.name] = &k;
    return m;
}

// Returns the exit code: 0 success, 2 usage or parameter error, 1 numerical
// or I/O failure.
inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Stable-process densities, harmonic extensions, multiplier operators and Monte Carlo checks",
                 "stablemult"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);
    const auto index = key_index();
    std::map<std::string, std::map<std::string, std::string>> given;
    std::map<std::string, std::string> config_path, output_path;
    std::map<std::string, CLI::App*> subs;
    for (const auto& name : subcommands()) {
        CLI::App* sc = app.add_subcommand(name, describe(name));
        subs[name] = sc;
        std::vector<std::string> ks = subcommand_keys().at(name);
        ks.push_back("seed");
        ks.push_back("format");
        for (const auto& k : ks) {
            const KeyInfo* info = index.at(k);
            std::string help = info->help;
            if (*info->fallback) help += std::string(" [") + info->fallback + "]";
            sc->add_option("--" + k, given[name][k], help);
        }
        sc->add_option("--config", config_path[name], "key=value file or an emitted JSON result to replay");
        sc->add_option("-o,--output", output_path[name], "write to this file instead of stdout");
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e, out, err);  // --help, --version
        err << "usage error: " << e.what() << "\nrun with --help for usage\n";
        return 2;
    }

    std::string name;
    for (const auto& [n, sc] : subs)
        if (sc->parsed()) name = n;
    CLI::App* sc = subs.at(name);

    try {
        Resolved r;
        r.sub = name;
        std::vector<std::string> ks = subcommand_keys().at(name);
        ks.push_back("seed");
        ks.push_back("format");
        for (const auto& k : ks) r.values[k] = index.at(k)->fallback;
        if (!config_path[name].empty()) {
            for (const auto& [k, v] : read_config(config_path[name])) {
                if (!r.values.count(k)) throw UsageError("config key '" + k + "' does not apply to " + name);
                r.values[k] = v;
            }
        }
        for (const auto& k : ks)
            if (sc->count("--" + k)) r.values[k] = given[name][k];
        r.choice("format", {"csv", "json"});
        if (r.integer("seed") < 0) throw UsageError("--seed must be nonnegative");

        Table t;
        int code = 0;
        if (name == "verify") {
            const Suite suite = r.choice("suite", {"fast", "full"}) == "full" ? Suite::full : Suite::fast;
            const AcceptanceReport rep =
                run_acceptance(suite, static_cast<std::uint64_t>(r.integer("seed")), all_criteria(),
                               [&](const CriterionResult& c) {
                                   err << "criterion " << c.id << (c.pass ? " PASS" : " FAIL") << " ("
                                       << fmt9(c.seconds) << " s)\n";
                               });
            t.columns = {"criterion", "status", "name", "detail"};
            for (const auto& c : rep.results)
                t.rows.push_back({static_cast<long long>(c.id), std::string(c.pass ? "PASS" : "FAIL"), c.name, c.detail});
            code = rep.all_pass() ? 0 : 1;
        } else {
            static const std::map<std::string, Table (*)(const Resolved&)> fns{
                {"density", cmd_density},     {"derivative", cmd_derivative},
                {"subordinator", cmd_subordinator}, {"kernel", cmd_kernel},
                {"extend", cmd_extend},       {"apply-t", cmd_apply_t},
                {"symbol", cmd_symbol},       {"symbol-truncated", cmd_symbol_truncated},
                {"gfunction", cmd_gfunction}, {"pairing", cmd_pairing},
                {"simulate", cmd_simulate},   {"green", cmd_green},
                {"harmonic", cmd_harmonic},   {"jumps", cmd_jumps},
                {"lp-probe", cmd_lp_probe}};
            t = fns.at(name)(r);
        }
        emit(t, r, output_path[name], out);
        return code;
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const DomainError& e) {
        err << "invalid parameter: " << e.what() << "\n";
        return 2;
    } catch (const ShapeError& e) {
        err << "invalid parameter: " << e.what() << "\n";
        return 2;
    } catch (const NonExitError& e) {
        err << "numerical error: " << e.what() << " (partial record: " << e.partial.exit_step << " steps)\n";
        return 1;
    } catch (const AccuracyError& e) {
        err << "numerical error: " << e.what() << "\n";
        return 1;
    } catch (const SymmetryError& e) {
        err << "numerical error: " << e.what() << "\n";
        return 1;
    } catch (const IoError& e) {
        err << "i/o error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
}

} // namespace stablemult::cli
