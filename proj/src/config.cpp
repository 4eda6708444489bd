#include "dhym/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "dhym/error.hpp"
#include "dhym/field_io.hpp"

namespace dhym {

namespace pt = boost::property_tree;

namespace {

const std::map<std::string, std::set<std::string>>& allowed_keys() {
    static const std::map<std::string, std::set<std::string>> keys = {
        {"grid", {"n", "N"}},
        {"omega", {"matrix", "profile", "profile_matrix", "potential", "file"}},
        {"chi0", {"matrix", "profile", "profile_matrix", "potential", "file"}},
        {"target", {"kind", "value", "file", "solution", "eps0"}},
        {"solver",
         {"method", "tol", "krylov_tol", "max_iters", "krylov_iters", "krylov", "restart", "initial_margin"}},
        {"run", {"seed", "output"}},
        {"check", {"suite", "samples", "n", "sigma", "eps0"}},
    };
    return keys;
}

[[noreturn]] void bad(const std::string& what) { fail(Errc::InvalidConfig, what); }

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& text) {
    std::istringstream is(text);
    double v = 0.0;
    std::string rest;
    if (!(is >> v) || (is >> rest) || !std::isfinite(v)) bad(key + ": expected a number, got '" + text + "'");
    return v;
}

long to_integer(const std::string& key, const std::string& text) {
    std::istringstream is(text);
    long v = 0;
    std::string rest;
    if (!(is >> v) || (is >> rest)) bad(key + ": expected an integer, got '" + text + "'");
    return v;
}

std::vector<double> to_list(const std::string& key, const std::string& text) {
    std::istringstream is(text);
    std::vector<double> out;
    std::string tok;
    while (is >> tok) out.push_back(to_double(key, tok));
    return out;
}

void check_matrix_size(const std::string& key, const std::vector<double>& m, int n) {
    if (m.empty()) return;
    const bool ok = n == 1 ? m.size() == 1 : (m.size() == 2 || m.size() == 4);
    if (!ok) bad(key + ": wrong number of matrix entries for n = " + std::to_string(n));
}

HermitianMatrix matrix_from(const std::vector<double>& m, int n) {
    CMatrix a(n);
    if (m.empty()) return HermitianMatrix::identity(n);
    for (int i = 0; i < n; ++i) a(i, i) = m[i];
    if (n == 2 && m.size() == 4) {
        a(0, 1) = Complex(m[2], m[3]);
        a(1, 0) = Complex(m[2], -m[3]);
    }
    return HermitianMatrix(a);
}

FormSpec read_form(const pt::ptree& sec, const std::string& name, int n, bool default_identity) {
    FormSpec f;
    if (auto v = sec.get_optional<std::string>("matrix")) f.matrix = to_list(name + ".matrix", *v);
    if (auto v = sec.get_optional<std::string>("profile")) f.profile = parse_modes(*v);
    if (auto v = sec.get_optional<std::string>("profile_matrix")) {
        f.profile_matrix = to_list(name + ".profile_matrix", *v);
    }
    if (auto v = sec.get_optional<std::string>("potential")) f.potential = parse_modes(*v);
    if (auto v = sec.get_optional<std::string>("file")) f.file = trim(*v);
    if (f.matrix.empty() && f.file.empty()) f.matrix.assign(n, default_identity ? 1.0 : 0.0);
    check_matrix_size(name + ".matrix", f.matrix, n);
    check_matrix_size(name + ".profile_matrix", f.profile_matrix, n);
    for (const auto& mode : f.profile) {
        if (static_cast<int>(mode.k.size()) != 2 * n) bad(name + ".profile: each mode needs 2n wavenumbers");
    }
    for (const auto& mode : f.potential) {
        if (static_cast<int>(mode.k.size()) != 2 * n) bad(name + ".potential: each mode needs 2n wavenumbers");
    }
    return f;
}

} // namespace

std::vector<FourierMode> parse_modes(const std::string& text) {
    std::vector<FourierMode> out;
    std::istringstream terms(text);
    std::string term;
    while (std::getline(terms, term, ';')) {
        if (trim(term).empty()) continue;
        std::istringstream is(term);
        FourierMode m;
        std::string kind;
        if (!(is >> m.amplitude >> kind) || !std::isfinite(m.amplitude)) bad("mode '" + trim(term) + "' is malformed");
        if (kind == "cos") m.cosine = true;
        else if (kind == "sin") m.cosine = false;
        else bad("mode kind must be cos or sin, got '" + kind + "'");
        std::string tok;
        while (is >> tok) m.k.push_back(static_cast<int>(to_integer("wavenumber", tok)));
        out.push_back(std::move(m));
    }
    return out;
}

ScalarField sample_modes(const std::vector<FourierMode>& modes, const TorusGrid& grid) {
    ScalarField f(grid);
    const int d = grid.real_dims();
    for (const auto& m : modes) {
        if (static_cast<int>(m.k.size()) != d) bad("mode needs " + std::to_string(d) + " wavenumbers");
    }
    // On the grid k . x = 2 pi (k . i mod N) / N, so one table of N values
    // per trig function covers every mode.
    const int N = grid.N();
    std::vector<double> cos_table(N), sin_table(N);
    for (int j = 0; j < N; ++j) {
        cos_table[j] = std::cos(2.0 * M_PI * j / N);
        sin_table[j] = std::sin(2.0 * M_PI * j / N);
    }
    std::vector<int> idx(d, 0);
    for (std::size_t p = 0; p < grid.size(); ++p) {
        double s = 0.0;
        for (const auto& m : modes) {
            long phase = 0;
            for (int a = 0; a < d; ++a) phase += static_cast<long>(m.k[a]) * idx[a];
            const int j = static_cast<int>(((phase % N) + N) % N);
            s += m.amplitude * (m.cosine ? cos_table[j] : sin_table[j]);
        }
        f.values[p] = s;
        for (int a = d - 1; a >= 0; --a) {
            if (++idx[a] < N) break;
            idx[a] = 0;
        }
    }
    return f;
}

HermitianFormField build_form(const FormSpec& spec, const TorusGrid& grid) {
    if (!spec.file.empty()) {
        HermitianFormField f = read_form_field(spec.file);
        if (!(f.grid() == grid)) bad("form file '" + spec.file + "' does not match the configured grid");
        return f;
    }
    const int n = grid.n();
    const HermitianMatrix base = matrix_from(spec.matrix, n);
    HermitianFormField f = HermitianFormField::constant(grid, base);
    if (!spec.profile.empty()) {
        const HermitianMatrix shape = matrix_from(spec.profile_matrix, n);
        const ScalarField profile = sample_modes(spec.profile, grid);
        for (std::size_t p = 0; p < grid.size(); ++p) f.set(p, base + shape * profile.values[p]);
    }
    if (!spec.potential.empty()) f = f + i_ddbar(sample_modes(spec.potential, grid));
    return f;
}

RunConfig parse_config(std::istream& in, const std::vector<std::string>& overrides) {
    pt::ptree tree;
    try {
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        bad(std::string("config syntax: ") + e.what());
    }
    for (const auto& o : overrides) {
        const auto eq = o.find('=');
        const auto dot = o.find('.');
        if (eq == std::string::npos || dot == std::string::npos || dot > eq) {
            bad("override '" + o + "' is not section.key=value");
        }
        tree.put(trim(o.substr(0, eq)), trim(o.substr(eq + 1)));
    }
    for (const auto& [section, body] : tree) {
        const auto it = allowed_keys().find(section);
        if (it == allowed_keys().end()) bad("unknown section [" + section + "]");
        if (!body.data().empty()) bad("key '" + section + "' outside a section");
        for (const auto& [key, value] : body) {
            if (!it->second.count(key)) bad("unknown key '" + key + "' in [" + section + "]");
        }
    }

    RunConfig cfg;
    const pt::ptree empty;
    auto section = [&](const char* name) -> const pt::ptree& {
        const auto child = tree.get_child_optional(name);
        return child ? *child : empty;
    };
    auto get = [](const pt::ptree& s, const char* key) { return s.get_optional<std::string>(key); };

    const auto& grid = section("grid");
    if (auto v = get(grid, "n")) cfg.n = static_cast<int>(to_integer("grid.n", *v));
    if (auto v = get(grid, "N")) cfg.N = static_cast<int>(to_integer("grid.N", *v));
    try {
        TorusGrid check(cfg.n, cfg.N);
    } catch (const Error& e) {
        bad(e.what());
    }

    cfg.omega = read_form(section("omega"), "omega", cfg.n, true);
    cfg.chi0 = read_form(section("chi0"), "chi0", cfg.n, false);

    const auto& target = section("target");
    const std::string kind = trim(get(target, "kind").value_or("hat-theta"));
    if (kind == "constant") cfg.target = TargetKind::Constant;
    else if (kind == "hat-theta") cfg.target = TargetKind::HatTheta;
    else if (kind == "file") cfg.target = TargetKind::File;
    else if (kind == "manufactured") cfg.target = TargetKind::Manufactured;
    else bad("target.kind must be constant, hat-theta, file or manufactured");
    if (auto v = get(target, "value")) {
        if (trim(*v) == "hat-theta") cfg.target = TargetKind::HatTheta;
        else cfg.target_value = to_double("target.value", *v);
    } else if (cfg.target == TargetKind::Constant) {
        bad("target.value is required for a constant target");
    }
    if (auto v = get(target, "file")) cfg.target_file = trim(*v);
    if (cfg.target == TargetKind::File && cfg.target_file.empty()) bad("target.file is required");
    if (auto v = get(target, "solution")) cfg.solution = parse_modes(*v);
    if (cfg.target == TargetKind::Manufactured) {
        for (const auto& m : cfg.solution) {
            if (static_cast<int>(m.k.size()) != 2 * cfg.n) bad("target.solution: each mode needs 2n wavenumbers");
        }
    }
    if (auto v = get(target, "eps0")) cfg.eps0 = to_double("target.eps0", *v);
    if (!(cfg.eps0 > 0.0)) bad("target.eps0 must be positive");

    const auto& solver = section("solver");
    const std::string method = trim(get(solver, "method").value_or("continuity"));
    if (method == "newton") cfg.method = SolveMethod::Newton;
    else if (method == "continuity") cfg.method = SolveMethod::Continuity;
    else bad("solver.method must be newton or continuity");
    if (auto v = get(solver, "tol")) cfg.solver.tol = to_double("solver.tol", *v);
    if (auto v = get(solver, "krylov_tol")) cfg.solver.krylov_tol = to_double("solver.krylov_tol", *v);
    if (auto v = get(solver, "max_iters")) cfg.solver.max_iters = static_cast<int>(to_integer("solver.max_iters", *v));
    if (auto v = get(solver, "krylov_iters")) {
        cfg.solver.krylov_iters = static_cast<int>(to_integer("solver.krylov_iters", *v));
    }
    if (auto v = get(solver, "restart")) cfg.solver.gmres_restart = static_cast<int>(to_integer("solver.restart", *v));
    if (auto v = get(solver, "initial_margin")) {
        cfg.solver.initial_margin = to_double("solver.initial_margin", *v);
    }
    if (auto v = get(solver, "krylov")) {
        const std::string k = trim(*v);
        if (k == "gmres") cfg.solver.krylov = KrylovMethod::Gmres;
        else if (k == "cgnr") cfg.solver.krylov = KrylovMethod::Cgnr;
        else bad("solver.krylov must be gmres or cgnr");
    }
    if (!(cfg.solver.tol > 0.0) || !(cfg.solver.krylov_tol > 0.0) || !(cfg.solver.krylov_tol < 1.0)) {
        bad("solver tolerances must be positive (krylov_tol below 1)");
    }
    if (cfg.solver.max_iters < 1 || cfg.solver.krylov_iters < 1 || cfg.solver.gmres_restart < 1) {
        bad("solver iteration limits must be positive");
    }

    const auto& run = section("run");
    if (auto v = get(run, "seed")) {
        const long s = to_integer("run.seed", *v);
        if (s < 0) bad("run.seed must be non-negative");
        cfg.seed = static_cast<std::uint64_t>(s);
    }
    if (auto v = get(run, "output")) cfg.output = trim(*v);

    const auto& check = section("check");
    if (auto v = get(check, "suite")) cfg.suite = trim(*v);
    if (auto v = get(check, "samples")) cfg.samples = static_cast<int>(to_integer("check.samples", *v));
    if (cfg.samples < 1) bad("check.samples must be positive");
    if (auto v = get(check, "n")) cfg.check_n = static_cast<int>(to_integer("check.n", *v));
    if (auto v = get(check, "sigma")) cfg.sigma = to_double("check.sigma", *v);
    if (auto v = get(check, "eps0")) {
        cfg.check_eps0 = to_double("check.eps0", *v);
        cfg.check_eps0_set = true;
        if (!(cfg.check_eps0 > 0.0)) bad("check.eps0 must be positive");
    }
    return cfg;
}

RunConfig load_config(const std::string& path, const std::vector<std::string>& overrides) {
    std::ifstream in(path);
    if (!in) bad("cannot open config '" + path + "'");
    return parse_config(in, overrides);
}

DhymProblem build_problem(const RunConfig& cfg) {
    const TorusGrid grid(cfg.n, cfg.N);
    DhymProblem prob;
    prob.grid = grid;
    prob.omega = build_form(cfg.omega, grid);
    prob.chi0 = build_form(cfg.chi0, grid);
    prob.eps0 = cfg.eps0;
    switch (cfg.target) {
    case TargetKind::Constant:
        prob.target = cfg.target_value;
        break;
    case TargetKind::HatTheta:
        prob.target = hat_theta(prob.omega, prob.chi0).hat_theta;
        break;
    case TargetKind::File: {
        ScalarField f = read_scalar_field(cfg.target_file);
        if (!(f.grid == grid)) bad("target file does not match the configured grid");
        prob.target = std::move(f);
        break;
    }
    case TargetKind::Manufactured:
        return manufactured_problem(sample_modes(cfg.solution, grid), prob.omega, prob.chi0, cfg.eps0);
    }
    prob.validate();
    return prob;
}

} // namespace dhym
