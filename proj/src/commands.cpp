#include "dhym/commands.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "dhym/error.hpp"
#include "dhym/field_io.hpp"
#include "dhym/phase.hpp"
#include "dhym/solver.hpp"
#include "dhym/suites.hpp"
#include "dhym/surface.hpp"

namespace dhym {

namespace fs = std::filesystem;

namespace {

std::string timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    std::ostringstream os;
    os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return os.str();
}

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) fail(Errc::Io, "cannot create output directory '" + dir + "': " + ec.message());
}

std::ofstream open_out(const fs::path& p) {
    std::ofstream os(p);
    if (!os) fail(Errc::Io, "cannot write '" + p.string() + "'");
    os << std::setprecision(17);
    return os;
}

const char* target_name(TargetKind k) {
    switch (k) {
    case TargetKind::Constant: return "constant";
    case TargetKind::HatTheta: return "hat-theta";
    case TargetKind::File: return "file";
    case TargetKind::Manufactured: return "manufactured";
    }
    return "?";
}

} // namespace

int cmd_solve(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    DhymProblem prob;
    try {
        prob = build_problem(cfg);
        ensure_dir(cfg.output);
    } catch (const Error& e) {
        err << "configuration error: " << e.what() << '\n';
        return kExitConfig;
    }

    SolveReport rep;
    try {
        if (cfg.method == SolveMethod::Newton) {
            rep = newton_solve(prob, ScalarField(prob.grid), cfg.solver);
        } else {
            rep = continuity_solve(prob, cfg.solver);
        }
    } catch (const Error& e) {
        err << "solver failed: " << e.what() << '\n';
        return kExitSolver;
    }

    const fs::path dir(cfg.output);
    try {
        write_field((dir / "solution.dhym").string(), rep.u);

        const double floor = supercritical_floor(prob.grid.n());
        double worst_iterate = rep.newton_trace.empty() ? 0.0 : rep.newton_trace.front().min_phase;
        for (const auto& r : rep.newton_trace) worst_iterate = std::min(worst_iterate, r.min_phase);
        const SupercriticalReport sc = verify_supercritical(rep.u, prob);

        auto report = open_out(dir / "report.txt");
        report << "# dhym solve report\n";
        report << "timestamp = " << timestamp() << '\n';
        report << "n = " << prob.grid.n() << '\n';
        report << "N = " << prob.grid.N() << '\n';
        report << "method = " << (cfg.method == SolveMethod::Newton ? "newton" : "continuity") << '\n';
        report << "target = " << target_name(cfg.target) << '\n';
        if (const double* h = std::get_if<double>(&prob.target)) report << "target_value = " << *h << '\n';
        report << "converged = " << (rep.converged ? "true" : "false") << '\n';
        report << "iterations = " << rep.iterations << '\n';
        report << "residual_sup = " << rep.residual_sup << '\n';
        report << "c = " << rep.c << '\n';
        report << "u_mean = " << mean(rep.u) << '\n';
        report << "final_min_phase = " << sc.min_phase << '\n';
        report << "final_phase_margin = " << sc.margin << '\n';
        report << "iterate_min_phase = " << worst_iterate << '\n';
        report << "supercritical_floor = " << floor << '\n';
        if (cfg.target == TargetKind::Manufactured) {
            ScalarField exact = sample_modes(cfg.solution, prob.grid);
            subtract_mean(exact);
            report << "solution_error = " << sup_norm(rep.u - exact) << '\n';
        }
        for (const auto& s : rep.continuity_trace) {
            report << "stage = " << s.t << ' ' << s.shift << ' ' << s.iterations << '\n';
        }

        auto trace = open_out(dir / "trace.csv");
        trace << "iteration,residual_sup,min_phase,t,b_t,step,phase_margin,krylov_iterations\n";
        for (const auto& r : rep.newton_trace) {
            trace << r.iteration << ',' << r.residual_sup << ',' << r.min_phase << ',' << r.t << ',' << r.shift << ','
                  << r.step << ',' << r.phase_margin << ',' << r.krylov_iterations << '\n';
        }
    } catch (const Error& e) {
        err << "output error: " << e.what() << '\n';
        return kExitConfig;
    }

    out << std::setprecision(17) << "converged residual_sup=" << rep.residual_sup << " c=" << rep.c
        << " iterations=" << rep.iterations << '\n';
    return rep.converged ? kExitOk : kExitSolver;
}

int cmd_check(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    SuiteResult result;
    try {
        if (cfg.suite.empty()) fail(Errc::InvalidConfig, "check.suite is required");
        ensure_dir(cfg.output);
        result = run_suite(cfg);
    } catch (const Error& e) {
        if (e.code() == Errc::InvalidConfig || e.code() == Errc::Io) {
            err << "configuration error: " << e.what() << '\n';
            return kExitConfig;
        }
        err << "check failed: " << e.what() << '\n';
        return kExitFailure;
    }
    try {
        auto csv = open_out(fs::path(cfg.output) / ("check_" + cfg.suite + ".csv"));
        write_suite_csv(csv, result);
    } catch (const Error& e) {
        err << "output error: " << e.what() << '\n';
        return kExitConfig;
    }
    write_suite_csv(out, result);
    return result.failures() == 0 ? kExitOk : kExitFailure;
}

int cmd_surface(const SurfaceArgs& args, std::ostream& out, std::ostream& err) {
    SurfaceModel model;
    InvariantMetric metric{args.w11, args.w22, args.w12};
    SurfaceVerdict verdict;
    try {
        model = catalog(args.name, args.alpha, args.beta, args.q);
        metric.validate();
        verdict = csub_on_surface(model, metric, args.c, args.m, args.M);
    } catch (const Error& e) {
        err << "surface error: " << e.what() << '\n';
        return kExitConfig;
    }
    out << std::setprecision(17);
    out << "[model]\nname = " << model.name << '\n';
    if (model.kind == SurfaceKind::InoueSM) out << "alpha = " << model.alpha << "\nbeta = " << model.beta << '\n';
    if (model.kind == SurfaceKind::InouePM) out << "q = " << model.q << '\n';
    out << "\n[brackets]\n";
    for (int i = 0; i < 4; ++i) {
        for (int j = i + 1; j < 4; ++j) {
            std::ostringstream rhs;
            rhs << std::setprecision(17);
            bool any = false;
            for (int k = 0; k < 4; ++k) {
                const double v = model.bracket(i, j, k);
                if (v == 0.0) continue;
                rhs << (any ? (v < 0 ? " - " : " + ") : (v < 0 ? "-" : "")) << std::abs(v) << " e" << k + 1;
                any = true;
            }
            if (any) out << "[e" << i + 1 << ",e" << j + 1 << "] = " << rhs.str() << '\n';
        }
    }
    out << "\n[complex_structure]\n";
    for (int j = 0; j < 4; ++j) {
        out << "J e" << j + 1 << " =";
        for (int i = 0; i < 4; ++i) out << ' ' << model.J(i, j);
        out << '\n';
    }
    out << "\n[forms]\n";
    for (int a = 0; a < 2; ++a) {
        out << "phi" << a + 1 << " =";
        for (const Complex& z : model.forms[a]) out << " (" << z.real() << ',' << z.imag() << ')';
        out << '\n';
    }
    out << "bc_generator = phi" << model.bc_generator << " ^ conj(phi" << model.bc_generator << ")\n";
    out << "bc_dim = " << model.bc_dim << '\n';
    out << "jacobi_residual = " << jacobi_residual(model) << '\n';
    out << "complex_structure_residual = " << complex_structure_residual(model) << '\n';
    out << "form_type_residual = " << form_type_residual(model) << '\n';

    out << "\n[metric]\nw11 = " << metric.w11 << "\nw22 = " << metric.w22 << "\nw12 = (" << metric.w12.real() << ','
        << metric.w12.imag() << ")\n";
    out << "trace_formula = " << trace_formula(metric, args.c) << '\n';
    out << "bc_trace = " << bc_trace(model, metric, args.c) << '\n';

    out << "\n[verdict]\nc = " << args.c << "\nm = " << args.m << "\nM = " << args.M << '\n';
    if (verdict.trivial) {
        out << "trivial = true\nis_csub = n/a\n";
    } else {
        out << "lambda1 = " << verdict.lambda1 << "\nlambda2 = " << verdict.lambda2 << '\n';
        out << "phase = " << verdict.phase << '\n';
        out << "mirrored = " << (verdict.mirrored ? "true" : "false") << '\n';
        out << "bound = " << verdict.bound << '\n';
        out << "is_csub = " << (verdict.is_csub ? "true" : "false") << '\n';
    }
    return kExitOk;
}

int cmd_region(const RegionArgs& args, std::ostream& out, std::ostream& err) {
    RegionMap map;
    try {
        map = region_map(args.sigma, args.resolution, args.scale, args.offset);
    } catch (const Error& e) {
        err << "region error: " << e.what() << '\n';
        return kExitConfig;
    }
    out << std::setprecision(17) << "i,j,lambda1,lambda2,class\n";
    for (int i = 0; i < map.resolution; ++i) {
        for (int j = 0; j < map.resolution; ++j) {
            out << i << ',' << j << ',' << map.coordinate(i) << ',' << map.coordinate(j) << ','
                << static_cast<int>(map.at(i, j)) << '\n';
        }
    }
    return kExitOk;
}

int cmd_angle(const std::string& omega_path, const std::string& chi_path, std::ostream& out, std::ostream& err) {
    try {
        const HermitianFormField omega = read_form_field(omega_path);
        const HermitianFormField chi = read_form_field(chi_path);
        const AngleResult r = hat_theta(omega, chi);
        out << std::setprecision(17) << "hat_theta = " << r.hat_theta << "\nmodulus = " << r.modulus
            << "\nbranch_certificate = " << r.branch_certificate << '\n';
    } catch (const Error& e) {
        err << "angle error: " << e.what() << '\n';
        return kExitConfig;
    }
    return kExitOk;
}

} // namespace dhym
