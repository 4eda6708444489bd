#include "dhym/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dhym/error.hpp"
#include "dhym/krylov.hpp"
#include "dhym/phase.hpp"
#include "parallel.hpp"

namespace dhym {

namespace {

struct State {
    std::vector<double> theta;
    std::vector<std::vector<double>> coeffs; // linearization weights per ddbar component
    double min_phase = 0.0;
};

State evaluate(SpectralOps& ops, const HermitianFormField& omega, const HermitianFormField& chi0,
               std::span<const double> u, bool with_coeffs) {
    const TorusGrid& g = ops.grid();
    const int n = g.n();
    const auto comps = ops.ddbar_components(u);
    State s;
    s.theta.resize(g.size());
    if (with_coeffs) s.coeffs.assign(ops.components(), std::vector<double>(g.size()));
    detail::parallel_for(g.size(), [&](std::size_t p) {
        const HermitianMatrix chi = chi0.at(p) + ops.assemble(comps, p);
        if (!with_coeffs) {
            s.theta[p] = theta_arctan(pencil_values(omega.at(p), chi).values());
            return;
        }
        const EigenSystem es = eig_pair(omega.at(p), chi);
        s.theta[p] = theta_arctan(es.values());
        const HermitianMatrix d = dF(es);
        for (int j = 0; j < n; ++j) s.coeffs[j][p] = d(j, j).real();
        int c = n;
        for (int j = 0; j < n; ++j) {
            for (int k = j + 1; k < n; ++k) {
                s.coeffs[c][p] = 2.0 * d(j, k).real();
                s.coeffs[c + 1][p] = 2.0 * d(j, k).imag();
                c += 2;
            }
        }
    });
    s.min_phase = *std::min_element(s.theta.begin(), s.theta.end());
    return s;
}

double sup_diff(std::span<const double> theta, std::span<const double> target, double c, std::vector<double>* out) {
    double sup = 0.0;
    for (std::size_t p = 0; p < theta.size(); ++p) {
        const double r = theta[p] - target[p] - c;
        if (out) (*out)[p] = r;
        sup = std::max(sup, std::abs(r));
    }
    return sup;
}

double vector_mean(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

void require_grid(const TorusGrid& expected, const TorusGrid& got, const char* what) {
    if (!(expected == got)) fail(Errc::DimensionMismatch, std::string(what) + " lives on a different grid");
}

struct NewtonOutcome {
    std::vector<double> u;
    double c = 0.0;
    double residual_sup = 0.0;
    int iterations = 0;
};

class NewtonSolver {
  public:
    NewtonSolver(const DhymProblem& prob, const SolverConfig& cfg)
        : prob_(prob), cfg_(cfg), ops_(prob.grid), floor_(supercritical_floor(prob.grid.n())) {}

    SpectralOps& ops() { return ops_; }
    double floor() const { return floor_; }

    State evaluate(std::span<const double> u, bool with_coeffs) {
        return dhym::evaluate(ops_, prob_.omega, prob_.chi0, u, with_coeffs);
    }

    NewtonOutcome run(std::span<const double> target, std::vector<double> u, double c, double t, double margin,
                      std::vector<NewtonRecord>& trace) {
        const std::size_t size = u.size();
        State s = evaluate(u, true);
        if (!(s.min_phase >= floor_ + margin)) {
            fail(Errc::PhaseFloorViolated, "starting state has min phase " + std::to_string(s.min_phase) +
                                               " below " + std::to_string(floor_ + margin));
        }
        std::vector<double> r(size);
        double rs = sup_diff(s.theta, target, c, &r);
        trace.push_back({0, t, rs, 0.0, s.min_phase, s.min_phase - floor_, c, 0});

        std::vector<double> b(size), y(size), du(size), tmp(size), u_try(size), r_try(size);
        int it = 0;
        while (rs > cfg_.tol) {
            if (it >= cfg_.max_iters) {
                fail(Errc::MaxItersExceeded, "residual " + std::to_string(rs) + " after " + std::to_string(it) +
                                                 " Newton iterations");
            }
            ++it;
            for (std::size_t p = 0; p < size; ++p) b[p] = -r[p];
            std::fill(y.begin(), y.end(), 0.0);

            const auto& coeffs = s.coeffs;
            // Right-preconditioned augmented operator: y -> L Q y + mean(y),
            // where Q inverts the flat quarter Laplacian on mean-zero fields.
            LinearMap op = [&](std::span<const double> in, std::span<double> out) {
                ops_.solve_quarter_laplacian(in, tmp);
                ops_.apply_contracted(coeffs, tmp, out);
                const double m = vector_mean(in);
                for (double& v : out) v += m;
            };
            KrylovResult kr;
            if (cfg_.krylov == KrylovMethod::Gmres) {
                kr = gmres(op, b, y, cfg_.gmres_restart, cfg_.krylov_iters, cfg_.krylov_tol);
            } else {
                LinearMap op_t = [&](std::span<const double> in, std::span<double> out) {
                    ops_.apply_contracted_adjoint(coeffs, in, tmp);
                    ops_.solve_quarter_laplacian(tmp, out);
                    const double m = vector_mean(in);
                    for (double& v : out) v += m;
                };
                kr = cgls(op, op_t, b, y, cfg_.krylov_iters, cfg_.krylov_tol);
            }
            if (!kr.converged) {
                fail(Errc::LinearSolveStalled, "Krylov residual " + std::to_string(kr.relative_residual) + " after " +
                                                   std::to_string(kr.iterations) + " iterations");
            }
            ops_.solve_quarter_laplacian(y, du);
            const double dc = -vector_mean(y);

            double alpha = 1.0;
            bool accepted = false;
            bool any_phase_ok = false;
            for (int h = 0; h <= cfg_.max_halvings; ++h, alpha *= 0.5) {
                for (std::size_t p = 0; p < size; ++p) u_try[p] = u[p] + alpha * du[p];
                State st = evaluate(u_try, true);
                if (!(st.min_phase > floor_)) continue;
                any_phase_ok = true;
                const double c_try = c + alpha * dc;
                const double rt = sup_diff(st.theta, target, c_try, &r_try);
                if (rt < rs) {
                    u.swap(u_try);
                    r.swap(r_try);
                    s = std::move(st);
                    c = c_try;
                    rs = rt;
                    accepted = true;
                    break;
                }
            }
            if (!accepted) {
                if (!any_phase_ok) fail(Errc::PhaseFloorViolated, "no step length keeps the phase supercritical");
                fail(Errc::LineSearchFailed, "no step length reduces the residual below " + std::to_string(rs));
            }
            trace.push_back({it, t, rs, alpha, s.min_phase, s.min_phase - floor_, c, kr.iterations});
        }
        const double m = vector_mean(u);
        for (double& v : u) v -= m;
        return {std::move(u), c, rs, it};
    }

  private:
    const DhymProblem& prob_;
    const SolverConfig& cfg_;
    SpectralOps ops_;
    double floor_;
};

bool is_solver_failure(Errc e) {
    return e == Errc::LinearSolveStalled || e == Errc::PhaseFloorViolated || e == Errc::LineSearchFailed ||
           e == Errc::MaxItersExceeded;
}

std::vector<double> mean_free(const ScalarField& u, const TorusGrid& grid) {
    require_grid(grid, u.grid, "initial potential");
    std::vector<double> v = u.values;
    const double m = vector_mean(v);
    for (double& x : v) x -= m;
    return v;
}

} // namespace

ScalarField DhymProblem::target_field() const {
    if (const double* h = std::get_if<double>(&target)) return ScalarField(grid, *h);
    return std::get<ScalarField>(target);
}

void DhymProblem::validate() const {
    require_grid(grid, omega.grid(), "omega");
    require_grid(grid, chi0.grid(), "chi0");
    if (!(eps0 > 0.0)) fail(Errc::PreconditionFailed, "phase floor eps0 must be positive");
    for (std::size_t p = 0; p < grid.size(); ++p) {
        try {
            cholesky(omega.at(p));
        } catch (const Error& e) {
            throw Error(e.code(), std::string(e.what()) + " at grid index " + std::to_string(p));
        }
    }
    const int n = grid.n();
    const double lo = supercritical_floor(n) + eps0;
    const double hi = n * M_PI / 2.0;
    auto check = [&](double h) {
        if (!(h >= lo - 1e-12 && h < hi)) {
            fail(Errc::PhaseOutOfRange, "target " + std::to_string(h) + " outside [" + std::to_string(lo) + ", " +
                                            std::to_string(hi) + ")");
        }
    };
    if (const double* h = std::get_if<double>(&target)) {
        check(*h);
    } else {
        const ScalarField& f = std::get<ScalarField>(target);
        require_grid(grid, f.grid, "target");
        for (double h : f.values) check(h);
    }
}

ScalarField residual(const ScalarField& u, double c, const DhymProblem& prob) {
    require_grid(prob.grid, u.grid, "potential");
    SpectralOps ops(prob.grid);
    const State s = evaluate(ops, prob.omega, prob.chi0, u.values, false);
    const ScalarField target = prob.target_field();
    ScalarField out(prob.grid);
    sup_diff(s.theta, target.values, c, &out.values);
    return out;
}

ScalarField linearized_apply(const ScalarField& u, const ScalarField& v, const DhymProblem& prob) {
    require_grid(prob.grid, u.grid, "potential");
    require_grid(prob.grid, v.grid, "direction");
    SpectralOps ops(prob.grid);
    const State s = evaluate(ops, prob.omega, prob.chi0, u.values, true);
    ScalarField out(prob.grid);
    ops.apply_contracted(s.coeffs, v.values, out.values);
    return out;
}

SolveReport newton_solve(const DhymProblem& prob, const ScalarField& u0, const SolverConfig& cfg) {
    return newton_solve(prob, u0, 0.0, cfg);
}

SolveReport newton_solve(const DhymProblem& prob, const ScalarField& u0, double c0, const SolverConfig& cfg) {
    prob.validate();
    NewtonSolver solver(prob, cfg);
    const ScalarField target = prob.target_field();
    SolveReport rep;
    NewtonOutcome out = solver.run(target.values, mean_free(u0, prob.grid), c0, 1.0, cfg.initial_margin,
                                   rep.newton_trace);
    rep.u = ScalarField(prob.grid);
    rep.u.values = std::move(out.u);
    rep.c = out.c;
    rep.residual_sup = out.residual_sup;
    rep.iterations = out.iterations;
    rep.converged = true;
    return rep;
}

SolveReport continuity_solve(const DhymProblem& prob, const SolverConfig& cfg) {
    return continuity_solve(prob, ScalarField(prob.grid), cfg);
}

SolveReport continuity_solve(const DhymProblem& prob, const ScalarField& u0, const SolverConfig& cfg) {
    prob.validate();
    NewtonSolver solver(prob, cfg);
    std::vector<double> u = mean_free(u0, prob.grid);
    const State start = solver.evaluate(u, false);
    if (!(start.min_phase > solver.floor() + cfg.initial_margin)) {
        fail(Errc::PhaseFloorViolated, "starting angle is not supercritical (min " +
                                           std::to_string(start.min_phase) + ")");
    }
    const std::vector<double>& theta0 = start.theta;
    const ScalarField target1 = prob.target_field();
    const std::size_t size = u.size();

    constexpr double kMaxStep = 0.25;
    constexpr double kMinStep = 1.0 / 1024.0;
    SolveReport rep;
    rep.continuity_trace.push_back({0.0, 0.0, 0});
    double t = 0.0;
    double dt = kMaxStep;
    double c = 0.0;
    double rs = 0.0;
    std::vector<double> target(size);
    while (t < 1.0) {
        const double t_try = std::min(1.0, t + dt);
        for (std::size_t p = 0; p < size; ++p) target[p] = (1.0 - t_try) * theta0[p] + t_try * target1.values[p];
        std::vector<NewtonRecord> stage_trace;
        try {
            NewtonOutcome out = solver.run(target, u, c, t_try, 0.0, stage_trace);
            u = std::move(out.u);
            c = out.c;
            rs = out.residual_sup;
            t = t_try;
            rep.iterations += out.iterations;
            rep.continuity_trace.push_back({t, c, out.iterations});
            rep.newton_trace.insert(rep.newton_trace.end(), stage_trace.begin(), stage_trace.end());
            if (out.iterations <= 2) dt = std::min(kMaxStep, 2.0 * dt);
        } catch (const Error& e) {
            if (!is_solver_failure(e.code())) throw;
            dt *= 0.5;
            if (dt < kMinStep) {
                fail(Errc::PathStalled, "continuation step fell below 1/1024 at t = " + std::to_string(t) + " (" +
                                            e.what() + ")");
            }
        }
    }
    rep.u = ScalarField(prob.grid);
    rep.u.values = std::move(u);
    rep.c = c;
    rep.residual_sup = rs;
    rep.converged = true;
    return rep;
}

SupercriticalReport verify_supercritical(const ScalarField& u, const DhymProblem& prob) {
    require_grid(prob.grid, u.grid, "potential");
    SpectralOps ops(prob.grid);
    const State s = evaluate(ops, prob.omega, prob.chi0, u.values, false);
    SupercriticalReport r;
    const double floor = supercritical_floor(prob.grid.n());
    r.min_phase = s.min_phase;
    r.margin = s.min_phase - floor;
    r.ok = s.min_phase > floor + prob.eps0 - 1e-12;
    return r;
}

DhymProblem manufactured_problem(const ScalarField& u_star, const HermitianFormField& omega,
                                 const HermitianFormField& chi0, double eps0) {
    return manufactured_problem(i_ddbar(u_star), omega, chi0, eps0);
}

DhymProblem manufactured_problem(const HermitianFormField& hessian, const HermitianFormField& omega,
                                 const HermitianFormField& chi0, double eps0) {
    require_grid(omega.grid(), hessian.grid(), "hessian");
    require_grid(omega.grid(), chi0.grid(), "chi0");
    DhymProblem prob;
    prob.grid = omega.grid();
    prob.omega = omega;
    prob.chi0 = chi0;
    prob.eps0 = eps0;
    prob.target = theta_field(omega, chi0 + hessian);
    prob.validate();
    return prob;
}

} // namespace dhym
