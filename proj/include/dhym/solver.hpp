#pragma once

#include <variant>
#include <vector>

#include "dhym/torus.hpp"

namespace dhym {

/// Find u (mean zero) and a constant c with
///   Theta_omega(chi0 + i ddbar u) = target + c.
struct DhymProblem {
    TorusGrid grid;
    HermitianFormField omega;
    HermitianFormField chi0;
    std::variant<ScalarField, double> target = 0.0;
    double eps0 = 0.0;

    ScalarField target_field() const;
    /// Checks grids, positivity of omega and the target band
    /// [(n-2)pi/2 + eps0, n pi/2).
    void validate() const;
};

enum class KrylovMethod { Gmres, Cgnr };

struct SolverConfig {
    double tol = 1e-11;
    double krylov_tol = 1e-10;
    int max_iters = 40;
    int krylov_iters = 400;
    int gmres_restart = 30;
    KrylovMethod krylov = KrylovMethod::Gmres;
    /// Required min(Theta) - (n-2)pi/2 at the starting state.
    double initial_margin = 0.0;
    int max_halvings = 30;
};

struct NewtonRecord {
    int iteration = 0;
    double t = 1.0;
    double residual_sup = 0.0;
    double step = 0.0;
    double min_phase = 0.0;
    double phase_margin = 0.0; ///< min_phase - (n-2)pi/2
    double shift = 0.0;
    int krylov_iterations = 0;
};

struct ContinuationRecord {
    double t = 0.0;
    double shift = 0.0;
    int iterations = 0;
};

struct SolveReport {
    ScalarField u;
    double c = 0.0;
    double residual_sup = 0.0;
    std::vector<NewtonRecord> newton_trace;
    std::vector<ContinuationRecord> continuity_trace;
    bool converged = false;
    int iterations = 0;
};

/// Theta_omega(chi0 + i ddbar u) - target - c.
ScalarField residual(const ScalarField& u, double c, const DhymProblem& prob);

/// Derivative of the residual at u in direction v: tr(eta^{-1} i ddbar v).
ScalarField linearized_apply(const ScalarField& u, const ScalarField& v, const DhymProblem& prob);

/// Damped Newton-Krylov on the pair (u, c).
SolveReport newton_solve(const DhymProblem& prob, const ScalarField& u0, const SolverConfig& cfg);
SolveReport newton_solve(const DhymProblem& prob, const ScalarField& u0, double c0, const SolverConfig& cfg);

/// Marches target_t = (1 - t) Theta_start + t target from t = 0 to 1, where
/// Theta_start is the angle of the starting potential (zero by default).
SolveReport continuity_solve(const DhymProblem& prob, const SolverConfig& cfg);
SolveReport continuity_solve(const DhymProblem& prob, const ScalarField& u0, const SolverConfig& cfg);

struct SupercriticalReport {
    double min_phase = 0.0;
    double margin = 0.0; ///< min_phase - (n-2)pi/2
    bool ok = false;
};

SupercriticalReport verify_supercritical(const ScalarField& u, const DhymProblem& prob);

/// Problem whose target is the angle of chi0 + i ddbar(u_star) on the grid.
DhymProblem manufactured_problem(const ScalarField& u_star, const HermitianFormField& omega,
                                 const HermitianFormField& chi0, double eps0);

/// As above with a caller-supplied (typically analytic) complex Hessian of the
/// exact solution, so the discrete problem carries truncation error.
DhymProblem manufactured_problem(const HermitianFormField& hessian, const HermitianFormField& omega,
                                 const HermitianFormField& chi0, double eps0);

} // namespace dhym
