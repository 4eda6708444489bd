#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>

#include "dhym/error.hpp"
#include "dhym/phase.hpp"
#include "dhym/solver.hpp"
#include "oracles.hpp"

using namespace dhym;

namespace {

Errc code_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "expected an exception";
    return Errc::Io;
}

ScalarField sample(const TorusGrid& g, const std::function<double(const std::vector<double>&)>& f) {
    ScalarField out(g);
    std::vector<double> x(g.real_dims());
    for (std::size_t p = 0; p < g.size(); ++p) {
        for (int a = 0; a < g.real_dims(); ++a) x[a] = g.coordinate(p, a);
        out.values[p] = f(x);
    }
    return out;
}

double aligned_error(const ScalarField& u, const ScalarField& exact) {
    ScalarField a = u, b = exact;
    subtract_mean(a);
    subtract_mean(b);
    return sup_norm(a - b);
}

HermitianFormField identity_form(const TorusGrid& g) {
    return HermitianFormField::constant(g, HermitianMatrix::identity(g.n()));
}

HermitianFormField scalar_form(const ScalarField& f) {
    HermitianFormField out(f.grid);
    for (std::size_t p = 0; p < f.grid.size(); ++p) out.set(p, HermitianMatrix::identity(f.grid.n()) * f.values[p]);
    return out;
}

// u* = a exp(sin x1): analytic complex Hessian (1/4) a e^{sin x}(cos^2 x - sin x).
HermitianFormField exp_sin_hessian(const TorusGrid& g, double a) {
    HermitianFormField h(g);
    for (std::size_t p = 0; p < g.size(); ++p) {
        const double x = g.coordinate(p, 0);
        const double v = 0.25 * a * std::exp(std::sin(x)) * (std::cos(x) * std::cos(x) - std::sin(x));
        std::vector<double> d(g.n(), 0.0);
        d[0] = v;
        h.set(p, HermitianMatrix::diagonal(d));
    }
    return h;
}

DhymProblem flat_problem(const TorusGrid& g, const ScalarField& chi_profile, double target, double eps0) {
    DhymProblem prob;
    prob.grid = g;
    prob.omega = identity_form(g);
    prob.chi0 = scalar_form(chi_profile);
    prob.target = target;
    prob.eps0 = eps0;
    return prob;
}

} // namespace

TEST(Residual, ConstantStateExamples) {
    const TorusGrid g(2, 8);
    DhymProblem prob = flat_problem(g, ScalarField(g, 1.0), M_PI / 2, 0.1);
    const ScalarField r = residual(ScalarField(g), 0.0, prob);
    for (double v : r.values) EXPECT_NEAR(v, 0.0, 1e-15);
    const ScalarField r2 = residual(ScalarField(g), 0.25, prob);
    for (double v : r2.values) EXPECT_NEAR(v, -0.25, 1e-15);
    // For n = 1, Theta(u) = atan(chi + u_{1 1bar}) pointwise.
    const TorusGrid g1(1, 16);
    DhymProblem p1 = flat_problem(g1, ScalarField(g1, 0.3), 0.2, 0.1);
    const ScalarField u = sample(g1, [](auto& x) { return std::cos(x[0]); });
    const ScalarField r1 = residual(u, 0.0, p1);
    for (std::size_t p = 0; p < g1.size(); ++p)
        EXPECT_NEAR(r1.values[p], std::atan(0.3 - 0.25 * std::cos(g1.coordinate(p, 0))) - 0.2, 1e-14);
}

TEST(Linearization, MatchesFiniteDifferences) {
    std::mt19937_64 rng(21);
    for (int n : {1, 2}) {
        const TorusGrid g(n, 8);
        DhymProblem prob;
        prob.grid = g;
        prob.omega = HermitianFormField(g);
        prob.chi0 = HermitianFormField(g);
        for (std::size_t p = 0; p < g.size(); ++p) {
            prob.omega.set(p, oracle::random_positive(n, rng));
            prob.chi0.set(p, oracle::random_hermitian(n, rng, 0.5) + HermitianMatrix::identity(n));
        }
        prob.target = 0.0;
        prob.eps0 = 0.1;
        const ScalarField u = oracle::random_band_limited(g, rng, 3, 2, 0.3);
        const ScalarField v = oracle::random_band_limited(g, rng, 3, 2, 1.0);
        const ScalarField lin = linearized_apply(u, v, prob);
        const double h = 1e-6;
        ScalarField up = u, um = u;
        for (std::size_t p = 0; p < g.size(); ++p) {
            up.values[p] += h * v.values[p];
            um.values[p] -= h * v.values[p];
        }
        const ScalarField rp = residual(up, 0.0, prob), rm = residual(um, 0.0, prob);
        for (std::size_t p = 0; p < g.size(); ++p) {
            const double fd = (rp.values[p] - rm.values[p]) / (2 * h);
            EXPECT_LE(std::abs(fd - lin.values[p]) / std::max(1.0, std::abs(lin.values[p])), 1e-6) << "n=" << n;
        }
    }
}

TEST(Linearization, FlatStateIsQuarterLaplacianAndKillsConstants) {
    const TorusGrid g(2, 8);
    DhymProblem prob = flat_problem(g, ScalarField(g), 0.5, 0.1);
    std::mt19937_64 rng(22);
    const ScalarField v = oracle::random_band_limited(g, rng, 4, 3, 1.0);
    const ScalarField lin = linearized_apply(ScalarField(g), v, prob);
    SpectralOps ops(g);
    ScalarField lap(g);
    ops.quarter_laplacian(v.values, lap.values);
    EXPECT_LT(sup_norm(lin - lap), 1e-12);
    const ScalarField zero = linearized_apply(v, ScalarField(g, 2.5), prob);
    EXPECT_LT(sup_norm(zero), 1e-12);
}

TEST(Linearization, SymmetricNegativeAtConstantCoefficients) {
    // With constant eta the operator is a constant-coefficient elliptic
    // multiplier: symmetric, and -L is positive on mean-zero fields.
    std::mt19937_64 rng(23);
    const TorusGrid g(2, 8);
    DhymProblem prob;
    prob.grid = g;
    prob.omega = HermitianFormField::constant(g, oracle::random_positive(2, rng));
    prob.chi0 = HermitianFormField::constant(g, oracle::random_hermitian(2, rng));
    prob.target = 0.5;
    prob.eps0 = 0.1;
    for (int s = 0; s < 5; ++s) {
        ScalarField v = oracle::random_band_limited(g, rng, 4, 3, 1.0);
        ScalarField w = oracle::random_band_limited(g, rng, 4, 3, 1.0);
        subtract_mean(v);
        subtract_mean(w);
        const ScalarField lv = linearized_apply(ScalarField(g), v, prob);
        const ScalarField lw = linearized_apply(ScalarField(g), w, prob);
        const double a = oracle::l2_dot(lv, w), b = oracle::l2_dot(v, lw);
        EXPECT_NEAR(a, b, 1e-10 * std::max(1.0, std::abs(a)));
        EXPECT_GT(-oracle::l2_dot(lv, v), 0.0);
    }
}

TEST(Newton, AlreadySolvedStateTakesNoSteps) {
    const TorusGrid g(2, 8);
    const DhymProblem prob = flat_problem(g, ScalarField(g, 1.0), M_PI / 2, 0.1);
    const SolveReport r = newton_solve(prob, ScalarField(g), SolverConfig{});
    EXPECT_TRUE(r.converged);
    EXPECT_EQ(r.iterations, 0);
    EXPECT_NEAR(r.c, 0.0, 1e-15);
    ASSERT_EQ(r.newton_trace.size(), 1u);
}

TEST(Newton, RecoversOneDimensionalManufacturedSolution) {
    const TorusGrid g(1, 64);
    const ScalarField chi = sample(g, [](auto& x) { return 0.5 + 0.2 * std::cos(x[0]) * std::sin(x[1]); });
    const ScalarField u_star =
        sample(g, [](auto& x) { return 0.4 * std::sin(2 * x[0] + x[1]) + 0.2 * std::cos(3 * x[1]); });
    const DhymProblem prob = manufactured_problem(u_star, identity_form(g), scalar_form(chi), 0.1);
    for (KrylovMethod k : {KrylovMethod::Gmres, KrylovMethod::Cgnr}) {
        SolverConfig cfg;
        cfg.krylov = k;
        const SolveReport r = newton_solve(prob, ScalarField(g), cfg);
        EXPECT_TRUE(r.converged);
        EXPECT_LE(r.residual_sup, 1e-11);
        EXPECT_LE(aligned_error(r.u, u_star), 1e-10);
        EXPECT_NEAR(r.c, 0.0, 1e-11);
        EXPECT_NEAR(mean(r.u), 0.0, 1e-14);
        for (const NewtonRecord& rec : r.newton_trace) EXPECT_GT(rec.phase_margin, 0.0);
        for (std::size_t i = 1; i < r.newton_trace.size(); ++i)
            EXPECT_LT(r.newton_trace[i].residual_sup, r.newton_trace[i - 1].residual_sup);
    }
}

TEST(Newton, RecoversTwoDimensionalManufacturedSolution) {
    std::mt19937_64 rng(24);
    const TorusGrid g(2, 8);
    HermitianFormField omega(g);
    for (std::size_t p = 0; p < g.size(); ++p)
        omega.set(p, HermitianMatrix::identity(2) + oracle::random_hermitian(2, rng, 0.05));
    const HermitianFormField chi0 = HermitianFormField::constant(g, HermitianMatrix::identity(2));
    const ScalarField u_star = oracle::random_band_limited(g, rng, 4, 2, 0.2);
    const DhymProblem prob = manufactured_problem(u_star, omega, chi0, 0.05);
    const SolveReport r = newton_solve(prob, ScalarField(g), SolverConfig{});
    EXPECT_LE(r.residual_sup, 1e-11);
    EXPECT_LE(aligned_error(r.u, u_star), 1e-9);
}

TEST(Newton, SpectralConvergenceWithAnalyticHessian) {
    const double a = 0.3;
    std::vector<double> errors;
    for (int N : {8, 16, 32}) {
        const TorusGrid g(1, N);
        const DhymProblem prob =
            manufactured_problem(exp_sin_hessian(g, a), identity_form(g), HermitianFormField::constant(g, HermitianMatrix::identity(1) * 0.5), 0.1);
        const SolveReport r = newton_solve(prob, ScalarField(g), SolverConfig{});
        const ScalarField exact = sample(g, [&](auto& x) { return a * std::exp(std::sin(x[0])); });
        errors.push_back(aligned_error(r.u, exact));
    }
    EXPECT_GT(errors[0], 1e-8); // the coarse grid really carries truncation error
    EXPECT_GE(errors[1] / std::max(errors[2], 1e-300), 1e2);
    EXPECT_LE(errors[2], 1e-13);
}

TEST(Continuity, HatThetaTargetGivesConstantAngleAndZeroShift) {
    const TorusGrid g(1, 32);
    const ScalarField chi = sample(g, [](auto& x) { return 0.5 + 0.2 * std::cos(x[0]); });
    DhymProblem prob = flat_problem(g, chi, 0.0, 0.1);
    prob.target = hat_theta(prob.omega, prob.chi0).hat_theta;
    const SolveReport r = continuity_solve(prob, SolverConfig{});
    ASSERT_TRUE(r.converged);
    EXPECT_LE(std::abs(r.c), 1e-8);
    const ScalarField res = residual(r.u, 0.0, prob);
    EXPECT_LE(sup_norm(res), 1e-8);
    ASSERT_GE(r.continuity_trace.size(), 2u);
    EXPECT_DOUBLE_EQ(r.continuity_trace.front().t, 0.0);
    EXPECT_DOUBLE_EQ(r.continuity_trace.back().t, 1.0);
    for (const NewtonRecord& rec : r.newton_trace) EXPECT_GT(rec.phase_margin, 0.0);
}

TEST(Continuity, ShiftIsNonPositiveWhenTargetDominatesStart) {
    const TorusGrid g(2, 8);
    const ScalarField chi = sample(g, [](auto& x) { return 1.0 + 0.3 * std::cos(x[0]) + 0.2 * std::sin(x[3]); });
    DhymProblem prob = flat_problem(g, chi, 0.0, 0.1);
    const ScalarField theta0 = theta_field(prob.omega, prob.chi0);
    prob.target = *std::max_element(theta0.values.begin(), theta0.values.end()) + 0.05;
    const SolveReport r = continuity_solve(prob, SolverConfig{});
    ASSERT_TRUE(r.converged);
    for (const ContinuationRecord& s : r.continuity_trace) EXPECT_LE(s.shift, 1e-12) << "t=" << s.t;
}

TEST(Continuity, TrivialPathAndUniqueness) {
    const TorusGrid g(1, 32);
    const ScalarField chi = sample(g, [](auto& x) { return 0.2 + 0.3 * std::sin(x[0] + x[1]); });
    DhymProblem prob = flat_problem(g, chi, 0.4, 0.1);
    std::mt19937_64 rng(25);
    const SolveReport a = newton_solve(prob, oracle::random_band_limited(g, rng, 3, 3, 0.3), SolverConfig{});
    const SolveReport b = newton_solve(prob, oracle::random_band_limited(g, rng, 3, 3, 0.3), SolverConfig{});
    EXPECT_LE(sup_norm(a.u - b.u), 1e-8);
    EXPECT_NEAR(a.c, b.c, 1e-10);
    const SolveReport c = continuity_solve(prob, SolverConfig{});
    EXPECT_LE(sup_norm(a.u - c.u), 1e-8);

    // Target equal to the starting angle: every stage is already solved.
    DhymProblem same = flat_problem(g, ScalarField(g, 0.7), std::atan(0.7), 0.1);
    const SolveReport t = continuity_solve(same, SolverConfig{});
    EXPECT_EQ(t.iterations, 0);
    EXPECT_LT(sup_norm(t.u), 1e-15);
}

TEST(Failures, SolverErrorCodes) {
    const TorusGrid g(1, 32);
    const ScalarField chi = sample(g, [](auto& x) { return 0.5 + 0.4 * std::cos(x[0]); });
    const DhymProblem prob = flat_problem(g, chi, 0.3, 0.1);

    SolverConfig stall;
    stall.max_iters = 1;
    stall.tol = 1e-16;
    EXPECT_EQ(code_of([&] { newton_solve(prob, ScalarField(g), stall); }), Errc::MaxItersExceeded);
    EXPECT_EQ(code_of([&] { continuity_solve(prob, stall); }), Errc::PathStalled);

    SolverConfig krylov;
    krylov.krylov_iters = 1;
    krylov.krylov_tol = 1e-14;
    EXPECT_EQ(code_of([&] { newton_solve(prob, ScalarField(g), krylov); }), Errc::LinearSolveStalled);

    // n = 2 with Theta0 = -pi/2 < 0: the starting state is not supercritical.
    const TorusGrid g2(2, 8);
    DhymProblem low = flat_problem(g2, ScalarField(g2, -1.0), 0.5, 0.1);
    EXPECT_EQ(code_of([&] { newton_solve(low, ScalarField(g2), SolverConfig{}); }), Errc::PhaseFloorViolated);
    EXPECT_EQ(code_of([&] { continuity_solve(low, SolverConfig{}); }), Errc::PhaseFloorViolated);

    DhymProblem bad = prob;
    bad.target = 2.0;
    EXPECT_EQ(code_of([&] { newton_solve(bad, ScalarField(g), SolverConfig{}); }), Errc::PhaseOutOfRange);
    bad.target = 0.3;
    bad.eps0 = 0.0;
    EXPECT_EQ(code_of([&] { bad.validate(); }), Errc::PreconditionFailed);
    EXPECT_EQ(code_of([&] { newton_solve(prob, ScalarField(TorusGrid(1, 16)), SolverConfig{}); }),
              Errc::DimensionMismatch);
}

TEST(Failures, OversizedManufacturedSolutionLeavesTheBand) {
    const TorusGrid g(2, 8);
    const ScalarField u_star = sample(g, [](auto& x) { return 20.0 * std::cos(x[0]); });
    EXPECT_EQ(code_of([&] {
                  manufactured_problem(u_star, identity_form(g),
                                       HermitianFormField::constant(g, HermitianMatrix::identity(2)), 0.1);
              }),
              Errc::PhaseOutOfRange);
}

TEST(Supercritical, VerdictExamples) {
    const TorusGrid g(2, 8);
    const DhymProblem prob = flat_problem(g, ScalarField(g, 1.0), M_PI / 2, 0.2);
    const SupercriticalReport ok = verify_supercritical(ScalarField(g), prob);
    EXPECT_TRUE(ok.ok);
    EXPECT_NEAR(ok.min_phase, M_PI / 2, 1e-15);
    EXPECT_NEAR(ok.margin, M_PI / 2, 1e-15);
    const ScalarField dip = sample(g, [](auto& x) { return 7.0 * std::cos(x[0]); });
    const SupercriticalReport no = verify_supercritical(dip, prob);
    // At x1 = 0 the diagonal is (1 - 7/4, 1): positive but inside the eps0 band.
    EXPECT_FALSE(no.ok);
    EXPECT_NEAR(no.min_phase, std::atan(-0.75) + M_PI / 4, 1e-12);
}
