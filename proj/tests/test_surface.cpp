#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <random>

#include "dhym/error.hpp"
#include "dhym/surface.hpp"

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

std::vector<SurfaceModel> all_samples() {
    std::vector<SurfaceModel> out;
    for (double a : {1.0, -1.0, 2.0, -2.0})
        for (double b : {0.0, 1.0}) out.push_back(catalog("inoue-sm", a, b));
    for (double q : {0.0, 0.5, -0.5}) out.push_back(catalog("inoue-pm", 1.0, 0.0, q));
    out.push_back(catalog("kodaira"));
    return out;
}

} // namespace

TEST(Catalog, BracketsOfTheListings) {
    const SurfaceModel sm = catalog("inoue-sm", 1.0, 0.0);
    EXPECT_EQ(sm.bracket(2, 3, 2), 2.0);  // [e3, e4] = 2 alpha e3
    EXPECT_EQ(sm.bracket(0, 3, 0), -1.0); // [e1, e4] = -alpha e1 + beta e2
    EXPECT_EQ(sm.bracket(3, 2, 2), -2.0);
    const SurfaceModel sm2 = catalog("inoue-sm", 2.0, 1.0);
    EXPECT_EQ(sm2.bracket(0, 3, 1), 1.0);
    EXPECT_EQ(sm2.bracket(1, 3, 0), -1.0);
    EXPECT_EQ(sm2.bracket(1, 3, 1), -2.0);

    const SurfaceModel pm = catalog("inoue-pm", 1.0, 0.0, 0.5);
    EXPECT_EQ(pm.bracket(1, 2, 0), -1.0); // [e2, e3] = -e1
    EXPECT_EQ(pm.bracket(1, 3, 1), -1.0);
    EXPECT_EQ(pm.bracket(2, 3, 2), 1.0);

    const SurfaceModel k = catalog("kodaira");
    EXPECT_EQ(k.bracket(0, 1, 2), -1.0); // [e1, e2] = -e3
    EXPECT_EQ(k.bracket(0, 3, 1), 1.0);
    EXPECT_EQ(k.bracket(1, 3, 0), -1.0);
}

TEST(Catalog, InvariantsHoldAcrossParameterSamples) {
    for (const SurfaceModel& m : all_samples()) {
        EXPECT_LE(jacobi_residual(m), 1e-14) << m.name;
        EXPECT_EQ(complex_structure_residual(m), 0.0) << m.name;
        EXPECT_LE(form_type_residual(m), 1e-15) << m.name;
        EXPECT_EQ(m.bc_dim, 1);
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j)
                for (int k = 0; k < 4; ++k) EXPECT_EQ(m.bracket(i, j, k), -m.bracket(j, i, k));
    }
}

TEST(Catalog, ResidualsDetectBrokenData) {
    SurfaceModel m = catalog("kodaira");
    m.structure[(0 * 4 + 2) * 4 + 0] = 1.0; // [e1, e3] = e1 breaks Jacobi with [e1, e2] = -e3
    m.structure[(2 * 4 + 0) * 4 + 0] = -1.0;
    EXPECT_GT(jacobi_residual(m), 0.5);
    SurfaceModel j = catalog("inoue-sm");
    j.complex_structure[0 * 4 + 1] = 0.5;
    EXPECT_GT(complex_structure_residual(j), 0.1);
    EXPECT_GT(form_type_residual(j), 0.1);
}

TEST(Catalog, GeneratorsAndForms) {
    EXPECT_EQ(catalog("kodaira").bc_generator, 1);
    EXPECT_EQ(catalog("inoue-sm").bc_generator, 2);
    EXPECT_EQ(catalog("inoue-pm").bc_generator, 2);
    const SurfaceModel pm = catalog("inoue-pm", 1.0, 0.0, 0.5);
    const Complex i(0.0, 1.0);
    EXPECT_EQ(pm.forms[0][0], Complex(1.0));
    EXPECT_EQ(pm.forms[0][1], i);
    EXPECT_EQ(pm.forms[0][2], Complex(0.0));
    EXPECT_EQ(pm.forms[0][3], 0.5 * i);
    EXPECT_EQ(pm.forms[1][2], Complex(1.0));
    EXPECT_EQ(pm.forms[1][3], i);
}

TEST(Catalog, Errors) {
    EXPECT_EQ(code_of([] { catalog("hopf"); }), Errc::UnknownSurface);
    EXPECT_EQ(code_of([] { catalog("inoue-sm", 0.0); }), Errc::BadRange);
}

TEST(TraceFormula, ExamplesAndProperties) {
    EXPECT_EQ(trace_formula({1.0, 1.0, 0.0}, 1.0), 1.0);
    EXPECT_EQ(trace_formula({2.0, 1.0, 0.0}, 2.0), 2.0);
    EXPECT_EQ(code_of([] { trace_formula({1.0, 1.0, Complex(1.0, 0.5)}, 1.0); }), Errc::NotPositiveDefinite);
    EXPECT_EQ(code_of([] { trace_formula({-1.0, -1.0, 0.0}, 1.0); }), Errc::NotPositiveDefinite);

    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> u(0.1, 3.0), v(-1.0, 1.0);
    for (int s = 0; s < 1000; ++s) {
        InvariantMetric m{u(rng), u(rng), Complex(v(rng), v(rng))};
        if (m.w11 * m.w22 - std::norm(m.w12) <= 0.05) continue;
        const double c1 = u(rng), c2 = v(rng), scale = u(rng);
        EXPECT_GT(trace_formula(m, c1), 0.0);
        EXPECT_NEAR(trace_formula(m, c1 + c2), trace_formula(m, c1) + trace_formula(m, c2), 1e-12 * (1 + std::abs(trace_formula(m, c1))));
        const InvariantMetric scaled{scale * m.w11, scale * m.w22, scale * m.w12};
        EXPECT_NEAR(trace_formula(scaled, c1), trace_formula(m, c1) / scale, 1e-12 * trace_formula(m, c1) / scale);
        // The closed form is the trace of omega^{-1} against the (2, 2) generator.
        const CMatrix inv = inverse(m.matrix().matrix());
        EXPECT_NEAR(trace_formula(m, c1), c1 * inv(1, 1).real(), 1e-12 * (1 + std::abs(c1 * inv(1, 1).real())));
    }
    EXPECT_EQ(bc_trace(catalog("kodaira"), {2.0, 1.0, 0.0}, 1.0), 0.5);
    EXPECT_EQ(bc_trace(catalog("inoue-sm"), {2.0, 1.0, 0.0}, 1.0), 1.0);
}

TEST(ConformalBound, Examples) {
    EXPECT_EQ(conformal_bound(0.3, 1.7, 1.0, 1.0), std::atan(0.3) + std::atan(1.7));
    EXPECT_NEAR(conformal_bound(1.0, 1.0, 0.5, 2.0), 0.9272952180016122, 1e-15);
    EXPECT_EQ(code_of([] { conformal_bound(1.0, 1.0, 0.0, 1.0); }), Errc::BadRange);
    EXPECT_EQ(code_of([] { conformal_bound(1.0, 1.0, 2.0, 1.0); }), Errc::BadRange);
}

TEST(ConformalBound, NeverExceededForPositiveEigenvalues) {
    std::mt19937_64 rng(32);
    std::uniform_real_distribution<double> lam(0.0, 10.0), lm(0.05, 1.0), lM(1.0, 20.0), u01(0.0, 1.0);
    for (int s = 0; s < 10000; ++s) {
        const double l1 = lam(rng) + 1e-6, l2 = lam(rng) + 1e-6, m = lm(rng), M = lM(rng);
        const double g = std::log(m) + u01(rng) * (std::log(M) - std::log(m));
        const double phase = std::atan(std::exp(g) * l1) + std::atan(std::exp(g) * l2);
        EXPECT_GE(phase, conformal_bound(l1, l2, m, M) - 1e-12);
    }
}

TEST(ConformalBound, MixedSignsCanDipBelowTheEndpoints) {
    // Outside the positive orthant the phase is not monotone in the scale,
    // so the three-point minimum stops being a lower bound.
    const double bound = conformal_bound(2.0, -3.0, 0.2, 2.0);
    double lowest = bound;
    for (int k = 0; k <= 2000; ++k) {
        const double s = 0.2 + (2.0 - 0.2) * k / 2000.0;
        lowest = std::min(lowest, std::atan(2 * s) + std::atan(-3 * s));
    }
    EXPECT_LT(lowest, bound - 0.03);
}

TEST(SurfaceVerdict, Examples) {
    const SurfaceModel k = catalog("kodaira");
    const SurfaceModel sm = catalog("inoue-sm");
    const InvariantMetric id{1.0, 1.0, 0.0};
    const SurfaceVerdict v = csub_on_surface(sm, id, 1.0, 1.0, 1.0);
    EXPECT_NEAR(v.lambda1, 1.0, 1e-15);
    EXPECT_NEAR(v.lambda2, 0.0, 1e-15);
    EXPECT_NEAR(v.bound, M_PI / 4, 1e-15);
    EXPECT_TRUE(v.is_csub);
    EXPECT_FALSE(v.mirrored);

    EXPECT_TRUE(csub_on_surface(k, id, 1.0, 0.5, 2.0).is_csub);
    EXPECT_TRUE(csub_on_surface(k, id, 0.0, 1.0, 1.0).trivial);

    const InvariantMetric w{2.0, 1.5, Complex(0.3, -0.4)};
    const SurfaceVerdict plus = csub_on_surface(sm, w, 1.3, 0.5, 2.0);
    const SurfaceVerdict minus = csub_on_surface(sm, w, -1.3, 0.5, 2.0);
    EXPECT_TRUE(minus.mirrored);
    EXPECT_NEAR(minus.phase, -plus.phase, 1e-14);
    EXPECT_NEAR(minus.bound, plus.bound, 1e-14);
    // The nonzero eigenvalue is the trace: the generator has rank one.
    EXPECT_NEAR(plus.lambda1 + plus.lambda2, trace_formula(w, 1.3), 1e-13);

    EXPECT_EQ(code_of([&] { csub_on_surface(sm, id, 1.0, 2.0, 1.0); }), Errc::BadRange);
    EXPECT_EQ(code_of([&] { csub_on_surface(sm, {0.0, 1.0, 0.0}, 1.0, 1.0, 1.0); }), Errc::NotPositiveDefinite);
}
