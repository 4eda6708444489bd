#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <limits>
#include <random>

#include "dhym/error.hpp"
#include "dhym/phase.hpp"

using namespace dhym;

namespace {

constexpr double kHalfPi = M_PI / 2.0;

Errc code_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "expected an exception";
    return Errc::Io;
}

} // namespace

TEST(PhaseSpec, Validation) {
    EXPECT_NO_THROW((PhaseSpec{2, 1.0, 0.5}.validate()));
    EXPECT_EQ(code_of([] { PhaseSpec{2, -0.1, 0.05}.validate(); }), Errc::PhaseOutOfRange);
    EXPECT_EQ(code_of([] { PhaseSpec{2, M_PI, 0.05}.validate(); }), Errc::PhaseOutOfRange);
    EXPECT_EQ(code_of([] { PhaseSpec{2, 1.0, 0.0}.validate(); }), Errc::PreconditionFailed);
    EXPECT_EQ(code_of([] { PhaseSpec{3, M_PI / 2 + 0.1, 0.5}.validate(); }), Errc::PreconditionFailed);
    EXPECT_DOUBLE_EQ(supercritical_floor(3), kHalfPi);
}

TEST(LevelSet, SamplesLieOnTheLevelSet) {
    const PhaseSpec spec{3, 2.0, 2.0 - kHalfPi};
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> a(-kHalfPi, kHalfPi);
    int made = 0;
    for (int s = 0; s < 2000; ++s) {
        const std::vector<double> free{std::tan(a(rng)), std::tan(a(rng))};
        const auto p = level_set_sample(spec, free);
        if (!p) continue;
        ++made;
        ASSERT_EQ(p->size(), 3u);
        EXPECT_NEAR(theta_arctan(*p), spec.sigma, 1e-12);
        EXPECT_GE((*p)[0], (*p)[1]);
        EXPECT_GE((*p)[1], (*p)[2]);
    }
    EXPECT_GT(made, 100);
    EXPECT_EQ(code_of([&] { level_set_sample(spec, std::vector<double>{1.0}); }), Errc::DimensionMismatch);
}

TEST(Lemma23, ArithmeticHoldsOnRandomSamples) {
    std::mt19937_64 rng(10);
    std::uniform_real_distribution<double> a(-kHalfPi, kHalfPi);
    for (int n : {2, 3, 4}) {
        const double floor = supercritical_floor(n);
        for (double sigma : {floor + 0.2, floor + kHalfPi, n * kHalfPi - 0.2}) {
            const PhaseSpec spec{n, sigma, sigma - floor};
            int made = 0;
            std::vector<double> free(n - 1);
            while (made < 2000) {
                for (double& x : free) x = std::tan(a(rng));
                const auto p = level_set_sample(spec, free);
                if (!p) continue;
                ++made;
                const Lemma23Report r = lemma23_check(*p, spec);
                EXPECT_TRUE(r.i_holds) << "n=" << n << " sigma=" << sigma;
                EXPECT_TRUE(r.ii_holds) << "n=" << n << " sigma=" << sigma;
                EXPECT_TRUE(r.iv_holds) << "n=" << n << " sigma=" << sigma;
            }
        }
    }
}

TEST(Lemma23, SpotValuesAndErrors) {
    const PhaseSpec spec{2, kHalfPi, kHalfPi};
    const Lemma23Report r = lemma23_check(std::vector<double>{1.0, 1.0}, spec);
    EXPECT_TRUE(r.i_holds);
    EXPECT_TRUE(r.ii_holds);
    EXPECT_EQ(code_of([&] { lemma23_check(std::vector<double>{1.0, 0.9}, spec); }), Errc::NotOnLevelSet);
}

TEST(Subsolution, PointwiseCriterionExamples) {
    const SubsolutionVerdict yes = is_csub_pointwise(std::vector<double>{0.5, 0.5}, kHalfPi);
    EXPECT_TRUE(yes.is_csub);
    EXPECT_NEAR(yes.worst_margin, std::atan(0.5), 1e-15);

    const SubsolutionVerdict no = is_csub_pointwise(std::vector<double>{-1.0, 5.0}, kHalfPi);
    EXPECT_FALSE(no.is_csub);
    EXPECT_EQ(no.witness_j, 1);
    EXPECT_NEAR(no.worst_margin, -M_PI / 4, 1e-15);

    EXPECT_EQ(code_of([] { is_csub_pointwise(std::vector<double>{0.0, 0.0}, M_PI); }), Errc::PhaseOutOfRange);
}

TEST(Subsolution, CriterionAgreesWithBoundednessOracle) {
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> a(-kHalfPi + 0.02, kHalfPi - 0.02);
    for (int n : {2, 3}) {
        std::uniform_real_distribution<double> hd(supercritical_floor(n) + 0.05, n * kHalfPi - 0.05);
        int made = 0, positives = 0;
        while (made < 150) {
            const double h = hd(rng);
            std::vector<double> mu(n);
            for (double& m : mu) m = std::tan(a(rng));
            const SubsolutionVerdict v = is_csub_pointwise(mu, h);
            if (std::abs(v.worst_margin) < 1e-3) continue;
            ++made;
            positives += v.is_csub;
            EXPECT_EQ(csub_bounded_oracle(mu, h, 1e6, 2000), v.is_csub);
        }
        EXPECT_GT(positives, 10);
        EXPECT_LT(positives, 140);
    }
}

TEST(Subsolution, MarginAndLattice) {
    std::vector<SubsolutionVerdict> vs{is_csub_pointwise(std::vector<double>{1.0, 2.0}, kHalfPi),
                                       is_csub_pointwise(std::vector<double>{0.3, 0.8}, kHalfPi)};
    const double eps = csub_stability_margin(vs);
    EXPECT_NEAR(eps, std::atan(0.3), 1e-15);
    EXPECT_TRUE(is_csub_pointwise(std::vector<double>{0.3, 0.8}, kHalfPi + 0.99 * eps).is_csub);
    EXPECT_FALSE(is_csub_pointwise(std::vector<double>{0.3, 0.8}, kHalfPi + 1.01 * eps).is_csub);

    vs.push_back(is_csub_pointwise(std::vector<double>{-1.0, 5.0}, kHalfPi));
    EXPECT_EQ(code_of([&] { csub_stability_margin(vs); }), Errc::NotASubsolution);

    EXPECT_TRUE(csub_lattice_check(std::vector<double>{1.0, 1.0}, 1.0, 2.0));
    EXPECT_FALSE(csub_lattice_check(std::vector<double>{0.2, 0.2}, 1.0, 2.0));
}

TEST(Kappa, PositiveAndMonotoneInRadius) {
    const PhaseSpec spec{2, kHalfPi, kHalfPi};
    const double delta = 0.05;
    const HermitianMatrix b = HermitianMatrix::identity(2) * (std::tan(0.3) + 2 * delta);
    const double radius = containment_radius(b, spec, delta);
    ASSERT_TRUE(std::isfinite(radius));
    const double r0 = std::max(2 * radius, 1.0);
    const auto pool = draw_kappa_samples(spec, r0, 2000, 5);
    for (const auto& s : pool) EXPECT_GT(s.norm, r0);
    double previous = -std::numeric_limits<double>::infinity();
    for (double f : {1.0, 2.0, 4.0}) {
        std::vector<KappaSample> kept;
        for (const auto& s : pool)
            if (s.norm > f * r0) kept.push_back(s);
        ASSERT_FALSE(kept.empty());
        const double k = kappa_from_samples(b, kept);
        EXPECT_GT(k, 0.0);
        EXPECT_GE(k, previous);
        previous = k;
    }
    EXPECT_GT(prop21_kappa_estimate(b, spec, delta, r0, 1000, 6), 0.0);
}

TEST(Kappa, Preconditions) {
    const PhaseSpec spec{2, kHalfPi, kHalfPi};
    const HermitianMatrix b = HermitianMatrix::identity(2);
    EXPECT_EQ(code_of([&] { prop21_kappa_estimate(b, spec, 0.05, 100.0, 999, 1); }), Errc::PreconditionFailed);
    // B far out on the level set: the shifted cone meets the level set in an unbounded set.
    std::vector<double> far{1000.0, std::tan(kHalfPi - std::atan(1000.0))};
    const HermitianMatrix degenerate = HermitianMatrix::diagonal(far);
    EXPECT_TRUE(std::isinf(containment_radius(degenerate, spec, 0.05)));
    EXPECT_EQ(code_of([&] { prop21_kappa_estimate(degenerate, spec, 0.05, 100.0, 1000, 1); }),
              Errc::PreconditionFailed);
}

TEST(RegionMap, BoundaryFollowsTheHyperbola) {
    const double sigma = kHalfPi;
    const int res = 256;
    const RegionMap map = region_map(sigma, res);
    const double w = (map.hi - map.lo) / res;
    auto curve = [&](double x) { return std::tan(sigma - std::atan(x)); };
    int level_cells = 0;
    for (int i = 0; i < res; ++i) {
        for (int j = 0; j < res; ++j) {
            if (map.at(i, j) != RegionClass::LevelSet) continue;
            ++level_cells;
            const double x0 = map.lo + i * w, x1 = x0 + w, y0 = map.lo + j * w, y1 = y0 + w;
            // The decreasing curve passes within one cell of the flagged cell.
            const double left = x0 - w, right = x1 + w;
            const double f_left = left <= 0.0 ? std::numeric_limits<double>::infinity() : curve(left);
            EXPECT_TRUE(f_left >= y0 - w && curve(right) <= y1 + w) << i << "," << j;
        }
    }
    EXPECT_GT(level_cells, res / 2);
}

TEST(RegionMap, SymmetricAndBounded) {
    const RegionMap map = region_map(2.0, 64);
    for (int i = 0; i < 64; ++i)
        for (int j = 0; j < 64; ++j) EXPECT_EQ(map.at(i, j), map.at(j, i));
    const RegionMap empty = region_map(M_PI - 0.01, 32, 1.0, -1000.0);
    for (RegionClass c : empty.cells) EXPECT_EQ(c, RegionClass::Neither);
    EXPECT_EQ(code_of([] { region_map(1.0, 1); }), Errc::BadRange);
    EXPECT_EQ(code_of([] { region_map(1.0, 4096); }), Errc::BadRange);
}
