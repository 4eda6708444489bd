#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

namespace dhym {

struct RunConfig;

struct SuiteRow {
    std::string property;
    long checked = 0;
    long failures = 0;
    double worst = 0.0; ///< worst observed margin or error for the property
};

struct SuiteResult {
    std::string suite;
    std::vector<SuiteRow> rows;

    long failures() const;
};

/// Pointwise C-subsolution criterion against the boundedness oracle, plus the
/// stability margin and lattice properties, on random instances.
SuiteResult subsolution_suite(int n, int samples, std::uint64_t seed);

/// Arithmetic of level-set points: pair sum, elementary symmetric functions
/// and the lower bound on a negative eigenvalue.
SuiteResult lemma23_suite(int n, double sigma, double eps0, int samples, std::uint64_t seed);

/// Invariance of hat_theta under chi -> chi + i ddbar v for band-limited v.
SuiteResult invariance_suite(int n, int N, int samples, std::uint64_t seed);

/// Eigenvalue and spectral-function derivative formulas against central
/// finite differences on random matrices with distinct spectrum.
SuiteResult derivatives_suite(int n, int samples, std::uint64_t seed);

/// Positivity of the empirical dichotomy constant kappa for a subsolution B.
SuiteResult prop21_suite(int n, double sigma, int samples, std::uint64_t seed);

/// Dispatches on cfg.suite. Throws InvalidConfig for an unknown suite name.
SuiteResult run_suite(const RunConfig& cfg);

void write_suite_csv(std::ostream& os, const SuiteResult& r);

} // namespace dhym
