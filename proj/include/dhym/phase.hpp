#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "dhym/hermitian.hpp"

namespace dhym {

/// Target phase sigma together with its supercritical margin eps0.
///
/// Valid specs satisfy (n-2)pi/2 < sigma < n pi/2 and
/// sigma - (n-2)pi/2 >= eps0 > 0.
struct PhaseSpec {
    int n = 2;
    double sigma = 0.0;
    double eps0 = 0.0;

    /// Throws PhaseOutOfRange or PreconditionFailed on an invalid spec.
    void validate() const;
};

/// (n-2)pi/2, the supercritical floor.
double supercritical_floor(int n);

/// Point of the level set {sum arctan = sigma} whose first n-1 entries are
/// `free` (sorted descending). Empty when the residual angle leaves
/// (-pi/2, pi/2) or the completed entry would not be the smallest.
std::optional<std::vector<double>> level_set_sample(const PhaseSpec& spec, std::span<const double> free);

struct Lemma23Report {
    bool i_holds = false;   ///< lambda_{n-1} + lambda_n >= tan(eps0/2)
    bool ii_holds = false;  ///< sigma_k >= 0 for 1 <= k <= n-1
    bool iv_holds = false;  ///< lambda_n <= 0 implies |lambda_n| <= min_lambda_bound
    double min_lambda_bound = 0.0;
};

/// Arithmetic properties of a sorted point on the level set. Throws
/// NotOnLevelSet when |sum arctan - sigma| > 1e-9.
Lemma23Report lemma23_check(std::span<const double> lambdas, const PhaseSpec& spec);

struct SubsolutionVerdict {
    bool is_csub = false;
    double worst_margin = 0.0;
    int witness_j = 0;
};

/// Pointwise C-subsolution test: for every j,
/// sum_{l != j} arctan(mu_l) > h - pi/2. Throws PhaseOutOfRange unless
/// (n-2)pi/2 < h < n pi/2.
SubsolutionVerdict is_csub_pointwise(std::span<const double> mus, double h);

/// Brute-force boundedness test of
/// {lambda' : sum arctan(lambda') = h, lambda' - mu in the closed orthant}.
///
/// For each coordinate j the value lambda'_j = mu_j + t is marched over a
/// log-spaced grid up to t_max; at every t a completion of the remaining
/// coordinates is constructed explicitly and re-evaluated on the level set.
/// The set counts as bounded when no direction admits a completion at t_max.
bool csub_bounded_oracle(std::span<const double> mus, double h, double t_max = 1e6, int steps = 10000);

/// Largest uniform perturbation of h that keeps every verdict true.
/// Throws NotASubsolution if some margin is <= 0.
double csub_stability_margin(std::span<const SubsolutionVerdict> verdicts);

/// True iff mu is a C-subsolution for both max(h1, h2) and min(h1, h2).
bool csub_lattice_check(std::span<const double> mus, double h1, double h2);

/// Hermitian matrix with eigenvalues on the level set used by the kappa sweep.
struct KappaSample {
    HermitianMatrix a;
    double norm = 0.0; ///< Euclidean norm of the eigenvalue tuple
};

/// Largest kappa such that each sample satisfies at least one branch of
///   tr(eta^{-1}(B - A)) > kappa tr(eta^{-1})   or
///   (eta^{-1})_{ii} > kappa tr(eta^{-1}) for all i,
/// with eta = Id + A^2.
double kappa_from_samples(const HermitianMatrix& b, std::span<const KappaSample> samples);

/// Random level-set samples with eigenvalue norm > r_min.
std::vector<KappaSample> draw_kappa_samples(const PhaseSpec& spec, double r_min, int count, std::uint64_t seed);

/// Upper bound on the radius of (lambda(B) - 2 delta + orthant) intersected
/// with the level set; +inf when that set is unbounded.
double containment_radius(const HermitianMatrix& b, const PhaseSpec& spec, double delta);

/// Empirical kappa for the dichotomy on samples with |lambda(A)| > r.
/// Throws PreconditionFailed when the containment radius is not below r.
double prop21_kappa_estimate(const HermitianMatrix& b, const PhaseSpec& spec, double delta, double r, int samples,
                             std::uint64_t seed);

/// Cell classes of the n = 2 region map.
enum class RegionClass : int { Neither = 0, Subsolution = 1, LevelSet = 2 };

struct RegionMap {
    int resolution = 0;
    double lo = 0.0;
    double hi = 0.0;
    double offset = 0.0;
    std::vector<RegionClass> cells; ///< row-major, index i (lambda'_1) outer

    double coordinate(int i) const;
    RegionClass at(int i, int j) const { return cells[static_cast<std::size_t>(i) * resolution + j]; }
};

/// Classifies the grid [-pi/2 scale, pi scale]^2 + offset: cells crossed by
/// the level curve sum arctan = sigma are LevelSet; otherwise cell centers
/// passing the pointwise C-subsolution test are Subsolution.
RegionMap region_map(double sigma, int resolution, double scale = 1.0, double offset = 0.0);

} // namespace dhym
