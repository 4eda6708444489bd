#include "dhym/phase.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <random>

#include "dhym/error.hpp"

namespace dhym {

namespace {

constexpr double kHalfPi = M_PI / 2.0;
constexpr double kLevelSetTol = 1e-9;

std::vector<double> sorted_desc(std::span<const double> v) {
    std::vector<double> s(v.begin(), v.end());
    std::sort(s.begin(), s.end(), std::greater<>());
    return s;
}

void check_phase(int n, double h) {
    const double lo = supercritical_floor(n);
    const double hi = n * kHalfPi;
    if (!(h > lo && h < hi)) {
        fail(Errc::PhaseOutOfRange, "phase " + std::to_string(h) + " outside (" + std::to_string(lo) + ", " +
                                        std::to_string(hi) + ")");
    }
}

// Tries to complete lambda'_j = mu_j + t to a point of the level set with
// every other coordinate >= mu_l. The completion spreads the excess angle
// over the other coordinates in proportion to their headroom below pi/2 and
// the result is re-evaluated on the level set.
bool complete_direction(std::span<const double> mus, double h, int j, double t) {
    const int n = static_cast<int>(mus.size());
    const double lj = mus[j] + t;
    double excess = h - std::atan(lj);
    double headroom = 0.0;
    for (int l = 0; l < n; ++l) {
        if (l == j) continue;
        excess -= std::atan(mus[l]);
        headroom += kHalfPi - std::atan(mus[l]);
    }
    if (excess < 0.0 || excess >= headroom) return false;

    std::vector<double> point(n);
    point[j] = lj;
    for (int l = 0; l < n; ++l) {
        if (l == j) continue;
        const double base = std::atan(mus[l]);
        const double share = headroom > 0.0 ? excess * (kHalfPi - base) / headroom : 0.0;
        point[l] = std::tan(base + share);
        if (!std::isfinite(point[l]) || point[l] < mus[l] - 1e-12 * (1.0 + std::abs(mus[l]))) return false;
    }
    return std::abs(theta_arctan(point) - h) <= kLevelSetTol;
}

std::vector<double> eigenvalues_of(const HermitianMatrix& b) {
    const EigenSystem es = eig_hermitian(b);
    return {es.values().begin(), es.values().end()};
}

CMatrix random_unitary(int n, std::mt19937_64& rng) {
    std::normal_distribution<double> g(0.0, 1.0);
    CMatrix q(n);
    for (int k = 0; k < n; ++k) {
        std::vector<Complex> v(n);
        for (;;) {
            for (auto& x : v) x = Complex(g(rng), g(rng));
            for (int m = 0; m < k; ++m) {
                Complex proj = 0.0;
                for (int i = 0; i < n; ++i) proj += std::conj(q(i, m)) * v[i];
                for (int i = 0; i < n; ++i) v[i] -= proj * q(i, m);
            }
            double norm = 0.0;
            for (const auto& x : v) norm += std::norm(x);
            norm = std::sqrt(norm);
            if (norm > 1e-8) {
                for (int i = 0; i < n; ++i) q(i, k) = v[i] / norm;
                break;
            }
        }
    }
    return q;
}

} // namespace

double supercritical_floor(int n) { return (n - 2) * kHalfPi; }

void PhaseSpec::validate() const {
    if (n < 1 || n > kMaxDim) fail(Errc::DimensionMismatch, "phase spec dimension " + std::to_string(n));
    check_phase(n, sigma);
    if (!(eps0 > 0.0)) fail(Errc::PreconditionFailed, "eps0 must be positive");
    if (sigma - supercritical_floor(n) < eps0 - 1e-12) {
        fail(Errc::PreconditionFailed, "sigma - (n-2)pi/2 must be at least eps0");
    }
}

std::optional<std::vector<double>> level_set_sample(const PhaseSpec& spec, std::span<const double> free) {
    if (static_cast<int>(free.size()) != spec.n - 1) {
        fail(Errc::DimensionMismatch, "level_set_sample expects n-1 free values");
    }
    std::vector<double> point = sorted_desc(free);
    const double residual = spec.sigma - theta_arctan(point);
    if (!(std::abs(residual) < kHalfPi)) return std::nullopt;
    const double last = std::tan(residual);
    if (!point.empty() && last > point.back()) return std::nullopt;
    point.push_back(last);
    return point;
}

Lemma23Report lemma23_check(std::span<const double> lambdas, const PhaseSpec& spec) {
    const int n = static_cast<int>(lambdas.size());
    if (n != spec.n) fail(Errc::DimensionMismatch, "lemma23_check dimension mismatch");
    const std::vector<double> l = sorted_desc(lambdas);
    if (std::abs(theta_arctan(l) - spec.sigma) > kLevelSetTol) {
        fail(Errc::NotOnLevelSet, "sum arctan differs from sigma by more than 1e-9");
    }

    Lemma23Report r;
    r.i_holds = n < 2 || l[n - 2] + l[n - 1] >= std::tan(spec.eps0 / 2.0) - 1e-12;
    r.ii_holds = true;
    for (int k = 1; k <= n - 1; ++k) r.ii_holds = r.ii_holds && sigma_k(l, k) >= -1e-12;
    // cot(eps0) comes from the two-dimensional asymptote; it is reported, not assumed.
    r.min_lambda_bound = 1.0 / std::tan(spec.eps0) + 1e-9;
    r.iv_holds = l[n - 1] > 0.0 || std::abs(l[n - 1]) <= r.min_lambda_bound;
    return r;
}

SubsolutionVerdict is_csub_pointwise(std::span<const double> mus, double h) {
    const int n = static_cast<int>(mus.size());
    check_phase(n, h);
    const double total = theta_arctan(mus);
    SubsolutionVerdict v;
    v.worst_margin = std::numeric_limits<double>::infinity();
    for (int j = 0; j < n; ++j) {
        const double margin = (total - std::atan(mus[j])) - (h - kHalfPi);
        if (margin < v.worst_margin) {
            v.worst_margin = margin;
            v.witness_j = j;
        }
    }
    v.is_csub = v.worst_margin > 0.0;
    return v;
}

bool csub_bounded_oracle(std::span<const double> mus, double h, double t_max, int steps) {
    const int n = static_cast<int>(mus.size());
    if (n <= 1) return true;
    if (steps < 2) fail(Errc::PreconditionFailed, "oracle needs at least two steps");
    const double t_min = 1e-3;
    const double ratio = std::log(t_max / t_min) / (steps - 1);
    for (int j = 0; j < n; ++j) {
        bool feasible_at_end = false;
        for (int k = 0; k < steps; ++k) {
            const double t = k + 1 == steps ? t_max : t_min * std::exp(ratio * k);
            const bool ok = complete_direction(mus, h, j, t);
            if (k + 1 == steps) feasible_at_end = ok;
        }
        if (feasible_at_end) return false;
    }
    return true;
}

double csub_stability_margin(std::span<const SubsolutionVerdict> verdicts) {
    if (verdicts.empty()) fail(Errc::PreconditionFailed, "no verdicts");
    double eps = std::numeric_limits<double>::infinity();
    for (const auto& v : verdicts) {
        if (!(v.worst_margin > 0.0)) fail(Errc::NotASubsolution, "a point fails the subsolution test");
        eps = std::min(eps, v.worst_margin);
    }
    return eps;
}

bool csub_lattice_check(std::span<const double> mus, double h1, double h2) {
    return is_csub_pointwise(mus, std::max(h1, h2)).is_csub && is_csub_pointwise(mus, std::min(h1, h2)).is_csub;
}

double kappa_from_samples(const HermitianMatrix& b, std::span<const KappaSample> samples) {
    if (samples.empty()) fail(Errc::PreconditionFailed, "no kappa samples");
    const int n = b.dim();
    double kappa = std::numeric_limits<double>::infinity();
    for (const auto& s : samples) {
        const CMatrix eta = CMatrix::identity(n) + s.a.matrix() * s.a.matrix();
        const HermitianMatrix eta_inv(inverse(eta));
        const double total = eta_inv.matrix().trace().real();
        const double branch_one = contract(eta_inv, b - s.a) / total;
        double branch_two = std::numeric_limits<double>::infinity();
        for (int i = 0; i < n; ++i) branch_two = std::min(branch_two, eta_inv(i, i).real() / total);
        kappa = std::min(kappa, std::max(branch_one, branch_two));
    }
    return kappa;
}

std::vector<KappaSample> draw_kappa_samples(const PhaseSpec& spec, double r_min, int count, std::uint64_t seed) {
    spec.validate();
    const int n = spec.n;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_int_distribution<int> pick(0, n - 1);
    std::vector<KappaSample> out;
    out.reserve(count);
    const long max_attempts = 10000L * std::max(count, 1);
    for (long attempt = 0; static_cast<int>(out.size()) < count; ++attempt) {
        if (attempt >= max_attempts) fail(Errc::PreconditionFailed, "could not draw level-set samples");
        std::vector<double> angles(n, 0.0);
        const int big = pick(rng);
        const int last = (big + 1) % n;
        // One entry log-uniform in (r_min, 100 r_min); the others free.
        angles[big] = std::atan(std::max(r_min, 1e-3) * std::exp(unit(rng) * std::log(100.0)) * (1.0 + 1e-9));
        double used = angles[big];
        for (int k = 0; k < n; ++k) {
            if (k == big || k == last) continue;
            angles[k] = (unit(rng) - 0.5) * M_PI;
            used += angles[k];
        }
        angles[last] = spec.sigma - used;
        if (n > 1 && !(std::abs(angles[last]) < kHalfPi)) continue;
        std::vector<double> lam(n);
        double norm = 0.0;
        for (int k = 0; k < n; ++k) {
            lam[k] = std::tan(angles[k]);
            norm += lam[k] * lam[k];
        }
        norm = std::sqrt(norm);
        if (!(norm > r_min) || std::abs(theta_arctan(lam) - spec.sigma) > kLevelSetTol) continue;
        const CMatrix u = random_unitary(n, rng);
        CMatrix d(n);
        for (int k = 0; k < n; ++k) d(k, k) = lam[k];
        out.push_back({HermitianMatrix(u * d * u.adjoint()), norm});
    }
    return out;
}

double containment_radius(const HermitianMatrix& b, const PhaseSpec& spec, double delta) {
    std::vector<double> mu = eigenvalues_of(b);
    for (double& m : mu) m -= 2.0 * delta;
    if (!csub_bounded_oracle(mu, spec.sigma)) return std::numeric_limits<double>::infinity();
    const int n = static_cast<int>(mu.size());
    if (theta_arctan(mu) > spec.sigma) return 0.0; // empty intersection
    double r2 = 0.0;
    for (int j = 0; j < n; ++j) {
        const double angle = spec.sigma - (theta_arctan(mu) - std::atan(mu[j]));
        const double top = std::tan(std::min(angle, kHalfPi - 1e-15));
        const double extent = std::max(std::abs(mu[j]), std::abs(top));
        r2 += extent * extent;
    }
    return std::sqrt(r2);
}

double prop21_kappa_estimate(const HermitianMatrix& b, const PhaseSpec& spec, double delta, double r, int samples,
                             std::uint64_t seed) {
    spec.validate();
    if (b.dim() != spec.n) fail(Errc::DimensionMismatch, "B order differs from spec dimension");
    if (samples < 1000) fail(Errc::PreconditionFailed, "at least 1000 samples required");
    const double radius = containment_radius(b, spec, delta);
    if (!(radius < r)) {
        fail(Errc::PreconditionFailed, "containment radius " + std::to_string(radius) + " not below R");
    }
    const auto drawn = draw_kappa_samples(spec, r, samples, seed);
    return kappa_from_samples(b, drawn);
}

double RegionMap::coordinate(int i) const { return lo + offset + (i + 0.5) * (hi - lo) / resolution; }

RegionMap region_map(double sigma, int resolution, double scale, double offset) {
    if (resolution < 2 || resolution > 2048) fail(Errc::BadRange, "resolution must be in 2..2048");
    if (!(scale > 0.0)) fail(Errc::BadRange, "scale must be positive");
    check_phase(2, sigma);
    RegionMap map;
    map.resolution = resolution;
    map.lo = -kHalfPi * scale;
    map.hi = M_PI * scale;
    map.offset = offset;
    map.cells.assign(static_cast<std::size_t>(resolution) * resolution, RegionClass::Neither);
    const double w = (map.hi - map.lo) / resolution;
    auto edge = [&](int i) { return map.lo + offset + i * w; };
    for (int i = 0; i < resolution; ++i) {
        for (int j = 0; j < resolution; ++j) {
            // Theta is increasing in each coordinate, so the corner extremes bound the cell.
            const double low = std::atan(edge(i)) + std::atan(edge(j));
            const double high = std::atan(edge(i + 1)) + std::atan(edge(j + 1));
            RegionClass c = RegionClass::Neither;
            if (low <= sigma && sigma <= high) {
                c = RegionClass::LevelSet;
            } else {
                const double center[2] = {map.coordinate(i), map.coordinate(j)};
                if (is_csub_pointwise(center, sigma).is_csub) c = RegionClass::Subsolution;
            }
            map.cells[static_cast<std::size_t>(i) * resolution + j] = c;
        }
    }
    return map;
}

} // namespace dhym
