#include "dhym/suites.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <random>

#include "dhym/config.hpp"
#include "dhym/error.hpp"
#include "dhym/hermitian.hpp"
#include "dhym/phase.hpp"
#include "dhym/torus.hpp"

namespace dhym {

namespace {

constexpr double kHalfPi = M_PI / 2.0;
constexpr double kInf = std::numeric_limits<double>::infinity();

struct Tally {
    SuiteRow row;
    explicit Tally(std::string name, double worst_init) { row.property = std::move(name), row.worst = worst_init; }
    void record(bool ok) {
        ++row.checked;
        if (!ok) ++row.failures;
    }
    void low(double v) { row.worst = std::min(row.worst, v); }
    void high(double v) { row.worst = std::max(row.worst, v); }
};

HermitianMatrix random_hermitian(int n, std::mt19937_64& rng, double scale = 1.0) {
    std::normal_distribution<double> g(0.0, scale);
    CMatrix a(n);
    for (int i = 0; i < n; ++i) {
        a(i, i) = g(rng);
        for (int j = i + 1; j < n; ++j) {
            a(i, j) = Complex(g(rng), g(rng));
            a(j, i) = std::conj(a(i, j));
        }
    }
    return HermitianMatrix(a);
}

HermitianMatrix random_positive(int n, std::mt19937_64& rng) {
    const HermitianMatrix x = random_hermitian(n, rng, 0.5);
    return HermitianMatrix(x.matrix() * x.matrix() + CMatrix::identity(n) * Complex(0.5, 0.0));
}

/// Diagonal entries drawn from [-2, 2] with pairwise gaps of at least `gap`.
std::vector<double> spread_spectrum(int n, std::mt19937_64& rng, double gap) {
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (;;) {
        std::vector<double> d(n);
        for (double& x : d) x = u(rng);
        std::vector<double> s = d;
        std::sort(s.begin(), s.end());
        bool ok = true;
        for (int i = 1; i < n; ++i) ok = ok && s[i] - s[i - 1] >= gap;
        if (ok) return d;
    }
}

/// Eigenvalues of a perturbed diagonal matrix, reordered to follow the
/// diagonal entries of the unperturbed one.
std::vector<double> tracked_eigenvalues(const HermitianMatrix& m, const std::vector<double>& diag) {
    const EigenSystem es = eig_hermitian(m);
    const int n = static_cast<int>(diag.size());
    std::vector<int> order(n);
    for (int i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](int a, int b) { return diag[a] > diag[b]; });
    std::vector<double> out(n);
    for (int rank = 0; rank < n; ++rank) out[order[rank]] = es.lambdas[rank];
    return out;
}

double rel_err(double fd, double exact) { return std::abs(fd - exact) / std::max(1.0, std::abs(exact)); }

double spectral_value(SpectralFunction f, std::span<const double> l, double c_eps) {
    if (f == SpectralFunction::ArctanSum) return theta_arctan(l);
    return std::log(c_eps + *std::max_element(l.begin(), l.end()));
}

std::string tag(int n, const std::string& what) { return "n=" + std::to_string(n) + " " + what; }

} // namespace

long SuiteResult::failures() const {
    long f = 0;
    for (const auto& r : rows) f += r.failures;
    return f;
}

SuiteResult subsolution_suite(int n, int samples, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    const double floor = supercritical_floor(n);
    std::uniform_real_distribution<double> h_dist(floor + 0.05, n * kHalfPi - 0.05);
    std::uniform_real_distribution<double> angle(-kHalfPi + 0.02, kHalfPi - 0.02);
    std::normal_distribution<double> jitter(0.0, 0.05);

    Tally agree(tag(n, "criterion_vs_oracle"), kInf);
    Tally margin(tag(n, "stability_margin"), kInf);
    Tally lattice(tag(n, "lattice"), kInf);
    int made = 0;
    while (made < samples) {
        const double h = h_dist(rng);
        std::vector<double> mu(n);
        for (double& m : mu) m = std::tan(angle(rng));
        const SubsolutionVerdict v = is_csub_pointwise(mu, h);
        // Instances on the boundary of the criterion are not decidable by a
        // finite march; skip them.
        if (std::abs(v.worst_margin) < 1e-3) continue;
        ++made;
        const bool bounded = csub_bounded_oracle(mu, h);
        agree.record(bounded == v.is_csub);
        agree.low(std::abs(v.worst_margin));

        if (v.is_csub) {
            // A small cloud of nearby points plays the role of the potential
            // sampled over the manifold.
            std::vector<std::vector<double>> cloud{mu};
            for (int k = 0; k < 3; ++k) {
                std::vector<double> p = mu;
                for (double& x : p) x = std::tan(std::clamp(std::atan(x) + jitter(rng), -kHalfPi + 1e-3, kHalfPi - 1e-3));
                cloud.push_back(p);
            }
            std::vector<SubsolutionVerdict> verdicts;
            for (const auto& p : cloud) verdicts.push_back(is_csub_pointwise(p, h));
            const bool all = std::all_of(verdicts.begin(), verdicts.end(), [](const auto& x) { return x.is_csub; });
            if (all) {
                const double eps = csub_stability_margin(verdicts);
                margin.low(eps);
                const double raised = h + 0.5 * eps;
                if (raised < n * kHalfPi) {
                    bool ok = true;
                    for (const auto& p : cloud) ok = ok && is_csub_pointwise(p, raised).is_csub;
                    margin.record(ok);
                }
                const double past = h + 1.01 * eps;
                if (past < n * kHalfPi) {
                    bool some_fails = false;
                    for (const auto& p : cloud) some_fails = some_fails || !is_csub_pointwise(p, past).is_csub;
                    margin.record(some_fails);
                }
            }

            const double h2 = h_dist(rng);
            const bool both = is_csub_pointwise(mu, h2).is_csub;
            const bool lat = csub_lattice_check(mu, h, h2);
            lattice.record(lat == both);
            lattice.low(std::abs(is_csub_pointwise(mu, std::max(h, h2)).worst_margin));
        }
    }
    return {"subsolution", {agree.row, margin.row, lattice.row}};
}

SuiteResult lemma23_suite(int n, double sigma, double eps0, int samples, std::uint64_t seed) {
    const PhaseSpec spec{n, sigma, eps0};
    spec.validate();
    std::mt19937_64 rng(seed);
    // Every angle on the level set exceeds sigma - (n-1)pi/2, so drawing the
    // free angles above that keeps rejection cheap near the top of the band.
    std::uniform_real_distribution<double> angle(std::max(-kHalfPi, sigma - (n - 1) * kHalfPi), kHalfPi);
    const std::string at = " sigma=" + std::to_string(sigma);
    Tally pair(tag(n, "pair_sum") + at, kInf);
    Tally sym(tag(n, "sigma_k") + at, kInf);
    Tally neg(tag(n, "negative_bound") + at, kInf);

    const long max_attempts = 1000L * samples;
    long attempts = 0;
    int made = 0;
    std::vector<double> free(n - 1);
    while (made < samples) {
        if (++attempts > max_attempts) fail(Errc::PreconditionFailed, "level set sampling keeps failing");
        for (double& x : free) x = std::tan(angle(rng));
        const auto point = level_set_sample(spec, free);
        if (!point) continue;
        ++made;
        const auto& l = *point;
        const Lemma23Report r = lemma23_check(l, spec);
        pair.record(r.i_holds);
        if (n >= 2) pair.low(l[n - 2] + l[n - 1] - std::tan(eps0 / 2.0));
        sym.record(r.ii_holds);
        for (int k = 1; k <= n - 1; ++k) sym.low(sigma_k(l, k));
        neg.record(r.iv_holds);
        if (l[n - 1] <= 0.0) neg.low(r.min_lambda_bound - std::abs(l[n - 1]));
    }
    return {"lemma23", {pair.row, sym.row, neg.row}};
}

SuiteResult invariance_suite(int n, int N, int samples, std::uint64_t seed) {
    const TorusGrid grid(n, N);
    std::mt19937_64 rng(seed);
    const int kmax = N / 4;
    std::uniform_int_distribution<int> wave(-kmax, kmax);
    std::uniform_real_distribution<double> amp(-1.0, 1.0);

    auto random_potential = [&](int terms, double size) {
        std::vector<FourierMode> modes;
        for (int t = 0; t < terms; ++t) {
            FourierMode m;
            m.k.resize(2 * n);
            double k2 = 0.0;
            for (int& k : m.k) {
                k = wave(rng);
                k2 += k * k;
            }
            m.cosine = amp(rng) > 0.0;
            m.amplitude = size * amp(rng) / (1.0 + k2);
            modes.push_back(m);
        }
        return sample_modes(modes, grid);
    };

    const HermitianFormField omega = HermitianFormField::constant(grid, HermitianMatrix::identity(n));
    CMatrix base(n);
    if (n == 1) {
        base(0, 0) = 0.5;
    } else {
        base(0, 0) = 1.2;
        base(1, 1) = 0.8;
        base(0, 1) = Complex(0.1, 0.05);
        base(1, 0) = std::conj(base(0, 1));
    }
    const HermitianFormField chi0 =
        HermitianFormField::constant(grid, HermitianMatrix(base)) + i_ddbar(random_potential(3, 0.5));
    const double reference = hat_theta(omega, chi0).hat_theta;

    Tally inv(tag(n, "hat_theta_shift"), 0.0);
    Tally branch(tag(n, "branch_certificate"), 0.0);
    for (int s = 0; s < samples; ++s) {
        const ScalarField v = random_potential(4, 1.0);
        const AngleResult r = hat_theta(omega, chi0 + i_ddbar(v));
        const double shift = std::abs(r.hat_theta - reference);
        inv.record(shift <= 1e-10);
        inv.high(shift);
        branch.record(r.branch_certificate < kHalfPi);
        branch.high(r.branch_certificate);
    }
    return {"invariance", {inv.row, branch.row}};
}

SuiteResult derivatives_suite(int n, int samples, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    constexpr double h1 = 1e-5;
    constexpr double h2 = 1e-4;
    constexpr double tol1 = 1e-6;
    constexpr double tol2 = 1e-4;
    constexpr double c_eps = 3.0;

    Tally eig1(tag(n, "eigenvalue_first"), 0.0), eig2(tag(n, "eigenvalue_second"), 0.0);
    Tally spec1(tag(n, "spectral_first"), 0.0), spec2(tag(n, "spectral_second"), 0.0);
    Tally scal(tag(n, "eigenvalue_function_derivatives"), 0.0);
    Tally grad(tag(n, "angle_gradient"), 0.0);

    for (int s = 0; s < samples; ++s) {
        const std::vector<double> d = spread_spectrum(n, rng, 0.2);
        const HermitianMatrix lam = HermitianMatrix::diagonal(d);
        // Unit Frobenius direction keeps the fourth-order truncation term of
        // the second difference well below the tolerance.
        HermitianMatrix H = random_hermitian(n, rng);
        double frob = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) frob += std::norm(H(i, j));
        H = H * (1.0 / std::sqrt(frob));
        auto at = [&](double e) { return lam + H * e; };

        // Eigenvalue derivatives.
        const EigenvalueDerivatives ed = eigenvalue_derivatives(lam);
        const auto p1 = tracked_eigenvalues(at(h1), d), m1 = tracked_eigenvalues(at(-h1), d);
        const auto p2 = tracked_eigenvalues(at(h2), d), m2 = tracked_eigenvalues(at(-h2), d);
        for (int i = 0; i < n; ++i) {
            Complex first = 0.0, second = 0.0;
            for (int p = 0; p < n; ++p)
                for (int q = 0; q < n; ++q) {
                    first += ed.d1(i, p, q) * H(p, q);
                    for (int r = 0; r < n; ++r)
                        for (int t = 0; t < n; ++t) second += ed.d2(i, p, q, r, t) * H(p, q) * H(r, t);
                }
            const double e1 = rel_err((p1[i] - m1[i]) / (2 * h1), first.real());
            const double e2 = rel_err((p2[i] - 2 * d[i] + m2[i]) / (h2 * h2), second.real());
            eig1.record(e1 <= tol1);
            eig1.high(e1);
            eig2.record(e2 <= tol2);
            eig2.high(e2);
        }

        // Spectral functions.
        for (SpectralFunction f : {SpectralFunction::ArctanSum, SpectralFunction::LogMax}) {
            const SpectralDerivatives sd = spectral_function_derivatives(f, lam, c_eps);
            Complex first = 0.0, second = 0.0;
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) {
                    first += sd.d1(i, j) * H(i, j);
                    for (int r = 0; r < n; ++r)
                        for (int t = 0; t < n; ++t) second += sd.d2(i, j, r, t) * H(i, j) * H(r, t);
                }
            const double f0 = spectral_value(f, d, c_eps);
            const double fd1 = (spectral_value(f, p1, c_eps) - spectral_value(f, m1, c_eps)) / (2 * h1);
            const double fd2 =
                (spectral_value(f, p2, c_eps) - 2 * f0 + spectral_value(f, m2, c_eps)) / (h2 * h2);
            const double e1 = rel_err(fd1, first.real());
            const double e2 = rel_err(fd2, second.real());
            spec1.record(e1 <= tol1);
            spec1.high(e1);
            spec2.record(e2 <= tol2);
            spec2.high(e2);

            // Derivatives in the eigenvalues themselves: F^{ii} = f_i, F^{ii,jj} = f_ij.
            for (int i = 0; i < n; ++i) {
                std::vector<double> up = d, dn = d;
                up[i] += h1;
                dn[i] -= h1;
                const double e = rel_err((spectral_value(f, up, c_eps) - spectral_value(f, dn, c_eps)) / (2 * h1),
                                         sd.d1(i, i));
                scal.record(e <= tol1);
                scal.high(e);
                for (int j = 0; j < n; ++j) {
                    auto shifted = [&](double a, double b) {
                        std::vector<double> x = d;
                        x[i] += a;
                        x[j] += b;
                        return spectral_value(f, x, c_eps);
                    };
                    const double mixed =
                        (shifted(h2, h2) - shifted(h2, -h2) - shifted(-h2, h2) + shifted(-h2, -h2)) / (4 * h2 * h2);
                    const double e2b = rel_err(mixed, sd.d2(i, i, j, j));
                    scal.record(e2b <= tol2);
                    scal.high(e2b);
                }
            }
        }

        // Gradient of the angle for a general metric: (Id + Lambda^2)^{-1} contracted with omega^{-1} H.
        const HermitianMatrix omega = random_positive(n, rng);
        const HermitianMatrix chi = random_hermitian(n, rng);
        const CMatrix winv = inverse(omega.matrix());
        const CMatrix L = winv * chi.matrix();
        const CMatrix grad_m = inverse(CMatrix::identity(n) + L * L);
        const double exact = (grad_m * winv * H.matrix()).trace().real();
        const double via_eig = contract(dF(eig_pair(omega, chi)), H);
        const double fd = (theta_arctan(eig_pair(omega, chi + H * h1).values()) -
                           theta_arctan(eig_pair(omega, chi + H * (-h1)).values())) /
                          (2 * h1);
        const double e = std::max(rel_err(fd, exact), rel_err(via_eig, exact));
        grad.record(e <= tol1);
        grad.high(e);
    }
    return {"derivatives", {eig1.row, eig2.row, spec1.row, spec2.row, scal.row, grad.row}};
}

SuiteResult prop21_suite(int n, double sigma, int samples, std::uint64_t seed) {
    const double floor = supercritical_floor(n);
    const PhaseSpec spec{n, sigma, sigma - floor};
    spec.validate();
    constexpr double delta = 0.05;
    // B with lambda(B) - 2 delta strictly inside the subsolution region.
    const double inner = std::tan((sigma - kHalfPi) / (n - 1) + 0.3 / (n - 1));
    const std::vector<double> diag(n, inner + 2.0 * delta);
    const HermitianMatrix b = HermitianMatrix::diagonal(diag);
    const double radius = containment_radius(b, spec, delta);

    Tally positive(tag(n, "kappa_positive") + " sigma=" + std::to_string(sigma), kInf);
    Tally monotone(tag(n, "kappa_monotone_in_R") + " sigma=" + std::to_string(sigma), kInf);
    const double r0 = std::max(2.0 * radius, 1.0);
    const auto pool = draw_kappa_samples(spec, r0, std::max(samples, 1000), seed);
    double previous = -kInf;
    for (double factor : {1.0, 2.0, 4.0, 8.0}) {
        std::vector<KappaSample> kept;
        for (const auto& s : pool)
            if (s.norm > r0 * factor) kept.push_back(s);
        if (kept.empty()) break;
        const double kappa = kappa_from_samples(b, kept);
        positive.record(kappa > 0.0);
        positive.low(kappa);
        monotone.record(kappa >= previous);
        previous = kappa;
    }
    const double estimate = prop21_kappa_estimate(b, spec, delta, r0, std::max(samples, 1000), seed + 1);
    positive.record(estimate > 0.0);
    positive.low(estimate);
    monotone.row.worst = previous;
    return {"prop21", {positive.row, monotone.row}};
}

SuiteResult run_suite(const RunConfig& cfg) {
    const std::string& name = cfg.suite;
    auto dims = [&](std::vector<int> defaults) { return cfg.check_n ? std::vector<int>{cfg.check_n} : defaults; };
    auto merge = [](SuiteResult& into, const SuiteResult& part) {
        into.rows.insert(into.rows.end(), part.rows.begin(), part.rows.end());
    };
    SuiteResult out{name, {}};
    auto require_dim = [](int n, int lo, int hi) {
        if (n < lo || n > hi) {
            fail(Errc::InvalidConfig, "check.n must be in " + std::to_string(lo) + ".." + std::to_string(hi));
        }
    };
    std::uint64_t seed = cfg.seed;
    if (name == "subsolution") {
        for (int n : dims({2, 3})) {
            require_dim(n, 2, 4);
            merge(out, subsolution_suite(n, cfg.samples, seed++));
        }
    } else if (name == "lemma23") {
        for (int n : dims({2, 3})) {
            require_dim(n, 2, 4);
            const double floor = supercritical_floor(n);
            std::vector<double> sigmas = cfg.sigma != 0.0
                                             ? std::vector<double>{cfg.sigma}
                                             : std::vector<double>{floor + 0.2, (n - 1) * kHalfPi, n * kHalfPi - 0.2};
            for (double sigma : sigmas) {
                const double eps0 = cfg.check_eps0_set ? cfg.check_eps0 : sigma - floor;
                try {
                    merge(out, lemma23_suite(n, sigma, eps0, cfg.samples, seed++));
                } catch (const Error& e) {
                    if (e.code() == Errc::PhaseOutOfRange || e.code() == Errc::PreconditionFailed) {
                        fail(Errc::InvalidConfig, e.what());
                    }
                    throw;
                }
            }
        }
    } else if (name == "invariance") {
        for (int n : dims({1, 2})) {
            require_dim(n, 1, 2);
            merge(out, invariance_suite(n, cfg.N, cfg.samples, seed++));
        }
    } else if (name == "derivatives") {
        for (int n : dims({2, 3, 4})) {
            require_dim(n, 2, 4);
            merge(out, derivatives_suite(n, cfg.samples, seed++));
        }
    } else if (name == "prop21") {
        for (int n : dims({2, 3})) {
            require_dim(n, 2, 4);
            const double sigma = cfg.sigma != 0.0 ? cfg.sigma : (n - 1) * kHalfPi;
            try {
                merge(out, prop21_suite(n, sigma, cfg.samples, seed++));
            } catch (const Error& e) {
                if (e.code() == Errc::PhaseOutOfRange) fail(Errc::InvalidConfig, e.what());
                throw;
            }
        }
    } else {
        fail(Errc::InvalidConfig, "unknown suite '" + name +
                                      "' (expected subsolution, lemma23, invariance, derivatives or prop21)");
    }
    return out;
}

void write_suite_csv(std::ostream& os, const SuiteResult& r) {
    os << "suite,property,checked,failures,worst\n";
    os << std::setprecision(17);
    for (const auto& row : r.rows) {
        os << r.suite << ',' << row.property << ',' << row.checked << ',' << row.failures << ',' << row.worst << '\n';
    }
}

} // namespace dhym
