#include "dhym/torus.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <string>

#include "dhym/error.hpp"
#include "parallel.hpp"

namespace dhym {

TorusGrid::TorusGrid(int n, int N) : n_(n), N_(N) {
    if (n != 1 && n != 2) fail(Errc::InvalidGrid, "complex dimension must be 1 or 2, got " + std::to_string(n));
    if (N < 8 || N > 64 || (N & (N - 1)) != 0) {
        fail(Errc::InvalidGrid, "points per axis must be a power of two in [8, 64], got " + std::to_string(N));
    }
    size_ = 1;
    for (int a = 0; a < 2 * n; ++a) size_ *= static_cast<std::size_t>(N);
}

double TorusGrid::spacing() const noexcept { return 2.0 * M_PI / N_; }

double TorusGrid::cell_volume() const noexcept { return std::pow(spacing(), real_dims()); }

double TorusGrid::volume() const noexcept { return std::pow(2.0 * M_PI, real_dims()); }

double TorusGrid::coordinate(std::size_t index, int axis) const noexcept {
    const int shift = real_dims() - 1 - axis;
    for (int s = 0; s < shift; ++s) index /= static_cast<std::size_t>(N_);
    return static_cast<double>(index % static_cast<std::size_t>(N_)) * spacing();
}

HermitianFormField::HermitianFormField(const TorusGrid& g)
    : grid_(g), data_(g.size() * static_cast<std::size_t>(g.n() * g.n())) {}

HermitianFormField HermitianFormField::constant(const TorusGrid& g, const HermitianMatrix& m) {
    if (m.dim() != g.n()) fail(Errc::DimensionMismatch, "matrix order differs from grid dimension");
    HermitianFormField f(g);
    for (std::size_t p = 0; p < g.size(); ++p) f.set(p, m);
    return f;
}

HermitianMatrix HermitianFormField::at(std::size_t p) const {
    const int n = grid_.n();
    CMatrix m(n);
    const Complex* src = data_.data() + p * static_cast<std::size_t>(n * n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m(i, j) = src[i * n + j];
    return HermitianMatrix(m);
}

void HermitianFormField::set(std::size_t p, const HermitianMatrix& m) {
    const int n = grid_.n();
    Complex* dst = data_.data() + p * static_cast<std::size_t>(n * n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) dst[i * n + j] = m(i, j);
}

HermitianFormField operator+(const HermitianFormField& a, const HermitianFormField& b) {
    if (!(a.grid() == b.grid())) fail(Errc::DimensionMismatch, "fields live on different grids");
    HermitianFormField r(a.grid());
    auto out = r.data();
    auto x = a.data();
    auto y = b.data();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] + y[i];
    return r;
}

double integrate(const ScalarField& f) {
    double s = 0.0;
    for (double v : f.values) s += v;
    return s * f.grid.cell_volume();
}

double mean(const ScalarField& f) {
    double s = 0.0;
    for (double v : f.values) s += v;
    return s / static_cast<double>(f.values.size());
}

double sup_norm(const ScalarField& f) {
    double m = 0.0;
    for (double v : f.values) m = std::max(m, std::abs(v));
    return m;
}

ScalarField operator-(const ScalarField& a, const ScalarField& b) {
    if (!(a.grid == b.grid)) fail(Errc::DimensionMismatch, "fields live on different grids");
    ScalarField r(a.grid);
    for (std::size_t i = 0; i < r.values.size(); ++i) r.values[i] = a.values[i] - b.values[i];
    return r;
}

void subtract_mean(ScalarField& f) {
    const double m = mean(f);
    for (double& v : f.values) v -= m;
}

struct SpectralOps::Plans {
    double* real = nullptr;
    fftw_complex* spec = nullptr;
    fftw_complex* work = nullptr;
    fftw_plan r2c = nullptr;
    fftw_plan c2r = nullptr;

    ~Plans() {
        if (r2c) fftw_destroy_plan(r2c);
        if (c2r) fftw_destroy_plan(c2r);
        fftw_free(real);
        fftw_free(spec);
        fftw_free(work);
    }
};

SpectralOps::SpectralOps(const TorusGrid& grid) : grid_(grid), plans_(std::make_unique<Plans>()) {
    const int d = grid.real_dims();
    const int N = grid.N();
    const int n = grid.n();
    spectral_size_ = grid.size() / N * (N / 2 + 1);

    plans_->real = fftw_alloc_real(grid.size());
    plans_->spec = fftw_alloc_complex(spectral_size_);
    plans_->work = fftw_alloc_complex(spectral_size_);
    std::vector<int> dims(d, N);
    plans_->r2c = fftw_plan_dft_r2c(d, dims.data(), plans_->real, plans_->spec, FFTW_ESTIMATE);
    plans_->c2r = fftw_plan_dft_c2r(d, dims.data(), plans_->work, plans_->real, FFTW_ESTIMATE);
    if (!plans_->r2c || !plans_->c2r) fail(Errc::InvalidGrid, "FFTW planning failed");

    // Integer wavenumbers. First-derivative factors drop the Nyquist mode so
    // real fields stay real; pure second derivatives keep it.
    auto wave = [N](int m) { return m <= N / 2 ? m : m - N; };
    auto wave1 = [N, &wave](int m) { return m == N / 2 ? 0 : wave(m); };

    const int ncomp = n * n;
    multipliers_.assign(ncomp, std::vector<double>(spectral_size_, 0.0));
    laplacian_.assign(spectral_size_, 0.0);
    const double norm = 1.0 / static_cast<double>(grid.size());
    std::vector<int> m(d, 0);
    for (std::size_t s = 0; s < spectral_size_; ++s) {
        std::size_t rest = s;
        m[d - 1] = static_cast<int>(rest % static_cast<std::size_t>(N / 2 + 1));
        rest /= static_cast<std::size_t>(N / 2 + 1);
        for (int a = d - 2; a >= 0; --a) {
            m[a] = static_cast<int>(rest % static_cast<std::size_t>(N));
            rest /= static_cast<std::size_t>(N);
        }
        double lap = 0.0;
        for (int j = 0; j < n; ++j) {
            const double kx = wave(m[2 * j]);
            const double ky = wave(m[2 * j + 1]);
            const double diag = -0.25 * (kx * kx + ky * ky);
            multipliers_[j][s] = diag * norm;
            lap += diag;
        }
        int c = n;
        for (int j = 0; j < n; ++j) {
            for (int k = j + 1; k < n; ++k) {
                const double kxj = wave1(m[2 * j]);
                const double kyj = wave1(m[2 * j + 1]);
                const double kxk = wave1(m[2 * k]);
                const double kyk = wave1(m[2 * k + 1]);
                multipliers_[c][s] = -0.25 * (kxj * kxk + kyj * kyk) * norm;
                multipliers_[c + 1][s] = -0.25 * (kxj * kyk - kyj * kxk) * norm;
                c += 2;
            }
        }
        laplacian_[s] = lap;
    }
}

SpectralOps::~SpectralOps() = default;

void SpectralOps::forward(std::span<const double> in) {
    std::copy(in.begin(), in.end(), plans_->real);
    fftw_execute(plans_->r2c);
}

void SpectralOps::backward_with(std::span<const double> multiplier, std::span<double> out) {
    for (std::size_t s = 0; s < spectral_size_; ++s) {
        plans_->work[s][0] = plans_->spec[s][0] * multiplier[s];
        plans_->work[s][1] = plans_->spec[s][1] * multiplier[s];
    }
    fftw_execute(plans_->c2r);
    std::copy(plans_->real, plans_->real + grid_.size(), out.begin());
}

std::vector<std::vector<double>> SpectralOps::ddbar_components(std::span<const double> u) {
    forward(u);
    std::vector<std::vector<double>> comps(components(), std::vector<double>(grid_.size()));
    for (int c = 0; c < components(); ++c) backward_with(multipliers_[c], comps[c]);
    return comps;
}

void SpectralOps::apply_contracted(std::span<const std::vector<double>> coeffs, std::span<const double> v,
                                   std::span<double> out) {
    forward(v);
    std::vector<double> tmp(grid_.size());
    std::fill(out.begin(), out.end(), 0.0);
    for (int c = 0; c < components(); ++c) {
        backward_with(multipliers_[c], tmp);
        const auto& a = coeffs[c];
        for (std::size_t p = 0; p < tmp.size(); ++p) out[p] += a[p] * tmp[p];
    }
}

void SpectralOps::apply_contracted_adjoint(std::span<const std::vector<double>> coeffs, std::span<const double> w,
                                           std::span<double> out) {
    std::vector<double> scaled(grid_.size());
    std::vector<double> tmp(grid_.size());
    std::fill(out.begin(), out.end(), 0.0);
    for (int c = 0; c < components(); ++c) {
        const auto& a = coeffs[c];
        for (std::size_t p = 0; p < scaled.size(); ++p) scaled[p] = a[p] * w[p];
        forward(scaled);
        backward_with(multipliers_[c], tmp);
        for (std::size_t p = 0; p < tmp.size(); ++p) out[p] += tmp[p];
    }
}

void SpectralOps::solve_quarter_laplacian(std::span<const double> f, std::span<double> x) {
    forward(f);
    const double norm = 1.0 / static_cast<double>(grid_.size());
    for (std::size_t s = 0; s < spectral_size_; ++s) {
        const double inv = laplacian_[s] == 0.0 ? 0.0 : norm / laplacian_[s];
        plans_->work[s][0] = plans_->spec[s][0] * inv;
        plans_->work[s][1] = plans_->spec[s][1] * inv;
    }
    fftw_execute(plans_->c2r);
    std::copy(plans_->real, plans_->real + grid_.size(), x.begin());
}

void SpectralOps::quarter_laplacian(std::span<const double> v, std::span<double> out) {
    forward(v);
    const double norm = 1.0 / static_cast<double>(grid_.size());
    for (std::size_t s = 0; s < spectral_size_; ++s) {
        plans_->work[s][0] = plans_->spec[s][0] * laplacian_[s] * norm;
        plans_->work[s][1] = plans_->spec[s][1] * laplacian_[s] * norm;
    }
    fftw_execute(plans_->c2r);
    std::copy(plans_->real, plans_->real + grid_.size(), out.begin());
}

HermitianMatrix SpectralOps::assemble(std::span<const std::vector<double>> comps, std::size_t p) const {
    const int n = grid_.n();
    CMatrix m(n);
    for (int j = 0; j < n; ++j) m(j, j) = comps[j][p];
    int c = n;
    for (int j = 0; j < n; ++j) {
        for (int k = j + 1; k < n; ++k) {
            m(j, k) = Complex(comps[c][p], comps[c + 1][p]);
            m(k, j) = std::conj(m(j, k));
            c += 2;
        }
    }
    return HermitianMatrix(m);
}

HermitianFormField i_ddbar(const ScalarField& u) {
    SpectralOps ops(u.grid);
    const auto comps = ops.ddbar_components(u.values);
    HermitianFormField out(u.grid);
    const int n = u.grid.n();
    Complex* dst = out.data().data();
    for (std::size_t p = 0; p < u.grid.size(); ++p, dst += n * n) {
        for (int j = 0; j < n; ++j) dst[j * n + j] = comps[j][p];
        int c = n;
        for (int j = 0; j < n; ++j)
            for (int k = j + 1; k < n; ++k, c += 2) {
                dst[j * n + k] = Complex(comps[c][p], comps[c + 1][p]);
                dst[k * n + j] = Complex(comps[c][p], -comps[c + 1][p]);
            }
    }
    return out;
}

namespace {

void require_same_grid(const HermitianFormField& a, const HermitianFormField& b) {
    if (!(a.grid() == b.grid())) fail(Errc::DimensionMismatch, "fields live on different grids");
}

[[noreturn]] void rethrow_at(const Error& e, std::size_t p) {
    throw Error(e.code(), std::string(e.what()) + " at grid index " + std::to_string(p));
}

} // namespace

ScalarField theta_field(const HermitianFormField& omega, const HermitianFormField& chi) {
    require_same_grid(omega, chi);
    ScalarField out(omega.grid());
    const int n = omega.grid().n();
    const std::size_t nn = static_cast<std::size_t>(n * n);
    const Complex* w = omega.data().data();
    const Complex* x = chi.data().data();
    detail::parallel_for(out.values.size(), [&](std::size_t p) {
        try {
            out.values[p] = theta_arctan(pencil_values(&w[p * nn], &x[p * nn], n).values());
        } catch (const Error& e) {
            rethrow_at(e, p);
        }
    });
    return out;
}

HermitianFormField eta_metric(const HermitianFormField& omega, const HermitianFormField& chi) {
    require_same_grid(omega, chi);
    HermitianFormField out(omega.grid());
    detail::parallel_for(omega.grid().size(), [&](std::size_t p) {
        const HermitianMatrix w = omega.at(p);
        const HermitianMatrix x = chi.at(p);
        try {
            cholesky(w);
        } catch (const Error& e) {
            rethrow_at(e, p);
        }
        const CMatrix eta = w.matrix() + x.matrix() * inverse(w.matrix()) * x.matrix();
        out.set(p, HermitianMatrix(eta));
    });
    return out;
}

AngleResult hat_theta(const HermitianFormField& omega, const HermitianFormField& chi) {
    require_same_grid(omega, chi);
    const TorusGrid& g = omega.grid();
    // det(omega + i chi) = det(omega) prod (1 + i lambda_k): modulus and angle
    // come from the same pencil eigenvalues.
    ScalarField theta(g);
    std::vector<double> radius(g.size());
    const int n = g.n();
    const std::size_t nn = static_cast<std::size_t>(n * n);
    const Complex* w = omega.data().data();
    const Complex* x = chi.data().data();
    detail::parallel_for(g.size(), [&](std::size_t p) {
        PencilValues pv;
        try {
            pv = pencil_values(&w[p * nn], &x[p * nn], n);
        } catch (const Error& e) {
            rethrow_at(e, p);
        }
        theta.values[p] = theta_arctan(pv.values());
        double r = pv.det_omega;
        for (double l : pv.values()) r *= std::hypot(1.0, l);
        radius[p] = r;
    });

    const double center = mean(theta);
    Complex acc = 0.0;
    for (std::size_t p = 0; p < g.size(); ++p) acc += radius[p] * std::polar(1.0, theta.values[p] - center);
    acc *= g.cell_volume();

    AngleResult r;
    r.modulus = std::abs(acc);
    if (!(r.modulus > 0.0)) fail(Errc::PreconditionFailed, "integral of det(omega + i chi) vanishes");
    r.hat_theta = center + std::arg(acc);
    for (double t : theta.values) r.branch_certificate = std::max(r.branch_certificate, std::abs(t - r.hat_theta));
    return r;
}

} // namespace dhym
