#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "dhym/hermitian.hpp"

namespace dhym {

/// Flat complex torus C^n / (2 pi Z)^{2n} sampled with N points per real axis.
///
/// Real axes are ordered (x_1, y_1, x_2, y_2) with z_j = x_j + i y_j; flat
/// indices are row-major over that order, so y_n varies fastest.
class TorusGrid {
  public:
    TorusGrid() = default;
    /// Throws InvalidGrid unless n in {1, 2} and N is a power of two in [8, 64].
    TorusGrid(int n, int N);

    int n() const noexcept { return n_; }
    int N() const noexcept { return N_; }
    int real_dims() const noexcept { return 2 * n_; }
    std::size_t size() const noexcept { return size_; }
    double spacing() const noexcept;
    double cell_volume() const noexcept;
    double volume() const noexcept;

    /// Coordinate along real axis `axis` of flat point `index`.
    double coordinate(std::size_t index, int axis) const noexcept;

    bool operator==(const TorusGrid&) const = default;

  private:
    int n_ = 0;
    int N_ = 0;
    std::size_t size_ = 0;
};

struct ScalarField {
    TorusGrid grid;
    std::vector<double> values;

    ScalarField() = default;
    explicit ScalarField(const TorusGrid& g, double fill = 0.0) : grid(g), values(g.size(), fill) {}

    static ScalarField constant(const TorusGrid& g, double v) { return ScalarField(g, v); }
};

/// Hermitian n x n matrix per grid point, packed as n^2 complex entries.
class HermitianFormField {
  public:
    HermitianFormField() = default;
    explicit HermitianFormField(const TorusGrid& g);

    static HermitianFormField constant(const TorusGrid& g, const HermitianMatrix& m);

    const TorusGrid& grid() const noexcept { return grid_; }
    HermitianMatrix at(std::size_t p) const;
    void set(std::size_t p, const HermitianMatrix& m);

    std::span<const Complex> data() const noexcept { return data_; }
    std::span<Complex> data() noexcept { return data_; }

  private:
    TorusGrid grid_;
    std::vector<Complex> data_;
};

HermitianFormField operator+(const HermitianFormField& a, const HermitianFormField& b);

double integrate(const ScalarField& f);
double mean(const ScalarField& f);
double sup_norm(const ScalarField& f);
ScalarField operator-(const ScalarField& a, const ScalarField& b);
void subtract_mean(ScalarField& f);

/// Fourier-multiplier calculus on one grid. Owns FFTW plans and scratch
/// buffers, so an instance must not be shared between threads.
///
/// The complex Hessian u_{jk̄} is represented by n^2 real components: the
/// diagonal entries u_{jj̄} first, then (Re u_{jk̄}, Im u_{jk̄}) for j < k.
class SpectralOps {
  public:
    explicit SpectralOps(const TorusGrid& grid);
    ~SpectralOps();
    SpectralOps(const SpectralOps&) = delete;
    SpectralOps& operator=(const SpectralOps&) = delete;

    const TorusGrid& grid() const noexcept { return grid_; }
    int components() const noexcept { return grid_.n() * grid_.n(); }

    /// Real components of i ddbar u, each a field of grid size.
    std::vector<std::vector<double>> ddbar_components(std::span<const double> u);

    /// sum_c coeffs[c] * (component c of i ddbar v), pointwise.
    void apply_contracted(std::span<const std::vector<double>> coeffs, std::span<const double> v, std::span<double> out);
    /// Adjoint of apply_contracted in the grid L^2 pairing.
    void apply_contracted_adjoint(std::span<const std::vector<double>> coeffs, std::span<const double> w,
                                  std::span<double> out);

    /// Solves (1/4) Delta x = f - mean(f) with mean(x) = 0.
    void solve_quarter_laplacian(std::span<const double> f, std::span<double> x);
    /// (1/4) Delta v.
    void quarter_laplacian(std::span<const double> v, std::span<double> out);

    /// Packs the components at point p into a Hermitian matrix.
    HermitianMatrix assemble(std::span<const std::vector<double>> comps, std::size_t p) const;

  private:
    void forward(std::span<const double> in);
    void backward_with(std::span<const double> multiplier, std::span<double> out);

    TorusGrid grid_;
    std::size_t spectral_size_ = 0;
    std::vector<std::vector<double>> multipliers_;
    std::vector<double> laplacian_;
    struct Plans;
    std::unique_ptr<Plans> plans_;
};

/// Matrix field of i ddbar u (Fourier-multiplier derivatives).
HermitianFormField i_ddbar(const ScalarField& u);

/// Pointwise Lagrangian angle. Throws NotPositiveDefinite naming the grid index.
ScalarField theta_field(const HermitianFormField& omega, const HermitianFormField& chi);

/// Pointwise eta = omega + chi omega^{-1} chi.
HermitianFormField eta_metric(const HermitianFormField& omega, const HermitianFormField& chi);

struct AngleResult {
    double hat_theta = 0.0;
    double modulus = 0.0;            ///< |integral of det(omega + i chi)|
    double branch_certificate = 0.0; ///< max |Theta(x) - hat_theta|
};

/// Arg of the integral of det(omega + i chi), accumulated in polar form
/// |det(omega + i chi)| e^{i Theta(x)} and lifted to the branch containing the
/// mean of the pointwise angle.
AngleResult hat_theta(const HermitianFormField& omega, const HermitianFormField& chi);

} // namespace dhym
