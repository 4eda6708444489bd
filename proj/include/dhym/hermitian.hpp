#pragma once

#include <array>
#include <complex>
#include <span>
#include <vector>

namespace dhym {

using Complex = std::complex<double>;

inline constexpr int kMaxDim = 4;

/// Dense complex square matrix of order 1..4, stored row-major in place.
class CMatrix {
  public:
    CMatrix() = default;
    explicit CMatrix(int n);

    static CMatrix identity(int n);

    int dim() const noexcept { return n_; }
    Complex& operator()(int i, int j) noexcept { return a_[i * kMaxDim + j]; }
    const Complex& operator()(int i, int j) const noexcept { return a_[i * kMaxDim + j]; }

    CMatrix adjoint() const;
    Complex trace() const;
    double max_abs() const;

    CMatrix& operator+=(const CMatrix& o);
    CMatrix& operator-=(const CMatrix& o);
    CMatrix& operator*=(Complex s);

  private:
    int n_ = 0;
    std::array<Complex, kMaxDim * kMaxDim> a_{};
};

CMatrix operator+(CMatrix a, const CMatrix& b);
CMatrix operator-(CMatrix a, const CMatrix& b);
CMatrix operator*(CMatrix a, Complex s);
CMatrix operator*(const CMatrix& a, const CMatrix& b);

/// Determinant by partial-pivot elimination.
Complex determinant(const CMatrix& a);
/// Inverse by Gauss-Jordan; throws PreconditionFailed on a singular input.
CMatrix inverse(const CMatrix& a);

/// Complex Hermitian matrix. Construction from an arbitrary matrix applies
/// (A + A^H)/2, so the stored entries are exactly Hermitian.
class HermitianMatrix {
  public:
    HermitianMatrix() = default;
    explicit HermitianMatrix(const CMatrix& m);

    static HermitianMatrix zero(int n);
    static HermitianMatrix identity(int n);
    static HermitianMatrix diagonal(std::span<const double> d);

    int dim() const noexcept { return m_.dim(); }
    const Complex& operator()(int i, int j) const noexcept { return m_(i, j); }
    const CMatrix& matrix() const noexcept { return m_; }
    double max_abs() const { return m_.max_abs(); }

  private:
    CMatrix m_;
};

HermitianMatrix operator+(const HermitianMatrix& a, const HermitianMatrix& b);
HermitianMatrix operator-(const HermitianMatrix& a, const HermitianMatrix& b);
HermitianMatrix operator*(const HermitianMatrix& a, double s);

/// Eigen-decomposition of the pencil (chi, omega).
///
/// `lambdas` are sorted descending; `transform` W satisfies W^H omega W = Id
/// and W^H chi W = diag(lambdas).
struct EigenSystem {
    int n = 0;
    std::array<double, kMaxDim> lambdas{};
    CMatrix transform;

    std::span<const double> values() const noexcept { return {lambdas.data(), static_cast<std::size_t>(n)}; }
};

/// Lower-triangular L with L L^H = a. Throws NotPositiveDefinite when a pivot
/// is <= 1e-12.
CMatrix cholesky(const HermitianMatrix& a);

/// Cyclic complex Jacobi on a single Hermitian matrix.
EigenSystem eig_hermitian(const HermitianMatrix& a);

/// Eigenvalues of omega^{-1} chi through Cholesky whitening followed by
/// cyclic Jacobi on L^{-1} chi L^{-H}.
EigenSystem eig_pair(const HermitianMatrix& omega, const HermitianMatrix& chi);

struct PencilValues {
    int n = 0;
    std::array<double, kMaxDim> lambdas{}; ///< descending
    double det_omega = 0.0;

    std::span<const double> values() const noexcept { return {lambdas.data(), static_cast<std::size_t>(n)}; }
};

/// Eigenvalues of the pencil without eigenvectors, for per-grid-point use.
/// Same whitening as eig_pair; orders 1 and 2 use the closed form, larger
/// orders fall back to eig_pair.
PencilValues pencil_values(const HermitianMatrix& omega, const HermitianMatrix& chi);
/// Same, on packed row-major n x n blocks (the upper triangle is read).
PencilValues pencil_values(const Complex* omega, const Complex* chi, int n);

/// Lagrangian angle: sum of arctan over the eigenvalues.
double theta_arctan(std::span<const double> lambdas);

/// det(Id + i Lambda) with Lambda = omega^{-1} chi.
Complex det_one_plus_i_lambda(const HermitianMatrix& omega, const HermitianMatrix& chi);
/// det(Id + Lambda^2) with Lambda = omega^{-1} chi.
double det_one_plus_lambda_sq(const HermitianMatrix& omega, const HermitianMatrix& chi);

/// The angle -i log(det(Id + i Lambda) / sqrt(det(Id + Lambda^2))), with the
/// logarithm's branch chosen so the result is continuous in Lambda and zero
/// at Lambda = 0 (the lift nearest the eigenvalue-wise arctan sum).
double lagrangian_angle_det(const HermitianMatrix& omega, const HermitianMatrix& chi);

/// Gradient of the angle with respect to chi, W diag(1/(1 + lambda_i^2)) W^H.
///
/// Equals ((Id + Lambda^2)^{-1}) omega^{-1} = eta^{-1}; when omega = Id it is
/// (Id + Lambda^2)^{-1} itself. `contract(dF(es), H)` is the directional
/// derivative of the angle along chi -> chi + H.
HermitianMatrix dF(const EigenSystem& es);

/// Re tr(a h); real for Hermitian arguments.
double contract(const HermitianMatrix& a, const HermitianMatrix& h);

/// Entry derivatives of the eigenvalues at a diagonal matrix with distinct
/// eigenvalues; lambda_i is the i-th diagonal entry.
struct EigenvalueDerivatives {
    int n = 0;
    std::vector<double> first;  // [i][p][q]
    std::vector<double> second; // [i][p][q][r][s]

    double d1(int i, int p, int q) const { return first[(i * n + p) * n + q]; }
    double d2(int i, int p, int q, int r, int s) const { return second[(((i * n + p) * n + q) * n + r) * n + s]; }
};

/// Throws DegenerateSpectrum when two diagonal entries are within 1e-6 and
/// PreconditionFailed when the input is not diagonal.
EigenvalueDerivatives eigenvalue_derivatives(const HermitianMatrix& lambda);

enum class SpectralFunction {
    ArctanSum, ///< f = sum arctan(lambda_i)
    LogMax,    ///< g = log(C_eps + lambda_max)
};

struct SpectralDerivatives {
    int n = 0;
    std::vector<double> first;  // F^{ij}
    std::vector<double> second; // F^{ij,rs}

    double d1(int i, int j) const { return first[i * n + j]; }
    double d2(int i, int j, int r, int s) const { return second[((i * n + j) * n + r) * n + s]; }
};

SpectralDerivatives spectral_function_derivatives(SpectralFunction f, const HermitianMatrix& lambda, double c_eps = 0.0);

/// k-th elementary symmetric polynomial, 1 <= k <= size.
double sigma_k(std::span<const double> lambdas, int k);

} // namespace dhym
