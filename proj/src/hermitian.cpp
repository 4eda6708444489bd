#include "dhym/hermitian.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "dhym/error.hpp"

namespace dhym {

namespace {

constexpr double kPivotFloor = 1e-12;
constexpr double kGapFloor = 1e-6;
constexpr int kMaxSweeps = 60;

void check_dim(int n) {
    if (n < 1 || n > kMaxDim) {
        fail(Errc::DimensionMismatch, "matrix order must be in 1..4, got " + std::to_string(n));
    }
}

void check_same_dim(const HermitianMatrix& a, const HermitianMatrix& b) {
    if (a.dim() != b.dim()) {
        fail(Errc::DimensionMismatch, "orders " + std::to_string(a.dim()) + " and " + std::to_string(b.dim()));
    }
}

// Inverse of a lower-triangular matrix by forward substitution.
CMatrix lower_inverse(const CMatrix& l) {
    const int n = l.dim();
    CMatrix inv(n);
    for (int j = 0; j < n; ++j) {
        inv(j, j) = 1.0 / l(j, j);
        for (int i = j + 1; i < n; ++i) {
            Complex s = 0.0;
            for (int k = j; k < i; ++k) s += l(i, k) * inv(k, j);
            inv(i, j) = -s / l(i, i);
        }
    }
    return inv;
}

void sort_descending(EigenSystem& es) {
    const int n = es.n;
    std::array<int, kMaxDim> order{};
    std::iota(order.begin(), order.begin() + n, 0);
    std::stable_sort(order.begin(), order.begin() + n,
                     [&](int a, int b) { return es.lambdas[a] > es.lambdas[b]; });
    EigenSystem sorted;
    sorted.n = n;
    sorted.transform = CMatrix(n);
    for (int k = 0; k < n; ++k) {
        sorted.lambdas[k] = es.lambdas[order[k]];
        for (int i = 0; i < n; ++i) sorted.transform(i, k) = es.transform(i, order[k]);
    }
    es = sorted;
}

void require_diagonal_distinct(const HermitianMatrix& lambda) {
    const int n = lambda.dim();
    check_dim(n);
    const double scale = 1.0 + lambda.max_abs();
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            if (i != j && std::abs(lambda(i, j)) > 1e-12 * scale) {
                fail(Errc::PreconditionFailed, "derivative formulas require a diagonal matrix");
            }
        }
    }
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            if (std::abs(lambda(i, i).real() - lambda(j, j).real()) < kGapFloor) {
                fail(Errc::DegenerateSpectrum, "eigenvalues " + std::to_string(i) + " and " + std::to_string(j) +
                                                   " closer than 1e-6");
            }
        }
    }
}

} // namespace

CMatrix::CMatrix(int n) : n_(n) { check_dim(n); }

CMatrix CMatrix::identity(int n) {
    CMatrix m(n);
    for (int i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

CMatrix CMatrix::adjoint() const {
    CMatrix r(n_);
    for (int i = 0; i < n_; ++i)
        for (int j = 0; j < n_; ++j) r(i, j) = std::conj((*this)(j, i));
    return r;
}

Complex CMatrix::trace() const {
    Complex t = 0.0;
    for (int i = 0; i < n_; ++i) t += (*this)(i, i);
    return t;
}

double CMatrix::max_abs() const {
    double m = 0.0;
    for (int i = 0; i < n_; ++i)
        for (int j = 0; j < n_; ++j) m = std::max(m, std::abs((*this)(i, j)));
    return m;
}

CMatrix& CMatrix::operator+=(const CMatrix& o) {
    for (int i = 0; i < n_; ++i)
        for (int j = 0; j < n_; ++j) (*this)(i, j) += o(i, j);
    return *this;
}

CMatrix& CMatrix::operator-=(const CMatrix& o) {
    for (int i = 0; i < n_; ++i)
        for (int j = 0; j < n_; ++j) (*this)(i, j) -= o(i, j);
    return *this;
}

CMatrix& CMatrix::operator*=(Complex s) {
    for (int i = 0; i < n_; ++i)
        for (int j = 0; j < n_; ++j) (*this)(i, j) *= s;
    return *this;
}

CMatrix operator+(CMatrix a, const CMatrix& b) { return a += b; }
CMatrix operator-(CMatrix a, const CMatrix& b) { return a -= b; }
CMatrix operator*(CMatrix a, Complex s) { return a *= s; }

CMatrix operator*(const CMatrix& a, const CMatrix& b) {
    const int n = a.dim();
    CMatrix r(n);
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < n; ++k) {
            const Complex aik = a(i, k);
            for (int j = 0; j < n; ++j) r(i, j) += aik * b(k, j);
        }
    return r;
}

Complex determinant(const CMatrix& a) {
    CMatrix m = a;
    const int n = m.dim();
    Complex det = 1.0;
    for (int c = 0; c < n; ++c) {
        int piv = c;
        for (int r = c + 1; r < n; ++r)
            if (std::abs(m(r, c)) > std::abs(m(piv, c))) piv = r;
        if (m(piv, c) == Complex(0.0)) return 0.0;
        if (piv != c) {
            for (int j = 0; j < n; ++j) std::swap(m(c, j), m(piv, j));
            det = -det;
        }
        det *= m(c, c);
        for (int r = c + 1; r < n; ++r) {
            const Complex f = m(r, c) / m(c, c);
            for (int j = c; j < n; ++j) m(r, j) -= f * m(c, j);
        }
    }
    return det;
}

CMatrix inverse(const CMatrix& a) {
    const int n = a.dim();
    CMatrix m = a;
    CMatrix inv = CMatrix::identity(n);
    const double scale = std::max(a.max_abs(), 1e-300);
    for (int c = 0; c < n; ++c) {
        int piv = c;
        for (int r = c + 1; r < n; ++r)
            if (std::abs(m(r, c)) > std::abs(m(piv, c))) piv = r;
        if (std::abs(m(piv, c)) <= 1e-14 * scale) fail(Errc::PreconditionFailed, "singular matrix");
        for (int j = 0; j < n; ++j) {
            std::swap(m(c, j), m(piv, j));
            std::swap(inv(c, j), inv(piv, j));
        }
        const Complex d = 1.0 / m(c, c);
        for (int j = 0; j < n; ++j) {
            m(c, j) *= d;
            inv(c, j) *= d;
        }
        for (int r = 0; r < n; ++r) {
            if (r == c) continue;
            const Complex f = m(r, c);
            if (f == Complex(0.0)) continue;
            for (int j = 0; j < n; ++j) {
                m(r, j) -= f * m(c, j);
                inv(r, j) -= f * inv(c, j);
            }
        }
    }
    return inv;
}

HermitianMatrix::HermitianMatrix(const CMatrix& m) : m_(m.dim()) {
    const int n = m.dim();
    for (int i = 0; i < n; ++i) {
        m_(i, i) = m(i, i).real();
        for (int j = i + 1; j < n; ++j) {
            const Complex v = 0.5 * (m(i, j) + std::conj(m(j, i)));
            m_(i, j) = v;
            m_(j, i) = std::conj(v);
        }
    }
}

HermitianMatrix HermitianMatrix::zero(int n) { return HermitianMatrix(CMatrix(n)); }

HermitianMatrix HermitianMatrix::identity(int n) { return HermitianMatrix(CMatrix::identity(n)); }

HermitianMatrix HermitianMatrix::diagonal(std::span<const double> d) {
    CMatrix m(static_cast<int>(d.size()));
    for (std::size_t i = 0; i < d.size(); ++i) m(static_cast<int>(i), static_cast<int>(i)) = d[i];
    return HermitianMatrix(m);
}

HermitianMatrix operator+(const HermitianMatrix& a, const HermitianMatrix& b) {
    check_same_dim(a, b);
    return HermitianMatrix(a.matrix() + b.matrix());
}

HermitianMatrix operator-(const HermitianMatrix& a, const HermitianMatrix& b) {
    check_same_dim(a, b);
    return HermitianMatrix(a.matrix() - b.matrix());
}

HermitianMatrix operator*(const HermitianMatrix& a, double s) { return HermitianMatrix(a.matrix() * Complex(s)); }

CMatrix cholesky(const HermitianMatrix& a) {
    const int n = a.dim();
    check_dim(n);
    CMatrix l(n);
    for (int j = 0; j < n; ++j) {
        double d = a(j, j).real();
        for (int k = 0; k < j; ++k) d -= std::norm(l(j, k));
        if (!(d > kPivotFloor)) {
            fail(Errc::NotPositiveDefinite, "Cholesky pivot " + std::to_string(j) + " = " + std::to_string(d));
        }
        const double ljj = std::sqrt(d);
        l(j, j) = ljj;
        for (int i = j + 1; i < n; ++i) {
            Complex s = a(i, j);
            for (int k = 0; k < j; ++k) s -= l(i, k) * std::conj(l(j, k));
            l(i, j) = s / ljj;
        }
    }
    return l;
}

EigenSystem eig_hermitian(const HermitianMatrix& h) {
    const int n = h.dim();
    check_dim(n);
    CMatrix a = h.matrix();
    CMatrix v = CMatrix::identity(n);

    double frob = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) frob += std::norm(a(i, j));
    const double off_floor = 1e-32 * frob + 1e-300;

    for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
        double off = 0.0;
        for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q) off += 2.0 * std::norm(a(p, q));
        if (off <= off_floor) break;

        for (int p = 0; p < n; ++p) {
            for (int q = p + 1; q < n; ++q) {
                const double mag = std::abs(a(p, q));
                if (mag == 0.0) continue;
                const Complex phase = a(p, q) / mag; // e^{i phi}
                const double app = a(p, p).real();
                const double aqq = a(q, q).real();
                const double theta = (aqq - app) / (2.0 * mag);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                // G = diag(1, e^{-i phi}) * [[c, s], [-s, c]]
                const Complex gpp = c;
                const Complex gpq = s;
                const Complex gqp = -s * std::conj(phase);
                const Complex gqq = c * std::conj(phase);

                for (int k = 0; k < n; ++k) {
                    const Complex akp = a(k, p);
                    const Complex akq = a(k, q);
                    a(k, p) = akp * gpp + akq * gqp;
                    a(k, q) = akp * gpq + akq * gqq;
                }
                for (int k = 0; k < n; ++k) {
                    const Complex apk = a(p, k);
                    const Complex aqk = a(q, k);
                    a(p, k) = std::conj(gpp) * apk + std::conj(gqp) * aqk;
                    a(q, k) = std::conj(gpq) * apk + std::conj(gqq) * aqk;
                }
                a(p, q) = 0.0;
                a(q, p) = 0.0;
                a(p, p) = a(p, p).real();
                a(q, q) = a(q, q).real();
                for (int k = 0; k < n; ++k) {
                    const Complex vkp = v(k, p);
                    const Complex vkq = v(k, q);
                    v(k, p) = vkp * gpp + vkq * gqp;
                    v(k, q) = vkp * gpq + vkq * gqq;
                }
            }
        }
    }

    EigenSystem es;
    es.n = n;
    es.transform = v;
    for (int i = 0; i < n; ++i) es.lambdas[i] = a(i, i).real();
    sort_descending(es);
    return es;
}

EigenSystem eig_pair(const HermitianMatrix& omega, const HermitianMatrix& chi) {
    check_same_dim(omega, chi);
    const CMatrix l = cholesky(omega);
    const CMatrix linv = lower_inverse(l);
    const CMatrix whitened = linv * chi.matrix() * linv.adjoint();
    EigenSystem es = eig_hermitian(HermitianMatrix(whitened));
    es.transform = linv.adjoint() * es.transform;
    return es;
}

PencilValues pencil_values(const HermitianMatrix& omega, const HermitianMatrix& chi) {
    check_same_dim(omega, chi);
    const int n = omega.dim();
    if (n > 2) {
        PencilValues pv;
        pv.n = n;
        const EigenSystem es = eig_pair(omega, chi);
        pv.lambdas = es.lambdas;
        pv.det_omega = determinant(omega.matrix()).real();
        return pv;
    }
    Complex w[4], x[4];
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            w[i * n + j] = omega(i, j);
            x[i * n + j] = chi(i, j);
        }
    return pencil_values(w, x, n);
}

PencilValues pencil_values(const Complex* omega, const Complex* chi, int n) {
    PencilValues pv;
    pv.n = n;
    if (n > 2) {
        CMatrix w(n), x(n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                w(i, j) = omega[i * n + j];
                x(i, j) = chi[i * n + j];
            }
        return pencil_values(HermitianMatrix(w), HermitianMatrix(x));
    }
    const double w00 = omega[0].real();
    if (!(w00 > kPivotFloor)) fail(Errc::NotPositiveDefinite, "Cholesky pivot 0 = " + std::to_string(w00));
    const double l00 = std::sqrt(w00);
    const double a = chi[0].real() / w00;
    if (n == 1) {
        pv.lambdas[0] = a;
        pv.det_omega = w00;
        return pv;
    }
    // Cholesky L = [[p, 0], [r, s]] of omega, whitened chi L^{-1} chi L^{-H} = [[a, b], [conj b, d]].
    const Complex r = std::conj(omega[1]) / l00;
    const double piv = omega[3].real() - std::norm(r);
    if (!(piv > kPivotFloor)) fail(Errc::NotPositiveDefinite, "Cholesky pivot 1 = " + std::to_string(piv));
    const double s11 = std::sqrt(piv);
    const Complex b = (chi[1] - a * l00 * std::conj(r)) / (l00 * s11);
    const double d = (chi[3].real() - 2.0 * (r * chi[1]).real() / l00 + a * std::norm(r)) / piv;
    const double mid = 0.5 * (a + d);
    const double rad = std::hypot(0.5 * (a - d), std::abs(b));
    const double det = a * d - std::norm(b);
    // The root of larger magnitude first, the other from the product.
    if (mid >= 0.0) {
        pv.lambdas[0] = mid + rad;
        pv.lambdas[1] = pv.lambdas[0] != 0.0 ? det / pv.lambdas[0] : 0.0;
    } else {
        pv.lambdas[1] = mid - rad;
        pv.lambdas[0] = det / pv.lambdas[1];
    }
    if (pv.lambdas[0] < pv.lambdas[1]) std::swap(pv.lambdas[0], pv.lambdas[1]);
    pv.det_omega = w00 * piv;
    return pv;
}

double theta_arctan(std::span<const double> lambdas) {
    double s = 0.0;
    for (double l : lambdas) s += std::atan(l);
    return s;
}

namespace {

CMatrix endomorphism(const HermitianMatrix& omega, const HermitianMatrix& chi) {
    check_same_dim(omega, chi);
    const CMatrix l = cholesky(omega);
    const CMatrix linv = lower_inverse(l);
    return linv.adjoint() * linv * chi.matrix();
}

} // namespace

Complex det_one_plus_i_lambda(const HermitianMatrix& omega, const HermitianMatrix& chi) {
    const CMatrix lam = endomorphism(omega, chi);
    return determinant(CMatrix::identity(lam.dim()) + lam * Complex(0.0, 1.0));
}

double det_one_plus_lambda_sq(const HermitianMatrix& omega, const HermitianMatrix& chi) {
    const CMatrix lam = endomorphism(omega, chi);
    return determinant(CMatrix::identity(lam.dim()) + lam * lam).real();
}

double lagrangian_angle_det(const HermitianMatrix& omega, const HermitianMatrix& chi) {
    const Complex z = det_one_plus_i_lambda(omega, chi);
    const double modulus = std::sqrt(det_one_plus_lambda_sq(omega, chi));
    const double principal = std::arg(z / modulus);
    const double reference = theta_arctan(eig_pair(omega, chi).values());
    return reference + std::remainder(principal - reference, 2.0 * M_PI);
}

HermitianMatrix dF(const EigenSystem& es) {
    const int n = es.n;
    CMatrix r(n);
    for (int k = 0; k < n; ++k) {
        const double g = 1.0 / (1.0 + es.lambdas[k] * es.lambdas[k]);
        for (int i = 0; i < n; ++i) {
            const Complex wik = es.transform(i, k) * g;
            for (int j = 0; j < n; ++j) r(i, j) += wik * std::conj(es.transform(j, k));
        }
    }
    return HermitianMatrix(r);
}

double contract(const HermitianMatrix& a, const HermitianMatrix& h) {
    check_same_dim(a, h);
    double s = 0.0;
    for (int j = 0; j < a.dim(); ++j)
        for (int k = 0; k < a.dim(); ++k) s += (a(j, k) * h(k, j)).real();
    return s;
}

EigenvalueDerivatives eigenvalue_derivatives(const HermitianMatrix& lambda) {
    require_diagonal_distinct(lambda);
    const int n = lambda.dim();
    std::vector<double> l(n);
    for (int i = 0; i < n; ++i) l[i] = lambda(i, i).real();

    EigenvalueDerivatives d;
    d.n = n;
    d.first.assign(n * n * n, 0.0);
    d.second.assign(n * n * n * n * n, 0.0);
    auto delta = [](int a, int b) { return a == b ? 1.0 : 0.0; };
    for (int i = 0; i < n; ++i) {
        d.first[(i * n + i) * n + i] = 1.0;
        for (int p = 0; p < n; ++p)
            for (int q = 0; q < n; ++q)
                for (int r = 0; r < n; ++r)
                    for (int s = 0; s < n; ++s) {
                        double v = 0.0;
                        if (i != p) v += delta(i, q) * delta(i, r) * delta(p, s) / (l[i] - l[p]);
                        if (i != r) v += delta(i, s) * delta(i, p) * delta(r, q) / (l[i] - l[r]);
                        d.second[(((i * n + p) * n + q) * n + r) * n + s] = v;
                    }
    }
    return d;
}

SpectralDerivatives spectral_function_derivatives(SpectralFunction f, const HermitianMatrix& lambda, double c_eps) {
    require_diagonal_distinct(lambda);
    const int n = lambda.dim();
    std::vector<double> l(n);
    for (int i = 0; i < n; ++i) l[i] = lambda(i, i).real();

    // Gradient and Hessian of the symmetric function in eigenvalue space.
    std::vector<double> fi(n, 0.0);
    std::vector<double> fij(n * n, 0.0);
    if (f == SpectralFunction::ArctanSum) {
        for (int i = 0; i < n; ++i) {
            const double q = 1.0 + l[i] * l[i];
            fi[i] = 1.0 / q;
            fij[i * n + i] = -2.0 * l[i] / (q * q);
        }
    } else {
        if (!(c_eps > 0.0)) fail(Errc::PreconditionFailed, "log_max requires C_eps > 0");
        const int top = static_cast<int>(std::max_element(l.begin(), l.end()) - l.begin());
        const double denom = c_eps + l[top];
        if (!(denom > 0.0)) fail(Errc::PreconditionFailed, "C_eps + lambda_max must be positive");
        fi[top] = 1.0 / denom;
        fij[top * n + top] = -1.0 / (denom * denom);
    }

    SpectralDerivatives d;
    d.n = n;
    d.first.assign(n * n, 0.0);
    d.second.assign(n * n * n * n, 0.0);
    for (int i = 0; i < n; ++i) d.first[i * n + i] = fi[i];
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int r = 0; r < n; ++r)
                for (int s = 0; s < n; ++s) {
                    double v = 0.0;
                    if (i == j && r == s) v += fij[i * n + r];
                    if (i != j && i == s && j == r) v += (fi[i] - fi[j]) / (l[i] - l[j]);
                    d.second[((i * n + j) * n + r) * n + s] = v;
                }
    return d;
}

double sigma_k(std::span<const double> lambdas, int k) {
    const int n = static_cast<int>(lambdas.size());
    if (k < 1 || k > n) fail(Errc::BadIndex, "sigma_k index " + std::to_string(k) + " outside 1.." + std::to_string(n));
    // Coefficients of prod (1 + lambda_i t).
    std::vector<double> e(n + 1, 0.0);
    e[0] = 1.0;
    for (int i = 0; i < n; ++i)
        for (int m = i + 1; m >= 1; --m) e[m] += lambdas[i] * e[m - 1];
    return e[k];
}

} // namespace dhym
