#include "dhym/krylov.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace dhym {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
    for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

} // namespace

KrylovResult gmres(const LinearMap& op, std::span<const double> b, std::span<double> x, int restart, int max_iters,
                   double tol) {
    const std::size_t size = b.size();
    KrylovResult res;
    const double bnorm = norm2(b);
    if (bnorm == 0.0) {
        std::fill(x.begin(), x.end(), 0.0);
        res.converged = true;
        return res;
    }
    restart = std::max(1, restart);

    std::vector<double> r(size);
    std::vector<std::vector<double>> basis;
    std::vector<double> h((restart + 1) * restart);
    std::vector<double> cs(restart), sn(restart), g(restart + 1);
    auto H = [&](int i, int j) -> double& { return h[i * restart + j]; };

    while (res.iterations < max_iters) {
        op(x, r);
        for (std::size_t i = 0; i < size; ++i) r[i] = b[i] - r[i];
        double beta = norm2(r);
        res.relative_residual = beta / bnorm;
        if (res.relative_residual <= tol) {
            res.converged = true;
            return res;
        }
        basis.assign(1, r);
        for (double& v : basis[0]) v /= beta;
        std::fill(g.begin(), g.end(), 0.0);
        g[0] = beta;

        int k = 0;
        for (; k < restart && res.iterations < max_iters; ++k) {
            std::vector<double> w(size);
            op(basis[k], w);
            ++res.iterations;
            // Modified Gram-Schmidt, applied twice for stability.
            for (int pass = 0; pass < 2; ++pass) {
                for (int i = 0; i <= k; ++i) {
                    const double hij = dot(w, basis[i]);
                    if (pass == 0) H(i, k) = hij; else H(i, k) += hij;
                    axpy(-hij, basis[i], w);
                }
            }
            const double hnext = norm2(w);
            H(k + 1, k) = hnext;
            for (int i = 0; i < k; ++i) {
                const double t = cs[i] * H(i, k) + sn[i] * H(i + 1, k);
                H(i + 1, k) = -sn[i] * H(i, k) + cs[i] * H(i + 1, k);
                H(i, k) = t;
            }
            const double denom = std::hypot(H(k, k), H(k + 1, k));
            cs[k] = denom == 0.0 ? 1.0 : H(k, k) / denom;
            sn[k] = denom == 0.0 ? 0.0 : H(k + 1, k) / denom;
            H(k, k) = denom;
            H(k + 1, k) = 0.0;
            g[k + 1] = -sn[k] * g[k];
            g[k] = cs[k] * g[k];
            res.relative_residual = std::abs(g[k + 1]) / bnorm;
            if (hnext == 0.0 || res.relative_residual <= tol) {
                ++k;
                break;
            }
            for (double& v : w) v /= hnext;
            basis.push_back(std::move(w));
        }

        // Back substitution on the k x k triangle.
        std::vector<double> y(k, 0.0);
        for (int i = k - 1; i >= 0; --i) {
            double s = g[i];
            for (int j = i + 1; j < k; ++j) s -= H(i, j) * y[j];
            y[i] = s / H(i, i);
        }
        for (int i = 0; i < k; ++i) axpy(y[i], basis[i], x);
        if (res.relative_residual <= tol) {
            // Confirm against the true residual.
            op(x, r);
            for (std::size_t i = 0; i < size; ++i) r[i] = b[i] - r[i];
            res.relative_residual = norm2(r) / bnorm;
            if (res.relative_residual <= tol * 10.0) {
                res.converged = true;
                return res;
            }
        }
    }
    return res;
}

KrylovResult cgls(const LinearMap& op, const LinearMap& op_transpose, std::span<const double> b, std::span<double> x,
                  int max_iters, double tol) {
    const std::size_t size = b.size();
    KrylovResult res;
    const double bnorm = norm2(b);
    if (bnorm == 0.0) {
        std::fill(x.begin(), x.end(), 0.0);
        res.converged = true;
        return res;
    }
    std::vector<double> r(size), s(size), p(size), q(size);
    op(x, r);
    for (std::size_t i = 0; i < size; ++i) r[i] = b[i] - r[i];
    op_transpose(r, s);
    p = s;
    double gamma = dot(s, s);
    res.relative_residual = norm2(r) / bnorm;
    while (res.relative_residual > tol && res.iterations < max_iters && gamma > 0.0) {
        op(p, q);
        const double alpha = gamma / dot(q, q);
        axpy(alpha, p, x);
        axpy(-alpha, q, r);
        op_transpose(r, s);
        const double gamma_next = dot(s, s);
        const double beta = gamma_next / gamma;
        gamma = gamma_next;
        for (std::size_t i = 0; i < size; ++i) p[i] = s[i] + beta * p[i];
        ++res.iterations;
        res.relative_residual = norm2(r) / bnorm;
    }
    res.converged = res.relative_residual <= tol;
    return res;
}

} // namespace dhym
