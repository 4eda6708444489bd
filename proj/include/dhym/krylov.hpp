#pragma once

#include <functional>
#include <span>

namespace dhym {

using LinearMap = std::function<void(std::span<const double>, std::span<double>)>;

struct KrylovResult {
    int iterations = 0;
    double relative_residual = 0.0;
    bool converged = false;
};

/// Restarted GMRES on op(x) = b starting from x (updated in place).
KrylovResult gmres(const LinearMap& op, std::span<const double> b, std::span<double> x, int restart, int max_iters,
                   double tol);

/// CGLS: conjugate gradients on the normal system op^T op x = op^T b.
KrylovResult cgls(const LinearMap& op, const LinearMap& op_transpose, std::span<const double> b, std::span<double> x,
                  int max_iters, double tol);

} // namespace dhym
