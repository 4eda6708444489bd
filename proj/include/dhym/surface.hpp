#pragma once

#include <array>
#include <string>
#include <string_view>

#include "dhym/hermitian.hpp"

namespace dhym {

enum class SurfaceKind { InoueSM, InouePM, SecondaryKodaira };

/// Left-invariant data of a compact complex surface realized as a solvmanifold.
/// Indices are 0-based: e_1..e_4 are 0..3.
struct SurfaceModel {
    SurfaceKind kind = SurfaceKind::InoueSM;
    std::string name;
    double alpha = 0.0;
    double beta = 0.0;
    double q = 0.0;
    /// [e_i, e_j] = sum_k structure[(i*4 + j)*4 + k] e_k.
    std::array<double, 64> structure{};
    /// J e_j = sum_i complex_structure[i*4 + j] e_i.
    std::array<double, 16> complex_structure{};
    /// phi^a = sum_k forms[a][k] e^k for the invariant (1,0)-forms phi^1, phi^2.
    std::array<std::array<Complex, 4>, 2> forms{};
    /// The Bott-Chern (1,1) class is spanned by i phi^g ∧ conj(phi^g), g = bc_generator (1 or 2).
    int bc_generator = 2;
    int bc_dim = 1;

    double bracket(int i, int j, int k) const { return structure[(i * 4 + j) * 4 + k]; }
    double J(int i, int j) const { return complex_structure[i * 4 + j]; }
};

/// Names: "inoue-sm" (needs alpha != 0), "inoue-pm", "kodaira".
/// Throws UnknownSurface or BadRange.
SurfaceModel catalog(std::string_view name, double alpha = 1.0, double beta = 0.0, double q = 0.0);

/// max |[[e_i, e_j], e_k] + [[e_j, e_k], e_i] + [[e_k, e_i], e_j]|.
double jacobi_residual(const SurfaceModel& m);
/// max entry of J^2 + Id.
double complex_structure_residual(const SurfaceModel& m);
/// max |phi^a(J v) - i phi^a(v)| over basis vectors; zero iff the forms are (1,0).
double form_type_residual(const SurfaceModel& m);

/// omega = i w_{ab} phi^a ∧ conj(phi^b).
struct InvariantMetric {
    double w11 = 1.0;
    double w22 = 1.0;
    Complex w12 = 0.0;

    /// Throws NotPositiveDefinite unless w11 > 0 and w11 w22 - |w12|^2 > 0.
    void validate() const;
    HermitianMatrix matrix() const;
};

/// Tr_omega(c i phi^2 ∧ conj(phi^2)) = c w11 / (w11 w22 - |w12|^2).
double trace_formula(const InvariantMetric& metric, double c);

/// Trace of c times the model's Bott-Chern generator.
double bc_trace(const SurfaceModel& model, const InvariantMetric& metric, double c);

/// min over s in {1, m, M} of arctan(s lambda1) + arctan(s lambda2).
/// Throws BadRange unless 0 < m <= M.
double conformal_bound(double lambda1, double lambda2, double m, double M);

struct SurfaceVerdict {
    bool trivial = false;  ///< c = 0: chi = 0 already solves the equation
    bool mirrored = false; ///< c < 0: verdict computed for -c
    double lambda1 = 0.0;  ///< eigenvalues of omega^{-1} chi for the given c
    double lambda2 = 0.0;
    double phase = 0.0;    ///< arctan(lambda1) + arctan(lambda2) for the given c
    double bound = 0.0;    ///< conformal bound for |c|
    bool is_csub = false;  ///< bound > 0
};

SurfaceVerdict csub_on_surface(const SurfaceModel& model, const InvariantMetric& metric, double c, double m,
                               double M);

} // namespace dhym
