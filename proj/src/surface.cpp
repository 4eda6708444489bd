#include "dhym/surface.hpp"

#include <algorithm>
#include <cmath>

#include "dhym/error.hpp"

namespace dhym {

namespace {

void set_bracket(SurfaceModel& m, int i, int j, int k, double v) {
    m.structure[(i * 4 + j) * 4 + k] = v;
    m.structure[(j * 4 + i) * 4 + k] = -v;
}

void set_J(SurfaceModel& m, int j, std::array<double, 4> image) {
    for (int i = 0; i < 4; ++i) m.complex_structure[i * 4 + j] = image[i];
}

const Complex kI(0.0, 1.0);

} // namespace

SurfaceModel catalog(std::string_view name, double alpha, double beta, double q) {
    SurfaceModel m;
    m.name = std::string(name);
    if (name == "inoue-sm") {
        if (alpha == 0.0 || !std::isfinite(alpha) || !std::isfinite(beta)) {
            fail(Errc::BadRange, "inoue-sm needs a finite nonzero alpha");
        }
        m.kind = SurfaceKind::InoueSM;
        m.alpha = alpha;
        m.beta = beta;
        set_bracket(m, 0, 3, 0, -alpha);
        set_bracket(m, 0, 3, 1, beta);
        set_bracket(m, 1, 3, 0, -beta);
        set_bracket(m, 1, 3, 1, -alpha);
        set_bracket(m, 2, 3, 2, 2.0 * alpha);
        m.bc_generator = 2;
    } else if (name == "inoue-pm") {
        if (!std::isfinite(q)) fail(Errc::BadRange, "inoue-pm needs a finite q");
        m.kind = SurfaceKind::InouePM;
        m.q = q;
        set_bracket(m, 1, 2, 0, -1.0);
        set_bracket(m, 1, 3, 1, -1.0);
        set_bracket(m, 2, 3, 2, 1.0);
        m.bc_generator = 2;
    } else if (name == "kodaira") {
        m.kind = SurfaceKind::SecondaryKodaira;
        set_bracket(m, 0, 1, 2, -1.0);
        set_bracket(m, 0, 3, 1, 1.0);
        set_bracket(m, 1, 3, 0, -1.0);
        m.bc_generator = 1;
    } else {
        fail(Errc::UnknownSurface, "unknown surface '" + std::string(name) + "'");
    }

    const double qq = m.kind == SurfaceKind::InouePM ? q : 0.0;
    set_J(m, 0, {0, 1, 0, 0});
    set_J(m, 1, {-1, 0, 0, 0});
    set_J(m, 2, {0, -qq, 0, 1});
    set_J(m, 3, {-qq, 0, -1, 0});
    m.forms[0] = {1.0, kI, 0.0, kI * qq};
    m.forms[1] = {0.0, 0.0, 1.0, kI};
    return m;
}

double jacobi_residual(const SurfaceModel& m) {
    // [[a, b], c] expanded through the structure constants.
    auto nested = [&](int a, int b, int c, int out) {
        double s = 0.0;
        for (int l = 0; l < 4; ++l) s += m.bracket(a, b, l) * m.bracket(l, c, out);
        return s;
    };
    double worst = 0.0;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
            for (int k = 0; k < 4; ++k)
                for (int o = 0; o < 4; ++o)
                    worst = std::max(worst, std::abs(nested(i, j, k, o) + nested(j, k, i, o) + nested(k, i, j, o)));
    return worst;
}

double complex_structure_residual(const SurfaceModel& m) {
    double worst = 0.0;
    for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 4; ++j) {
            double s = i == j ? 1.0 : 0.0;
            for (int l = 0; l < 4; ++l) s += m.J(i, l) * m.J(l, j);
            worst = std::max(worst, std::abs(s));
        }
    }
    return worst;
}

double form_type_residual(const SurfaceModel& m) {
    double worst = 0.0;
    for (const auto& phi : m.forms) {
        for (int j = 0; j < 4; ++j) {
            Complex on_Jv = 0.0;
            for (int i = 0; i < 4; ++i) on_Jv += phi[i] * m.J(i, j);
            worst = std::max(worst, std::abs(on_Jv - kI * phi[j]));
        }
    }
    return worst;
}

void InvariantMetric::validate() const {
    const double det = w11 * w22 - std::norm(w12);
    if (!(w11 > 0.0) || !(det > 0.0)) fail(Errc::NotPositiveDefinite, "invariant metric is not positive-definite");
}

HermitianMatrix InvariantMetric::matrix() const {
    CMatrix a(2);
    a(0, 0) = w11;
    a(1, 1) = w22;
    a(0, 1) = w12;
    a(1, 0) = std::conj(w12);
    return HermitianMatrix(a);
}

double trace_formula(const InvariantMetric& metric, double c) {
    metric.validate();
    return c * metric.w11 / (metric.w11 * metric.w22 - std::norm(metric.w12));
}

double bc_trace(const SurfaceModel& model, const InvariantMetric& metric, double c) {
    if (model.bc_generator == 2) return trace_formula(metric, c);
    metric.validate();
    return c * metric.w22 / (metric.w11 * metric.w22 - std::norm(metric.w12));
}

double conformal_bound(double lambda1, double lambda2, double m, double M) {
    if (!(m > 0.0) || !(m <= M)) fail(Errc::BadRange, "conformal bounds need 0 < m <= M");
    double best = std::atan(lambda1) + std::atan(lambda2);
    for (double s : {m, M}) best = std::min(best, std::atan(s * lambda1) + std::atan(s * lambda2));
    return best;
}

SurfaceVerdict csub_on_surface(const SurfaceModel& model, const InvariantMetric& metric, double c, double m,
                               double M) {
    metric.validate();
    if (!(m > 0.0) || !(m <= M)) fail(Errc::BadRange, "conformal bounds need 0 < m <= M");
    SurfaceVerdict v;
    if (c == 0.0) {
        v.trivial = true;
        return v;
    }
    const HermitianMatrix omega = metric.matrix();
    auto generator = [&](double scale) {
        std::array<double, 2> d{0.0, 0.0};
        d[model.bc_generator - 1] = scale;
        return HermitianMatrix::diagonal(d);
    };
    const EigenSystem es = eig_pair(omega, generator(c));
    v.lambda1 = es.lambdas[0];
    v.lambda2 = es.lambdas[1];
    v.phase = theta_arctan(es.values());

    v.mirrored = c < 0.0;
    const EigenSystem pos = v.mirrored ? eig_pair(omega, generator(-c)) : es;
    v.bound = conformal_bound(pos.lambdas[0], pos.lambdas[1], m, M);
    v.is_csub = v.bound > 0.0;
    return v;
}

} // namespace dhym
