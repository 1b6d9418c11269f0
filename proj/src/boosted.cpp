#include "thetaforge/boosted.hpp"

#include <cmath>
#include <numbers>

#include "thetaforge/errors.hpp"

namespace thetaforge {

namespace {

constexpr double kPi = std::numbers::pi;

bool is_integral(const Eigen::MatrixXd& m) {
    for (Eigen::Index i = 0; i < m.size(); ++i) {
        const double v = m.data()[i];
        if (!std::isfinite(v) || v != std::round(v) || std::fabs(v) > 1e15) return false;
    }
    return true;
}

double sgn(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

void check_timelike(const Eigen::MatrixXd& c, const BilinearForm& form) {
    if (c.cols() == 0) throw NotTimelike("cone has no columns");
    if (is_integral(c)) {
        const RationalMatrix cr = RationalMatrix::from_double(c);
        if (!positive_definite(cr.transpose() * form.matrix() * cr))
            throw NotTimelike("C^T A C is not positive definite");
        return;
    }
    const Eigen::MatrixXd gram = c.transpose() * form.matrix_d() * c;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram);
    const double scale = std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
    if (!(es.eigenvalues().minCoeff() > 1e-10 * scale)) throw NotTimelike("C^T A C is not positive definite");
}

ConeMatrix assemble(Eigen::MatrixXd c, const BilinearForm& form, Eigen::MatrixXd e) {
    ConeMatrix out;
    out.c = std::move(c);
    out.form = form;
    out.e = std::move(e);
    const Eigen::MatrixXd eac = out.e * form.matrix_d() * out.c;
    out.d = out.e.transpose() * eac.inverse().transpose();
    return out;
}

}  // namespace

ErrorFunctionFrame ConeMatrix::frame() const { return ErrorFunctionFrame::from_columns(e * form.matrix_d() * c); }

Eigen::VectorXd ConeMatrix::coordinates(const Eigen::VectorXd& x) const {
    if (x.size() != dim()) throw ValidationError("vector length does not match the form dimension");
    return e * (form.matrix_d() * x);
}

ConeMatrix build_cone(const Eigen::MatrixXd& c, const BilinearForm& form) {
    if (c.rows() != form.dim()) throw ValidationError("cone columns do not live in the form's dimension");
    check_timelike(c, form);
    const Eigen::MatrixXd& a = form.matrix_d();
    const Eigen::Index s = c.cols();
    Eigen::MatrixXd e(s, c.rows());
    for (Eigen::Index j = 0; j < s; ++j) {
        Eigen::VectorXd v = c.col(j);
        for (int pass = 0; pass < 2; ++pass)
            for (Eigen::Index i = 0; i < j; ++i) v -= e.row(i).dot(a * v) * e.row(i).transpose();
        const double q = v.dot(a * v);
        if (!(q > 0.0)) throw NotTimelike("A-Gram-Schmidt met a non-positive direction");
        e.row(j) = (v / std::sqrt(q)).transpose();
    }
    return assemble(c, form, e);
}

ConeMatrix regauge(const ConeMatrix& cone, const Eigen::MatrixXd& lambda) {
    if (lambda.rows() != cone.size() || lambda.cols() != cone.size())
        throw ValidationError("gauge rotation has the wrong size");
    return assemble(cone.c, cone.form, lambda * cone.e);
}

Eigen::VectorXd project_plus(const BoostedArgument& arg) {
    const ConeMatrix& k = arg.cone;
    return k.e.transpose() * k.coordinates(arg.x);
}

Eigen::MatrixXd perp_columns(const Eigen::MatrixXd& c, IndexSet s, IndexSet s_prime, const BilinearForm& form) {
    const Eigen::MatrixXd cs = select_columns(c, s);
    if (s_prime.empty()) return cs;
    const Eigen::MatrixXd cp = select_columns(c, s_prime);
    const Eigen::MatrixXd& a = form.matrix_d();
    const Eigen::MatrixXd gram = cp.transpose() * a * cp;
    if (is_integral(cp)) {
        const RationalMatrix cr = RationalMatrix::from_double(cp);
        if (determinant(cr.transpose() * form.matrix() * cr) == 0)
            throw DegenerateGram("Gram matrix of the projected-out columns is singular");
    } else {
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(gram);
        const auto& sv = svd.singularValues();
        if (!(sv(sv.size() - 1) > 1e-12 * std::max(1.0, sv(0))))
            throw DegenerateGram("Gram matrix of the projected-out columns is singular");
    }
    return cs - cp * gram.partialPivLu().solve(cp.transpose() * a * cs);
}

ConeMatrix perp_cone(const ConeMatrix& cone, IndexSet s, IndexSet s_prime) {
    return build_cone(perp_columns(cone.c, s, s_prime, cone.form), cone.form);
}

BoostedFunction::BoostedFunction(ConeMatrix cone, QuadratureSpec quad)
    : cone_(std::move(cone)), f_(cone_.frame(), quad) {}

ErrFnValue eval_E_boosted(const BoostedArgument& arg, const QuadratureSpec& quad) {
    return ErrorFunction(arg.cone.frame(), quad).error(arg.cone.coordinates(arg.x));
}

ErrFnValue eval_M_boosted(const BoostedArgument& arg, const QuadratureSpec& quad) {
    return ErrorFunction(arg.cone.frame(), quad).complementary(arg.cone.coordinates(arg.x));
}

BoostedDecompositions boosted_decompositions(const BoostedArgument& arg, const QuadratureSpec& quad) {
    const ConeMatrix& k = arg.cone;
    const int s = k.size();
    const Eigen::MatrixXd& a = k.form.matrix_d();
    const Eigen::VectorXd ax = a * arg.x;
    {
        const ErrorFunction f(k.frame(), quad);
        const Eigen::VectorXd u = k.coordinates(arg.x);
        if (f.wall_distance(u) < wall_eps(u)) throw WallTooClose("argument lies within wall_eps of a wall");
    }
    BoostedDecompositions out;
    for (IndexSet sub : subsets_of_range(s)) {
        const IndexSet rest = sub.complement(s);
        DecompositionTerm me, em;
        me.s = em.s = sub;
        int c1 = rest.size() % 2 ? -1 : 1;
        for (int j : rest.indices()) c1 *= static_cast<int>(sgn(k.d.col(j).dot(ax)));
        me.coefficient = c1;
        int c2 = 1;
        if (!rest.empty()) {
            const Eigen::MatrixXd perp = perp_columns(k.c, rest, sub, k.form);
            for (Eigen::Index j = 0; j < perp.cols(); ++j) c2 *= static_cast<int>(sgn(perp.col(j).dot(ax)));
        }
        em.coefficient = c2;
        if (sub.empty()) {
            me.value = em.value = 1.0;
        } else {
            const BoostedFunction g(build_cone(select_columns(k.c, sub), k.form), quad);
            const ErrFnValue ev = g.error(arg.x);
            const ErrFnValue mv = g.complementary(arg.x);
            me.value = ev.value;
            me.est_error = ev.est_error;
            em.value = mv.value;
            em.est_error = mv.est_error;
        }
        out.m_from_e.push_back(me);
        out.e_from_m.push_back(em);
    }
    return out;
}

double boosted_shadow(const BoostedArgument& arg, FunctionKind kind, const QuadratureSpec& quad) {
    return shadow({arg.cone.frame(), arg.cone.coordinates(arg.x)}, kind, quad);
}

double boosted_shadow_from_perp(const BoostedArgument& arg, const QuadratureSpec& quad) {
    const ConeMatrix& k = arg.cone;
    const int s = k.size();
    double total = 0.0;
    for (int j = 0; j < s; ++j) {
        const Eigen::VectorXd cj = k.c.col(j);
        const double q = k.form.quad(cj);
        const double b = k.form.pair(cj, arg.x);
        double lower = 1.0;
        if (s > 1) {
            const IndexSet rest = IndexSet::full(s).without(j);
            const ConeMatrix sub = build_cone(perp_columns(k.c, rest, IndexSet::single(j), k.form), k.form);
            lower = BoostedFunction(sub, quad).error(arg.x).value;
        }
        total += b / std::sqrt(q) * std::exp(-kPi * b * b / q) * lower;
    }
    return total;
}

double boosted_vigneras_residual(const BoostedArgument& arg, FunctionKind kind, double h, const QuadratureSpec& quad) {
    if (!(h > 0.0)) throw ValidationError("step must be positive");
    const BoostedFunction f(arg.cone, quad);
    const int n = arg.cone.dim();
    const Eigen::MatrixXd& ainv = arg.cone.form.inverse_d();
    auto at = [&](const Eigen::VectorXd& x) { return f.evaluate(kind, x).value; };
    const double centre = at(arg.x);
    Eigen::VectorXd plus(n), minus(n);
    for (int a = 0; a < n; ++a) {
        Eigen::VectorXd up = arg.x, dn = arg.x;
        up(a) += h;
        dn(a) -= h;
        plus(a) = at(up);
        minus(a) = at(dn);
    }
    double total = 0.0;
    for (int a = 0; a < n; ++a) {
        total += ainv(a, a) * (plus(a) - 2.0 * centre + minus(a)) / (h * h);
        total += 2.0 * kPi * arg.x(a) * (plus(a) - minus(a)) / (2.0 * h);
        for (int b = a + 1; b < n; ++b) {
            if (ainv(a, b) == 0.0) continue;
            Eigen::VectorXd pp = arg.x, pm = arg.x, mp = arg.x, mm = arg.x;
            pp(a) += h, pp(b) += h;
            pm(a) += h, pm(b) -= h;
            mp(a) -= h, mp(b) += h;
            mm(a) -= h, mm(b) -= h;
            const double mixed = (at(pp) - at(pm) - at(mp) + at(mm)) / (4.0 * h * h);
            total += 2.0 * ainv(a, b) * mixed;
        }
    }
    return total;
}

}  // namespace thetaforge
