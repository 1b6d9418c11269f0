#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "thetaforge/boosted.hpp"
#include "thetaforge/errors.hpp"

using namespace thetaforge;

namespace {

// Signature (2,1): two timelike columns.
BilinearForm form21() { return BilinearForm::from_rows({{1, 0, 0}, {0, 1, 0}, {0, 0, -1}}); }

Eigen::MatrixXd cone21() {
    Eigen::MatrixXd c(3, 2);
    c << 1.0, 0.2, 0.1, 1.0, 0.3, -0.25;
    return c;
}

}  // namespace

TEST_SUITE("boosted") {
    TEST_CASE("a definite form reduces to the Euclidean functions") {
        const BilinearForm id = BilinearForm::from_rows({{1, 0}, {0, 1}});
        Eigen::MatrixXd c(2, 2);
        c << 1.0, 0.3, -0.2, 1.0;
        const BoostedFunction f(build_cone(c, id));
        const ErrorFunction g(ErrorFunctionFrame::from_columns(c));
        const Eigen::Vector2d x(0.6, -0.35);
        CHECK(std::fabs(f.error(x).value - g.error(x).value) < 1e-12);
        CHECK(std::fabs(f.complementary(x).value - g.complementary(x).value) < 1e-12);
    }

    TEST_CASE("rank one closed form: E(c; x) = erf(sqrt(pi) B(c,x)/sqrt(Q(c)))") {
        const BilinearForm f = form21();
        Eigen::MatrixXd c(3, 1);
        c << 1.0, 0.2, 0.5;
        const Eigen::Vector3d x(0.3, -0.1, 0.4);
        const double q = f.quad(Eigen::VectorXd(c.col(0)));
        const double b = f.pair(Eigen::VectorXd(c.col(0)), Eigen::VectorXd(x));
        const BoostedFunction g(build_cone(c, f));
        CHECK(std::fabs(g.error(x).value - oracle::e1(b / std::sqrt(q))) < 1e-13);
        CHECK(std::fabs(g.complementary(x).value - oracle::m1(b / std::sqrt(q))) < 1e-13);
    }

    TEST_CASE("values depend on x only through its projection onto span C") {
        const BilinearForm f = form21();
        const ConeMatrix k = build_cone(cone21(), f);
        const BoostedFunction g(k);
        const Eigen::Vector3d x(0.3, -0.1, 0.4);
        const Eigen::VectorXd xp = project_plus({k, x});
        CHECK(std::fabs(g.error(x).value - g.error(xp).value) < 1e-13);
        // C^T A (x - x_+) = 0
        CHECK((k.c.transpose() * f.matrix_d() * (x - xp)).norm() < 1e-13);
    }

    TEST_CASE("gauge rotations leave the values unchanged") {
        std::mt19937_64 gen(3);
        const ConeMatrix k = build_cone(cone21(), form21());
        const ConeMatrix r = regauge(k, oracle::rotation(gen, 2));
        const Eigen::Vector3d x(0.3, -0.1, 0.4);
        CHECK(std::fabs(BoostedFunction(k).complementary(x).value - BoostedFunction(r).complementary(x).value) < 1e-12);
        CHECK_THROWS_AS(regauge(k, Eigen::MatrixXd::Identity(3, 3)), ValidationError);
    }

    TEST_CASE("boosted decompositions close") {
        const ConeMatrix k = build_cone(cone21(), form21());
        const BoostedArgument arg{k, Eigen::Vector3d(0.3, -0.1, 0.4)};
        const BoostedDecompositions d = boosted_decompositions(arg);
        CHECK(std::fabs(sum_terms(d.m_from_e) - eval_M_boosted(arg).value) < 1e-11);
        CHECK(std::fabs(sum_terms(d.e_from_m) - eval_E_boosted(arg).value) < 1e-11);
    }

    TEST_CASE("shadow: derivative form equals the perpendicular-cone form") {
        const ConeMatrix k = build_cone(cone21(), form21());
        const BoostedArgument arg{k, Eigen::Vector3d(0.3, -0.1, 0.4)};
        CHECK(std::fabs(boosted_shadow(arg, FunctionKind::E) - boosted_shadow_from_perp(arg)) < 1e-11);
    }

    TEST_CASE("boosted Vigneras residual is second order") {
        const ConeMatrix k = build_cone(cone21(), form21());
        const BoostedArgument arg{k, Eigen::Vector3d(0.3, -0.1, 0.4)};
        for (FunctionKind kind : {FunctionKind::E, FunctionKind::M}) {
            const double r1 = std::fabs(boosted_vigneras_residual(arg, kind, 1e-3));
            const double r2 = std::fabs(boosted_vigneras_residual(arg, kind, 5e-4));
            CHECK(r1 / r2 > 3.5);
        }
    }

    TEST_CASE("perpendicular columns are A-orthogonal to the removed ones") {
        const BilinearForm f = form21();
        const Eigen::MatrixXd c = cone21();
        const Eigen::MatrixXd p = perp_columns(c, IndexSet::single(0), IndexSet::single(1), f);
        CHECK(std::fabs(p.col(0).dot(f.matrix_d() * c.col(1))) < 1e-14);
    }

    TEST_CASE("error paths") {
        const BilinearForm f = form21();
        Eigen::MatrixXd spacelike(3, 1);
        spacelike << 0.1, 0.0, 1.0;
        CHECK_THROWS_AS(build_cone(spacelike, f), NotTimelike);
        Eigen::MatrixXd null(3, 2);
        null << 1, 1, 0, 0, 1, 0;  // second column; first is null (1,0,1)
        CHECK_THROWS_AS(perp_columns(null, IndexSet::single(1), IndexSet::single(0), f), DegenerateGram);
        Eigen::MatrixXd wrong(2, 1);
        wrong << 1, 0;
        CHECK_THROWS_AS(build_cone(wrong, f), ValidationError);
    }
}
