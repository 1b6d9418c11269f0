#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "thetaforge/errfn.hpp"
#include "thetaforge/errors.hpp"

using namespace thetaforge;

namespace {

ErrorFunctionFrame frame_of(const Eigen::MatrixXd& m) { return ErrorFunctionFrame::from_columns(m); }

Eigen::MatrixXd sample_frame3() {
    Eigen::MatrixXd m(3, 3);
    m << 1, 0.3, -0.2, 0.1, 1, 0.4, -0.3, 0.2, 1;
    return m;
}

Eigen::VectorXd vec(std::initializer_list<double> xs) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(xs.size()));
    Eigen::Index i = 0;
    for (double x : xs) v(i++) = x;
    return v;
}

}  // namespace

TEST_SUITE("errfn") {
    TEST_CASE("test oracle sanity against the C library") {
        for (double x : {0.01, 0.5, 1.7, 2.4, 2.6, 4.0}) {
            CHECK(oracle::erf_ref(x) == doctest::Approx(std::erf(x)).epsilon(1e-15));
            CHECK(oracle::erfc_ref(x) == doctest::Approx(std::erfc(x)).epsilon(1e-13));
        }
    }

    TEST_CASE("rank one matches the closed forms") {
        const ErrorFunction f(frame_of(Eigen::MatrixXd::Identity(1, 1)));
        for (double u : {-3.0, -1.2, -0.1, 0.1, 0.7, 2.0, 3.0}) {
            CHECK(std::fabs(f.error(vec({u})).value - oracle::e1(u)) < 1e-13);
            CHECK(std::fabs(f.complementary(vec({u})).value - oracle::m1(u)) < 1e-13);
        }
        CHECK(f.error(vec({0.0})).value == 0.0);
        // m = 2 rescales nothing: only the direction of m matters.
        const ErrorFunction g(frame_of(2.0 * Eigen::MatrixXd::Identity(1, 1)));
        CHECK(std::fabs(g.complementary(vec({0.4})).value - oracle::m1(0.4)) < 1e-13);
    }

    TEST_CASE("identity frames factorize") {
        const ErrorFunction f2(frame_of(Eigen::MatrixXd::Identity(2, 2)));
        const Eigen::VectorXd u = vec({1.0, 1.0});
        CHECK(f2.complementary(u).value == doctest::Approx(std::pow(oracle::erfc_ref(std::sqrt(M_PI)), 2)).epsilon(1e-10));
        const ErrorFunction f3(frame_of(Eigen::MatrixXd::Identity(3, 3)));
        const Eigen::VectorXd v = vec({0.3, -0.45, 0.8});
        double e = 1.0, m = 1.0;
        for (int i = 0; i < 3; ++i) {
            e *= oracle::e1(v(i));
            m *= oracle::m1(v(i));
        }
        CHECK(std::fabs(f3.error(v).value - e) < 1e-12);
        CHECK(std::fabs(f3.complementary(v).value - m) < 1e-12);
    }

    TEST_CASE("block-diagonal frames factorize") {
        Eigen::MatrixXd m = Eigen::MatrixXd::Zero(3, 3);
        m(0, 0) = 1.0;
        m.block(1, 1, 2, 2) << 1.0, 0.4, -0.3, 1.0;
        const Eigen::VectorXd u = vec({0.35, -0.2, 0.6});
        const ErrorFunction f(frame_of(m));
        const ErrorFunction g(frame_of(m.block(1, 1, 2, 2)));
        const Eigen::VectorXd tail = u.tail(2);
        CHECK(std::fabs(f.error(u).value - oracle::e1(u(0)) * g.error(tail).value) < 1e-12);
        CHECK(std::fabs(f.complementary(u).value - oracle::m1(u(0)) * g.complementary(tail).value) < 1e-12);
    }

    TEST_CASE("orthogonal invariance, permutation and positive scaling") {
        std::mt19937_64 gen(11);
        const Eigen::MatrixXd m = sample_frame3();
        const Eigen::VectorXd u = vec({0.4, -0.2, 0.3});
        const ErrorFunction f(frame_of(m));
        const double e = f.error(u).value, mm = f.complementary(u).value;
        const Eigen::MatrixXd r = oracle::rotation(gen, 3);
        const ErrorFunction fr(frame_of(r * m));
        CHECK(std::fabs(fr.error(r * u).value - e) < 1e-12);
        CHECK(std::fabs(fr.complementary(r * u).value - mm) < 1e-12);
        Eigen::MatrixXd perm(3, 3);
        perm.col(0) = m.col(2);
        perm.col(1) = m.col(0);
        perm.col(2) = m.col(1);
        CHECK(std::fabs(ErrorFunction(frame_of(perm)).complementary(u).value - mm) < 1e-12);
        const Eigen::MatrixXd scaled = m * Eigen::Vector3d(0.5, 3.0, 1.7).asDiagonal();
        CHECK(std::fabs(ErrorFunction(frame_of(scaled)).error(u).value - e) < 1e-12);
    }

    TEST_CASE("parity under u -> -u") {
        const ErrorFunction f(frame_of(sample_frame3()));
        const Eigen::VectorXd u = vec({0.4, -0.2, 0.3});
        CHECK(std::fabs(f.error(-u).value + f.error(u).value) < 1e-13);
        CHECK(std::fabs(f.complementary(-u).value + f.complementary(u).value) < 1e-13);
    }

    TEST_CASE("the two E routes agree") {
        const ErrorFunction f(frame_of(sample_frame3()));
        for (const Eigen::VectorXd& u : {vec({0.4, -0.2, 0.3}), vec({-1.1, 0.05, 0.7}), vec({0.02, 0.03, -0.01})})
            CHECK(std::fabs(f.error(u).value - f.error_radial(u).value) < 1e-11);
    }

    TEST_CASE("E far from the origin approaches the sign product") {
        const ErrorFunction f(frame_of(sample_frame3()));
        // u = W a puts M^T u = a, at least 3 from every wall in normalised units
        for (const Eigen::VectorXd& a : {vec({4.0, -4.0, 3.5}), vec({-3.5, -5.0, 4.0})}) {
            const Eigen::VectorXd u = f.frame().w * a;
            const double s = (a(0) > 0 ? 1.0 : -1.0) * (a(1) > 0 ? 1.0 : -1.0) * (a(2) > 0 ? 1.0 : -1.0);
            CHECK(std::fabs(f.error(u).value - s) < 1e-8);
        }
    }

    TEST_CASE("E is continuous through walls and at the origin") {
        const ErrorFunction f(frame_of(sample_frame3()));
        CHECK(std::fabs(f.error(Eigen::VectorXd::Zero(3)).value) < 1e-12);
        // on a wall of the decomposition the value interpolates smoothly
        Eigen::VectorXd u = vec({0.5, 0.0, 0.0});
        const Eigen::VectorXd w = f.frame().w.col(1).normalized();
        u -= w.dot(u) * w;
        const double at = f.error(u).value;
        const double side = 0.5 * (f.error(u + 1e-6 * w).value + f.error(u - 1e-6 * w).value);
        CHECK(std::fabs(at - side) < 1e-9);
    }

    TEST_CASE("Gauss-Hermite contour scheme agrees with the radial scheme") {
        QuadratureSpec gh;
        gh.scheme = QuadratureSpec::Scheme::gauss_hermite;
        gh.nodes_per_axis = 48;
        Eigen::MatrixXd m(2, 2);
        m << 1.0, 0.3, -0.2, 1.0;
        const Eigen::VectorXd u = vec({0.7, -0.9});
        const ErrFnValue a = eval_M({frame_of(m), u});
        const ErrFnValue b = eval_M({frame_of(m), u}, gh);
        CHECK(std::fabs(a.value - b.value) < 1e-6);
        CHECK(std::fabs(b.imag_residual) < 1e-6);
    }

    TEST_CASE("derivative matches central differences") {
        const ErrFnArgument arg{frame_of(sample_frame3()), vec({0.4, -0.2, 0.3})};
        const ErrorFunction f(arg.frame);
        const double h = 1e-4;
        for (FunctionKind kind : {FunctionKind::E, FunctionKind::M})
            for (int j = 0; j < 3; ++j) {
                // w^(j)T grad F as a directional difference along w^(j)
                const Eigen::VectorXd d = arg.frame.w.col(j);
                const double fd =
                    (f.evaluate(kind, arg.u + h * d).value - f.evaluate(kind, arg.u - h * d).value) / (2.0 * h);
                CHECK(std::fabs(derivative(arg, j, kind) - fd) < 1e-6);
            }
    }

    TEST_CASE("shadow is half the radial derivative") {
        const ErrFnArgument arg{frame_of(sample_frame3()), vec({0.4, -0.2, 0.3})};
        const ErrorFunction f(arg.frame);
        const double h = 1e-5;
        for (FunctionKind kind : {FunctionKind::E, FunctionKind::M}) {
            const double radial =
                (f.evaluate(kind, (1.0 + h) * arg.u).value - f.evaluate(kind, (1.0 - h) * arg.u).value) / (2.0 * h);
            CHECK(std::fabs(shadow(arg, kind) - 0.5 * radial) < 1e-6);
        }
        CHECK(shadow({arg.frame, Eigen::VectorXd::Zero(3)}, FunctionKind::E) == 0.0);
        // r = 1, u = 1: e^{-pi} E_0
        CHECK(shadow({frame_of(Eigen::MatrixXd::Identity(1, 1)), vec({1.0})}, FunctionKind::E) ==
              doctest::Approx(std::exp(-M_PI)).epsilon(1e-13));
    }

    TEST_CASE("discontinuity limits") {
        const ErrorFunctionFrame f1 = frame_of(Eigen::MatrixXd::Identity(1, 1));
        const int plus[1] = {1}, minus[1] = {-1};
        CHECK(discontinuity_limit({f1, vec({0.0})}, IndexSet(), plus) == -1.0);
        CHECK(discontinuity_limit({f1, vec({0.0})}, IndexSet(), minus) == 1.0);
        // r = 2 identity, S = {1}, approaching u2 = 0 from above: erfc(sqrt(pi))
        const ErrorFunctionFrame f2 = frame_of(Eigen::MatrixXd::Identity(2, 2));
        const double lim = discontinuity_limit({f2, vec({1.0, 0.0})}, IndexSet::single(0), plus);
        CHECK(lim == doctest::Approx(oracle::erfc_ref(std::sqrt(M_PI))).epsilon(1e-12));
        CHECK(discontinuity_limit({f2, vec({1.0, 0.0})}, IndexSet::single(0), minus) == doctest::Approx(-lim));
        const double near = ErrorFunction(f2).complementary(vec({1.0, 1e-9})).value;
        CHECK(std::fabs(near - lim) < 1e-8);
        CHECK_THROWS_AS(discontinuity_limit({f2, vec({1.0, 0.0})}, IndexSet::full(2), {}), ValidationError);
    }

    TEST_CASE("M-bound holds and its mutation is caught") {
        const ErrFnArgument arg{frame_of(sample_frame3()), vec({0.1, -0.05, 0.08})};
        const BoundCheck b = bound_check(arg);
        CHECK(b.ok);
        CHECK(b.rhs == doctest::Approx(6.0 * std::exp(-M_PI * arg.u.squaredNorm())));
        CHECK_FALSE(bound_check(arg, {}, 1e-3).ok);
    }

    TEST_CASE("Vigneras residual is second order") {
        const ErrFnArgument arg{frame_of(sample_frame3()), vec({0.4, -0.2, 0.3})};
        for (FunctionKind kind : {FunctionKind::E, FunctionKind::M}) {
            const double r1 = std::fabs(vigneras_residual(arg, kind, 1e-3));
            const double r2 = std::fabs(vigneras_residual(arg, kind, 5e-4));
            CHECK(r1 / r2 > 3.5);
            CHECK(r1 < 1e-4);
        }
        const ErrFnArgument near{arg.frame, vec({0.0, 0.3, 0.2})};
        CHECK_THROWS_AS(vigneras_residual({frame_of(Eigen::MatrixXd::Identity(3, 3)), near.u}, FunctionKind::M, 1e-3),
                        WallTooClose);
    }

    TEST_CASE("decompositions reproduce the direct values") {
        const ErrFnArgument arg{frame_of(sample_frame3()), vec({0.4, -0.2, 0.3})};
        const ErrorFunction f(arg.frame);
        const auto me = decompose_M_into_E(arg);
        const auto em = decompose_E_into_M(arg);
        CHECK(me.size() == 8);
        CHECK(em.size() == 8);
        CHECK(std::fabs(sum_terms(me) - f.complementary(arg.u).value) < 1e-12);
        CHECK(std::fabs(sum_terms(em) - f.error_radial(arg.u).value) < 1e-12);
        for (const auto& t : me) CHECK(std::abs(t.coefficient) == 1);
    }

    TEST_CASE("Monte Carlo oracle") {
        const ErrFnArgument arg{frame_of(sample_frame3()), vec({0.4, -0.2, 0.3})};
        const ErrFnValue a = eval_E_oracle_mc(arg, 400000, 5);
        const ErrFnValue b = eval_E_oracle_mc(arg, 400000, 5);
        CHECK(a.value == b.value);
        CHECK(std::fabs(a.value - eval_E(arg).value) < 4.0 * a.est_error);
        CHECK(eval_E_oracle_mc(arg, 400000, 6).value != a.value);
        CHECK_THROWS_AS(eval_E_oracle_mc(arg, 0, 1), ValidationError);
    }

    TEST_CASE("error paths") {
        const ErrorFunction f(frame_of(Eigen::MatrixXd::Identity(2, 2)));
        CHECK_THROWS_AS(f.complementary(vec({0.0, 1.0})), WallTooClose);
        CHECK_THROWS_AS(f.complementary(vec({1.0, 1.0, 1.0})), ValidationError);
        QuadratureSpec bad;
        bad.nodes_per_axis = 4;
        CHECK_THROWS_AS(bad.validate(), ValidationError);
        const ErrorFunction big(frame_of(Eigen::MatrixXd::Identity(5, 5)));
        CHECK_THROWS_AS(big.complementary(Eigen::VectorXd::Constant(5, 0.3)), RankTooLarge);
    }

    TEST_CASE("reduced and subset frames") {
        const ErrorFunctionFrame f = frame_of(sample_frame3());
        CHECK(reduced_frame(f, 1).rank() == 2);
        CHECK(subset_frame(f, IndexSet::of({0, 2})).rank() == 2);
    }
}
