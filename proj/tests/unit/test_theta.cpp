#include <doctest.h>

#include <cmath>
#include <complex>
#include <map>
#include <numbers>

#include "oracles.hpp"
#include "thetaforge/errors.hpp"
#include "thetaforge/theta.hpp"

using namespace thetaforge;
using cd = std::complex<double>;

namespace {

constexpr double kPi = std::numbers::pi;

ThetaSpec rank_one_spec(KernelKind kernel) {
    ThetaSpec s;
    s.pair = build_rank_one_example();
    s.form = s.pair.form;
    s.mu = {0, 0};
    s.p = {1, 1};
    s.b = Eigen::Vector2d(0.1, 0.23);
    s.c_ell = Eigen::Vector2d(0.3, -0.17);
    s.tau = {0.1, 1.3};
    s.kernel = kernel;
    return s;
}

// diag(3,-3), c = (1,0), c' = (2,1), class mu = (1/3, 0).
ThetaSpec asymmetric_spec() {
    ThetaSpec s;
    s.form = BilinearForm::from_rows({{3, 0}, {0, -3}});
    s.pair.form = s.form;
    s.pair.c = RationalMatrix::from_rows({{1}, {0}});
    s.pair.c_prime = RationalMatrix::from_rows({{2}, {1}});
    s.mu = {Rational(1, 3), 0};
    s.p = {1, 1};
    s.b = Eigen::Vector2d::Zero();
    s.c_ell = Eigen::Vector2d::Zero();
    return s;
}

int sgn(double x) { return (x > 0) - (x < 0); }

// Rank-one kernels written out from their definitions on diag(1,-1) with
// c = (1,0), c' = (2,1): B(c,x) = x1, B(c',x) = 2 x1 - x2, Q(c) = 1, Q(c') = 3.
double phi_holo(const Eigen::Vector2d& x) { return 0.5 * (sgn(x(0)) - sgn(2 * x(0) - x(1))); }
double phi_completed(const Eigen::Vector2d& x) {
    return 0.5 * (oracle::e1(x(0)) - oracle::e1((2 * x(0) - x(1)) / std::sqrt(3.0)));
}

// Box sum over n in [-N,N]^2 of
//   e^{pi i B(k,p)} phi(sqrt(2 tau2) (k+b)) e^{-pi i tau Q(k+b) + 2 pi i B(c, k + b/2)}
// with k = n + mu + p/2 and A = diag(1,-1).
cd box_sum(const ThetaSpec& s, double (*phi)(const Eigen::Vector2d&), int n_max) {
    const Eigen::Vector2d off(s.mu[0].get_d() + 0.5 * s.p[0].get_d(), s.mu[1].get_d() + 0.5 * s.p[1].get_d());
    auto bil = [](const Eigen::Vector2d& x, const Eigen::Vector2d& y) { return x(0) * y(0) - x(1) * y(1); };
    const Eigen::Vector2d p(s.p[0].get_d(), s.p[1].get_d());
    const double t2 = s.tau.imag();
    cd sum = 0.0;
    for (int a = -n_max; a <= n_max; ++a)
        for (int b = -n_max; b <= n_max; ++b) {
            const Eigen::Vector2d k = Eigen::Vector2d(a, b) + off;
            const Eigen::Vector2d x = k + s.b;
            const double f = phi(std::sqrt(2.0 * t2) * x);
            if (f == 0.0) continue;
            const cd ex = cd(0, kPi) * bil(k, p) - cd(0, kPi) * s.tau * bil(x, x) +
                          cd(0, 2 * kPi) * bil(s.c_ell, k + 0.5 * s.b);
            sum += f * std::exp(ex);
        }
    return sum;
}

int sign_q(const mpq_class& x) { return sgn(x); }

}  // namespace

TEST_SUITE("theta") {
    TEST_CASE("holomorphic value agrees with a brute-force box sum") {
        const ThetaSpec s = rank_one_spec(KernelKind::holomorphic);
        const ThetaValue v = eval_theta(s, {1e-13});
        const cd ref = box_sum(s, phi_holo, 40);
        CHECK(std::abs(v.value - ref) < 1e-11);
        CHECK_FALSE(v.partial);
        CHECK(v.tail_estimate <= 1e-13);
    }

    TEST_CASE("completed value agrees with a brute-force box sum") {
        const ThetaSpec s = rank_one_spec(KernelKind::completed);
        const ThetaValue v = eval_theta(s, {1e-13});
        const cd ref = box_sum(s, phi_completed, 40);
        CHECK(std::abs(v.value - ref) < 1e-11);
    }

    TEST_CASE("kernels at sample points") {
        const ConePair pair = build_rank_one_example();
        CHECK(kernel_phi(pair, RationalVector{1, 0}) == 0);       // both signs +
        CHECK(kernel_phi(pair, RationalVector{1, 3}) == 1);       // x1 > 0 > 2 x1 - x2
        CHECK(kernel_phi(pair, RationalVector{-1, -3}) == -1);
        CHECK(kernel_phi(pair, RationalVector{0, 1}) == Rational(1, 2));  // on the c wall
        const Eigen::Vector2d x(0.4, 1.7);
        CHECK(kernel_phi_hat(pair, x) == doctest::Approx(phi_completed(x)).epsilon(1e-12));
        const CompletedKernel k(pair);
        CHECK(k(x) == doctest::Approx(phi_completed(x)).epsilon(1e-12));
    }

    TEST_CASE("q-expansion coefficients match an exact brute-force count") {
        const ThetaSpec s = asymmetric_spec();
        const QExpansion q = q_expansion(s, 10);
        REQUIRE(q.terms.size() == 10);
        // coefficient at e = -Q(k)/2: sum of (-1)^{B(n,p)} phi(k) with B(n,p) = 3 n1 - 3 n2.
        std::map<mpq_class, mpq_class> ref;
        const int n_max = 40;
        for (int a = -n_max; a <= n_max; ++a)
            for (int b = -n_max; b <= n_max; ++b) {
                const mpq_class k1 = mpq_class(a) + mpq_class(1, 3) + mpq_class(1, 2);
                const mpq_class k2 = mpq_class(b) + mpq_class(1, 2);
                mpq_class phi(sign_q(3 * k1) - sign_q(3 * (2 * k1 - k2)), 2);
                phi.canonicalize();
                if (phi == 0) continue;
                const mpq_class e = -(3 * k1 * k1 - 3 * k2 * k2) / 2;
                ref[e] += ((3 * (a - b)) % 2 == 0 ? 1 : -1) * phi;
            }
        auto it = ref.begin();
        for (const auto& t : q.terms) {
            while (it != ref.end() && it->second == 0) ++it;
            REQUIRE(it != ref.end());
            CHECK(t.exponent == it->first);
            CHECK(t.coefficient == it->second);
            CHECK(t.exponent > 0);
            ++it;
        }
        // phase B(mu,p) + Q(p)/2 = 1 + 0 mod 2
        CHECK(q.phase == 1);
    }

    TEST_CASE("q-expansion summed at tau = i reproduces the value") {
        const ThetaSpec s = asymmetric_spec();
        const QExpansion q = q_expansion(s, 40);
        cd sum = 0.0;
        for (const auto& t : q.terms) sum += t.coefficient.get_d() * std::exp(-2 * kPi * t.exponent.get_d());
        sum *= std::exp(cd(0, kPi) * q.phase.get_d());
        const ThetaValue v = eval_theta(s, {1e-14});
        CHECK(std::abs(sum - v.value) < 1e-12);
    }

    TEST_CASE("an odd-symmetric class vanishes identically") {
        ThetaSpec s = rank_one_spec(KernelKind::holomorphic);
        s.b.setZero();
        s.c_ell.setZero();
        s.tau = {0.0, 1.0};
        const ThetaValue v = eval_theta(s);
        CHECK(std::abs(v.value) < 1e-15);
    }

    TEST_CASE("discriminant group has |det A| elements") {
        CHECK(discriminant_group(BilinearForm::from_rows({{3, 0}, {0, -3}})).size() == 9);
        CHECK(discriminant_group(BilinearForm::from_rows({{2, 1}, {1, -2}})).size() == 5);
        const auto g = discriminant_group(BilinearForm::from_rows({{1, 0}, {0, -1}}));
        REQUIRE(g.size() == 1);
        CHECK(g[0] == RationalVector{0, 0});
    }

    TEST_CASE("ellipsoid enumeration visits exactly the points inside") {
        Eigen::Matrix2d p;
        p << 2.0, 0.5, 0.5, 1.0;
        const Eigen::Vector2d shift(0.25, -0.4);
        int count = 0;
        enumerate_ellipsoid(p, shift, -1.0, 9.0, [&](const std::vector<long>&, const Eigen::VectorXd& y, double q) {
            CHECK(q <= 9.0);
            CHECK(q == doctest::Approx(y.dot(p * y)));
            ++count;
        });
        int ref = 0;
        for (int a = -20; a <= 20; ++a)
            for (int b = -20; b <= 20; ++b) {
                const Eigen::Vector2d y = Eigen::Vector2d(a, b) + shift;
                if (y.dot(p * y) <= 9.0) ++ref;
            }
        CHECK(count == ref);
    }

    TEST_CASE("tail bound decreases with the radius") {
        const ThetaSpec s = rank_one_spec(KernelKind::completed);
        const DecayBound d = decay_bound(s);
        CHECK(d.gamma > 0.0);
        double prev = tail_bound(s, d, 1.0);
        for (double r = 2.0; r < 20.0; r += 1.0) {
            const double t = tail_bound(s, d, r);
            CHECK(t <= prev);
            prev = t;
        }
        CHECK(prev < 1e-20);
    }

    TEST_CASE("budget exhaustion reports the partial sum") {
        const ThetaSpec s = rank_one_spec(KernelKind::holomorphic);
        TruncationPolicy pol;
        pol.tol = 1e-14;
        pol.max_points = 5;
        try {
            eval_theta(s, pol);
            FAIL("expected BudgetExceeded");
        } catch (const BudgetExceeded& e) {
            CHECK(e.partial().partial);
            CHECK(e.partial().n_points <= 5);
        }
    }

    TEST_CASE("validation") {
        ThetaSpec s = rank_one_spec(KernelKind::holomorphic);
        s.tau = {0.0, 0.0};
        CHECK_THROWS_AS(s.validate(), ValidationError);
        s = rank_one_spec(KernelKind::holomorphic);
        s.p = {1, 0};  // Q(e_1) + B(e_1, p) = 1 + 1 even, Q(e_2) + B(e_2, p) = -1 odd
        CHECK_THROWS_AS(s.validate(), ValidationError);
        s = rank_one_spec(KernelKind::holomorphic);
        s.mu = {Rational(1, 2), 0};
        CHECK_THROWS_AS(s.validate(), ValidationError);
        s = rank_one_spec(KernelKind::holomorphic);
        s.lambda = 1;
        CHECK_THROWS_AS(s.validate(), ValidationError);
        s = rank_one_spec(KernelKind::completed);
        CHECK_THROWS_AS(q_expansion(s, 5), ValidationError);
        TruncationPolicy bad;
        bad.tol = 0.0;
        CHECK_THROWS_AS(bad.validate(), ValidationError);
    }
}
