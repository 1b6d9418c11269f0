#include <doctest.h>

#include <algorithm>

#include "thetaforge/errors.hpp"
#include "thetaforge/verify.hpp"

using namespace thetaforge;

namespace {

SignLemmaInstance instance(const std::vector<std::vector<long>>& g, const RationalVector& v) {
    return {RationalMatrix::from_rows(g), v};
}

}  // namespace

TEST_SUITE("verify") {
    TEST_CASE("sign lemma on hand-checked instances") {
        // n = 1: sign(v) + sign(-v/g)
        CHECK(sign_lemma_sum(instance({{3}}, {Rational(-2, 5)})) == 0);
        // G = I, v = (1,1): +1 - 1 - 1 + 1
        CHECK(sign_lemma_sum(instance({{1, 0}, {0, 1}}, {1, 1})) == 0);
        // G = [[2,1],[1,2]], v = (1,-1): -1 + 1 + 1 - 1
        CHECK(sign_lemma_sum(instance({{2, 1}, {1, 2}}, {1, -1})) == 0);
    }

    TEST_CASE("sign lemma on generated instances") {
        for (int n = 1; n <= 5; ++n)
            for (std::uint64_t seed = 1; seed <= 20; ++seed) {
                const SignLemmaInstance inst = random_sign_lemma_instance(seed, n);
                CHECK(inst.v.size() == static_cast<std::size_t>(n));
                CHECK(sign_lemma_sum(inst) == 0);
            }
    }

    TEST_CASE("sign lemma rejects degenerate input") {
        CHECK_THROWS_AS(sign_lemma_sum(instance({{1, 0}, {0, 1}}, {0, 1})), GenericityViolated);
        // S = {1}: v_2 - G_21 v_1 / G_11 = 1 - 1 = 0
        CHECK_THROWS_AS(sign_lemma_sum(instance({{1, 1}, {1, 2}}, {1, 1})), GenericityViolated);
        CHECK_THROWS_AS(sign_lemma_sum(instance({{1, 2}, {2, 1}}, {1, 1})), ValidationError);
        CHECK_THROWS_AS(sign_lemma_sum(instance({{1, 0}, {0, 1}}, {1})), ValidationError);
    }

    TEST_CASE("specialized sign identity on frames") {
        Eigen::MatrixXd m(3, 3);
        m << 1.0, 0.25, -0.5, 0.125, 1.0, 0.375, -0.25, 0.5, 1.0;
        const ErrorFunctionFrame f = ErrorFunctionFrame::from_columns(m);
        const Eigen::Vector3d u(0.3, -0.7, 0.45);
        for (IndexSet n : subsets_of_range(3))
            if (!n.empty()) CHECK(sign_identity_specialized(f, u, n) == 0);
        CHECK_THROWS_AS(sign_identity_specialized(f, u, IndexSet()), ValidationError);
        CHECK_THROWS_AS(sign_identity_specialized(f, Eigen::Vector2d(1, 1), IndexSet::single(0)), ValidationError);
    }

    TEST_CASE("reports pass exactly when residual <= tolerance") {
        CHECK(make_report("a", "x", 1.0, 1.0).pass);
        CHECK_FALSE(make_report("a", "x", 1.5, 1.0).pass);
        CHECK(make_report("a", "x", 0.0, 0.0).pass);
        CHECK(make_report("a", "x", 0.0, 0.0).digest == make_report("a", "x", 3.0, 0.0).digest);
        CHECK(make_report("a", "x", 0.0, 0.0).digest != make_report("a", "y", 0.0, 0.0).digest);
    }

    TEST_CASE("a tampered bound is caught") {
        CHECK(check_m_bound(5, 200).pass);
        const CheckReport bad = check_m_bound(5, 200, 1e-3);
        CHECK_FALSE(bad.pass);
        CHECK(bad.residual > 0.0);
    }

    TEST_CASE("S-law spot check") {
        const SLawResult s = s_law_spot_check();
        CHECK(std::abs(std::abs(s.factor) - 1.0) < 1e-6);
        CHECK(s.max_deviation < 1e-4);
        CHECK(s.n_classes == 4);
    }

    TEST_CASE("fast suite passes and is deterministic") {
        const std::vector<CheckReport> a = run_suite(SuiteLevel::fast, 7);
        const std::vector<CheckReport> b = run_suite(SuiteLevel::fast, 7);
        REQUIRE(a.size() == b.size());
        CHECK(std::is_sorted(a.begin(), a.end(), [](const auto& x, const auto& y) { return x.name < y.name; }));
        for (std::size_t i = 0; i < a.size(); ++i) {
            CAPTURE(a[i].name);
            CAPTURE(a[i].detail);
            CHECK(a[i].pass);
            CHECK(a[i].name == b[i].name);
            CHECK(a[i].digest == b[i].digest);
            CHECK(a[i].residual == b[i].residual);
        }
    }
}
