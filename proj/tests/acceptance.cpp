// Acceptance runner: one PASS/FAIL line per criterion, nonzero exit if any
// criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <json.hpp>
#include <sstream>
#include <string>
#include <vector>

#include "thetaforge/cli.hpp"
#include "thetaforge/errfn.hpp"
#include "thetaforge/verify.hpp"
#include "unit/oracles.hpp"

using namespace thetaforge;

namespace {

constexpr std::uint64_t kSeed = 20240601;

struct Outcome {
    bool pass = false;
    std::string detail;
};

Outcome all_pass(const std::vector<CheckReport>& reports) {
    Outcome o{true, {}};
    for (const auto& r : reports) {
        o.pass = o.pass && r.pass;
        char buf[160];
        std::snprintf(buf, sizeof buf, "%s%s res %.3g tol %.3g", o.detail.empty() ? "" : "; ", r.name.c_str(),
                      r.residual, r.tolerance);
        o.detail += buf;
        if (!r.detail.empty()) o.detail += " (" + r.detail + ")";
    }
    return o;
}

Outcome closed_forms() {
    double worst = 0.0;
    Eigen::MatrixXd one = Eigen::MatrixXd::Identity(1, 1);
    const ErrorFunctionFrame f = ErrorFunctionFrame::from_columns(one);
    for (int i = 1; i <= 30; ++i)
        for (int s : {-1, 1}) {
            const double u = s * 0.1 * i;
            const ErrFnArgument arg{f, Eigen::VectorXd::Constant(1, u)};
            worst = std::max(worst, std::fabs(eval_E(arg).value - oracle::e1(u)));
            worst = std::max(worst, std::fabs(eval_M(arg).value - oracle::m1(u)));
        }
    const CheckReport lib = check_closed_forms();
    char buf[96];
    std::snprintf(buf, sizeof buf, "max dev from series/continued-fraction erf %.3g", worst);
    return {worst <= 1e-10 && lib.pass, std::string(buf) + "; " + all_pass({lib}).detail};
}

Outcome a4_via_cli() {
    std::ostringstream out, err;
    const int code = cli::run({"cones", "--builtin", "a4"}, out, err);
    const nlohmann::json j = nlohmann::json::parse(out.str());
    const auto& in = j.at("top").at("q_minus_inertia");
    const bool inertia = in.at("positive") == 0 && in.at("negative") == 8 && in.at("zero") == 0;
    const bool pass = code == cli::kExitOk && j.at("pass") == true && j.at("identity_validated") == true && inertia;
    return {pass, "exit " + std::to_string(code) + ", recursion systems " + std::to_string(j.at("recursion").size()) +
                      ", Q_- inertia (" + in.at("positive").dump() + "," + in.at("negative").dump() + ")"};
}

struct Criterion {
    int id;
    const char* name;
    double time_limit;  // seconds, 0 for none
    std::function<Outcome()> run;
};

}  // namespace

int main() {
    const std::vector<Criterion> criteria = {
        {1, "closed-form anchors", 1.0, closed_forms},
        {2, "Monte Carlo oracle equivalence", 300.0,
         [] { return all_pass({check_mc_oracle(kSeed, 200, 4'000'000)}); }},
        {3, "decomposition closure", 0.0, [] { return all_pass(check_decompositions(kSeed, 200)); }},
        {4, "Vigneras PDE residual order", 0.0, [] { return all_pass(check_vigneras(kSeed, 3)); }},
        {5, "complementary bound", 0.0, [] { return all_pass({check_m_bound(kSeed, 10'000)}); }},
        {6, "wall discontinuity", 0.0, [] { return all_pass(check_discontinuity(kSeed, 50)); }},
        {7, "sign lemma", 120.0, [] { return all_pass({check_sign_lemma(kSeed, 1000, 5)}); }},
        {8, "rank four cone example", 10.0, a4_via_cli},
        {9, "cofactor identity", 0.0, [] { return all_pass(check_cofactor_identity(kSeed, 100, 20)); }},
        {10, "theta convergence", 0.0, [] { return all_pass(check_theta_convergence()); }},
        {11, "T-law and elliptic laws", 0.0, [] { return all_pass(check_theta_laws()); }},
        {12, "S-law spot check", 600.0, [] { return all_pass({check_s_law()}); }},
    };
    int failures = 0;
    for (const auto& c : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("threw: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const bool in_time = c.time_limit <= 0.0 || secs < c.time_limit;
        const bool pass = o.pass && in_time;
        if (!pass) ++failures;
        std::printf("[%s] %2d %-32s %7.2fs%s  %s\n", pass ? "PASS" : "FAIL", c.id, c.name, secs,
                    in_time ? "" : " (over time limit)", o.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d/%zu criteria pass\n", static_cast<int>(criteria.size()) - failures, criteria.size());
    return failures == 0 ? 0 : 1;
}
