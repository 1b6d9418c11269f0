#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "thetaforge/errfn.hpp"
#include "thetaforge/exact.hpp"
#include "thetaforge/index_set.hpp"

namespace thetaforge {

// G positive definite, v generic: every entry of every summand vector nonzero.
struct SignLemmaInstance {
    RationalMatrix g;
    RationalVector v;
};

// Sum over S of the sign product of
//   [ -G_SS^{-1} v_S ; v_rest - G_{rest,S} G_SS^{-1} v_S ].
// Exact. ValidationError if G is not positive definite; GenericityViolated
// if any entry vanishes.
long sign_lemma_sum(const SignLemmaInstance& inst);

// The same sum with G = W_N^T W_N and v = W_N^T u built from the frame's dual
// vectors (taken exactly from their binary values). Entries within 1e-10 of
// zero raise GenericityViolated. N nonempty.
long sign_identity_specialized(const ErrorFunctionFrame& frame, const Eigen::VectorXd& u, IndexSet n);

struct CheckReport {
    std::string name;
    std::string digest;  // hash of the inputs that determine the check
    double residual = 0.0;
    double tolerance = 0.0;
    bool pass = false;
    std::string detail;
};

// pass <=> residual <= tolerance; a thrown library error yields residual = inf.
CheckReport make_report(std::string name, std::string inputs, double residual, double tolerance,
                        std::string detail = {});

// Individual checks. Sizes are parameters so that the quick suite, the full
// suite and the acceptance runner share one implementation.
CheckReport check_closed_forms();
CheckReport check_mc_oracle(std::uint64_t seed, int n_frames, std::int64_t samples);
std::vector<CheckReport> check_decompositions(std::uint64_t seed, int n_instances);
std::vector<CheckReport> check_vigneras(std::uint64_t seed, int n_per_rank);
CheckReport check_m_bound(std::uint64_t seed, int n_samples, double rhs_scale = 1.0);
std::vector<CheckReport> check_discontinuity(std::uint64_t seed, int n_instances);
CheckReport check_sign_lemma(std::uint64_t seed, int n_per_size, int max_size);
CheckReport check_sign_identity(std::uint64_t seed, int n_frames);
CheckReport check_boosted_shadow(std::uint64_t seed, int n_instances);
CheckReport check_a4_example();
std::vector<CheckReport> check_cofactor_identity(std::uint64_t seed, int n_x, int n_pairs);
std::vector<CheckReport> check_theta_convergence();
std::vector<CheckReport> check_theta_laws();

struct SLawResult {
    std::complex<double> factor;  // constant relating the two sides
    double max_deviation = 0.0;   // max |lhs - factor * rhs|
    int n_classes = 0;
};
SLawResult s_law_spot_check();
CheckReport check_s_law();

// Random instance generators shared with tests.
SignLemmaInstance random_sign_lemma_instance(std::uint64_t seed, int n);

enum class SuiteLevel { fast, full };
// Runs every check; deterministic for a fixed seed, reports ordered by name.
// bound_rhs_scale tampers with the M-bound (mutation sanity).
std::vector<CheckReport> run_suite(SuiteLevel level, std::uint64_t seed, double bound_rhs_scale = 1.0);

}  // namespace thetaforge
