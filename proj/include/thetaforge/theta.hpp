#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

#include "thetaforge/boosted.hpp"
#include "thetaforge/cones.hpp"
#include "thetaforge/errfn.hpp"
#include "thetaforge/errors.hpp"
#include "thetaforge/exact.hpp"
#include "thetaforge/quadform.hpp"

namespace thetaforge {

enum class KernelKind { holomorphic, completed, user };

// Kernel supplied by the caller together with a decay certificate:
// |phi(y)| exp(pi Q(y)/2) <= constant * exp(-(pi/2) y^T decay_form y).
struct UserKernel {
    std::function<double(const Eigen::VectorXd&)> phi;
    Eigen::MatrixXd decay_form;
    double constant = 1.0;
};

struct ThetaSpec {
    BilinearForm form;
    RationalVector mu;  // representative of a class in the dual lattice modulo the lattice
    RationalVector p;   // characteristic vector (integral)
    Eigen::VectorXd b;
    Eigen::VectorXd c_ell;
    std::complex<double> tau{0.0, 1.0};
    int lambda = 0;
    KernelKind kernel = KernelKind::holomorphic;
    ConePair pair;
    UserKernel user;
    QuadratureSpec quad;

    int dim() const { return form.dim(); }
    // Checks tau, the characteristic condition, mu in the dual lattice and
    // (for the cone kernels) the cone hypotheses.
    void validate() const;
};

struct TruncationPolicy {
    double tol = 1e-8;
    double initial_radius = 0.0;  // 0 picks a radius just above the tail-bound threshold
    std::int64_t max_points = 10'000'000;
    void validate() const;
};

struct ThetaValue {
    std::complex<double> value;
    std::int64_t n_points = 0;
    double tail_estimate = 0.0;
    double radius = 0.0;
    double abs_sum = 0.0;  // sum of |terms|
    std::vector<RationalVector> wall_hits;  // k + b with a vanishing sign argument (holomorphic kernel)
    bool partial = false;
};

class BudgetExceeded : public Error {
public:
    BudgetExceeded(const std::string& what, ThetaValue partial) : Error(what), partial_(std::move(partial)) {}
    const ThetaValue& partial() const { return partial_; }

private:
    ThetaValue partial_;
};

// 2^{-r} prod_j [sign B(c_j,x) - sign B(c'_j,x)], exact.
Rational kernel_phi(const ConePair& pair, const RationalVector& x);
double kernel_phi(const ConePair& pair, const Eigen::VectorXd& x);

// 2^{-r} sum_P (-1)^{r-|P|} E(C^P; x), the smooth completion of kernel_phi.
class CompletedKernel {
public:
    explicit CompletedKernel(const ConePair& pair, QuadratureSpec quad = {});
    double operator()(const Eigen::VectorXd& x) const;
    int rank() const { return r_; }

private:
    int r_ = 0;
    std::vector<BoostedFunction> parts_;  // indexed by the bitmask of P
};
double kernel_phi_hat(const ConePair& pair, const Eigen::VectorXd& x, const QuadratureSpec& quad = {});

// P_+ = O^T |diag| O from the eigen-decomposition of A.
Eigen::MatrixXd majorant(const BilinearForm& form);

// Calls visit(n, y, y^T P y) for every integer n with y = n + shift and
// lo2 < y^T P y <= hi2 (P positive definite), in a fixed order.
void enumerate_ellipsoid(const Eigen::MatrixXd& p_plus, const Eigen::VectorXd& shift, double lo2, double hi2,
                         const std::function<void(const std::vector<long>&, const Eigen::VectorXd&, double)>& visit);

struct LatticePoint {
    std::vector<long> n;  // k = n + mu + p/2
    Eigen::VectorXd x;    // k + b
    double majorant_norm2 = 0.0;
};
std::vector<LatticePoint> enumerate_lattice(const ThetaSpec& spec, double radius);

// Decay data used by the tail bound: |term| <= constant exp(-pi tau2 gamma P_+(k+b)).
struct DecayBound {
    Eigen::MatrixXd p_plus;
    double gamma = 0.0;
    double constant = 1.0;
};
DecayBound decay_bound(const ThetaSpec& spec);
// Bound on sum |term| over lattice points with P_+(k+b) > radius^2.
double tail_bound(const ThetaSpec& spec, const DecayBound& decay, double radius);

// Sum with radius doubling until the tail bound is below tol.
ThetaValue eval_theta(const ThetaSpec& spec, const TruncationPolicy& policy = {});
// Sum over the fixed ellipsoid P_+(k+b) <= radius^2.
ThetaValue eval_theta_at_radius(const ThetaSpec& spec, double radius);

struct QTerm {
    Rational exponent;     // power of q
    Rational coefficient;  // exact
    bool wall_affected = false;
};
struct QExpansion {
    // Overall factor exp(pi i phase) multiplying the series.
    Rational phase;
    std::vector<QTerm> terms;  // nonzero coefficients in increasing exponent order
    Rational complete_below;   // every exponent <= this is fully collected
    double radius = 0.0;
    std::int64_t n_points = 0;
};
// First n_terms nonzero coefficients of the holomorphic theta series at
// b = c = 0. radius_factor > 1 enlarges the enumeration beyond what
// completeness needs (for stability checks).
QExpansion q_expansion(const ThetaSpec& spec, int n_terms, const TruncationPolicy& policy = {},
                       double radius_factor = 1.0);

// Representatives in [0,1)^n of the dual lattice modulo the lattice.
std::vector<RationalVector> discriminant_group(const BilinearForm& form);

}  // namespace thetaforge
