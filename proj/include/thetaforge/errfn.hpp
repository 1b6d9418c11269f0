#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "thetaforge/index_set.hpp"
#include "thetaforge/quadform.hpp"

namespace thetaforge {

enum class FunctionKind { M, E };

struct QuadratureSpec {
    enum class Scheme {
        // Radial recursion built from the first-derivative formula; robust
        // arbitrarily close to walls. Nodes are per recursion level.
        radial,
        // Tensor Gauss-Hermite on the contour-shifted integral; spectrally
        // accurate only well away from walls. Kept as an independent route.
        gauss_hermite,
    };
    int nodes_per_axis = 64;
    Scheme scheme = Scheme::radial;
    int max_r_direct = 4;

    void validate() const;
};

struct ErrFnValue {
    double value = 0.0;
    double imag_residual = 0.0;
    double est_error = 0.0;
};

struct ErrFnArgument {
    ErrorFunctionFrame frame;
    Eigen::VectorXd u;
};

// Wall tolerance for an argument: max(1e-9 |u|, 1e-12), compared against
// |w^_j . u| with unit-normalised duals.
double wall_eps(const Eigen::VectorXd& u);

// Evaluation plan for M_r(M; .) and E_r(M; .) at a fixed frame. Construction
// precomputes the projector trees; evaluation is const and thread-safe.
class ErrorFunction {
public:
    explicit ErrorFunction(const ErrorFunctionFrame& frame, QuadratureSpec quad = {});
    ~ErrorFunction();
    ErrorFunction(ErrorFunction&&) noexcept;
    ErrorFunction& operator=(ErrorFunction&&) noexcept;

    int rank() const;
    const ErrorFunctionFrame& frame() const;
    const QuadratureSpec& quadrature() const;

    // min_j |w^_j . u|; M is undefined where this vanishes.
    double wall_distance(const Eigen::VectorXd& u) const;
    // Smallest normalised sign/wall argument over all subset terms of the
    // E decomposition.
    double decomposition_margin(const Eigen::VectorXd& u) const;

    // M_r(M; u). Throws WallTooClose within wall_eps of a wall.
    ErrFnValue complementary(const Eigen::VectorXd& u) const;
    // E_r(M; u) through the subset decomposition into M functions. Within
    // wall_eps of any term's wall the value is interpolated from generic
    // points at distance 2.5e-4 and 5e-4 on both sides.
    ErrFnValue error(const Eigen::VectorXd& u) const;
    // E_r(M; u) integrated radially in from infinity (sign(M^T u) minus the
    // derivative integral). Independent of the decomposition; requires every
    // m^_j . u along the recursion to be nonzero.
    ErrFnValue error_radial(const Eigen::VectorXd& u) const;

    ErrFnValue evaluate(FunctionKind kind, const Eigen::VectorXd& u) const {
        return kind == FunctionKind::M ? complementary(u) : error(u);
    }

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

// One term of a subset decomposition.
struct DecompositionTerm {
    IndexSet s;
    int coefficient = 0;  // +-1 (0 only if a sign argument vanished)
    double value = 0.0;   // the lower-rank function value
    double est_error = 0.0;
};

ErrFnValue eval_M(const ErrFnArgument& arg, const QuadratureSpec& quad = {});
ErrFnValue eval_E(const ErrFnArgument& arg, const QuadratureSpec& quad = {});

// Monte Carlo estimate of the defining Gaussian convolution: the mean of
// sign(M^T u') for u' ~ N(u, I / 2pi). est_error is the standard error.
// Reproducible for a fixed seed independent of the thread count.
ErrFnValue eval_E_oracle_mc(const ErrFnArgument& arg, std::int64_t n_samples, std::uint64_t seed);

// w^(j)T grad F = (2/|m_j|) exp(-pi (m^_j.u)^2) F_{r-1}(P M_{-j}; P u), j zero based.
double derivative(const ErrFnArgument& arg, int j, FunctionKind kind, const QuadratureSpec& quad = {});

// sum_j (m^_j.u) exp(-pi (m^_j.u)^2) F_{r-1}(P M_{-j}; P u), which equals
// (1/2) u . grad F. The shadow proper is i/2 times this value.
double shadow(const ErrFnArgument& arg, FunctionKind kind, const QuadratureSpec& quad = {});

// One-sided limit of M_r as W^T_{[r]/S} u -> 0 from the side given by
// approach_signs (one +-1 per index outside S, in increasing order):
// (-1)^{r-|S|} prod(approach_signs) M_{|S|}(Q_S M_S; Q_S u).
double discontinuity_limit(const ErrFnArgument& arg, IndexSet s, std::span<const int> approach_signs,
                           const QuadratureSpec& quad = {});

struct BoundCheck {
    double lhs = 0.0;
    double rhs = 0.0;
    bool ok = false;
};
// |M_r| <= r! exp(-pi u.u). rhs_scale exists so mutation tests can tamper
// with the right-hand side.
BoundCheck bound_check(const ErrFnArgument& arg, const QuadratureSpec& quad = {}, double rhs_scale = 1.0);

// Central-difference value of sum_j (d_j^2 + 2 pi u_j d_j) F at u.
double vigneras_residual(const ErrFnArgument& arg, FunctionKind kind, double h, const QuadratureSpec& quad = {});

// M_r = sum_S (-1)^{r-|S|} sign(W^T_{[r]/S} u) E_{|S|}(Q_S M_S; Q_S u).
std::vector<DecompositionTerm> decompose_M_into_E(const ErrFnArgument& arg, const QuadratureSpec& quad = {});
// E_r = sum_S sign(M^T_{[r]/S} P^T P u) M_{|S|}(Q_S M_S; Q_S u).
std::vector<DecompositionTerm> decompose_E_into_M(const ErrFnArgument& arg, const QuadratureSpec& quad = {});

double sum_terms(const std::vector<DecompositionTerm>& terms);

// Frames of the lower-rank functions that appear above.
ErrorFunctionFrame reduced_frame(const ErrorFunctionFrame& frame, int j);          // P_{[r]/j} M_{[r]/j}
ErrorFunctionFrame subset_frame(const ErrorFunctionFrame& frame, IndexSet s);      // Q_S M_S

}  // namespace thetaforge
