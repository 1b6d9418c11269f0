#pragma once

#include <Eigen/Dense>

#include <vector>

#include "thetaforge/errfn.hpp"
#include "thetaforge/quadform.hpp"

namespace thetaforge {

// Columns c_1..c_s spanning a positive-definite subspace of (R^n, A), with an
// A-orthonormal frame E (E A E^T = I) of that span and the dual D
// (D^T A C = I). The boosted functions are the Euclidean ones on the frame
// E A C at the argument E A x.
struct ConeMatrix {
    Eigen::MatrixXd c;  // n x s
    BilinearForm form;
    Eigen::MatrixXd e;  // s x n
    Eigen::MatrixXd d;  // n x s

    int dim() const { return static_cast<int>(c.rows()); }
    int size() const { return static_cast<int>(c.cols()); }
    ErrorFunctionFrame frame() const;
    Eigen::VectorXd coordinates(const Eigen::VectorXd& x) const;
};

// A-Gram-Schmidt on the columns in order. Throws NotTimelike when C^T A C is
// not positive definite (decided exactly when C is integral).
ConeMatrix build_cone(const Eigen::MatrixXd& c, const BilinearForm& form);
// Same cone with the frame rotated, E -> lambda E for lambda in O(s).
ConeMatrix regauge(const ConeMatrix& cone, const Eigen::MatrixXd& lambda);

struct BoostedArgument {
    ConeMatrix cone;
    Eigen::VectorXd x;
};

// x_+ = C (C^T A C)^{-1} C^T A x = E^T E A x.
Eigen::VectorXd project_plus(const BoostedArgument& arg);

// Columns c_j - C_{S'} (C_{S'}^T A C_{S'})^{-1} C_{S'}^T A c_j for j in S.
// C_{S'} may be indefinite; its Gram matrix must be nondegenerate
// (DegenerateGram otherwise, decided exactly for integral input).
Eigen::MatrixXd perp_columns(const Eigen::MatrixXd& c, IndexSet s, IndexSet s_prime, const BilinearForm& form);
ConeMatrix perp_cone(const ConeMatrix& cone, IndexSet s, IndexSet s_prime);

// Reusable evaluator of E(C; .) and M(C; .) for a fixed cone.
class BoostedFunction {
public:
    explicit BoostedFunction(ConeMatrix cone, QuadratureSpec quad = {});
    const ConeMatrix& cone() const { return cone_; }
    const ErrorFunction& euclidean() const { return f_; }
    ErrFnValue error(const Eigen::VectorXd& x) const { return f_.error(cone_.coordinates(x)); }
    ErrFnValue complementary(const Eigen::VectorXd& x) const { return f_.complementary(cone_.coordinates(x)); }
    ErrFnValue evaluate(FunctionKind kind, const Eigen::VectorXd& x) const {
        return kind == FunctionKind::M ? complementary(x) : error(x);
    }

private:
    ConeMatrix cone_;
    ErrorFunction f_;
};

ErrFnValue eval_E_boosted(const BoostedArgument& arg, const QuadratureSpec& quad = {});
ErrFnValue eval_M_boosted(const BoostedArgument& arg, const QuadratureSpec& quad = {});

struct BoostedDecompositions {
    // M(C;x) = sum_S (-1)^{s-|S|} sign(B(D_{[s]/S}, x)) E(C_S; x)
    std::vector<DecompositionTerm> m_from_e;
    // E(C;x) = sum_S sign(B(C_{[s]/S perp S}, x)) M(C_S; x)
    std::vector<DecompositionTerm> e_from_m;
};
BoostedDecompositions boosted_decompositions(const BoostedArgument& arg, const QuadratureSpec& quad = {});

// Real bracket of the shadow, (1/2) x . grad F(C; x).
double boosted_shadow(const BoostedArgument& arg, FunctionKind kind, const QuadratureSpec& quad = {});
// sum_j (B(c_j,x)/sqrt Q(c_j)) exp(-pi B(c_j,x)^2 / Q(c_j)) E(C_{[s]/j perp j}; x).
double boosted_shadow_from_perp(const BoostedArgument& arg, const QuadratureSpec& quad = {});

// Central differences of A^{-1}(d, d) F + 2 pi x . grad F.
double boosted_vigneras_residual(const BoostedArgument& arg, FunctionKind kind, double h,
                                 const QuadratureSpec& quad = {});

}  // namespace thetaforge
