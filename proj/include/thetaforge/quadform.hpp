#pragma once

#include <Eigen/Dense>

#include <utility>
#include <vector>

#include "thetaforge/exact.hpp"
#include "thetaforge/index_set.hpp"

namespace thetaforge {

// Exact inertia (r_plus, n_minus) of a nondegenerate symmetric form.
struct Signature {
    int positive = 0;
    int negative = 0;
    bool operator==(const Signature&) const = default;
};

// Throws DegenerateForm when A has a zero eigenvalue.
Signature signature(const RationalMatrix& a);

// Integral symmetric bilinear form B(x, y) = x^T A y on Z^n.
class BilinearForm {
public:
    BilinearForm() = default;
    // Validates symmetry, integrality and nondegeneracy.
    explicit BilinearForm(RationalMatrix a);
    static BilinearForm from_rows(const std::vector<std::vector<long>>& rows) {
        return BilinearForm(RationalMatrix::from_rows(rows));
    }

    int dim() const { return static_cast<int>(a_.rows()); }
    const RationalMatrix& matrix() const { return a_; }
    const Eigen::MatrixXd& matrix_d() const { return a_d_; }
    const Eigen::MatrixXd& inverse_d() const { return a_inv_d_; }
    Signature signature() const { return sig_; }
    Rational det() const { return det_; }

    Rational pair(const RationalVector& x, const RationalVector& y) const;
    Rational quad(const RationalVector& x) const { return pair(x, x); }
    double pair(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const { return x.dot(a_d_ * y); }
    double quad(const Eigen::VectorXd& x) const { return x.dot(a_d_ * x); }

private:
    RationalMatrix a_;
    Eigen::MatrixXd a_d_, a_inv_d_;
    Signature sig_;
    Rational det_;
};

// Column frame m^(1..r) of an r-tuple error function together with its dual
// w^(1..r) (W^T M = I).
struct ErrorFunctionFrame {
    Eigen::MatrixXd m;
    Eigen::MatrixXd w;

    int rank() const { return static_cast<int>(m.cols()); }
    // Computes the dual; throws SingularFrame.
    static ErrorFunctionFrame from_columns(const Eigen::MatrixXd& m);
};

// Inverse transpose; SingularFrame if the 2-norm condition number exceeds 1e12.
Eigen::MatrixXd dual_frame(const Eigen::MatrixXd& m);

// Rows form an orthonormal basis of the span of `vectors` columns. Modified
// Gram-Schmidt in column order with one re-orthogonalisation pass.
Eigen::MatrixXd orthonormal_rows(const Eigen::MatrixXd& vectors);

Eigen::MatrixXd select_columns(const Eigen::MatrixXd& m, IndexSet s);

struct SubsetProjectors {
    IndexSet s;
    Eigen::MatrixXd q;  // |S| x r, rows span <m^(j) : j in S>
    Eigen::MatrixXd p;  // |S| x r, rows span <w^(j) : j in S>
};

SubsetProjectors subset_projectors(const ErrorFunctionFrame& frame, IndexSet s);

// Q_{S,S'} = Q_S Q_{S'}^T (components of b^(S) in the basis b^(S')); same for P.
Eigen::MatrixXd nested_q(const ErrorFunctionFrame& frame, IndexSet s, IndexSet s_prime);
Eigen::MatrixXd nested_p(const ErrorFunctionFrame& frame, IndexSet s, IndexSet s_prime);

struct GramCofactors {
    Rational delta;
    RationalMatrix cofactors;
};

// Gram determinant and signed cofactor matrix of the columns of `vectors`
// under the form. Exact.
GramCofactors gram_cofactors(const RationalMatrix& vectors, const BilinearForm& form);

struct GramCofactorsD {
    double delta;
    Eigen::MatrixXd cofactors;
};
GramCofactorsD gram_cofactors(const Eigen::MatrixXd& vectors, const Eigen::MatrixXd& a);

}  // namespace thetaforge
