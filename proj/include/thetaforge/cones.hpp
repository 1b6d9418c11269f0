#pragma once

#include <string>
#include <utility>
#include <vector>

#include "thetaforge/exact.hpp"
#include "thetaforge/index_set.hpp"
#include "thetaforge/quadform.hpp"

namespace thetaforge {

// Vectors c_1..c_r and c'_1..c'_r (columns, c_j paired with c'_j) in an
// integral lattice of signature (r, n-r).
struct ConePair {
    RationalMatrix c;
    RationalMatrix c_prime;
    BilinearForm form;

    int rank() const { return static_cast<int>(c.cols()); }
    int dim() const { return form.dim(); }
    // Columns of C^P: c_j for j in P, c'_j otherwise.
    RationalMatrix mixed(IndexSet p) const;
    void validate() const;
    // Throws NonExactInput unless every entry is an integer.
    static ConePair from_double(const Eigen::MatrixXd& c, const Eigen::MatrixXd& c_prime, const BilinearForm& form);
};

// Hypotheses for one system (c_j, c'_j), checked in exact arithmetic.
struct ConeSystemReport {
    IndexSet s;  // recursion position: the system is C_{[r]/S perp S^P}
    IndexSet p;
    int r = 0;
    Rational delta;                          // det of the Gram matrix of (c_1, c'_1, ..., c_r, c'_r)
    std::vector<Rational> cofactors_jjprime; // D_{j,j'}
    RationalMatrix cofactors;                // full 2r x 2r cofactor matrix
    RationalMatrix reduced_cofactor_matrix;  // M: cofactors with (j,j'), (j',j) zeroed
    std::vector<std::pair<IndexSet, bool>> per_p_positive_definite;
    RationalMatrix q_minus;  // n x n, empty when delta = 0
    Inertia q_minus_inertia;
    bool pass = false;
    std::string first_failed;  // empty on pass
};

struct ConeCheck {
    ConeSystemReport top;
    // Every (S, P) with S nonempty, P subset of S, in increasing (S, P) order.
    std::vector<ConeSystemReport> recursion;
    bool identity_validated = false;
    bool pass = false;
    std::string first_failed;
};

// Condition names, in the order they are tested.
inline constexpr const char* kCondPositiveDefinite = "c_p_positive_definite";
inline constexpr const char* kCondDelta = "delta_sign";
inline constexpr const char* kCondCofactor = "cofactor_sign";
inline constexpr const char* kCondReduced = "reduced_cofactor_negative_definite";
inline constexpr const char* kCondQMinus = "q_minus_negative_definite";
inline constexpr const char* kCondRecursion = "recursion";
inline constexpr const char* kCondIdentity = "determinant_identity";

// Checks one system without recursion.
ConeSystemReport check_cone_system(const RationalMatrix& c, const RationalMatrix& c_prime, const BilinearForm& form);

// Full check: the top system, every projected system, and the determinant
// identity on a fixed set of rational test vectors.
ConeCheck check_cone_pair(const ConePair& pair);

// Q_-(x) = Q(x) - 2 sum_j D_{j,j'} B(c_j,x) B(c'_j,x) / Delta as a matrix.
// Throws ZeroDelta.
RationalMatrix q_minus_form(const ConePair& pair);
RationalMatrix q_minus_form(const RationalMatrix& c, const RationalMatrix& c_prime, const BilinearForm& form);

// The projected system (C_{[r]/S perp S^P}, C'_{[r]/S perp S^P}).
std::pair<RationalMatrix, RationalMatrix> projected_system(const ConePair& pair, IndexSet s, IndexSet p);

// Columns of `v` minus their A-orthogonal projection onto the span of `basis`.
RationalMatrix project_out(const RationalMatrix& v, const RationalMatrix& basis, const BilinearForm& form);

// Gram determinant of (x, c_1, c'_1, ..., c_r, c'_r) against
// Delta Q_-(x) - X^T M X; true when equal.
bool determinant_identity_holds(const ConePair& pair, const ConeSystemReport& top, const RationalVector& x);

ConePair build_a4_example();
// A = diag(1,-1), c = (1,0), c' = (2,1).
ConePair build_rank_one_example();

}  // namespace thetaforge
