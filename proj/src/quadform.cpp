#include "thetaforge/quadform.hpp"

#include <cmath>

#include "thetaforge/errors.hpp"

namespace thetaforge {

Signature signature(const RationalMatrix& a) {
    if (!a.is_symmetric()) throw ValidationError("bilinear form matrix is not symmetric");
    const Inertia in = inertia(a);
    if (in.zero != 0) throw DegenerateForm("bilinear form is degenerate (det A = 0)");
    return {in.positive, in.negative};
}

BilinearForm::BilinearForm(RationalMatrix a) : a_(std::move(a)) {
    if (a_.rows() == 0) throw ValidationError("bilinear form must have positive dimension");
    if (!a_.is_integral()) throw ValidationError("bilinear form must have integer entries");
    sig_ = thetaforge::signature(a_);
    det_ = determinant(a_);
    a_d_ = a_.to_double();
    a_inv_d_ = inverse(a_).to_double();
}

Rational BilinearForm::pair(const RationalVector& x, const RationalVector& y) const {
    return dot(x, mat_vec(a_, y));
}

ErrorFunctionFrame ErrorFunctionFrame::from_columns(const Eigen::MatrixXd& m) {
    return {m, dual_frame(m)};
}

Eigen::MatrixXd dual_frame(const Eigen::MatrixXd& m) {
    if (m.rows() != m.cols() || m.rows() == 0) throw ValidationError("frame must be a nonempty square matrix");
    if (!m.allFinite()) throw ValidationError("frame has non-finite entries");
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
    const auto& sv = svd.singularValues();
    const double smax = sv(0);
    const double smin = sv(sv.size() - 1);
    if (!(smin > 0.0) || smax / smin > 1e12) throw SingularFrame("frame is singular or condition number exceeds 1e12");
    return m.inverse().transpose();
}

Eigen::MatrixXd orthonormal_rows(const Eigen::MatrixXd& vectors) {
    const Eigen::Index dim = vectors.rows();
    const Eigen::Index k = vectors.cols();
    Eigen::MatrixXd basis(k, dim);
    for (Eigen::Index j = 0; j < k; ++j) {
        Eigen::VectorXd v = vectors.col(j);
        const double scale = v.norm();
        for (int pass = 0; pass < 2; ++pass)
            for (Eigen::Index i = 0; i < j; ++i) v -= basis.row(i).dot(v) * basis.row(i).transpose();
        const double nv = v.norm();
        if (!(nv > 1e-13 * scale) || scale == 0.0) throw SingularFrame("linearly dependent vectors in Gram-Schmidt");
        basis.row(j) = (v / nv).transpose();
    }
    return basis;
}

Eigen::MatrixXd select_columns(const Eigen::MatrixXd& m, IndexSet s) {
    const auto idx = s.indices();
    Eigen::MatrixXd out(m.rows(), static_cast<Eigen::Index>(idx.size()));
    for (std::size_t j = 0; j < idx.size(); ++j) out.col(static_cast<Eigen::Index>(j)) = m.col(idx[j]);
    return out;
}

SubsetProjectors subset_projectors(const ErrorFunctionFrame& frame, IndexSet s) {
    const int r = frame.rank();
    if (!s.subset_of(IndexSet::full(r))) throw ValidationError("subset exceeds frame rank");
    SubsetProjectors out{s, Eigen::MatrixXd(0, r), Eigen::MatrixXd(0, r)};
    if (s.empty()) return out;
    if (s == IndexSet::full(r)) {
        // Standard basis for the full set.
        out.q = Eigen::MatrixXd::Identity(r, r);
        out.p = Eigen::MatrixXd::Identity(r, r);
        return out;
    }
    out.q = orthonormal_rows(select_columns(frame.m, s));
    out.p = orthonormal_rows(select_columns(frame.w, s));
    return out;
}

Eigen::MatrixXd nested_q(const ErrorFunctionFrame& frame, IndexSet s, IndexSet s_prime) {
    return subset_projectors(frame, s).q * subset_projectors(frame, s_prime).q.transpose();
}

Eigen::MatrixXd nested_p(const ErrorFunctionFrame& frame, IndexSet s, IndexSet s_prime) {
    return subset_projectors(frame, s).p * subset_projectors(frame, s_prime).p.transpose();
}

GramCofactors gram_cofactors(const RationalMatrix& vectors, const BilinearForm& form) {
    if (vectors.rows() != static_cast<std::size_t>(form.dim()))
        throw ValidationError("vectors do not live in the form's dimension");
    const RationalMatrix gram = vectors.transpose() * form.matrix() * vectors;
    return {determinant(gram), cofactor_matrix(gram)};
}

GramCofactorsD gram_cofactors(const Eigen::MatrixXd& vectors, const Eigen::MatrixXd& a) {
    const Eigen::MatrixXd gram = vectors.transpose() * a * vectors;
    const Eigen::Index s = gram.rows();
    Eigen::MatrixXd cof(s, s);
    if (s == 1) {
        cof(0, 0) = 1.0;
        return {gram(0, 0), cof};
    }
    for (Eigen::Index i = 0; i < s; ++i)
        for (Eigen::Index j = 0; j < s; ++j) {
            Eigen::MatrixXd minor(s - 1, s - 1);
            for (Eigen::Index ii = 0, mi = 0; ii < s; ++ii) {
                if (ii == i) continue;
                for (Eigen::Index jj = 0, mj = 0; jj < s; ++jj) {
                    if (jj == j) continue;
                    minor(mi, mj++) = gram(ii, jj);
                }
                ++mi;
            }
            cof(i, j) = (((i + j) % 2) ? -1.0 : 1.0) * minor.determinant();
        }
    return {gram.determinant(), cof};
}

}  // namespace thetaforge
