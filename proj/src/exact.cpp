#include "thetaforge/exact.hpp"

#include <cmath>
#include <stdexcept>

#include "thetaforge/errors.hpp"

namespace thetaforge {

Rational parse_rational(const std::string& text) {
    if (text.empty()) throw ValidationError("empty rational literal");
    const auto dot_pos = text.find('.');
    const auto exp_pos = text.find_first_of("eE");
    if (dot_pos != std::string::npos || exp_pos != std::string::npos) {
        if (text.find('/') != std::string::npos) throw ValidationError("malformed rational: " + text);
        // Decimal literal: read it exactly as digits / 10^k (exponent form is
        // accepted through the double path, which is exact for the parsed double).
        if (exp_pos != std::string::npos) return exact_from_double(std::stod(text));
        std::string digits = text.substr(0, dot_pos) + text.substr(dot_pos + 1);
        const std::size_t frac = text.size() - dot_pos - 1;
        mpz_class num;
        if (num.set_str(digits, 10) != 0) throw ValidationError("malformed decimal: " + text);
        mpz_class den;
        mpz_ui_pow_ui(den.get_mpz_t(), 10, frac);
        Rational q(num, den);
        q.canonicalize();
        return q;
    }
    Rational q;
    if (q.set_str(text, 10) != 0) throw ValidationError("malformed rational: " + text);
    if (q.get_den() == 0) throw ValidationError("zero denominator: " + text);
    q.canonicalize();
    return q;
}

Rational exact_from_double(double x) {
    if (!std::isfinite(x)) throw ValidationError("non-finite value cannot be made exact");
    Rational q(x);  // mpq_set_d is exact
    return q;
}

int sign_of(const Rational& x) { return sgn(x); }

RationalMatrix RationalMatrix::identity(std::size_t n) {
    RationalMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1;
    return m;
}

RationalMatrix RationalMatrix::from_rows(const std::vector<std::vector<long>>& rows) {
    const std::size_t r = rows.size();
    const std::size_t c = r ? rows[0].size() : 0;
    RationalMatrix m(r, c);
    for (std::size_t i = 0; i < r; ++i) {
        if (rows[i].size() != c) throw ValidationError("ragged matrix rows");
        for (std::size_t j = 0; j < c; ++j) m(i, j) = rows[i][j];
    }
    return m;
}

RationalMatrix RationalMatrix::from_columns(const std::vector<std::vector<Rational>>& columns) {
    const std::size_t c = columns.size();
    const std::size_t r = c ? columns[0].size() : 0;
    RationalMatrix m(r, c);
    for (std::size_t j = 0; j < c; ++j) {
        if (columns[j].size() != r) throw ValidationError("columns of unequal length");
        for (std::size_t i = 0; i < r; ++i) m(i, j) = columns[j][i];
    }
    return m;
}

RationalMatrix RationalMatrix::from_double(const Eigen::MatrixXd& d) {
    RationalMatrix m(d.rows(), d.cols());
    for (Eigen::Index i = 0; i < d.rows(); ++i)
        for (Eigen::Index j = 0; j < d.cols(); ++j) m(i, j) = exact_from_double(d(i, j));
    return m;
}

RationalMatrix RationalMatrix::transpose() const {
    RationalMatrix t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
}

RationalMatrix RationalMatrix::operator*(const RationalMatrix& o) const {
    if (cols_ != o.rows_) throw std::invalid_argument("RationalMatrix: shape mismatch in product");
    RationalMatrix p(rows_, o.cols_);
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t k = 0; k < cols_; ++k) {
            const Rational& a = (*this)(i, k);
            if (a == 0) continue;
            for (std::size_t j = 0; j < o.cols_; ++j) p(i, j) += a * o(k, j);
        }
    return p;
}

RationalMatrix RationalMatrix::operator+(const RationalMatrix& o) const {
    if (rows_ != o.rows_ || cols_ != o.cols_) throw std::invalid_argument("RationalMatrix: shape mismatch");
    RationalMatrix s(rows_, cols_);
    for (std::size_t i = 0; i < data_.size(); ++i) s.data_[i] = data_[i] + o.data_[i];
    return s;
}

RationalMatrix RationalMatrix::operator-(const RationalMatrix& o) const {
    if (rows_ != o.rows_ || cols_ != o.cols_) throw std::invalid_argument("RationalMatrix: shape mismatch");
    RationalMatrix s(rows_, cols_);
    for (std::size_t i = 0; i < data_.size(); ++i) s.data_[i] = data_[i] - o.data_[i];
    return s;
}

RationalMatrix RationalMatrix::scaled(const Rational& f) const {
    RationalMatrix s(*this);
    for (auto& x : s.data_) x *= f;
    return s;
}

bool RationalMatrix::operator==(const RationalMatrix& o) const {
    return rows_ == o.rows_ && cols_ == o.cols_ && data_ == o.data_;
}

std::vector<Rational> RationalMatrix::column(std::size_t j) const {
    std::vector<Rational> c(rows_);
    for (std::size_t i = 0; i < rows_; ++i) c[i] = (*this)(i, j);
    return c;
}

std::vector<Rational> RationalMatrix::row(std::size_t i) const {
    return {data_.begin() + static_cast<std::ptrdiff_t>(i * cols_),
            data_.begin() + static_cast<std::ptrdiff_t>((i + 1) * cols_)};
}

RationalMatrix RationalMatrix::select_columns(const std::vector<int>& cols) const {
    RationalMatrix m(rows_, cols.size());
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t j = 0; j < cols.size(); ++j) m(i, j) = (*this)(i, cols[j]);
    return m;
}

RationalMatrix RationalMatrix::select(const std::vector<int>& rows, const std::vector<int>& cols) const {
    RationalMatrix m(rows.size(), cols.size());
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < cols.size(); ++j) m(i, j) = (*this)(rows[i], cols[j]);
    return m;
}

RationalMatrix RationalMatrix::hstack(const RationalMatrix& right) const {
    if (rows_ != right.rows_ && cols_ != 0 && right.cols_ != 0)
        throw std::invalid_argument("RationalMatrix: hstack row mismatch");
    const std::size_t r = cols_ ? rows_ : right.rows_;
    RationalMatrix m(r, cols_ + right.cols_);
    for (std::size_t i = 0; i < r; ++i) {
        for (std::size_t j = 0; j < cols_; ++j) m(i, j) = (*this)(i, j);
        for (std::size_t j = 0; j < right.cols_; ++j) m(i, cols_ + j) = right(i, j);
    }
    return m;
}

bool RationalMatrix::is_symmetric() const {
    if (rows_ != cols_) return false;
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t j = i + 1; j < cols_; ++j)
            if ((*this)(i, j) != (*this)(j, i)) return false;
    return true;
}

bool RationalMatrix::is_integral() const {
    for (const auto& x : data_)
        if (x.get_den() != 1) return false;
    return true;
}

Eigen::MatrixXd RationalMatrix::to_double() const {
    Eigen::MatrixXd d(rows_, cols_);
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t j = 0; j < cols_; ++j) d(i, j) = (*this)(i, j).get_d();
    return d;
}

RationalVector mat_vec(const RationalMatrix& m, const RationalVector& v) {
    if (m.cols() != v.size()) throw std::invalid_argument("mat_vec: shape mismatch");
    RationalVector out(m.rows());
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) out[i] += m(i, j) * v[j];
    return out;
}

Rational dot(const RationalVector& a, const RationalVector& b) {
    if (a.size() != b.size()) throw std::invalid_argument("dot: size mismatch");
    Rational s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

Rational determinant(const RationalMatrix& m) {
    if (m.rows() != m.cols()) throw std::invalid_argument("determinant of non-square matrix");
    const std::size_t n = m.rows();
    if (n == 0) return 1;
    RationalMatrix a = m;
    Rational det = 1;
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t piv = k;
        while (piv < n && a(piv, k) == 0) ++piv;
        if (piv == n) return 0;
        if (piv != k) {
            for (std::size_t j = 0; j < n; ++j) std::swap(a(k, j), a(piv, j));
            det = -det;
        }
        det *= a(k, k);
        for (std::size_t i = k + 1; i < n; ++i) {
            if (a(i, k) == 0) continue;
            const Rational f = a(i, k) / a(k, k);
            for (std::size_t j = k; j < n; ++j) a(i, j) -= f * a(k, j);
        }
    }
    return det;
}

RationalMatrix inverse(const RationalMatrix& m) {
    if (m.rows() != m.cols()) throw std::invalid_argument("inverse of non-square matrix");
    const std::size_t n = m.rows();
    RationalMatrix a = m;
    RationalMatrix inv = RationalMatrix::identity(n);
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t piv = k;
        while (piv < n && a(piv, k) == 0) ++piv;
        if (piv == n) throw DegenerateGram("singular matrix has no inverse");
        if (piv != k)
            for (std::size_t j = 0; j < n; ++j) {
                std::swap(a(k, j), a(piv, j));
                std::swap(inv(k, j), inv(piv, j));
            }
        const Rational p = a(k, k);
        for (std::size_t j = 0; j < n; ++j) {
            a(k, j) /= p;
            inv(k, j) /= p;
        }
        for (std::size_t i = 0; i < n; ++i) {
            if (i == k || a(i, k) == 0) continue;
            const Rational f = a(i, k);
            for (std::size_t j = 0; j < n; ++j) {
                a(i, j) -= f * a(k, j);
                inv(i, j) -= f * inv(k, j);
            }
        }
    }
    return inv;
}

RationalMatrix cofactor_matrix(const RationalMatrix& m) {
    if (m.rows() != m.cols()) throw std::invalid_argument("cofactors of non-square matrix");
    const std::size_t n = m.rows();
    RationalMatrix cof(n, n);
    if (n == 1) {
        cof(0, 0) = 1;
        return cof;
    }
    std::vector<int> all(n);
    for (std::size_t i = 0; i < n; ++i) all[i] = static_cast<int>(i);
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<int> rows;
        for (int k : all)
            if (k != static_cast<int>(i)) rows.push_back(k);
        for (std::size_t j = 0; j < n; ++j) {
            std::vector<int> cols;
            for (int k : all)
                if (k != static_cast<int>(j)) cols.push_back(k);
            Rational minor = determinant(m.select(rows, cols));
            cof(i, j) = ((i + j) % 2 == 0) ? minor : Rational(-minor);
        }
    }
    return cof;
}

Inertia inertia(const RationalMatrix& symmetric) {
    if (!symmetric.is_symmetric()) throw std::invalid_argument("inertia: matrix is not symmetric");
    RationalMatrix a = symmetric;
    std::size_t n = a.rows();
    Inertia out;
    // Work on the trailing block [k, n) and shrink it one pivot at a time.
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t piv = k;
        while (piv < n && a(piv, piv) == 0) ++piv;
        if (piv == n) {
            // All remaining diagonal entries vanish. Find a nonzero off-diagonal
            // a(i, j) and add row/column j to row/column i: new a(i,i) = 2 a(i,j).
            std::size_t oi = n, oj = n;
            for (std::size_t i = k; i < n && oi == n; ++i)
                for (std::size_t j = i + 1; j < n; ++j)
                    if (a(i, j) != 0) {
                        oi = i;
                        oj = j;
                        break;
                    }
            if (oi == n) {
                out.zero += static_cast<int>(n - k);
                return out;
            }
            for (std::size_t c = k; c < n; ++c) a(oi, c) += a(oj, c);
            for (std::size_t r = k; r < n; ++r) a(r, oi) += a(r, oj);
            piv = oi;
        }
        if (piv != k) {
            for (std::size_t c = 0; c < n; ++c) std::swap(a(k, c), a(piv, c));
            for (std::size_t r = 0; r < n; ++r) std::swap(a(r, k), a(r, piv));
        }
        const Rational d = a(k, k);
        if (d > 0)
            ++out.positive;
        else
            ++out.negative;
        for (std::size_t i = k + 1; i < n; ++i) {
            if (a(i, k) == 0) continue;
            const Rational f = a(i, k) / d;
            for (std::size_t j = k; j < n; ++j) a(i, j) -= f * a(k, j);
            a(i, k) = 0;
        }
        for (std::size_t j = k + 1; j < n; ++j) a(k, j) = 0;
    }
    return out;
}

}  // namespace thetaforge
