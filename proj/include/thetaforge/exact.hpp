#pragma once

#include <gmpxx.h>

#include <Eigen/Dense>

#include <cstddef>
#include <string>
#include <vector>

#include "thetaforge/index_set.hpp"

namespace thetaforge {

using Rational = mpq_class;

// Parses "7", "-3/4" or a decimal such as "0.25" into an exact rational.
Rational parse_rational(const std::string& text);
// Every finite double is a dyadic rational; this returns it exactly.
Rational exact_from_double(double x);
int sign_of(const Rational& x);

// Dense row-major matrix of exact rationals. Sizes here are small (n <= ~16),
// so the algorithms are the plain cubic ones.
class RationalMatrix {
public:
    RationalMatrix() = default;
    RationalMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}

    static RationalMatrix identity(std::size_t n);
    static RationalMatrix from_rows(const std::vector<std::vector<long>>& rows);
    static RationalMatrix from_columns(const std::vector<std::vector<Rational>>& columns);
    // Exact image of a floating matrix (each entry converted exactly).
    static RationalMatrix from_double(const Eigen::MatrixXd& m);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    Rational& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    const Rational& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    RationalMatrix transpose() const;
    RationalMatrix operator*(const RationalMatrix& o) const;
    RationalMatrix operator+(const RationalMatrix& o) const;
    RationalMatrix operator-(const RationalMatrix& o) const;
    RationalMatrix scaled(const Rational& s) const;
    bool operator==(const RationalMatrix& o) const;

    std::vector<Rational> column(std::size_t j) const;
    std::vector<Rational> row(std::size_t i) const;
    // Columns listed in `cols`, in the given order.
    RationalMatrix select_columns(const std::vector<int>& cols) const;
    RationalMatrix select(const std::vector<int>& rows, const std::vector<int>& cols) const;
    RationalMatrix hstack(const RationalMatrix& right) const;

    bool is_symmetric() const;
    bool is_integral() const;
    Eigen::MatrixXd to_double() const;

private:
    std::size_t rows_ = 0, cols_ = 0;
    std::vector<Rational> data_;
};

using RationalVector = std::vector<Rational>;

RationalVector mat_vec(const RationalMatrix& m, const RationalVector& v);
Rational dot(const RationalVector& a, const RationalVector& b);

Rational determinant(const RationalMatrix& m);
// Throws DegenerateGram when singular.
RationalMatrix inverse(const RationalMatrix& m);
// Signed minors: cofactor(i, j) = (-1)^{i+j} det(m without row i, column j).
RationalMatrix cofactor_matrix(const RationalMatrix& m);

struct Inertia {
    int positive = 0;
    int negative = 0;
    int zero = 0;
    bool operator==(const Inertia&) const = default;
};

// Exact inertia of a symmetric matrix by congruence diagonalisation
// (symmetric elimination with diagonal pivoting and the a_ii += 2 a_ij
// trick when every remaining diagonal entry vanishes).
Inertia inertia(const RationalMatrix& symmetric);

inline bool positive_definite(const RationalMatrix& s) {
    const auto in = inertia(s);
    return in.negative == 0 && in.zero == 0;
}
inline bool negative_definite(const RationalMatrix& s) {
    const auto in = inertia(s);
    return in.positive == 0 && in.zero == 0;
}

}  // namespace thetaforge
