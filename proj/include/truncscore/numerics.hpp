#ifndef TRUNCSCORE_NUMERICS_HPP
#define TRUNCSCORE_NUMERICS_HPP

#include <cstddef>
#include <functional>
#include <vector>

#include "truncscore/errors.hpp"

namespace truncscore {

// Small dense row-major matrix.  Everything in this project is at most a
// handful of columns (regression designs, 2x2 covariances), so the linear
// algebra is deliberately self-contained: Cholesky solves and a closed-form
// 2x2 symmetric square root cover every use.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data; // row-major, rows*cols entries

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

    double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

    static Matrix identity(std::size_t n);
    bool is_symmetric(double tol = 1e-12) const;
};

Matrix matmul(const Matrix& a, const Matrix& b);
Matrix transpose(const Matrix& a);

// Solves m x = b for symmetric positive definite m by Cholesky.  Throws
// NotPositiveDefinite when a pivot falls below 1e-12 times the largest
// diagonal entry.
std::vector<double> solve_spd(const Matrix& m, const std::vector<double>& b);

// Inverse of a symmetric positive definite matrix via Cholesky.
Matrix inverse_spd(const Matrix& m);

// Symmetric PSD square root of a symmetric PSD 2x2 matrix:
//   sqrt(m) = (m + sqrt(det) I) / sqrt(trace + 2 sqrt(det)).
Matrix sym_sqrt_2x2(const Matrix& m);

// Standard normal distribution.  cdf is erfc-based (absolute error well below
// 1e-10); quantile is a rational approximation polished by Newton steps.
double norm_cdf(double z);
double norm_pdf(double z);
double norm_quantile(double p); // p in (0,1); throws std::domain_error otherwise

// Upper tail of the chi-squared distribution, df in {1, 2} only:
//   df=2: exp(-x/2);  df=1: 2 (1 - norm_cdf(sqrt(x))).
double chisq_sf(double x, int df);

// P(Z1 <= 0, Z2 <= 0) for standard bivariate normal with correlation rho:
//   1/4 + arcsin(rho) / (2 pi).
double orthant_prob_neg(double rho);

// Finds x in [lo, hi] with f(x) = target for (weakly) decreasing f, by
// bisection to a bracket of width <= 1e-9.  If the initial bracket does not
// straddle the target the endpoints are expanded a few times before a
// BracketError is thrown.
double bisect_decreasing(const std::function<double(double)>& f, double target,
                         double lo, double hi);

} // namespace truncscore

#endif
