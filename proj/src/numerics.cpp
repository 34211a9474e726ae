#include "truncscore/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace truncscore {

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

bool Matrix::is_symmetric(double tol) const {
    if (rows != cols) return false;
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = i + 1; j < cols; ++j)
            if (std::fabs((*this)(i, j) - (*this)(j, i)) > tol) return false;
    return true;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols != b.rows) throw std::invalid_argument("matmul: dimension mismatch");
    Matrix c(a.rows, b.cols);
    for (std::size_t i = 0; i < a.rows; ++i)
        for (std::size_t k = 0; k < a.cols; ++k) {
            const double aik = a(i, k);
            for (std::size_t j = 0; j < b.cols; ++j) c(i, j) += aik * b(k, j);
        }
    return c;
}

Matrix transpose(const Matrix& a) {
    Matrix t(a.cols, a.rows);
    for (std::size_t i = 0; i < a.rows; ++i)
        for (std::size_t j = 0; j < a.cols; ++j) t(j, i) = a(i, j);
    return t;
}

// Lower Cholesky factor; pivot tolerance relative to the largest diagonal.
static Matrix cholesky(const Matrix& m) {
    if (m.rows != m.cols) throw std::invalid_argument("cholesky: matrix not square");
    const std::size_t n = m.rows;
    double dmax = 0.0;
    for (std::size_t i = 0; i < n; ++i) dmax = std::max(dmax, std::fabs(m(i, i)));
    const double tol = 1e-12 * std::max(dmax, 1.0);
    Matrix L(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        double d = m(j, j);
        for (std::size_t k = 0; k < j; ++k) d -= L(j, k) * L(j, k);
        if (d <= tol)
            throw NotPositiveDefinite("cholesky: pivot " + std::to_string(d) +
                                      " at column " + std::to_string(j));
        L(j, j) = std::sqrt(d);
        for (std::size_t i = j + 1; i < n; ++i) {
            double s = m(i, j);
            for (std::size_t k = 0; k < j; ++k) s -= L(i, k) * L(j, k);
            L(i, j) = s / L(j, j);
        }
    }
    return L;
}

std::vector<double> solve_spd(const Matrix& m, const std::vector<double>& b) {
    if (b.size() != m.rows) throw std::invalid_argument("solve_spd: rhs length mismatch");
    const Matrix L = cholesky(m);
    const std::size_t n = m.rows;
    std::vector<double> y(n), x(n);
    for (std::size_t i = 0; i < n; ++i) {
        double s = b[i];
        for (std::size_t k = 0; k < i; ++k) s -= L(i, k) * y[k];
        y[i] = s / L(i, i);
    }
    for (std::size_t ii = n; ii-- > 0;) {
        double s = y[ii];
        for (std::size_t k = ii + 1; k < n; ++k) s -= L(k, ii) * x[k];
        x[ii] = s / L(ii, ii);
    }
    return x;
}

Matrix inverse_spd(const Matrix& m) {
    const std::size_t n = m.rows;
    Matrix inv(n, n);
    std::vector<double> e(n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        e[j] = 1.0;
        std::vector<double> col = solve_spd(m, e);
        for (std::size_t i = 0; i < n; ++i) inv(i, j) = col[i];
        e[j] = 0.0;
    }
    return inv;
}

Matrix sym_sqrt_2x2(const Matrix& m) {
    if (m.rows != 2 || m.cols != 2) throw std::invalid_argument("sym_sqrt_2x2: need 2x2");
    if (!m.is_symmetric(1e-10)) throw std::invalid_argument("sym_sqrt_2x2: not symmetric");
    const double tr = m(0, 0) + m(1, 1);
    const double det = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
    if (det < -1e-10 || tr < -1e-10) throw NotPositiveDefinite("sym_sqrt_2x2: not PSD");
    const double s = std::sqrt(std::max(det, 0.0));
    const double denom = std::sqrt(tr + 2.0 * s);
    if (!(denom > 0.0)) throw NotPositiveDefinite("sym_sqrt_2x2: zero matrix");
    Matrix r(2, 2);
    r(0, 0) = (m(0, 0) + s) / denom;
    r(0, 1) = m(0, 1) / denom;
    r(1, 0) = m(1, 0) / denom;
    r(1, 1) = (m(1, 1) + s) / denom;
    return r;
}

double norm_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

double norm_pdf(double z) {
    static const double inv_sqrt_2pi = 0.3989422804014327;
    return inv_sqrt_2pi * std::exp(-0.5 * z * z);
}

// Rational approximation for the initial guess (Acklam's coefficients), then
// two Newton corrections against the erfc-based cdf.
double norm_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) throw std::domain_error("norm_quantile: p must be in (0,1)");
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};
    const double plow = 0.02425, phigh = 1.0 - plow;
    double x;
    if (p < plow) {
        const double q = std::sqrt(-2.0 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else if (p > phigh) {
        const double q = std::sqrt(-2.0 * std::log(1.0 - p));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else {
        const double q = p - 0.5, r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    }
    for (int it = 0; it < 2; ++it) {
        const double e = norm_cdf(x) - p;
        const double f = norm_pdf(x);
        if (f > 0.0) x -= e / f;
    }
    return x;
}

double chisq_sf(double x, int df) {
    if (df != 1 && df != 2) throw std::domain_error("chisq_sf: df must be 1 or 2");
    if (x < 0.0) throw std::domain_error("chisq_sf: x must be >= 0");
    if (df == 2) return std::exp(-0.5 * x);
    return 2.0 * (1.0 - norm_cdf(std::sqrt(x)));
}

double orthant_prob_neg(double rho) {
    if (!(rho > -1.0 && rho < 1.0)) throw std::domain_error("orthant_prob_neg: |rho| must be < 1");
    static const double two_pi = 6.283185307179586;
    return 0.25 + std::asin(rho) / two_pi;
}

double bisect_decreasing(const std::function<double(double)>& f, double target,
                         double lo, double hi) {
    if (!(lo < hi)) throw std::invalid_argument("bisect_decreasing: need lo < hi");
    double flo = f(lo), fhi = f(hi);
    // decreasing f: need f(lo) >= target >= f(hi); expand the bracket a few
    // times before giving up
    for (int k = 0; k < 60 && flo < target; ++k) {
        const double w = hi - lo;
        lo -= w;
        flo = f(lo);
    }
    for (int k = 0; k < 60 && fhi > target; ++k) {
        const double w = hi - lo;
        hi += w;
        fhi = f(hi);
    }
    if (flo < target || fhi > target)
        throw BracketError("bisect_decreasing: target " + std::to_string(target) +
                           " not bracketed by [" + std::to_string(lo) + ", " +
                           std::to_string(hi) + "]");
    while (hi - lo > 1e-9) {
        const double mid = 0.5 * (lo + hi);
        if (f(mid) >= target)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

} // namespace truncscore
