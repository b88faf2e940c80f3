#ifndef QEXP_ALGEBRA_HPP
#define QEXP_ALGEBRA_HPP

// Dense complex linear algebra, univariate polynomials and rational functions.
// Everything here is a value type; all functions are pure.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <string>
#include <numbers>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "errors.hpp"

namespace qexp
{

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

inline constexpr Complex I_unit{0.0, 1.0};

struct Tolerances {
    double structural_zero = 1e-9;
    double residual = 1e-8;
    double nullspace = 1e-9;
};

inline double binomial(int n, int k)
{
    if (k < 0 || k > n)
        return 0.0;
    double r = 1.0;
    for (int i = 1; i <= k; ++i)
        r = r * (n - k + i) / i;
    return r;
}

// ---------------------------------------------------------------------------
// Poly
// ---------------------------------------------------------------------------

/// Univariate polynomial with complex coefficients in ascending degree.
class Poly
{
  public:
    Poly() = default;
    explicit Poly(std::vector<Complex> coeffs) : c_(std::move(coeffs)) { strip_exact_zeros(); }

    static Poly constant(Complex c) { return Poly(std::vector<Complex>{c}); }
    /// u - root
    static Poly linear(Complex root) { return Poly(std::vector<Complex>{-root, 1.0}); }
    static Poly from_roots(std::span<const Complex> roots)
    {
        Poly p = constant(1.0);
        for (auto r : roots)
            p = p * linear(r);
        return p;
    }

    /// Degree, or -1 for the zero polynomial.
    int degree() const { return static_cast<int>(c_.size()) - 1; }
    bool is_zero() const { return c_.empty(); }
    const std::vector<Complex> &coeffs() const { return c_; }
    Complex coeff(int i) const
    {
        return (i >= 0 && i < static_cast<int>(c_.size())) ? c_[static_cast<std::size_t>(i)] : Complex{};
    }
    Complex leading() const { return c_.empty() ? Complex{} : c_.back(); }

    Complex operator()(Complex u) const
    {
        Complex r{};
        for (auto it = c_.rbegin(); it != c_.rend(); ++it)
            r = r * u + *it;
        return r;
    }

    Poly derivative() const
    {
        if (c_.size() <= 1)
            return {};
        std::vector<Complex> d(c_.size() - 1);
        for (std::size_t i = 1; i < c_.size(); ++i)
            d[i - 1] = c_[i] * static_cast<double>(i);
        return Poly(std::move(d));
    }

    /// p(u + s), by Taylor expansion.
    Poly shifted(Complex s) const
    {
        std::vector<Complex> r(c_.size());
        for (std::size_t j = 0; j < c_.size(); ++j) {
            // (u+s)^j = sum_i C(j,i) u^i s^(j-i)
            Complex spow = 1.0;
            for (std::size_t k = 0; k <= j; ++k) {
                std::size_t i = j - k;
                r[i] += c_[j] * binomial(static_cast<int>(j), static_cast<int>(i)) * spow;
                spow *= s;
            }
        }
        return Poly(std::move(r));
    }

    /// Drop leading coefficients whose modulus is below rel_tol * max modulus.
    Poly trimmed(double rel_tol) const
    {
        double mx = 0.0;
        for (auto c : c_)
            mx = std::max(mx, std::abs(c));
        std::vector<Complex> r = c_;
        while (!r.empty() && std::abs(r.back()) <= rel_tol * mx)
            r.pop_back();
        return Poly(std::move(r));
    }

    double max_abs_coeff() const
    {
        double mx = 0.0;
        for (auto c : c_)
            mx = std::max(mx, std::abs(c));
        return mx;
    }

    /// Roots via the companion matrix.
    std::vector<Complex> roots() const
    {
        int d = degree();
        if (d < 1)
            return {};
        CMatrix comp = CMatrix::Zero(d, d);
        for (int i = 1; i < d; ++i)
            comp(i, i - 1) = 1.0;
        for (int i = 0; i < d; ++i)
            comp(i, d - 1) = -c_[static_cast<std::size_t>(i)] / c_.back();
        Eigen::ComplexEigenSolver<CMatrix> es(comp, false);
        std::vector<Complex> r(es.eigenvalues().data(), es.eigenvalues().data() + d);
        return r;
    }

    friend Poly operator+(const Poly &a, const Poly &b)
    {
        std::vector<Complex> r(std::max(a.c_.size(), b.c_.size()));
        for (std::size_t i = 0; i < a.c_.size(); ++i)
            r[i] += a.c_[i];
        for (std::size_t i = 0; i < b.c_.size(); ++i)
            r[i] += b.c_[i];
        return Poly(std::move(r));
    }
    friend Poly operator-(const Poly &a) { return Complex{-1.0} * a; }
    friend Poly operator-(const Poly &a, const Poly &b) { return a + (-b); }
    friend Poly operator*(Complex s, const Poly &a)
    {
        std::vector<Complex> r = a.c_;
        for (auto &c : r)
            c *= s;
        return Poly(std::move(r));
    }
    friend Poly operator*(const Poly &a, const Poly &b)
    {
        if (a.is_zero() || b.is_zero())
            return {};
        std::vector<Complex> r(a.c_.size() + b.c_.size() - 1);
        for (std::size_t i = 0; i < a.c_.size(); ++i)
            for (std::size_t j = 0; j < b.c_.size(); ++j)
                r[i + j] += a.c_[i] * b.c_[j];
        return Poly(std::move(r));
    }
    Poly &operator+=(const Poly &o) { return *this = *this + o; }
    Poly &operator*=(const Poly &o) { return *this = *this * o; }

  private:
    void strip_exact_zeros()
    {
        while (!c_.empty() && c_.back() == Complex{})
            c_.pop_back();
    }
    std::vector<Complex> c_;
};

/// Max coefficient difference, relative to the larger coefficient scale (or 1).
inline double poly_distance(const Poly &a, const Poly &b)
{
    Poly d = a - b;
    double scale = std::max({1.0, a.max_abs_coeff(), b.max_abs_coeff()});
    return d.max_abs_coeff() / scale;
}

/// prod_{j=0}^{count-1} (d - j), as a polynomial in d.
inline Poly falling_factorial(int count)
{
    Poly p = Poly::constant(1.0);
    for (int j = 0; j < count; ++j)
        p = p * Poly::linear(static_cast<double>(j));
    return p;
}

// ---------------------------------------------------------------------------
// RatFn
// ---------------------------------------------------------------------------

/// numerator / denominator with a monic denominator.
class RatFn
{
  public:
    RatFn() : num_(), den_(Poly::constant(1.0)) {}
    explicit RatFn(Poly num) : num_(std::move(num)), den_(Poly::constant(1.0)) {}
    RatFn(Poly num, Poly den) : num_(std::move(num)), den_(std::move(den))
    {
        if (den_.is_zero())
            throw invalid_input_error("RatFn: zero denominator");
        Complex lead = den_.leading();
        if (lead != Complex{1.0}) {
            num_ = (1.0 / lead) * num_;
            den_ = (1.0 / lead) * den_;
        }
    }
    static RatFn constant(Complex c) { return RatFn(Poly::constant(c)); }

    const Poly &numerator() const { return num_; }
    const Poly &denominator() const { return den_; }

    Complex operator()(Complex u) const
    {
        Complex d = den_(u);
        if (d == Complex{})
            throw pole_error("RatFn evaluated at a root of its denominator", "u");
        return num_(u) / d;
    }

    /// f(u + s)
    RatFn shifted(Complex s) const { return RatFn(num_.shifted(s), den_.shifted(s)); }

    friend RatFn operator+(const RatFn &a, const RatFn &b)
    {
        return RatFn(a.num_ * b.den_ + b.num_ * a.den_, a.den_ * b.den_);
    }
    friend RatFn operator-(const RatFn &a, const RatFn &b)
    {
        return RatFn(a.num_ * b.den_ - b.num_ * a.den_, a.den_ * b.den_);
    }
    friend RatFn operator*(const RatFn &a, const RatFn &b)
    {
        return RatFn(a.num_ * b.num_, a.den_ * b.den_);
    }
    friend RatFn operator*(Complex s, const RatFn &a) { return RatFn(s * a.num_, a.den_); }

  private:
    Poly num_;
    Poly den_;
};

// ---------------------------------------------------------------------------
// Matrix polynomials and matrix-valued rational functions
// ---------------------------------------------------------------------------

/// sum_j C_j u^j with square matrix coefficients.
struct MatrixPoly {
    std::vector<CMatrix> coeffs;

    int degree() const { return static_cast<int>(coeffs.size()) - 1; }
    CMatrix operator()(Complex u) const
    {
        CMatrix r = coeffs.back();
        for (int j = degree() - 1; j >= 0; --j)
            r = (r * u + coeffs[static_cast<std::size_t>(j)]).eval();
        return r;
    }
};

/// Matrix-valued rational function: matrix numerator over a scalar monic denominator.
struct MatRatFn {
    MatrixPoly numerator;
    Poly denominator;

    Eigen::Index rows() const { return numerator.coeffs.front().rows(); }

    CMatrix operator()(Complex u) const
    {
        Complex d = denominator(u);
        if (d == Complex{})
            throw pole_error("matrix rational function evaluated at a pole", "u");
        return numerator(u) / d;
    }

    /// Coefficients of u^0, u^-1, ..., u^-order in the expansion at infinity.
    std::vector<CMatrix> laurent_at_infinity(int order, double rel_tol = 1e-9) const
    {
        const int q = denominator.degree();
        const int p = numerator.degree();
        double scale = 0.0;
        for (const auto &c : numerator.coeffs)
            scale = std::max(scale, c.norm());
        for (int j = q + 1; j <= p; ++j)
            if (numerator.coeffs[static_cast<std::size_t>(j)].norm() > rel_tol * std::max(scale, 1.0))
                throw invalid_input_error("laurent_at_infinity: function grows at infinity");
        const Eigen::Index r = rows();
        // In w = 1/u: A = (sum_i n_{q-i} w^i) / (sum_i d_{q-i} w^i), d_q = 1.
        auto ncoef = [&](int i) -> CMatrix {
            int j = q - i;
            if (j < 0 || j > p)
                return CMatrix::Zero(r, r);
            return numerator.coeffs[static_cast<std::size_t>(j)];
        };
        std::vector<CMatrix> out;
        out.reserve(static_cast<std::size_t>(order + 1));
        for (int i = 0; i <= order; ++i) {
            CMatrix a = ncoef(i);
            for (int j = 1; j <= i; ++j)
                a -= denominator.coeff(q - j) * out[static_cast<std::size_t>(i - j)];
            out.push_back(a);
        }
        return out;
    }
};

// ---------------------------------------------------------------------------
// Interpolation
// ---------------------------------------------------------------------------

namespace detail
{

/// Converts sum_j b_j ((u-c)/R)^j into monomial coefficients in u. Works for any
/// coefficient type supporting scalar multiplication and addition.
template <typename T>
std::vector<T> rescale_to_monomial(const std::vector<T> &b, Complex center, double scale, const T &zero)
{
    const std::size_t n = b.size();
    std::vector<T> out(n, zero);
    for (std::size_t j = 0; j < n; ++j) {
        // ((u-c)/R)^j = R^-j sum_i C(j,i) u^i (-c)^(j-i)
        Complex rinv = std::pow(1.0 / scale, static_cast<double>(j));
        Complex cp = 1.0;
        for (std::size_t k = 0; k <= j; ++k) {
            std::size_t i = j - k;
            out[i] = out[i] + (rinv * binomial(static_cast<int>(j), static_cast<int>(i)) * cp) * b[j];
            cp *= -center;
        }
    }
    return out;
}

inline void check_distinct(std::span<const Complex> xs)
{
    for (std::size_t i = 0; i < xs.size(); ++i)
        for (std::size_t j = i + 1; j < xs.size(); ++j)
            if (std::abs(xs[i] - xs[j]) <= 1e-14 * std::max(1.0, std::abs(xs[i])))
                throw invalid_input_error("interpolation: duplicate abscissa");
}

} // namespace detail

/// Least-squares polynomial fit of degree <= degree_bound; exact interpolation when
/// the number of samples is degree_bound + 1. Solved in the scaled variable
/// (u - mean)/radius for conditioning.
inline Poly poly_interpolate(std::span<const std::pair<Complex, Complex>> points, int degree_bound,
                             double residual_tol = 1e-8)
{
    if (degree_bound < 0)
        throw invalid_input_error("poly_interpolate: negative degree bound");
    const auto m = static_cast<Eigen::Index>(points.size());
    if (m < degree_bound + 1)
        throw invalid_input_error("poly_interpolate: not enough samples");
    std::vector<Complex> xs;
    for (const auto &p : points)
        xs.push_back(p.first);
    detail::check_distinct(xs);

    Complex center{};
    for (auto x : xs)
        center += x;
    center /= static_cast<double>(m);
    double scale = 0.0;
    for (auto x : xs)
        scale = std::max(scale, std::abs(x - center));
    if (scale == 0.0)
        scale = 1.0;

    CMatrix V(m, degree_bound + 1);
    CVector y(m);
    for (Eigen::Index i = 0; i < m; ++i) {
        Complex w = (xs[static_cast<std::size_t>(i)] - center) / scale;
        Complex wp = 1.0;
        for (int j = 0; j <= degree_bound; ++j) {
            V(i, j) = wp;
            wp *= w;
        }
        y(i) = points[static_cast<std::size_t>(i)].second;
    }
    CVector b = V.colPivHouseholderQr().solve(y);
    double res = (V * b - y).norm();
    if (res > residual_tol * std::max(1.0, y.norm()))
        throw conditioning_error("poly_interpolate: residual " + std::to_string(res) + " above tolerance");
    std::vector<Complex> bw(b.data(), b.data() + b.size());
    return Poly(detail::rescale_to_monomial(bw, center, scale, Complex{}));
}

/// Fits a matrix polynomial of degree <= degree_bound to matrix samples, entrywise.
inline MatrixPoly matrix_interpolate(std::span<const Complex> xs, std::span<const CMatrix> values, int degree_bound,
                                     double residual_tol = 1e-8)
{
    const auto m = static_cast<Eigen::Index>(xs.size());
    if (m < degree_bound + 1 || values.size() != xs.size())
        throw invalid_input_error("matrix_interpolate: not enough samples");
    detail::check_distinct(xs);
    const Eigen::Index r = values.front().rows(), c = values.front().cols();

    Complex center{};
    for (auto x : xs)
        center += x;
    center /= static_cast<double>(m);
    double scale = 0.0;
    for (auto x : xs)
        scale = std::max(scale, std::abs(x - center));
    if (scale == 0.0)
        scale = 1.0;

    CMatrix V(m, degree_bound + 1);
    CMatrix Y(m, r * c);
    for (Eigen::Index i = 0; i < m; ++i) {
        Complex w = (xs[static_cast<std::size_t>(i)] - center) / scale;
        Complex wp = 1.0;
        for (int j = 0; j <= degree_bound; ++j) {
            V(i, j) = wp;
            wp *= w;
        }
        const CMatrix &val = values[static_cast<std::size_t>(i)];
        for (Eigen::Index a = 0; a < r; ++a)
            for (Eigen::Index b = 0; b < c; ++b)
                Y(i, a * c + b) = val(a, b);
    }
    auto qr = V.colPivHouseholderQr();
    CMatrix B = qr.solve(Y);
    double res = (V * B - Y).norm();
    if (res > residual_tol * std::max(1.0, Y.norm()))
        throw conditioning_error("matrix_interpolate: residual " + std::to_string(res) + " above tolerance");
    std::vector<CMatrix> bw;
    for (int j = 0; j <= degree_bound; ++j) {
        CMatrix cj(r, c);
        for (Eigen::Index a = 0; a < r; ++a)
            for (Eigen::Index b = 0; b < c; ++b)
                cj(a, b) = B(j, a * c + b);
        bw.push_back(cj);
    }
    return MatrixPoly{detail::rescale_to_monomial(bw, center, scale, CMatrix(CMatrix::Zero(r, c)))};
}

/// `count` points on a circle enclosing every pole with clearance `margin`.
inline std::vector<Complex> circle_abscissas(std::span<const Complex> poles, int count, double margin = 1.0,
                                             double phase = 0.37)
{
    Complex center{};
    for (auto p : poles)
        center += p;
    if (!poles.empty())
        center /= static_cast<double>(poles.size());
    double radius = 0.0;
    for (auto p : poles)
        radius = std::max(radius, std::abs(p - center));
    radius += margin;
    std::vector<Complex> xs;
    for (int i = 0; i < count; ++i) {
        double th = phase + 2.0 * std::numbers::pi * i / count;
        xs.push_back(center + radius * std::polar(1.0, th));
    }
    return xs;
}

// ---------------------------------------------------------------------------
// Nullspace and eigendecomposition
// ---------------------------------------------------------------------------

/// Orthonormal basis (as columns) of the numerical nullspace: right singular vectors
/// whose singular value is <= tol * sigma_max.
inline CMatrix nullspace_matrix(const CMatrix &M, double tol = 1e-9)
{
    if (!(tol > 0.0))
        throw invalid_input_error("nullspace: tolerance must be positive");
    const Eigen::Index n = M.cols();
    if (n == 0)
        return CMatrix(0, 0);
    if (M.rows() == 0)
        return CMatrix::Identity(n, n);
    Eigen::BDCSVD<CMatrix> svd(M, Eigen::ComputeFullV);
    const auto &s = svd.singularValues();
    double smax = s.size() ? s(0) : 0.0;
    Eigen::Index rank = 0;
    for (Eigen::Index i = 0; i < s.size(); ++i)
        if (s(i) > tol * smax)
            ++rank;
    return svd.matrixV().rightCols(n - rank);
}

inline std::vector<CVector> nullspace(const CMatrix &M, double tol = 1e-9)
{
    CMatrix Z = nullspace_matrix(M, tol);
    std::vector<CVector> out;
    for (Eigen::Index j = 0; j < Z.cols(); ++j)
        out.emplace_back(Z.col(j));
    return out;
}

/// Singular values, descending.
inline Eigen::VectorXd singular_values(const CMatrix &M)
{
    Eigen::BDCSVD<CMatrix> svd(M);
    return svd.singularValues();
}

/// 2-norm condition number; infinity when singular.
inline double condition_number(const CMatrix &M)
{
    auto s = singular_values(M);
    if (s.size() == 0)
        return 1.0;
    double smin = s(s.size() - 1);
    return smin == 0.0 ? std::numeric_limits<double>::infinity() : s(0) / smin;
}

struct EigenPair {
    Complex value;
    CVector vector;
};

struct EigenDecomposition {
    std::vector<Complex> values; ///< with algebraic multiplicity
    std::vector<EigenPair> pairs; ///< one per independent eigenvector
};

/// Eigenvalues with multiplicity and a basis of each eigenspace. Numerically
/// coincident eigenvalues are clustered; defective clusters yield fewer vectors.
inline EigenDecomposition eig(const CMatrix &M)
{
    if (M.rows() != M.cols())
        throw invalid_input_error("eig: matrix is not square");
    const Eigen::Index n = M.rows();
    EigenDecomposition out;
    if (n == 0)
        return out;
    Eigen::ComplexEigenSolver<CMatrix> es(M, true);
    const double mnorm = std::max(M.norm(), 1e-300);
    for (Eigen::Index i = 0; i < n; ++i)
        out.values.push_back(es.eigenvalues()(i));

    std::vector<bool> used(static_cast<std::size_t>(n), false);
    const double cluster_tol = 1e-7 * mnorm;
    for (Eigen::Index i = 0; i < n; ++i) {
        if (used[static_cast<std::size_t>(i)])
            continue;
        std::vector<Eigen::Index> cluster{i};
        used[static_cast<std::size_t>(i)] = true;
        for (Eigen::Index j = i + 1; j < n; ++j)
            if (!used[static_cast<std::size_t>(j)] && std::abs(es.eigenvalues()(j) - es.eigenvalues()(i)) <= cluster_tol) {
                cluster.push_back(j);
                used[static_cast<std::size_t>(j)] = true;
            }
        if (cluster.size() == 1) {
            CVector v = es.eigenvectors().col(i);
            out.pairs.push_back({es.eigenvalues()(i), v / v.norm()});
            continue;
        }
        Complex mean{};
        for (auto j : cluster)
            mean += es.eigenvalues()(j);
        mean /= static_cast<double>(cluster.size());
        CMatrix shifted = M - mean * CMatrix::Identity(n, n);
        Eigen::BDCSVD<CMatrix> svd(shifted, Eigen::ComputeFullV);
        const auto &s = svd.singularValues();
        int taken = 0;
        for (Eigen::Index k = n - 1; k >= 0 && taken < static_cast<int>(cluster.size()); --k) {
            if (s(k) > 1e-10 * mnorm)
                break;
            out.pairs.push_back({mean, svd.matrixV().col(k)});
            ++taken;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Small helpers
// ---------------------------------------------------------------------------

inline CMatrix kron(const CMatrix &A, const CMatrix &B)
{
    CMatrix K(A.rows() * B.rows(), A.cols() * B.cols());
    for (Eigen::Index i = 0; i < A.rows(); ++i)
        for (Eigen::Index j = 0; j < A.cols(); ++j)
            K.block(i * B.rows(), j * B.cols(), B.rows(), B.cols()) = A(i, j) * B;
    return K;
}

inline CMatrix commutator(const CMatrix &A, const CMatrix &B) { return A * B - B * A; }

/// Deviation of A from the nearest scalar multiple of the identity, and that scalar.
inline std::pair<Complex, double> scalar_part(const CMatrix &A)
{
    const Eigen::Index n = A.rows();
    if (n == 0)
        return {Complex{}, 0.0};
    Complex s = A.trace() / static_cast<double>(n);
    double dev = (A - s * CMatrix::Identity(n, n)).norm();
    return {s, dev};
}

/// Principal log with argument in (-pi, pi].
inline Complex principal_log(Complex q) { return std::log(q); }

/// q^u = exp(u log q) on the principal branch.
inline Complex cpow_principal(Complex q, Complex u) { return std::exp(u * principal_log(q)); }

} // namespace qexp

#endif
