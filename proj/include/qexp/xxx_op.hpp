#ifndef QEXP_XXX_OP_HPP
#define QEXP_XXX_OP_HPP

// XXX transfer matrices: T-operator action, universal difference operator,
// leading coefficients at infinity, Se coefficients, qdet, equivariance and RTT checks.

#include <algorithm>
#include <numeric>
#include <vector>

#include "pencil.hpp"
#include "rowdet.hpp"

namespace qexp
{

/// Matrix of T_ab(u) compressed to W (0-based a, b).
inline CMatrix t_action(const WeightSubspace &W, const std::vector<Complex> &z, int a, int b, Complex u)
{
    YangianAction T{W.module.get(), z};
    return W.basis.adjoint() * T.entry(a, b, u, W.basis);
}

/// Te_k(u) on W, k = 0..N.
inline std::vector<CMatrix> xxx_transfer(const WeightSubspace &W, const std::vector<Complex> &z, const CMatrix &Q,
                                         Complex u, const std::vector<int> &row_map = {})
{
    YangianAction T{W.module.get(), z};
    auto full = xxx_rowdet_apply(T, Q, u, W.basis, row_map);
    std::vector<CMatrix> out;
    for (auto &m : full)
        out.push_back(W.basis.adjoint() * m);
    return out;
}

inline DifferencePencil universal_difference_pencil(const ModelSpec &spec, const WeightSubspace &W)
{
    if (spec.kind != ModelKind::xxx)
        throw invalid_input_error("universal_difference_pencil: model is not of xxx kind");
    return build_pencil(ModelKind::xxx, spec.N, spec.z, W,
                        [&](Complex u) { return xxx_transfer(W, spec.z, spec.twist, u); });
}

/// Leading Laurent data at infinity, common to both kinds.
struct CharacteristicData {
    std::vector<Complex> lead;       ///< A_{k,0}, k = 0..N (scalar parts)
    std::vector<Complex> sub;        ///< A_{k,1}
    double scalar_deviation = 0.0;   ///< max relative deviation from scalar
    Poly char_poly;                  ///< x^N + sum_k (-1)^k A_{k0} x^{N-k}
    Poly sub_poly;                   ///< sum_{k>=1} (-1)^k A_{k1} x^{N-k}
    std::vector<Complex> roots;
};

inline CharacteristicData characteristic_data(const OperatorPencil &P, double scalar_tol = 1e-7)
{
    const int N = P.N;
    auto lau = P.laurent(1);
    CharacteristicData cd;
    std::vector<Complex> cp(static_cast<std::size_t>(N + 1)), sp(static_cast<std::size_t>(N + 1));
    for (int k = 0; k <= N; ++k) {
        auto [s0, d0] = scalar_part(lau[static_cast<std::size_t>(k)][0]);
        auto [s1, d1] = scalar_part(lau[static_cast<std::size_t>(k)][1]);
        const double nrm = std::sqrt(static_cast<double>(std::max<Eigen::Index>(1, P.dim())));
        cd.scalar_deviation = std::max({cd.scalar_deviation, d0 / (nrm * std::max(1.0, std::abs(s0))),
                                        d1 / (nrm * std::max(1.0, std::abs(s1)))});
        cd.lead.push_back(s0);
        cd.sub.push_back(s1);
        const double sg = k % 2 ? -1.0 : 1.0;
        cp[static_cast<std::size_t>(N - k)] = sg * s0;
        if (k >= 1)
            sp[static_cast<std::size_t>(N - k)] = sg * s1;
    }
    cp[static_cast<std::size_t>(N)] = 1.0;
    cd.char_poly = Poly(cp);
    cd.sub_poly = Poly(sp);
    cd.roots = cd.char_poly.roots();
    if (cd.scalar_deviation > scalar_tol)
        throw theorem_violation("leading coefficients at infinity are not scalar (deviation " +
                                    std::to_string(cd.scalar_deviation) + ")",
                                "leading-scalar");
    return cd;
}

/// Expected leading polynomials: prod (x - q_i) and -prod (x - q_i) sum_j w_j / (x - q_j),
/// where w_j = m_j Q_j (xxx) or m_j (gaudin).
inline std::pair<Poly, Poly> expected_characteristic(const std::vector<Complex> &q, const std::vector<Complex> &w)
{
    Poly full = Poly::from_roots(q);
    Poly sub;
    for (std::size_t j = 0; j < q.size(); ++j) {
        Poly others = Poly::constant(1.0);
        for (std::size_t i = 0; i < q.size(); ++i)
            if (i != j)
                others *= Poly::linear(q[i]);
        sub += (-w[j]) * others;
    }
    return {full, sub};
}

/// Se_k Laurent data for Q = 1 on a singular subspace.
struct SeData {
    std::vector<Complex> se0;         ///< Se_{k,0}, k = 0..N
    double lower_order_max = 0.0;     ///< largest u^{-i}, i < k, coefficient (must vanish)
    double scalar_deviation = 0.0;
    Poly lhs;                         ///< sum_k (-1)^k Se_{k0} prod_{j<N-k} (d - j)
    Poly rhs;                         ///< prod_s (d - m_s - N + s)
};

/// Indicial polynomial in d from leading coefficients c_k: sum_k (-1)^k c_k prod_{j<N-k}(d - j).
inline Poly indicial_polynomial(const std::vector<Complex> &c)
{
    const int N = static_cast<int>(c.size()) - 1;
    Poly p;
    for (int k = 0; k <= N; ++k)
        p += ((k % 2 ? -1.0 : 1.0) * c[static_cast<std::size_t>(k)]) * falling_factorial(N - k);
    return p;
}

/// prod_s (d - m_s - N + s), s 1-based.
inline Poly infinity_indicial_rhs(const std::vector<int> &m)
{
    const int N = static_cast<int>(m.size());
    Poly p = Poly::constant(1.0);
    for (int s = 1; s <= N; ++s)
        p *= Poly::linear(static_cast<double>(m[static_cast<std::size_t>(s - 1)] + N - s));
    return p;
}

/// Builds the coefficients of the rewriting sum_k (-1)^k A_k tau^{N-k} = sum_k (-1)^k Se_k (tau - 1)^{N-k}
/// and checks the indicial identity at infinity.
inline SeData modified_pencil_Se(const DifferencePencil &P)
{
    if (P.W.weight.empty())
        throw invalid_input_error("modified_pencil_Se: subspace has no weight");
    const int N = P.N;
    auto lau = P.laurent(N);
    const Eigen::Index d = P.dim();
    SeData out;
    double scale = 1.0;
    for (const auto &ak : lau)
        for (const auto &c : ak)
            scale = std::max(scale, c.norm() / std::sqrt(static_cast<double>(std::max<Eigen::Index>(d, 1))));
    for (int kp = 0; kp <= N; ++kp) {
        // (-1)^{k'} Se_{k'} = sum_{k <= k'} (-1)^k C(N-k, N-k') A_k
        std::vector<CMatrix> se(static_cast<std::size_t>(N + 1), CMatrix::Zero(d, d));
        for (int k = 0; k <= kp; ++k) {
            double coef = (k % 2 ? -1.0 : 1.0) * binomial(N - k, N - kp) * (kp % 2 ? -1.0 : 1.0);
            for (int i = 0; i <= N; ++i)
                se[static_cast<std::size_t>(i)] += coef * lau[static_cast<std::size_t>(k)][static_cast<std::size_t>(i)];
        }
        for (int i = 0; i < kp; ++i)
            out.lower_order_max = std::max(out.lower_order_max, se[static_cast<std::size_t>(i)].norm() /
                                                                     (scale * std::sqrt(static_cast<double>(std::max<Eigen::Index>(d, 1)))));
        auto [s, dev] = scalar_part(se[static_cast<std::size_t>(kp)]);
        out.scalar_deviation = std::max(out.scalar_deviation, dev / std::max(1.0, std::abs(s)));
        out.se0.push_back(s);
    }
    out.lhs = indicial_polynomial(out.se0);
    out.rhs = infinity_indicial_rhs(P.W.weight);
    return out;
}

/// Te_N(u) predicted for weights with Lambda_N = 0.
inline Complex te_n_formula(const ModelSpec &spec, Complex u)
{
    Complex r = 1.0;
    for (int a = 0; a < spec.N; ++a)
        r *= spec.twist(a, a);
    for (int s = 0; s < spec.n(); ++s) {
        const auto &w = spec.weights[static_cast<std::size_t>(s)].entries;
        for (int i = 1; i <= spec.N - 1; ++i)
            r *= (u - spec.z[static_cast<std::size_t>(s)] + static_cast<double>(w[static_cast<std::size_t>(i - 1)] - i + 1)) /
                 (u - spec.z[static_cast<std::size_t>(s)] - static_cast<double>(i - 1));
    }
    return r;
}

/// qdet T(u) = sum_sigma sign T_{1 s1}(u) T_{2 s2}(u-1) ... T_{N sN}(u-N+1), compressed to W.
inline CMatrix qdet(const WeightSubspace &W, const std::vector<Complex> &z, Complex u)
{
    const int N = W.N();
    YangianAction T{W.module.get(), z};
    std::vector<int> sigma(static_cast<std::size_t>(N));
    std::iota(sigma.begin(), sigma.end(), 0);
    CMatrix acc = CMatrix::Zero(W.module->dim, W.dim());
    do {
        int inv = 0;
        for (int i = 0; i < N; ++i)
            for (int j = i + 1; j < N; ++j)
                if (sigma[static_cast<std::size_t>(i)] > sigma[static_cast<std::size_t>(j)])
                    ++inv;
        CMatrix Y = W.basis;
        for (int r = N - 1; r >= 0; --r)
            Y = T.entry(r, sigma[static_cast<std::size_t>(r)], u - static_cast<double>(r), Y);
        acc += (inv % 2 ? -1.0 : 1.0) * Y;
    } while (std::next_permutation(sigma.begin(), sigma.end()));
    return W.basis.adjoint() * acc;
}

/// A^{(x)n} on a vector tensor module.
inline CMatrix group_action(const TensorModule &M, const CMatrix &A)
{
    for (const auto &s : M.sites)
        if (!s.highest.is_vector())
            throw invalid_input_error("group_action: only vector tensor modules are supported");
    CMatrix r = CMatrix::Identity(1, 1);
    for (int i = 0; i < M.n(); ++i)
        r = kron(r, A);
    return r;
}

inline double relative_difference(const CMatrix &X, const CMatrix &Y)
{
    double s = std::max({X.norm(), Y.norm(), 1e-300});
    return (X - Y).norm() / s;
}

/// max over k of the relative error of D_{AQA^-1} = mu(A) D_Q mu(A)^{-1} at u.
inline double xxx_conjugation_check(std::shared_ptr<const TensorModule> M, const std::vector<Complex> &z,
                                    const CMatrix &Q, const CMatrix &A, Complex u)
{
    Eigen::FullPivLU<CMatrix> lu(A);
    if (!lu.isInvertible())
        throw invalid_input_error("conjugation_check: A is singular");
    CMatrix Ainv = lu.inverse();
    CMatrix mu = group_action(*M, A), muinv = group_action(*M, Ainv);
    auto W = full_space(M);
    auto lhs = xxx_transfer(W, z, A * Q * Ainv, u);
    auto rhs = xxx_transfer(W, z, Q, u);
    double err = 0.0;
    for (std::size_t k = 0; k < lhs.size(); ++k)
        err = std::max(err, relative_difference(lhs[k], mu * rhs[k] * muinv));
    return err;
}

/// Full T(u) as an operator on C^N (x) V, blocks T_ab(u).
inline CMatrix t_matrix_aux(const WeightSubspace &W, const std::vector<Complex> &z, Complex u)
{
    const int N = W.N();
    const Eigen::Index d = W.dim();
    CMatrix out(N * d, N * d);
    YangianAction T{W.module.get(), z};
    for (int b = 0; b < N; ++b) {
        auto col = T.column(b, u, W.basis);
        for (int a = 0; a < N; ++a)
            out.block(a * d, b * d, d, d) = W.basis.adjoint() * col[static_cast<std::size_t>(a)];
    }
    return out;
}

/// Relative error of R(u-v) T1(u) T2(v) = T2(v) T1(u) R(u-v), R(x) = x + P, on C^N (x) C^N (x) V.
inline double rtt_check(const WeightSubspace &W, const std::vector<Complex> &z, Complex u, Complex v)
{
    const int N = W.N();
    const Eigen::Index d = W.dim();
    CMatrix Tu = t_matrix_aux(W, z, u), Tv = t_matrix_aux(W, z, v);
    const Eigen::Index D = N * N * d;
    CMatrix T1 = CMatrix::Zero(D, D), T2 = CMatrix::Zero(D, D), R = CMatrix::Zero(D, D);
    // basis index ((a * N + b) * d + x): a on the first auxiliary factor, b on the second
    for (int a = 0; a < N; ++a)
        for (int b = 0; b < N; ++b)
            for (int a2 = 0; a2 < N; ++a2)
                for (int b2 = 0; b2 < N; ++b2) {
                    Eigen::Index row = (a * N + b) * d, col = (a2 * N + b2) * d;
                    if (b == b2)
                        T1.block(row, col, d, d) = Tu.block(a * d, a2 * d, d, d);
                    if (a == a2)
                        T2.block(row, col, d, d) = Tv.block(b * d, b2 * d, d, d);
                    Complex r = (a == a2 && b == b2 ? (u - v) : Complex{}) + (a == b2 && b == a2 ? 1.0 : 0.0);
                    if (r != Complex{})
                        R.block(row, col, d, d) = r * CMatrix::Identity(d, d);
                }
    return relative_difference(R * T1 * T2, T2 * T1 * R);
}

} // namespace qexp

#endif
