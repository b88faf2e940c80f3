#ifndef QEXP_ROWDET_HPP
#define QEXP_ROWDET_HPP

// Pointwise expansion of the row determinants
//   sum_sigma sign(sigma) X_{pi(1) sigma(1)} ... X_{pi(N) sigma(N)}
// for X = 1 - Q T(u) tau^{-1} (difference) and X = d/du - K - L(u) (differential),
// applied to a block of vectors of the full tensor module.
//
// Both expansions run a dynamic program over the set of columns already used,
// adding rows from the bottom up. The sign of adding row r at column c on top of
// the used set S is (-1)^{#{s in S : s < c}}.

#include <bit>
#include <map>
#include <numeric>
#include <vector>

#include "repcore.hpp"

namespace qexp
{

namespace detail
{

inline void check_pole(Complex u, const std::vector<Complex> &z)
{
    for (std::size_t i = 0; i < z.size(); ++i)
        if (std::abs(u - z[i]) <= 1e-13 * (1.0 + std::abs(z[i])))
            throw pole_error("evaluation at a pole of the L-operator", "z_" + std::to_string(i + 1));
}

inline std::vector<int> identity_rows(int N)
{
    std::vector<int> r(static_cast<std::size_t>(N));
    std::iota(r.begin(), r.end(), 0);
    return r;
}

inline int sign_for(unsigned mask, int c)
{
    return std::popcount(mask & ((1u << c) - 1u)) % 2 ? -1 : 1;
}

} // namespace detail

/// Yangian action T(u) on a tensor product of evaluation modules.
struct YangianAction {
    const TensorModule *module = nullptr;
    std::vector<Complex> z;

    /// W[a] = T_{ac}(u) X for a = 0..N-1.
    std::vector<CMatrix> column(int c, Complex u, const CMatrix &X) const
    {
        detail::check_pole(u, z);
        const int N = module->N, n = module->n();
        std::vector<CMatrix> W(static_cast<std::size_t>(N));
        for (int b = 0; b < N; ++b)
            W[static_cast<std::size_t>(b)] = b == c ? X : CMatrix::Zero(X.rows(), X.cols());
        if (n == 0)
            return W;
        {
            Complex f = 1.0 / (u - z[0]);
            for (int b = 0; b < N; ++b)
                W[static_cast<std::size_t>(b)] += f * (module->gen(0, c, b) * X);
        }
        for (int i = 1; i < n; ++i) {
            Complex f = 1.0 / (u - z[static_cast<std::size_t>(i)]);
            std::vector<CMatrix> next = W;
            for (int a = 0; a < N; ++a)
                for (int b = 0; b < N; ++b) {
                    const SpMat &e = module->gen(i, b, a);
                    if (e.nonZeros() == 0)
                        continue;
                    next[static_cast<std::size_t>(a)] += f * (e * W[static_cast<std::size_t>(b)]);
                }
            W = std::move(next);
        }
        return W;
    }

    CMatrix entry(int a, int b, Complex u, const CMatrix &X) const
    {
        return column(b, u, X)[static_cast<std::size_t>(a)];
    }
};

/// Te_k(u) X for k = 0..N (row map pi defaults to the identity).
inline std::vector<CMatrix> xxx_rowdet_apply(const YangianAction &T, const CMatrix &Q, Complex u, const CMatrix &X,
                                             const std::vector<int> &row_map = {})
{
    const int N = T.module->N;
    const std::vector<int> pi = row_map.empty() ? detail::identity_rows(N) : row_map;
    if (static_cast<int>(pi.size()) != N)
        throw invalid_input_error("row map of wrong length");
    using Cell = std::vector<std::vector<CMatrix>>; // [shift][k]
    std::map<unsigned, Cell> states;
    {
        Cell init(static_cast<std::size_t>(N + 1), std::vector<CMatrix>(1, X));
        states[0u] = init;
    }
    const CMatrix zero = CMatrix::Zero(X.rows(), X.cols());
    for (int r = N - 1; r >= 0; --r) {
        const int m = N - 1 - r; // rows already placed
        const int row = pi[static_cast<std::size_t>(r)];
        std::map<unsigned, Cell> next;
        for (const auto &[S, C] : states) {
            for (int c = 0; c < N; ++c) {
                if (S & (1u << c))
                    continue;
                const unsigned S2 = S | (1u << c);
                const double sg = detail::sign_for(S, c);
                auto &cell = next[S2];
                if (cell.empty())
                    cell.assign(static_cast<std::size_t>(r + 1), std::vector<CMatrix>(static_cast<std::size_t>(m + 2), zero));
                for (int s = 0; s <= r; ++s) {
                    const auto &Cs = C[static_cast<std::size_t>(s)];
                    if (row == c)
                        for (int k = 0; k <= m; ++k)
                            cell[static_cast<std::size_t>(s)][static_cast<std::size_t>(k)] += sg * Cs[static_cast<std::size_t>(k)];
                    // Y_{row,c}(u-s) applied to the suffix evaluated one step further
                    const auto &Cn = C[static_cast<std::size_t>(s + 1)];
                    CMatrix cat(X.rows(), X.cols() * (m + 1));
                    for (int k = 0; k <= m; ++k)
                        cat.middleCols(k * X.cols(), X.cols()) = Cn[static_cast<std::size_t>(k)];
                    auto Wc = T.column(c, u - static_cast<double>(s), cat);
                    CMatrix Y = CMatrix::Zero(cat.rows(), cat.cols());
                    for (int e = 0; e < N; ++e)
                        if (Q(row, e) != Complex{})
                            Y += Q(row, e) * Wc[static_cast<std::size_t>(e)];
                    for (int k = 0; k <= m; ++k)
                        cell[static_cast<std::size_t>(s)][static_cast<std::size_t>(k + 1)] -=
                            sg * Y.middleCols(k * X.cols(), X.cols());
                }
            }
        }
        states = std::move(next);
    }
    const auto &fin = states.at((1u << N) - 1u)[0];
    std::vector<CMatrix> out;
    for (int k = 0; k <= N; ++k)
        out.push_back((k % 2 ? -1.0 : 1.0) * fin[static_cast<std::size_t>(k)]);
    return out;
}

/// Current-algebra action L(u) with twist: M_ab(u) = K_ab + sum_j e^{(j)}_{ba} / (u - z_j).
struct GaudinAction {
    const TensorModule *module = nullptr;
    std::vector<Complex> z;

    /// Taylor coefficient of order `order` of L_ab(u + h) in h, applied to X.
    CMatrix l_jet(int a, int b, Complex u, int order, const CMatrix &X) const
    {
        detail::check_pole(u, z);
        CMatrix r = CMatrix::Zero(X.rows(), X.cols());
        for (int j = 0; j < module->n(); ++j) {
            const SpMat &e = module->gen(j, b, a);
            if (e.nonZeros() == 0)
                continue;
            Complex w = 1.0 / (u - z[static_cast<std::size_t>(j)]);
            Complex f = std::pow(w, order + 1) * (order % 2 ? -1.0 : 1.0);
            r += f * (e * X);
        }
        return r;
    }
};

/// Tee_k(u) X for k = 0..N.
inline std::vector<CMatrix> gaudin_rowdet_apply(const GaudinAction &L, const CMatrix &K, Complex u, const CMatrix &X,
                                                const std::vector<int> &row_map = {})
{
    const int N = L.module->N;
    const std::vector<int> pi = row_map.empty() ? detail::identity_rows(N) : row_map;
    if (static_cast<int>(pi.size()) != N)
        throw invalid_input_error("row map of wrong length");
    detail::check_pole(u, L.z);
    using Jet = std::vector<CMatrix>;  // Taylor coefficients in h
    using Cell = std::vector<Jet>;     // [power of d/du]
    const CMatrix zero = CMatrix::Zero(X.rows(), X.cols());
    std::map<unsigned, Cell> states;
    {
        Jet j(static_cast<std::size_t>(N + 1), zero);
        j[0] = X;
        states[0u] = Cell{j};
    }
    for (int r = N - 1; r >= 0; --r) {
        const int m = N - 1 - r;
        const int row = pi[static_cast<std::size_t>(r)];
        const int ord = r; // jet order kept after this row
        std::map<unsigned, Cell> next;
        for (const auto &[S, C] : states) {
            for (int c = 0; c < N; ++c) {
                if (S & (1u << c))
                    continue;
                const unsigned S2 = S | (1u << c);
                const double sg = detail::sign_for(S, c);
                auto &cell = next[S2];
                if (cell.empty())
                    cell.assign(static_cast<std::size_t>(m + 2), Jet(static_cast<std::size_t>(ord + 1), zero));
                for (int p = 0; p <= m; ++p) {
                    const Jet &Cp = C[static_cast<std::size_t>(p)];
                    if (row == c)
                        for (int i = 0; i <= ord; ++i) {
                            // d/du acting on C_p d^p: derivative term and raised power
                            cell[static_cast<std::size_t>(p)][static_cast<std::size_t>(i)] +=
                                sg * static_cast<double>(i + 1) * Cp[static_cast<std::size_t>(i + 1)];
                            cell[static_cast<std::size_t>(p + 1)][static_cast<std::size_t>(i)] += sg * Cp[static_cast<std::size_t>(i)];
                        }
                    // - M_{row,c} * C_p, as a product of jets
                    for (int i2 = 0; i2 <= ord; ++i2) {
                        const CMatrix &Y = Cp[static_cast<std::size_t>(i2)];
                        if (Y.isZero(0.0))
                            continue;
                        if (K(row, c) != Complex{})
                            cell[static_cast<std::size_t>(p)][static_cast<std::size_t>(i2)] -= sg * K(row, c) * Y;
                        for (int j = 0; i2 + j <= ord; ++j)
                            cell[static_cast<std::size_t>(p)][static_cast<std::size_t>(i2 + j)] -= sg * L.l_jet(row, c, u, j, Y);
                    }
                }
            }
        }
        states = std::move(next);
    }
    const auto &fin = states.at((1u << N) - 1u);
    std::vector<CMatrix> out;
    for (int k = 0; k <= N; ++k)
        out.push_back((k % 2 ? -1.0 : 1.0) * fin[static_cast<std::size_t>(N - k)][0]);
    return out;
}

} // namespace qexp

#endif
