#ifndef QEXP_PENCIL_HPP
#define QEXP_PENCIL_HPP

// Operator pencils: sum_k (-1)^k A_k(u) tau^{-k} or sum_k (-1)^k A_k(u) d^{N-k},
// with A_k reconstructed from point samples against a known denominator.

#include <functional>
#include <vector>

#include "repcore.hpp"

namespace qexp
{

struct OperatorPencil {
    ModelKind kind = ModelKind::xxx;
    int N = 0;
    std::vector<MatRatFn> A; ///< k = 0..N
    WeightSubspace W;        ///< empty basis for scalar (fundamental) pencils
    std::vector<Complex> z;  ///< evaluation points; poles sit at z_s + j

    Eigen::Index dim() const { return A.empty() ? W.dim() : A.front().rows(); }
    CMatrix operator()(int k, Complex u) const { return A[static_cast<std::size_t>(k)](u); }

    /// laurent(order)[k][i] = coefficient of u^{-i} in A_k(u).
    std::vector<std::vector<CMatrix>> laurent(int order) const
    {
        std::vector<std::vector<CMatrix>> out;
        for (const auto &a : A)
            out.push_back(a.laurent_at_infinity(order));
        return out;
    }
};

using DifferencePencil = OperatorPencil;
using DifferentialPencil = OperatorPencil;

/// Known denominator of A_k: prod_{i=1}^k prod_s (u - z_s - i + 1) for xxx,
/// prod_s (u - z_s)^k for gaudin.
inline Poly pencil_denominator(ModelKind kind, const std::vector<Complex> &z, int k)
{
    Poly d = Poly::constant(1.0);
    for (int i = 1; i <= k; ++i)
        for (auto zs : z)
            d *= Poly::linear(kind == ModelKind::xxx ? zs + static_cast<double>(i - 1) : zs);
    return d;
}

/// Abscissas for pencil sampling: a circle enclosing every pole z_s + j, j < N.
inline std::vector<Complex> pencil_abscissas(ModelKind kind, const std::vector<Complex> &z, int N, int count)
{
    std::vector<Complex> poles;
    for (auto zs : z)
        for (int j = 0; j < (kind == ModelKind::xxx ? N : 1); ++j)
            poles.push_back(zs + static_cast<double>(j));
    if (poles.empty())
        poles.push_back(0.0);
    return circle_abscissas(poles, count, 1.0);
}

using TransferEvaluator = std::function<std::vector<CMatrix>(Complex)>;

/// Samples the transfer matrices at n*N+5 points and fits numerators of degree <= n*k.
inline OperatorPencil build_pencil(ModelKind kind, int N, const std::vector<Complex> &z, const WeightSubspace &W,
                                   const TransferEvaluator &eval, double residual_tol = 1e-8)
{
    const int n = static_cast<int>(z.size());
    const int count = n * N + 5;
    auto xs = pencil_abscissas(kind, z, N, count);
    std::vector<std::vector<CMatrix>> samples(static_cast<std::size_t>(N + 1));
    for (auto u : xs) {
        auto te = eval(u);
        for (int k = 0; k <= N; ++k)
            samples[static_cast<std::size_t>(k)].push_back(te[static_cast<std::size_t>(k)]);
    }
    OperatorPencil P;
    P.kind = kind;
    P.N = N;
    P.W = W;
    P.z = z;
    for (int k = 0; k <= N; ++k) {
        Poly den = pencil_denominator(kind, z, k);
        std::vector<CMatrix> vals;
        for (std::size_t i = 0; i < xs.size(); ++i)
            vals.push_back(samples[static_cast<std::size_t>(k)][i] * den(xs[i]));
        MatRatFn f;
        f.denominator = den;
        f.numerator = matrix_interpolate(xs, vals, n * k, residual_tol);
        P.A.push_back(std::move(f));
    }
    return P;
}

} // namespace qexp

#endif
