#ifndef QEXP_GAUDIN_OP_HPP
#define QEXP_GAUDIN_OP_HPP

// Gaudin transfer matrices: L-operator action, universal differential operator,
// indicial data at the points z_r and at infinity, equivariance check.

#include <vector>

#include "xxx_op.hpp"

namespace qexp
{

/// L_ab(u) = sum_j e^{(j)}_{ba} / (u - z_j), compressed to W.
inline CMatrix l_action(const WeightSubspace &W, const std::vector<Complex> &z, int a, int b, Complex u)
{
    GaudinAction L{W.module.get(), z};
    return W.basis.adjoint() * L.l_jet(a, b, u, 0, W.basis);
}

/// Tee_k(u) on W, k = 0..N.
inline std::vector<CMatrix> gaudin_transfer(const WeightSubspace &W, const std::vector<Complex> &z, const CMatrix &K,
                                            Complex u, const std::vector<int> &row_map = {})
{
    GaudinAction L{W.module.get(), z};
    auto full = gaudin_rowdet_apply(L, K, u, W.basis, row_map);
    std::vector<CMatrix> out;
    for (auto &m : full)
        out.push_back(W.basis.adjoint() * m);
    return out;
}

inline DifferentialPencil universal_differential_pencil(const ModelSpec &spec, const WeightSubspace &W)
{
    if (spec.kind != ModelKind::gaudin)
        throw invalid_input_error("universal_differential_pencil: model is not of gaudin kind");
    return build_pencil(ModelKind::gaudin, spec.N, spec.z, W,
                        [&](Complex u) { return gaudin_transfer(W, spec.z, spec.twist, u); });
}

/// Transfer matrices of either kind.
inline std::vector<CMatrix> transfer(const ModelSpec &spec, const WeightSubspace &W, Complex u)
{
    return spec.kind == ModelKind::xxx ? xxx_transfer(W, spec.z, spec.twist, u)
                                       : gaudin_transfer(W, spec.z, spec.twist, u);
}

inline OperatorPencil universal_pencil(const ModelSpec &spec, const WeightSubspace &W)
{
    return spec.kind == ModelKind::xxx ? universal_difference_pencil(spec, W) : universal_differential_pencil(spec, W);
}

struct PointIndicial {
    int r = 0;                      ///< 0-based site
    std::vector<Complex> bar;       ///< bar-Tee_{k,r}, k = 0..N
    std::vector<Complex> bar_from_numerator;
    double scalar_deviation = 0.0;
    Poly lhs;
    Poly rhs;                       ///< prod_i (d - Lambda_i - N + i)
};

struct IndicialData {
    std::vector<PointIndicial> points;
    std::vector<Complex> infinity_lead; ///< Tee_{k,0} for K = 0
    double infinity_lower_order = 0.0;
    double infinity_scalar_deviation = 0.0;
    Poly infinity_lhs, infinity_rhs;
};

/// prod_i (d - Lambda_i - N + i), i 1-based.
inline Poly point_indicial_rhs(const GlWeight &w)
{
    const int N = w.rank();
    Poly p = Poly::constant(1.0);
    for (int i = 1; i <= N; ++i)
        p *= Poly::linear(static_cast<double>(w.entries[static_cast<std::size_t>(i - 1)] + N - i));
    return p;
}

/// Per-point data: bar_{k,r} = lim (u - z_r)^k Tee_k(u), by averaging (u - z_r)^k Tee_k(u)
/// over a small circle (the function is analytic at z_r). Cross-checked with the
/// pencil numerator at z_r.
inline PointIndicial point_indicial(const ModelSpec &spec, const OperatorPencil &P, int r, double radius = 1e-2,
                                    int samples = 16)
{
    const int N = spec.N;
    const Complex zr = spec.z[static_cast<std::size_t>(r)];
    for (int s = 0; s < spec.n(); ++s)
        if (s != r && std::abs(spec.z[static_cast<std::size_t>(s)] - zr) < 1e-6)
            throw precondition_error("point_indicial: points must be pairwise distinct");
    const Eigen::Index d = P.dim();
    std::vector<CMatrix> avg(static_cast<std::size_t>(N + 1), CMatrix::Zero(d, d));
    for (int j = 0; j < samples; ++j) {
        Complex h = radius * std::polar(1.0, 2.0 * std::numbers::pi * (j + 0.25) / samples);
        auto te = gaudin_transfer(P.W, spec.z, spec.twist, zr + h);
        for (int k = 0; k <= N; ++k)
            avg[static_cast<std::size_t>(k)] += std::pow(h, k) * te[static_cast<std::size_t>(k)] / static_cast<double>(samples);
    }
    PointIndicial out;
    out.r = r;
    for (int k = 0; k <= N; ++k) {
        auto [s, dev] = scalar_part(avg[static_cast<std::size_t>(k)]);
        out.scalar_deviation = std::max(out.scalar_deviation, dev / std::max(1.0, std::abs(s)));
        out.bar.push_back(s);
        // numerator route
        Complex den = 1.0;
        for (int t = 0; t < spec.n(); ++t)
            if (t != r)
                den *= std::pow(zr - spec.z[static_cast<std::size_t>(t)], k);
        CMatrix num = P.A[static_cast<std::size_t>(k)].numerator(zr);
        out.bar_from_numerator.push_back(scalar_part(num).first / den);
    }
    out.lhs = indicial_polynomial(out.bar);
    out.rhs = point_indicial_rhs(spec.weights[static_cast<std::size_t>(r)]);
    return out;
}

/// Full indicial data; the infinity part is computed only when K = 0 and W is a weight space.
inline IndicialData indicial_data(const ModelSpec &spec, const OperatorPencil &P)
{
    IndicialData D;
    for (int r = 0; r < spec.n(); ++r)
        D.points.push_back(point_indicial(spec, P, r));
    if (spec.twist.isZero(0.0) && !P.W.weight.empty()) {
        const int N = spec.N;
        auto lau = P.laurent(N);
        const Eigen::Index d = P.dim();
        const double rt = std::sqrt(static_cast<double>(std::max<Eigen::Index>(d, 1)));
        double scale = 1.0;
        for (const auto &ak : lau)
            for (const auto &c : ak)
                scale = std::max(scale, c.norm() / rt);
        for (int k = 0; k <= N; ++k) {
            for (int i = 0; i < k; ++i)
                D.infinity_lower_order =
                    std::max(D.infinity_lower_order, lau[static_cast<std::size_t>(k)][static_cast<std::size_t>(i)].norm() / (scale * rt));
            auto [s, dev] = scalar_part(lau[static_cast<std::size_t>(k)][static_cast<std::size_t>(k)]);
            D.infinity_scalar_deviation = std::max(D.infinity_scalar_deviation, dev / std::max(1.0, std::abs(s)));
            D.infinity_lead.push_back(s);
        }
        D.infinity_lhs = indicial_polynomial(D.infinity_lead);
        D.infinity_rhs = infinity_indicial_rhs(P.W.weight);
    }
    return D;
}

inline double gaudin_conjugation_check(std::shared_ptr<const TensorModule> M, const std::vector<Complex> &z,
                                       const CMatrix &K, const CMatrix &A, Complex u)
{
    Eigen::FullPivLU<CMatrix> lu(A);
    if (!lu.isInvertible())
        throw invalid_input_error("conjugation_check: A is singular");
    CMatrix Ainv = lu.inverse();
    CMatrix mu = group_action(*M, A), muinv = group_action(*M, Ainv);
    auto W = full_space(M);
    auto lhs = gaudin_transfer(W, z, A * K * Ainv, u);
    auto rhs = gaudin_transfer(W, z, K, u);
    double err = 0.0;
    for (std::size_t k = 0; k < lhs.size(); ++k)
        err = std::max(err, relative_difference(lhs[k], mu * rhs[k] * muinv));
    return err;
}

} // namespace qexp

#endif
