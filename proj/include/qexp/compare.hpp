#ifndef QEXP_COMPARE_HPP
#define QEXP_COMPARE_HPP

// Kernel comparison under integer weight shifts Lambda -> Lambda + a_s at each site.
// The two tensor modules are identified by the site-wise gl_N intertwiner, found
// numerically from the generators alone, so the multiplier is genuinely tested.

#include <vector>

#include "kernel.hpp"

namespace qexp
{

struct ShiftPlan {
    std::vector<int> a;
};

inline void check_plan(const ShiftPlan &plan, std::size_t n)
{
    if (plan.a.size() != n)
        throw invalid_input_error("shift plan length differs from the number of sites");
    for (int x : plan.a)
        if (x < 0)
            throw invalid_input_error("shift plan entries must be non-negative");
}

/// prod_s prod_{k<a_s} (u - z_s - k)
inline Poly multiplier_xxx(const ShiftPlan &plan, const std::vector<Complex> &z)
{
    check_plan(plan, z.size());
    Poly C = Poly::constant(1.0);
    for (std::size_t s = 0; s < z.size(); ++s)
        for (int k = 0; k < plan.a[s]; ++k)
            C *= Poly::linear(z[s] + static_cast<double>(k));
    return C;
}

/// prod_s (u - z_s)^{a_s}
inline Poly multiplier_gaudin(const ShiftPlan &plan, const std::vector<Complex> &z)
{
    check_plan(plan, z.size());
    Poly C = Poly::constant(1.0);
    for (std::size_t s = 0; s < z.size(); ++s)
        for (int k = 0; k < plan.a[s]; ++k)
            C *= Poly::linear(z[s]);
    return C;
}

inline Poly multiplier(ModelKind kind, const ShiftPlan &plan, const std::vector<Complex> &z)
{
    return kind == ModelKind::xxx ? multiplier_xxx(plan, z) : multiplier_gaudin(plan, z);
}

/// f(u) = prod (u - z_s)/(u - z_s - a_s), evaluated pointwise.
inline Complex shift_ratio(const ShiftPlan &plan, const std::vector<Complex> &z, Complex u)
{
    Complex f = 1.0;
    for (std::size_t s = 0; s < z.size(); ++s)
        f *= (u - z[s]) / (u - z[s] - static_cast<double>(plan.a[s]));
    return f;
}

/// Worst |C(u) - f(u) C(u-1)| / |C(u)| over probe points.
inline double functional_equation_residual(const ShiftPlan &plan, const std::vector<Complex> &z,
                                           const std::vector<Complex> &probes)
{
    Poly C = multiplier_xxx(plan, z);
    double worst = 0.0;
    for (auto u : probes)
        worst = std::max(worst, std::abs(C(u) - shift_ratio(plan, z, u) * C(u - 1.0)) / std::max(std::abs(C(u)), 1e-300));
    return worst;
}

/// Weights Lambda + a_s; points z_s + a_s (xxx) or z_s (gaudin); target weight shifted by sum a_s.
inline ModelSpec shifted_model(const ModelSpec &spec, const ShiftPlan &plan)
{
    check_plan(plan, spec.z.size());
    ModelSpec out = spec;
    int total = 0;
    for (std::size_t s = 0; s < spec.z.size(); ++s) {
        for (auto &e : out.weights[s].entries)
            e += plan.a[s];
        if (spec.kind == ModelKind::xxx)
            out.z[s] += static_cast<double>(plan.a[s]);
        total += plan.a[s];
    }
    for (auto &m : out.target_weight)
        m += total;
    return out;
}

/// J with e'_{ab} J = J (e_{ab} + a delta_{ab}) for all a, b; unit Frobenius norm.
inline CMatrix site_intertwiner(const SiteModule &base, const SiteModule &shifted, int a)
{
    if (base.dim != shifted.dim)
        throw theorem_violation("shifted site has a different dimension", "comparison-intertwiner");
    const Eigen::Index d = base.dim;
    const int N = base.N;
    CMatrix sys(N * N * d * d, d * d);
    const CMatrix Id = CMatrix::Identity(d, d);
    for (int x = 0; x < N; ++x)
        for (int y = 0; y < N; ++y) {
            CMatrix G = base.gen(x, y);
            if (x == y)
                G += static_cast<double>(a) * Id;
            // vec(G' J - J G) = (I (x) G' - G^T (x) I) vec J
            sys.middleRows((x * N + y) * d * d, d * d) = kron(Id, shifted.gen(x, y)) - kron(G.transpose(), Id);
        }
    CMatrix ns = nullspace_matrix(sys, 1e-9);
    if (ns.cols() != 1)
        throw theorem_violation("site intertwiner is not unique (nullity " + std::to_string(ns.cols()) + ")",
                                "comparison-intertwiner");
    CMatrix J = Eigen::Map<CMatrix>(ns.col(0).data(), d, d);
    return J / J.norm();
}

/// Intertwiner restricted to the weight subspaces: W'^H (J_0 (x) ... (x) J_{n-1}) W.
inline CMatrix subspace_intertwiner(const WeightSubspace &W, const WeightSubspace &Ws, const ShiftPlan &plan)
{
    const auto &M = *W.module;
    const auto &Ms = *Ws.module;
    CMatrix J = CMatrix::Identity(1, 1);
    for (int i = 0; i < M.n(); ++i)
        J = kron(J, site_intertwiner(M.sites[static_cast<std::size_t>(i)], Ms.sites[static_cast<std::size_t>(i)],
                                     plan.a[static_cast<std::size_t>(i)]));
    return Ws.basis.adjoint() * (J * W.basis);
}

namespace detail
{

/// Taylor coefficients c_0..c_order of C at u.
inline std::vector<Complex> poly_taylor(const Poly &C, Complex u, int order)
{
    std::vector<Complex> out;
    Poly d = C;
    double fact = 1.0;
    for (int j = 0; j <= order; ++j) {
        if (j > 0)
            fact *= j;
        out.push_back(d(u) / fact);
        d = d.derivative();
    }
    return out;
}

/// Reciprocal of a power series with nonzero constant term.
inline std::vector<Complex> series_reciprocal(const std::vector<Complex> &c)
{
    std::vector<Complex> r(c.size());
    r[0] = 1.0 / c[0];
    for (std::size_t j = 1; j < c.size(); ++j) {
        Complex acc{};
        for (std::size_t i = 1; i <= j; ++i)
            acc += c[i] * r[j - i];
        r[j] = -acc / c[0];
    }
    return r;
}

/// Operator residual for a function given by jets: jet(u)[i] = h^{(i)}(u)/i! (differential)
/// or values at u - k (difference).
template <typename Jet>
inline double pencil_residual(const OperatorPencil &P, const Jet &jet, Complex u)
{
    CVector acc = CVector::Zero(P.dim());
    double sc = 0.0;
    std::vector<CVector> j = jet(u);
    double fact = 1.0;
    std::vector<double> facts{1.0};
    for (int i = 1; i <= P.N; ++i)
        facts.push_back(fact *= i);
    for (int k = 0; k <= P.N; ++k) {
        CMatrix A = P(k, u);
        CVector term = P.kind == ModelKind::xxx ? j[static_cast<std::size_t>(k)]
                                                : CVector(facts[static_cast<std::size_t>(P.N - k)] *
                                                          j[static_cast<std::size_t>(P.N - k)]);
        CVector at = A * term;
        acc += (k % 2 ? -1.0 : 1.0) * at;
        sc += A.norm() * term.norm();
    }
    return acc.norm() / std::max(sc, 1e-300);
}

/// Jet of an element: values at u - k (xxx) or normalized derivatives at u (gaudin).
inline std::vector<CVector> element_jet(const QuasiExponential &f, int N, Complex u)
{
    std::vector<CVector> out;
    double fact = 1.0;
    for (int k = 0; k <= N; ++k) {
        if (k > 0)
            fact *= k;
        out.push_back(f.kind == ModelKind::xxx ? f(u - static_cast<double>(k)) : CVector(f.derivative(u, k) / fact));
    }
    return out;
}

} // namespace detail

struct ComparisonReport {
    Poly C;
    int base_kernel_dim = 0;
    int shifted_kernel_dim = 0;
    double intertwiner_condition = 0.0;
    double forward_residual = 0.0;
    double converse_residual = 0.0;
    double functional_equation = 0.0; ///< xxx only
    bool ok = false;
};

/// Maps every base frame element g to C J g and tests it against the shifted pencil;
/// maps shifted elements h back to J^{-1} h / C and tests those against the base pencil.
inline ComparisonReport verify_comparison(const ModelSpec &spec, const ShiftPlan &plan, double tol = 1e-7,
                                          bool throw_on_failure = true, std::uint64_t seed = 29)
{
    check_plan(plan, spec.z.size());
    const ModelSpec sh = shifted_model(spec, plan);
    for (const auto &w : sh.weights)
        if (!w.polynomial())
            throw invalid_input_error("shifted weight is not polynomial dominant");
    auto W = weight_subspace(build_module(spec), spec.target_weight);
    auto Ws = weight_subspace(build_module(sh), sh.target_weight);
    if (W.dim() != Ws.dim())
        throw theorem_violation("weight subspaces of base and shifted models differ in dimension",
                                "comparison-dimension");
    auto P = universal_pencil(spec, W);
    auto Ps = universal_pencil(sh, Ws);
    auto F = kernel_frame(P, kernel_plan(spec.kind, spec.twist, spec.target_weight, P.dim()));
    auto Fs = kernel_frame(Ps, kernel_plan(sh.kind, sh.twist, sh.target_weight, Ps.dim()));

    ComparisonReport rep;
    rep.C = multiplier(spec.kind, plan, spec.z);
    rep.base_kernel_dim = static_cast<int>(F.elements.size());
    rep.shifted_kernel_dim = static_cast<int>(Fs.elements.size());
    const CMatrix J = subspace_intertwiner(W, Ws, plan);
    rep.intertwiner_condition = condition_number(J);
    Eigen::PartialPivLU<CMatrix> Jlu(J);

    // probes avoid both pole lattices, hence all roots of C as well
    auto poles = detail::pencil_poles(P);
    for (auto p : detail::pencil_poles(Ps))
        poles.push_back(p);
    auto probes = detail::lattice_free_points(poles, 10, seed);
    if (spec.kind == ModelKind::xxx)
        rep.functional_equation = functional_equation_residual(plan, spec.z, probes);

    const int N = spec.N;
    const Poly &C = rep.C;
    for (const auto &g : F.elements) {
        auto jet = [&](Complex u) {
            auto gj = detail::element_jet(g, N, u);
            std::vector<CVector> out;
            if (spec.kind == ModelKind::xxx) {
                for (int k = 0; k <= N; ++k)
                    out.push_back(C(u - static_cast<double>(k)) * (J * gj[static_cast<std::size_t>(k)]));
            } else {
                auto ct = detail::poly_taylor(C, u, N);
                for (int k = 0; k <= N; ++k) {
                    CVector acc = CVector::Zero(J.rows());
                    for (int i = 0; i <= k; ++i)
                        acc += ct[static_cast<std::size_t>(k - i)] * gj[static_cast<std::size_t>(i)];
                    out.push_back(J * acc);
                }
            }
            return out;
        };
        for (auto u : probes)
            rep.forward_residual = std::max(rep.forward_residual, detail::pencil_residual(Ps, jet, u));
    }
    for (const auto &h : Fs.elements) {
        auto jet = [&](Complex u) {
            auto hj = detail::element_jet(h, N, u);
            std::vector<CVector> out;
            if (spec.kind == ModelKind::xxx) {
                for (int k = 0; k <= N; ++k)
                    out.push_back(CVector(Jlu.solve(hj[static_cast<std::size_t>(k)])) / C(u - static_cast<double>(k)));
            } else {
                auto rt = detail::series_reciprocal(detail::poly_taylor(C, u, N));
                for (int k = 0; k <= N; ++k) {
                    CVector acc = CVector::Zero(J.rows());
                    for (int i = 0; i <= k; ++i)
                        acc += rt[static_cast<std::size_t>(k - i)] * hj[static_cast<std::size_t>(i)];
                    out.push_back(Jlu.solve(acc));
                }
            }
            return out;
        };
        for (auto u : probes)
            rep.converse_residual = std::max(rep.converse_residual, detail::pencil_residual(P, jet, u));
    }
    rep.ok = rep.base_kernel_dim == rep.shifted_kernel_dim && rep.forward_residual <= tol &&
             rep.converse_residual <= tol && rep.functional_equation <= 1e-12;
    if (throw_on_failure && !rep.ok)
        throw theorem_violation("comparison residual forward " + std::to_string(rep.forward_residual) + " converse " +
                                    std::to_string(rep.converse_residual),
                                "comparison");
    return rep;
}

} // namespace qexp

#endif
