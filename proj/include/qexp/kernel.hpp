#ifndef QEXP_KERNEL_HPP
#define QEXP_KERNEL_HPP

// Quasi-exponential kernels of operator pencils by collocation, degree census,
// Casoratian / Wronskian certificates, local data at S_i and z_i, and scalar
// (fundamental) pencils.

#include <algorithm>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "gaudin_op.hpp"

namespace qexp
{

/// base^u p(u) (difference) or e^{base u} p(u) (differential), p stored in the
/// scaled variable w = (u - center)/scale.
struct QuasiExponential {
    ModelKind kind = ModelKind::xxx;
    Complex base{1.0};
    Complex log_base{}; ///< principal branch, xxx only
    Complex center{};
    double scale = 1.0;
    std::vector<CVector> scaled; ///< coefficient of w^j

    Eigen::Index dim() const { return scaled.empty() ? 0 : scaled.front().size(); }

    int degree(double tol = 1e-8) const
    {
        double mx = 0.0;
        for (const auto &c : scaled)
            mx = std::max(mx, c.norm());
        for (int j = static_cast<int>(scaled.size()) - 1; j >= 0; --j)
            if (scaled[static_cast<std::size_t>(j)].norm() > tol * mx)
                return j;
        return -1;
    }

    /// Monomial coefficients v_0..v_d of u^{d-j}, d = degree().
    std::vector<CVector> coefficients() const
    {
        const int d = degree();
        std::vector<CVector> asc(scaled.begin(), scaled.begin() + (d + 1));
        auto mono = detail::rescale_to_monomial(asc, center, scale, CVector(CVector::Zero(dim())));
        std::reverse(mono.begin(), mono.end());
        return mono;
    }

    /// order-th derivative of p at u.
    CVector poly(Complex u, int order = 0) const
    {
        const Complex w = (u - center) / scale;
        CVector r = CVector::Zero(dim());
        for (int j = static_cast<int>(scaled.size()) - 1; j >= order; --j) {
            double ff = 1.0;
            for (int i = 0; i < order; ++i)
                ff *= j - i;
            r += ff * std::pow(w, j - order) * scaled[static_cast<std::size_t>(j)];
        }
        return r / std::pow(scale, order);
    }

    Complex exp_factor(Complex u) const
    {
        return kind == ModelKind::xxx ? std::exp(u * log_base) : std::exp(base * u);
    }

    CVector operator()(Complex u) const { return exp_factor(u) * poly(u); }

    /// order-th derivative of the whole function (differential setting).
    CVector derivative(Complex u, int order) const
    {
        CVector r = CVector::Zero(dim());
        for (int i = 0; i <= order; ++i)
            r += binomial(order, i) * std::pow(base, order - i) * poly(u, i);
        return exp_factor(u) * r;
    }
};

namespace detail
{

/// Poles of the pencil coefficients.
inline std::vector<Complex> pencil_poles(const OperatorPencil &P)
{
    std::vector<Complex> out;
    for (auto zs : P.z)
        for (int j = 0; j < (P.kind == ModelKind::xxx ? P.N : 1); ++j)
            out.push_back(zs + static_cast<double>(j));
    return out;
}

/// Probe points off the pole lattice (clearance 0.3 from every pole + integer shift).
inline std::vector<Complex> lattice_free_points(const std::vector<Complex> &poles, int count, std::uint64_t seed,
                                                double clearance = 0.3)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    Complex c{};
    for (auto p : poles)
        c += p;
    if (!poles.empty())
        c /= static_cast<double>(poles.size());
    double R = 2.0;
    for (auto p : poles)
        R = std::max(R, std::abs(p - c) + 1.0);
    std::vector<Complex> out;
    while (static_cast<int>(out.size()) < count) {
        Complex u = c + R * Complex(U(rng), U(rng));
        bool ok = true;
        for (auto p : poles) {
            Complex d = u - p;
            double frac = d.real() - std::round(d.real());
            if (std::abs(Complex(frac, d.imag())) < clearance)
                ok = false;
        }
        if (ok)
            out.push_back(u);
    }
    return out;
}

/// Block row of the operator applied to base-stripped ansatz columns w^j e_c.
inline CMatrix collocation_block(const OperatorPencil &P, Complex base, int d, Complex u, Complex center, double scale)
{
    const Eigen::Index D = P.dim();
    const int N = P.N;
    CMatrix row = CMatrix::Zero(D, (d + 1) * D);
    for (int k = 0; k <= N; ++k) {
        const CMatrix A = P(k, u);
        const double sg = k % 2 ? -1.0 : 1.0;
        if (P.kind == ModelKind::xxx) {
            const Complex bk = std::pow(base, -k);
            const Complex w = (u - static_cast<double>(k) - center) / scale;
            Complex wp = 1.0;
            for (int j = 0; j <= d; ++j) {
                row.middleCols(j * D, D) += (sg * bk * wp) * A;
                wp *= w;
            }
        } else {
            const int ord = N - k;
            const Complex w = (u - center) / scale;
            for (int j = 0; j <= d; ++j) {
                Complex c{};
                for (int i = 0; i <= std::min(ord, j); ++i) {
                    double ff = 1.0;
                    for (int t = 0; t < i; ++t)
                        ff *= j - t;
                    c += binomial(ord, i) * std::pow(base, ord - i) * ff * std::pow(w, j - i) / std::pow(scale, i);
                }
                row.middleCols(j * D, D) += (sg * c) * A;
            }
        }
    }
    return row;
}

struct Collocation {
    std::vector<Complex> xs;
    Complex center;
    double scale;
};

inline Collocation collocation_points(const OperatorPencil &P, int d, int extra_columns = 0)
{
    auto poles = pencil_poles(P);
    if (poles.empty())
        poles.push_back(0.0);
    const int D = static_cast<int>(P.dim());
    const int n = static_cast<int>(P.z.size());
    const int count = std::max((d + 1) * D + 10 + extra_columns, n * P.N + d + 10);
    Collocation c;
    c.xs = circle_abscissas(poles, count, 1.0, 0.23);
    c.center = 0.0;
    for (auto x : c.xs)
        c.center += x;
    c.center /= static_cast<double>(c.xs.size());
    c.scale = std::abs(c.xs.front() - c.center);
    return c;
}

} // namespace detail

/// Result of one per-base solve: an element basis adapted to the degree filtration.
struct BaseKernel {
    Complex base;
    int degree_bound = 0;
    std::vector<QuasiExponential> elements;
    std::vector<int> degrees; ///< leading degree of each element (ascending)
    double singular_gap = 0.0; ///< smallest kept / largest null singular value ratio
};

/// Full polynomial-times-exponential kernel of P for one base, degree <= d.
inline BaseKernel solve_quasiexp(const OperatorPencil &P, Complex base, int d, double null_tol = 1e-9)
{
    if (P.kind == ModelKind::xxx && base == Complex{})
        throw invalid_input_error("solve_quasiexp: base must be nonzero");
    if (d < 0)
        throw invalid_input_error("solve_quasiexp: negative degree bound");
    const Eigen::Index D = P.dim();
    auto col = detail::collocation_points(P, d);
    CMatrix M(static_cast<Eigen::Index>(col.xs.size()) * D, (d + 1) * D);
    for (std::size_t i = 0; i < col.xs.size(); ++i) {
        CMatrix blk = detail::collocation_block(P, base, d, col.xs[i], col.center, col.scale);
        double nb = blk.norm();
        M.middleRows(static_cast<Eigen::Index>(i) * D, D) = nb > 0 ? CMatrix(blk / nb) : blk;
    }
    Eigen::BDCSVD<CMatrix> svd(M, Eigen::ComputeFullV);
    const auto &s = svd.singularValues();
    const Eigen::Index ncol = M.cols();
    const double smax = s.size() ? s(0) : 0.0;
    Eigen::Index rank = 0;
    for (Eigen::Index i = 0; i < s.size(); ++i)
        if (s(i) > null_tol * smax)
            ++rank;
    BaseKernel out;
    out.base = base;
    out.degree_bound = d;
    const Eigen::Index nullity = ncol - rank;
    if (rank > 0 && rank < s.size())
        out.singular_gap = s(rank) / s(rank - 1);
    else if (rank > 0 && nullity > 0)
        out.singular_gap = 0.0;
    if (nullity == 0)
        return out;
    CMatrix Nb = svd.matrixV().rightCols(nullity);

    // filtration V_e = {x in span Nb : blocks above e vanish}
    CMatrix prev = CMatrix::Zero(ncol, 0);
    for (int e = 0; e <= d; ++e) {
        CMatrix Ve;
        if (e == d) {
            Ve = Nb;
        } else {
            // Nb is orthonormal, so an absolute threshold is meaningful here
            CMatrix top = Nb.bottomRows((d - e) * D);
            Eigen::BDCSVD<CMatrix> ts(top, Eigen::ComputeFullV);
            Eigen::Index r = 0;
            for (Eigen::Index j = 0; j < ts.singularValues().size(); ++j)
                if (ts.singularValues()(j) > 1e-7)
                    ++r;
            Ve = Nb * ts.matrixV().rightCols(nullity - r);
        }
        // orthonormal complement of prev inside Ve
        if (Ve.cols() == 0)
            continue;
        CMatrix proj = Ve - prev * (prev.adjoint() * Ve);
        Eigen::BDCSVD<CMatrix> ps(proj, Eigen::ComputeThinU);
        const auto &sv = ps.singularValues();
        CMatrix add(ncol, 0);
        for (Eigen::Index j = 0; j < sv.size(); ++j)
            if (sv(j) > 1e-6) {
                add.conservativeResize(Eigen::NoChange, add.cols() + 1);
                add.col(add.cols() - 1) = ps.matrixU().col(j);
            }
        for (Eigen::Index j = 0; j < add.cols(); ++j) {
            QuasiExponential q;
            q.kind = P.kind;
            q.base = base;
            q.log_base = P.kind == ModelKind::xxx ? principal_log(base) : Complex{};
            q.center = col.center;
            q.scale = col.scale;
            for (int b = 0; b <= e; ++b)
                q.scaled.push_back(add.col(j).segment(b * D, D));
            out.elements.push_back(std::move(q));
            out.degrees.push_back(e);
        }
        CMatrix np(ncol, prev.cols() + add.cols());
        np << prev, add;
        prev = np;
    }
    return out;
}

/// Scaled operator residual of one element at the given probes.
inline double element_residual(const OperatorPencil &P, const QuasiExponential &f, const std::vector<Complex> &probes)
{
    double worst = 0.0;
    for (auto u : probes) {
        CVector acc = CVector::Zero(P.dim());
        double sc = 0.0;
        for (int k = 0; k <= P.N; ++k) {
            CMatrix A = P(k, u);
            const double sg = k % 2 ? -1.0 : 1.0;
            CVector term;
            if (P.kind == ModelKind::xxx)
                term = std::pow(f.base, -k) * f.poly(u - static_cast<double>(k));
            else {
                const int ord = P.N - k;
                term = CVector::Zero(P.dim());
                for (int i = 0; i <= ord; ++i)
                    term += binomial(ord, i) * std::pow(f.base, ord - i) * f.poly(u, i);
            }
            CVector at = A * term;
            acc += sg * at;
            sc += A.norm() * term.norm();
        }
        worst = std::max(worst, acc.norm() / std::max(sc, 1e-300));
    }
    return worst;
}

inline double frame_residual(const OperatorPencil &P, const std::vector<QuasiExponential> &fs, std::uint64_t seed = 101)
{
    auto probes = detail::lattice_free_points(detail::pencil_poles(P), 10, seed);
    double worst = 0.0;
    for (const auto &f : fs)
        worst = std::max(worst, element_residual(P, f, probes));
    return worst;
}

/// Bases with the predicted leading degrees of the kernel elements.
struct KernelPlan {
    std::vector<Complex> bases;
    std::vector<std::vector<int>> predicted; ///< per base, multiset of degrees
    bool certified = true;                   ///< false when twist eigenvalues coincide
    bool singular_case = false;
};

/// Plan for a diagonal twist with pencil dimension D. `singular` selects the
/// trivial-twist polynomial case (Q = 1 or K = 0 on a singular subspace).
inline KernelPlan kernel_plan(ModelKind kind, const CMatrix &twist, const std::vector<int> &m, Eigen::Index D,
                              bool singular = false)
{
    const int N = static_cast<int>(m.size());
    KernelPlan plan;
    if (singular) {
        plan.singular_case = true;
        plan.bases.push_back(kind == ModelKind::xxx ? Complex(1.0) : Complex(0.0));
        std::vector<int> deg;
        for (int i = 1; i <= N; ++i)
            for (Eigen::Index r = 0; r < D; ++r)
                deg.push_back(m[static_cast<std::size_t>(i - 1)] + N - i);
        std::sort(deg.begin(), deg.end());
        plan.predicted.push_back(deg);
        return plan;
    }
    for (Eigen::Index a = 0; a < twist.rows(); ++a)
        for (Eigen::Index b = 0; b < twist.cols(); ++b)
            if (a != b && twist(a, b) != Complex{})
                throw precondition_error("kernel_plan: twist must be diagonal");
    std::vector<int> group(static_cast<std::size_t>(N), -1);
    for (int i = 0; i < N; ++i) {
        if (group[static_cast<std::size_t>(i)] >= 0)
            continue;
        const int g = static_cast<int>(plan.bases.size());
        plan.bases.push_back(twist(i, i));
        int total = 0, members = 0;
        for (int j = i; j < N; ++j)
            if (std::abs(twist(j, j) - twist(i, i)) <= 1e-12 * (1.0 + std::abs(twist(i, i)))) {
                group[static_cast<std::size_t>(j)] = g;
                total += m[static_cast<std::size_t>(j)];
                ++members;
            }
        std::vector<int> deg;
        if (members == 1) {
            deg.assign(static_cast<std::size_t>(D), m[static_cast<std::size_t>(i)]);
        } else {
            plan.certified = false;
            deg.assign(static_cast<std::size_t>(D), total + members - 1); // merged budget, not a prediction
        }
        plan.predicted.push_back(deg);
    }
    return plan;
}

struct Certificate {
    CMatrix matrix;
    double condition = 0.0;
    bool ok = false;
};

struct KernelFrame {
    ModelKind kind = ModelKind::xxx;
    int N = 0;
    Eigen::Index dim = 0;
    std::vector<QuasiExponential> elements;
    std::vector<BaseKernel> per_base;
    KernelPlan plan;
    bool census_ok = true;
    double max_residual = 0.0;
    std::vector<std::string> notes;
};

/// Casoratian f_j(u0 - k) (difference) or Wronskian f_j^{(k)}(u0) (differential),
/// k = 0..N-1, with normalized columns.
inline Certificate casorati_certificate(const KernelFrame &F, Complex u0, double cond_limit = 1e8)
{
    const Eigen::Index D = F.dim;
    const auto M = static_cast<Eigen::Index>(F.elements.size());
    Certificate c;
    c.matrix = CMatrix::Zero(F.N * D, M);
    for (Eigen::Index j = 0; j < M; ++j) {
        const auto &f = F.elements[static_cast<std::size_t>(j)];
        for (int k = 0; k < F.N; ++k)
            c.matrix.block(k * D, j, D, 1) =
                F.kind == ModelKind::xxx ? f(u0 - static_cast<double>(k)) : f.derivative(u0, k);
        double nn = c.matrix.col(j).norm();
        if (nn > 0)
            c.matrix.col(j) /= nn;
    }
    c.condition = c.matrix.rows() == c.matrix.cols() ? condition_number(c.matrix) : std::numeric_limits<double>::infinity();
    c.ok = std::isfinite(c.condition) && c.condition < cond_limit;
    return c;
}

/// Worst certificate over random probes; throws independence_failure when singular.
inline Certificate certify(const KernelFrame &F, const OperatorPencil &P, int probes = 3, std::uint64_t seed = 17,
                           double cond_limit = 1e8)
{
    Certificate worst;
    worst.ok = true;
    for (auto u0 : detail::lattice_free_points(detail::pencil_poles(P), probes, seed)) {
        auto c = casorati_certificate(F, u0, cond_limit);
        if (!worst.matrix.size() || c.condition > worst.condition)
            worst = c;
    }
    if (!worst.ok)
        throw independence_failure("frame certificate condition number " + std::to_string(worst.condition));
    return worst;
}

/// Solves every base of the plan, checks the degree census and assembles a frame.
inline KernelFrame kernel_frame(const OperatorPencil &P, const KernelPlan &plan, bool throw_on_census = true)
{
    KernelFrame F;
    F.kind = P.kind;
    F.N = P.N;
    F.dim = P.dim();
    F.plan = plan;
    for (std::size_t b = 0; b < plan.bases.size(); ++b) {
        const auto &pred = plan.predicted[b];
        const int dmax = pred.empty() ? 0 : *std::max_element(pred.begin(), pred.end());
        auto bk = solve_quasiexp(P, plan.bases[b], dmax + 2);
        auto got = bk.degrees;
        std::sort(got.begin(), got.end());
        if (plan.certified && got != pred) {
            F.census_ok = false;
            std::string msg = "degree census mismatch at base " + std::to_string(plan.bases[b].real()) + "+" +
                              std::to_string(plan.bases[b].imag()) + "i: got {";
            for (int g : got)
                msg += std::to_string(g) + " ";
            msg += "}";
            F.notes.push_back(msg);
        }
        for (const auto &e : bk.elements)
            F.elements.push_back(e);
        F.per_base.push_back(std::move(bk));
    }
    F.max_residual = frame_residual(P, F.elements);
    if (throw_on_census && !F.census_ok)
        throw theorem_violation(F.notes.front(), "kernel-degree-census");
    return F;
}

/// Joint ansatz over several bases; each joint null vector is split per base and
/// every part re-tested as a single-base kernel element.
struct SplitReport {
    int joint_nullity = 0;
    int per_base_total = 0;
    double max_part_residual = 0.0;
};

inline SplitReport mixed_base_split(const OperatorPencil &P, const std::vector<Complex> &bases, int d,
                                    std::uint64_t seed = 5)
{
    const Eigen::Index D = P.dim();
    const auto B = static_cast<Eigen::Index>(bases.size());
    const Eigen::Index per = (d + 1) * D;
    auto col = detail::collocation_points(P, d, static_cast<int>((B - 1) * per));
    CMatrix M(static_cast<Eigen::Index>(col.xs.size()) * D, B * per);
    for (std::size_t i = 0; i < col.xs.size(); ++i) {
        const Complex u = col.xs[i];
        CMatrix rowblk(D, B * per);
        for (Eigen::Index b = 0; b < B; ++b) {
            QuasiExponential probe;
            probe.kind = P.kind;
            probe.base = bases[static_cast<std::size_t>(b)];
            probe.log_base = P.kind == ModelKind::xxx ? principal_log(probe.base) : Complex{};
            rowblk.middleCols(b * per, per) =
                probe.exp_factor(u) * detail::collocation_block(P, probe.base, d, u, col.center, col.scale);
        }
        double nb = rowblk.norm();
        M.middleRows(static_cast<Eigen::Index>(i) * D, D) = nb > 0 ? CMatrix(rowblk / nb) : rowblk;
    }
    CMatrix Nb = nullspace_matrix(M, 1e-9);
    SplitReport r;
    r.joint_nullity = static_cast<int>(Nb.cols());
    for (const auto &b : bases)
        r.per_base_total += static_cast<int>(solve_quasiexp(P, b, d).elements.size());
    auto probes = detail::lattice_free_points(detail::pencil_poles(P), 10, seed);
    for (Eigen::Index j = 0; j < Nb.cols(); ++j)
        for (Eigen::Index b = 0; b < B; ++b) {
            CVector part = Nb.col(j).segment(b * per, per);
            if (part.norm() < 1e-10)
                continue;
            QuasiExponential q;
            q.kind = P.kind;
            q.base = bases[static_cast<std::size_t>(b)];
            q.log_base = P.kind == ModelKind::xxx ? principal_log(q.base) : Complex{};
            q.center = col.center;
            q.scale = col.scale;
            for (int k = 0; k <= d; ++k)
                q.scaled.push_back(part.segment(k * D, D) / part.norm());
            r.max_part_residual = std::max(r.max_part_residual, element_residual(P, q, probes));
        }
    return r;
}

// ---------------------------------------------------------------------------
// Local data
// ---------------------------------------------------------------------------

/// S_i as listed: v_N at z_i - 1, v_j at z_i - Lambda_j - N + j - 1 for j < N.
inline std::vector<Complex> s_points(const ModelSpec &spec, int i)
{
    const int N = spec.N;
    const auto &w = spec.weights[static_cast<std::size_t>(i)];
    std::vector<Complex> pts(static_cast<std::size_t>(N));
    const Complex zi = spec.z[static_cast<std::size_t>(i)];
    pts[static_cast<std::size_t>(N - 1)] = zi - 1.0;
    for (int j = 1; j < N; ++j)
        pts[static_cast<std::size_t>(j - 1)] =
            zi - static_cast<double>(w.entries[static_cast<std::size_t>(j - 1)] + N - j + 1);
    return pts;
}

struct LocalDataS {
    int site = 0;
    std::vector<Complex> points; ///< index j-1 holds the point of v_j
    CMatrix evaluation;
    double condition = 0.0;
    bool collision = false;
    double cascade_max = 0.0; ///< worst relative |f(z_i - k)| in the vanishing cascade
};

inline LocalDataS local_data_xxx(const KernelFrame &F, const ModelSpec &spec, int i, std::uint64_t seed = 3)
{
    if (spec.kind != ModelKind::xxx)
        throw invalid_input_error("local_data_xxx: model is not of xxx kind");
    const Complex zi = spec.z[static_cast<std::size_t>(i)];
    for (int j = 0; j < spec.n(); ++j) {
        if (j == i)
            continue;
        Complex d = zi - spec.z[static_cast<std::size_t>(j)];
        if (std::abs(d.imag()) < 1e-9 && std::abs(d.real() - std::round(d.real())) < 1e-9)
            throw precondition_error("local data: z_i - z_j is an integer");
    }
    const auto &w = spec.weights[static_cast<std::size_t>(i)];
    if (w.entries.back() != 0)
        throw precondition_error("local data: last weight entry must vanish");
    const int N = spec.N;
    const Eigen::Index D = F.dim;
    LocalDataS L;
    L.site = i;
    L.points = s_points(spec, i);
    for (std::size_t a = 0; a < L.points.size(); ++a)
        for (std::size_t b = a + 1; b < L.points.size(); ++b)
            if (std::abs(L.points[a] - L.points[b]) < 1e-12)
                L.collision = true;
    const auto M = static_cast<Eigen::Index>(F.elements.size());
    L.evaluation = CMatrix::Zero(N * D, M);
    for (Eigen::Index c = 0; c < M; ++c)
        for (int j = 0; j < N; ++j)
            L.evaluation.block(j * D, c, D, 1) = F.elements[static_cast<std::size_t>(c)](L.points[static_cast<std::size_t>(j)]);
    CMatrix En = L.evaluation;
    for (Eigen::Index c = 0; c < M; ++c)
        En.col(c) /= std::max(En.col(c).norm(), 1e-300);
    L.condition = En.rows() == En.cols() ? condition_number(En) : std::numeric_limits<double>::infinity();
    if (!std::isfinite(L.condition) || L.condition > 1e10)
        throw theorem_violation("evaluation map at S_i is not invertible", "local-evaluation");

    // vanishing cascade: v_N = ... = v_j = 0 forces zeros at z_i - k
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> G;
    Eigen::PartialPivLU<CMatrix> lu(L.evaluation);
    for (int j = 2; j <= N; ++j) {
        CVector target = CVector::Zero(N * D);
        for (int t = 1; t < j; ++t)
            for (Eigen::Index r = 0; r < D; ++r)
                target((t - 1) * D + r) = Complex(G(rng), G(rng));
        CVector c = lu.solve(target);
        auto f = [&](Complex u) {
            CVector v = CVector::Zero(D);
            for (Eigen::Index e = 0; e < M; ++e)
                v += c(e) * F.elements[static_cast<std::size_t>(e)](u);
            return v;
        };
        double ref = target.norm();
        const int kmax = w.entries[static_cast<std::size_t>(j - 2)] + N - j + 1;
        for (int k = 1; k <= kmax; ++k)
            L.cascade_max = std::max(L.cascade_max, f(zi - static_cast<double>(k)).norm() / ref);
    }
    return L;
}

struct LocalExponents {
    int site = 0;
    std::vector<int> taylor;          ///< exponent multiset from the Taylor rank filtration
    std::vector<int> expected;        ///< Lambda_j + N - j, each dim times
    std::vector<double> fitted;       ///< log-slope estimate per distinct exponent
    std::vector<int> fitted_for;
    double worst_fit_error = 0.0;
};

inline LocalExponents local_exponents_gaudin(const KernelFrame &F, const ModelSpec &spec, int r)
{
    if (F.kind != ModelKind::gaudin)
        throw invalid_input_error("local_exponents_gaudin: frame is not differential");
    const int N = spec.N;
    const Eigen::Index D = F.dim;
    const auto &w = spec.weights[static_cast<std::size_t>(r)];
    const Complex zr = spec.z[static_cast<std::size_t>(r)];
    LocalExponents out;
    out.site = r;
    for (int j = 1; j <= N; ++j)
        for (Eigen::Index t = 0; t < D; ++t)
            out.expected.push_back(w.entries[static_cast<std::size_t>(j - 1)] + N - j);
    std::sort(out.expected.begin(), out.expected.end());
    const int maxo = out.expected.back() + 1;
    const auto M = static_cast<Eigen::Index>(F.elements.size());
    // Taylor coefficients at z_r of e^{lambda(u - z_r)} p(u)
    CMatrix T = CMatrix::Zero((maxo + 1) * D, M);
    std::vector<double> colnorm(static_cast<std::size_t>(M), 1.0);
    for (Eigen::Index c = 0; c < M; ++c) {
        const auto &f = F.elements[static_cast<std::size_t>(c)];
        std::vector<CVector> pd;
        for (int b = 0; b <= maxo; ++b)
            pd.push_back(f.poly(zr, b));
        for (int o = 0; o <= maxo; ++o) {
            CVector acc = CVector::Zero(D);
            double fa = 1.0;
            for (int a = 0; a <= o; ++a) {
                if (a > 0)
                    fa *= a;
                double fb = 1.0;
                for (int t = 2; t <= o - a; ++t)
                    fb *= t;
                acc += std::pow(f.base, a) / fa * pd[static_cast<std::size_t>(o - a)] / fb;
            }
            T.block(o * D, c, D, 1) = acc;
        }
        double nn = T.col(c).norm();
        if (nn > 0)
            T.col(c) /= nn;
        colnorm[static_cast<std::size_t>(c)] = nn > 0 ? nn : 1.0;
    }
    // columns of T are unit vectors, so rank is judged on an absolute scale
    auto abs_null = [](const CMatrix &A) -> CMatrix {
        Eigen::BDCSVD<CMatrix> sv(A, Eigen::ComputeFullV);
        Eigen::Index r = 0;
        for (Eigen::Index j = 0; j < sv.singularValues().size(); ++j)
            if (sv.singularValues()(j) > 1e-8)
                ++r;
        return sv.matrixV().rightCols(A.cols() - r);
    };
    auto vanish_dim = [&](int e) -> Eigen::Index { // dim of span vanishing to order >= e
        if (e == 0)
            return M;
        return abs_null(T.topRows(e * D)).cols();
    };
    std::vector<Eigen::Index> dims;
    for (int e = 0; e <= maxo + 1; ++e)
        dims.push_back(e <= maxo ? vanish_dim(e) : 0);
    for (int e = 0; e <= maxo; ++e)
        for (Eigen::Index t = 0; t < dims[static_cast<std::size_t>(e)] - dims[static_cast<std::size_t>(e + 1)]; ++t)
            out.taylor.push_back(e);

    // log-slope fit on one element of each exact order
    const double radii[3] = {1e-2, 5e-3, 2.5e-3};
    std::vector<int> distinct = out.expected;
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    for (int e : distinct) {
        CMatrix Ke = e == 0 ? CMatrix(CMatrix::Identity(M, M)) : abs_null(T.topRows(e * D));
        CMatrix Ke1 = abs_null(T.topRows((e + 1) * D));
        if (Ke.cols() == 0)
            continue;
        CMatrix proj = Ke1.cols() ? CMatrix(Ke - Ke1 * (Ke1.adjoint() * Ke)) : Ke;
        Eigen::BDCSVD<CMatrix> ps(proj, Eigen::ComputeThinU);
        if (ps.singularValues().size() == 0 || ps.singularValues()(0) < 1e-8)
            continue;
        CVector c = ps.matrixU().col(0);
        double logF[3];
        for (int k = 0; k < 3; ++k) {
            double acc = 0.0;
            for (int a = 0; a < 8; ++a) {
                Complex u = zr + radii[k] * std::polar(1.0, 2.0 * std::numbers::pi * (a + 0.1) / 8.0);
                CVector v = CVector::Zero(D);
                for (Eigen::Index t = 0; t < M; ++t) {
                    const auto &f = F.elements[static_cast<std::size_t>(t)];
                    v += c(t) / colnorm[static_cast<std::size_t>(t)] * f(u) / f.exp_factor(zr);
                }
                acc += v.norm();
            }
            logF[k] = std::log(acc / 8.0);
        }
        double s12 = (logF[0] - logF[1]) / std::log(radii[0] / radii[1]);
        double s23 = (logF[1] - logF[2]) / std::log(radii[1] / radii[2]);
        double s0 = 2.0 * s23 - s12;
        out.fitted.push_back(s0);
        out.fitted_for.push_back(e);
        out.worst_fit_error = std::max(out.worst_fit_error, std::abs(s0 - e));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Fundamental (scalar) operators
// ---------------------------------------------------------------------------

/// Scalar pencil v^H A_k v / v^H v for a joint eigenvector v of the pencil.
inline OperatorPencil scalar_pencil(const OperatorPencil &P, const CVector &v)
{
    OperatorPencil S;
    S.kind = P.kind;
    S.N = P.N;
    S.z = P.z;
    const Complex nn = v.squaredNorm();
    for (const auto &a : P.A) {
        MatRatFn f;
        f.denominator = a.denominator;
        for (const auto &c : a.numerator.coeffs) {
            CMatrix s(1, 1);
            s(0, 0) = v.dot(c * v) / nn;
            f.numerator.coeffs.push_back(s);
        }
        S.A.push_back(std::move(f));
    }
    return S;
}

/// Scalar pencil from pointwise eigenvalue functions, fitted against the pencil denominators.
template <typename Lambda>
inline OperatorPencil scalar_pencil_from(ModelKind kind, int N, const std::vector<Complex> &z, const Lambda &lam)
{
    const int n = static_cast<int>(z.size());
    auto xs = pencil_abscissas(kind, z, N, n * N + 5);
    OperatorPencil S;
    S.kind = kind;
    S.N = N;
    S.z = z;
    std::vector<std::vector<Complex>> vals;
    for (auto x : xs)
        vals.push_back(lam(x));
    for (int k = 0; k <= N; ++k) {
        Poly den = pencil_denominator(kind, z, k);
        std::vector<CMatrix> v;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            CMatrix s(1, 1);
            s(0, 0) = vals[i][static_cast<std::size_t>(k)] * den(xs[i]);
            v.push_back(s);
        }
        MatRatFn f;
        f.denominator = den;
        f.numerator = matrix_interpolate(xs, v, n * k, 1e-7);
        S.A.push_back(std::move(f));
    }
    return S;
}

} // namespace qexp

#endif
