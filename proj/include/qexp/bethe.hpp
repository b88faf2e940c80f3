#ifndef QEXP_BETHE_HPP
#define QEXP_BETHE_HPP

// Bethe ansatz equations for vector tensor products, q -> 0 seeds, homotopy
// continuation, the XXX weight function, eigenvalue functions and the census.

#include <algorithm>
#include <cstdlib>
#include <numbers>
#include <numeric>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "gaudin_op.hpp"

namespace qexp
{

/// t[a][j] for level a = 1..N-1 stored at index a-1.
struct BetheVariables {
    std::vector<std::vector<Complex>> t;

    std::vector<int> l() const
    {
        std::vector<int> r;
        for (const auto &lv : t)
            r.push_back(static_cast<int>(lv.size()));
        return r;
    }
    int count() const
    {
        int c = 0;
        for (const auto &lv : t)
            c += static_cast<int>(lv.size());
        return c;
    }
    CVector flat() const
    {
        CVector x(count());
        Eigen::Index k = 0;
        for (const auto &lv : t)
            for (auto v : lv)
                x(k++) = v;
        return x;
    }
    static BetheVariables shaped(const std::vector<int> &l, const CVector &x)
    {
        BetheVariables b;
        Eigen::Index k = 0;
        for (int la : l) {
            std::vector<Complex> lv;
            for (int j = 0; j < la; ++j)
                lv.push_back(x(k++));
            b.t.push_back(lv);
        }
        return b;
    }
    /// Minimum separation among same-level and adjacent-level variables.
    double separation() const
    {
        double s = std::numeric_limits<double>::infinity();
        for (std::size_t a = 0; a < t.size(); ++a) {
            for (std::size_t i = 0; i < t[a].size(); ++i) {
                for (std::size_t j = i + 1; j < t[a].size(); ++j)
                    s = std::min(s, std::abs(t[a][i] - t[a][j]));
                if (a + 1 < t.size())
                    for (auto w : t[a + 1])
                        s = std::min(s, std::abs(t[a][i] - w));
            }
        }
        return s;
    }
    bool off_diagonal(double tol = 1e-6) const { return separation() >= tol; }
};

/// Parameters entering the Bethe equations: points and diagonal twist.
struct BetheParams {
    std::vector<Complex> z;
    std::vector<Complex> twist; ///< Q_a or K_a
};

inline BetheParams params_of(const ModelSpec &spec)
{
    if (!spec.twist_is_diagonal())
        throw precondition_error("Bethe ansatz requires a diagonal twist");
    for (const auto &w : spec.weights)
        if (!w.is_vector())
            throw precondition_error("Bethe ansatz is implemented for vector tensor products");
    return {spec.z, spec.twist_diagonal()};
}

namespace detail
{

/// Linear factor x_p - y + c where y is x_q (q_var) or z_q, or absent (q < 0).
struct LinFactor {
    int p;
    int q;
    bool q_var;
    double c;
};

struct XxxEquation {
    int a; ///< 1-based level
    std::vector<LinFactor> lhs, rhs;
};

/// Offsets of each level inside the flat variable vector.
inline std::vector<int> level_offsets(const std::vector<int> &l)
{
    std::vector<int> off{0};
    for (int la : l)
        off.push_back(off.back() + la);
    return off;
}

inline std::vector<XxxEquation> xxx_equations(int N, int n, const std::vector<int> &l)
{
    auto off = level_offsets(l);
    std::vector<XxxEquation> eqs;
    for (int a = 1; a <= N - 1; ++a) {
        const int la = l[static_cast<std::size_t>(a - 1)];
        for (int j = 0; j < la; ++j) {
            XxxEquation e;
            e.a = a;
            const int p = off[static_cast<std::size_t>(a - 1)] + j;
            // previous level (points z for a = 1)
            if (a == 1) {
                for (int s = 0; s < n; ++s) {
                    e.lhs.push_back({p, s, false, 1.0});
                    e.rhs.push_back({p, s, false, 0.0});
                }
            } else {
                for (int jp = 0; jp < l[static_cast<std::size_t>(a - 2)]; ++jp) {
                    int q = off[static_cast<std::size_t>(a - 2)] + jp;
                    e.lhs.push_back({p, q, true, 1.0});
                    e.rhs.push_back({p, q, true, 0.0});
                }
            }
            for (int jp = 0; jp < la; ++jp) {
                if (jp == j)
                    continue;
                int q = off[static_cast<std::size_t>(a - 1)] + jp;
                e.lhs.push_back({p, q, true, -1.0});
                e.rhs.push_back({p, q, true, 1.0});
            }
            if (a + 1 <= N - 1)
                for (int jp = 0; jp < l[static_cast<std::size_t>(a)]; ++jp) {
                    int q = off[static_cast<std::size_t>(a)] + jp;
                    e.lhs.push_back({p, q, true, 0.0});
                    e.rhs.push_back({p, q, true, -1.0});
                }
            eqs.push_back(std::move(e));
        }
    }
    return eqs;
}

inline Complex factor_value(const LinFactor &f, const CVector &x, const std::vector<Complex> &z)
{
    Complex y = f.q < 0 ? Complex{} : (f.q_var ? x(f.q) : z[static_cast<std::size_t>(f.q)]);
    return x(f.p) - y + f.c;
}

/// Product value and gradient w.r.t. x.
inline Complex product_with_gradient(const std::vector<LinFactor> &fs, const CVector &x, const std::vector<Complex> &z,
                                     CVector *grad)
{
    std::vector<Complex> v;
    for (const auto &f : fs)
        v.push_back(factor_value(f, x, z));
    Complex prod = 1.0;
    for (auto c : v)
        prod *= c;
    if (grad) {
        grad->setZero(x.size());
        for (std::size_t i = 0; i < fs.size(); ++i) {
            Complex others = 1.0;
            for (std::size_t k = 0; k < fs.size(); ++k)
                if (k != i)
                    others *= v[k];
            (*grad)(fs[i].p) += others;
            if (fs[i].q >= 0 && fs[i].q_var)
                (*grad)(fs[i].q) -= others;
        }
    }
    return prod;
}

struct GaudinTerm {
    int p;
    int q;
    bool q_var;
    double coef;
};

struct GaudinEquation {
    int a;
    std::vector<GaudinTerm> terms;
};

inline std::vector<GaudinEquation> gaudin_equations(int N, int n, const std::vector<int> &l)
{
    auto off = level_offsets(l);
    std::vector<GaudinEquation> eqs;
    for (int a = 1; a <= N - 1; ++a) {
        const int la = l[static_cast<std::size_t>(a - 1)];
        for (int j = 0; j < la; ++j) {
            GaudinEquation e;
            e.a = a;
            const int p = off[static_cast<std::size_t>(a - 1)] + j;
            if (a == 1)
                for (int s = 0; s < n; ++s)
                    e.terms.push_back({p, s, false, 1.0});
            else
                for (int jp = 0; jp < l[static_cast<std::size_t>(a - 2)]; ++jp)
                    e.terms.push_back({p, off[static_cast<std::size_t>(a - 2)] + jp, true, 1.0});
            if (a + 1 <= N - 1)
                for (int jp = 0; jp < l[static_cast<std::size_t>(a)]; ++jp)
                    e.terms.push_back({p, off[static_cast<std::size_t>(a)] + jp, true, 1.0});
            for (int jp = 0; jp < la; ++jp)
                if (jp != j)
                    e.terms.push_back({p, off[static_cast<std::size_t>(a - 1)] + jp, true, -2.0});
            eqs.push_back(std::move(e));
        }
    }
    return eqs;
}

} // namespace detail

/// Residual of the Bethe equations with Jacobian and per-equation scale.
struct BaeEvaluation {
    CVector F;
    CMatrix J;
    Eigen::VectorXd scale; ///< |LHS| + |RHS| per equation
    double scaled_residual() const
    {
        double r = 0.0;
        for (Eigen::Index i = 0; i < F.size(); ++i)
            r = std::max(r, std::abs(F(i)) / std::max(scale(i), 1e-300));
        return r;
    }
};

class BetheSystem
{
  public:
    BetheSystem(ModelKind kind, int N, int n, std::vector<int> m) : kind_(kind), N_(N), n_(n), m_(std::move(m))
    {
        l_ = l_numbers(m_);
        if (kind_ == ModelKind::xxx)
            xeq_ = detail::xxx_equations(N_, n_, l_);
        else
            geq_ = detail::gaudin_equations(N_, n_, l_);
    }

    const std::vector<int> &l() const { return l_; }
    const std::vector<int> &m() const { return m_; }
    int N() const { return N_; }
    int n() const { return n_; }
    ModelKind kind() const { return kind_; }
    int size() const
    {
        int s = 0;
        for (int x : l_)
            s += x;
        return s;
    }

    BaeEvaluation evaluate(const CVector &x, const BetheParams &P, bool jacobian = true) const
    {
        const Eigen::Index L = size();
        BaeEvaluation ev;
        ev.F = CVector::Zero(L);
        ev.scale = Eigen::VectorXd::Zero(L);
        if (jacobian)
            ev.J = CMatrix::Zero(L, L);
        if (kind_ == ModelKind::xxx) {
            for (Eigen::Index i = 0; i < L; ++i) {
                const auto &e = xeq_[static_cast<std::size_t>(i)];
                CVector gl, gr;
                Complex lv = detail::product_with_gradient(e.lhs, x, P.z, jacobian ? &gl : nullptr);
                Complex rv = detail::product_with_gradient(e.rhs, x, P.z, jacobian ? &gr : nullptr);
                Complex qa = P.twist[static_cast<std::size_t>(e.a - 1)], qb = P.twist[static_cast<std::size_t>(e.a)];
                ev.F(i) = qa * lv - qb * rv;
                ev.scale(i) = std::abs(qa * lv) + std::abs(qb * rv);
                if (jacobian)
                    ev.J.row(i) = (qa * gl - qb * gr).transpose();
            }
        } else {
            for (Eigen::Index i = 0; i < L; ++i) {
                const auto &e = geq_[static_cast<std::size_t>(i)];
                Complex rhs = P.twist[static_cast<std::size_t>(e.a)] - P.twist[static_cast<std::size_t>(e.a - 1)];
                Complex acc{};
                double sc = std::abs(rhs);
                for (const auto &t : e.terms) {
                    Complex y = t.q_var ? x(t.q) : P.z[static_cast<std::size_t>(t.q)];
                    Complex dlt = x(t.p) - y;
                    if (dlt == Complex{})
                        throw pole_error("Bethe equations: colliding variables", "t_" + std::to_string(t.p + 1));
                    Complex term = t.coef / dlt;
                    acc += term;
                    sc += std::abs(term);
                    if (jacobian) {
                        Complex dd = -t.coef / (dlt * dlt);
                        ev.J(i, t.p) += dd;
                        if (t.q_var)
                            ev.J(i, t.q) -= dd;
                    }
                }
                ev.F(i) = acc - rhs;
                ev.scale(i) = sc;
            }
        }
        return ev;
    }

  private:
    ModelKind kind_;
    int N_, n_;
    std::vector<int> m_, l_;
    std::vector<detail::XxxEquation> xeq_;
    std::vector<detail::GaudinEquation> geq_;
};

/// LHS - RHS of the Bethe equations, ordered by level then index.
inline CVector bae_residual(ModelKind kind, const BetheVariables &t, const ModelSpec &spec)
{
    BetheSystem sys(kind, spec.N, spec.n(), spec.target_weight);
    if (t.l() != sys.l())
        throw invalid_input_error("bae_residual: variable counts do not match the weight");
    return sys.evaluate(t.flat(), params_of(spec), false).F;
}

/// rho_{a,i}: increasing list of sites s (0-based) with a_s > i.
inline std::vector<int> rho_map(const AdmissibleIndex &a, int i)
{
    std::vector<int> r;
    for (std::size_t s = 0; s < a.size(); ++s)
        if (a[s] > i)
            r.push_back(static_cast<int>(s));
    return r;
}

/// Leading-order seed at small q.
inline BetheVariables seeds(ModelKind kind, const AdmissibleIndex &a, int N, const std::vector<Complex> &z, double q)
{
    BetheVariables b;
    for (int i = 1; i <= N - 1; ++i) {
        std::vector<Complex> lv;
        for (int s : rho_map(a, i)) {
            Complex t = z[static_cast<std::size_t>(s)];
            if (kind == ModelKind::xxx)
                t -= static_cast<double>(i);
            else
                for (int k = 1; k <= i; ++k)
                    t += q / static_cast<double>(a[static_cast<std::size_t>(s)] - k);
            lv.push_back(t);
        }
        b.t.push_back(lv);
    }
    return b;
}

/// Special family on which the seeds are valid.
inline std::vector<Complex> special_twist(ModelKind kind, int N, double q)
{
    std::vector<Complex> tw;
    for (int a = 0; a < N; ++a)
        tw.push_back(kind == ModelKind::xxx ? std::pow(q, a) : static_cast<double>(a + 1) / q);
    return tw;
}

/// Real points with gaps larger than N, as the xxx seeds require.
inline std::vector<Complex> seed_points(int N, int n)
{
    std::vector<Complex> z;
    for (int s = 0; s < n; ++s)
        z.push_back(static_cast<double>((N + 2) * s));
    return z;
}

struct HomotopyControls {
    double q_start = 1e-3;
    double q_end = 0.1;
    double detour = 0.1;
    double initial_step = 0.05;
    double max_step = 0.1;
    int max_halvings = 12;
    int corrector_iterations = 8;
    double corrector_tol = 1e-9;
    double polish_tol = 1e-12;
    int polish_iterations = 50;
    double accept_residual = 1e-10;
    std::uint64_t detour_seed = 12345;
};

struct PathStats {
    int steps = 0;
    int rejected = 0;
    double min_step = 1.0;
};

struct BetheSolution {
    BetheVariables variables;
    AdmissibleIndex seed;
    double residual = 0.0;
    bool off_diagonal = false;
    PathStats stats;
};

namespace detail
{

inline bool newton(const BetheSystem &sys, CVector &x, const BetheParams &P, int iters, double tol, double *res_out)
{
    for (int it = 0; it <= iters; ++it) {
        auto ev = sys.evaluate(x, P);
        double r = ev.scaled_residual();
        if (res_out)
            *res_out = r;
        if (!std::isfinite(r))
            return false;
        if (r <= tol)
            return true;
        if (it == iters)
            break;
        Eigen::FullPivLU<CMatrix> lu(ev.J);
        if (!lu.isInvertible())
            return false;
        CVector dx = lu.solve(-ev.F);
        if (!dx.allFinite())
            return false;
        x += dx;
    }
    return false;
}

/// Tracks x along P(s), s in [0, 1]; returns false on path failure.
inline bool track(const BetheSystem &sys, CVector &x, const std::function<BetheParams(double)> &path,
                  const HomotopyControls &hc, PathStats &st)
{
    double s = 0.0, ds = hc.initial_step;
    int halvings = 0;
    const Eigen::Index L = x.size();
    while (s < 1.0) {
        double step = std::min(ds, 1.0 - s);
        // Euler predictor with a finite-difference parameter derivative
        auto ev = sys.evaluate(x, path(s));
        const double h = 1e-7;
        CVector Fs = (sys.evaluate(x, path(std::min(1.0, s + h)), false).F - sys.evaluate(x, path(std::max(0.0, s - h)), false).F) /
                     (std::min(1.0, s + h) - std::max(0.0, s - h));
        Eigen::FullPivLU<CMatrix> lu(ev.J);
        CVector xp = x;
        if (L > 0 && lu.isInvertible())
            xp = x - lu.solve(Fs) * step;
        double res = 0.0;
        CVector trial = xp;
        bool ok = xp.allFinite() && newton(sys, trial, path(s + step), hc.corrector_iterations, hc.corrector_tol, &res);
        // each variable may move only a fraction of its distance to the
        // nearest other variable or point; this keeps paths from swapping
        if (ok) {
            const auto zn = path(s + step).z;
            for (Eigen::Index i = 0; i < L && ok; ++i) {
                double hi = 0.5 * (1.0 + std::abs(x(i)));
                for (Eigen::Index j = 0; j < L; ++j)
                    if (j != i)
                        hi = std::min(hi, std::abs(x(i) - x(j)));
                for (auto zz : zn)
                    hi = std::min(hi, std::abs(x(i) - zz));
                if (std::abs(xp(i) - x(i)) > 0.3 * hi || std::abs(trial(i) - xp(i)) > 0.1 * hi)
                    ok = false;
            }
        }
        if (!ok) {
            ds *= 0.5;
            ++st.rejected;
            if (++halvings > hc.max_halvings)
                return false;
            continue;
        }
        x = trial;
        s += step;
        ++st.steps;
        st.min_step = std::min(st.min_step, step);
        halvings = 0;
        ds = std::min(hc.max_step, ds * 1.5);
    }
    return true;
}

} // namespace detail

/// Newton refinement at q_start, a raise of q along the special family, then a
/// straight deformation to the target (with a complex detour).
inline BetheSolution continue_homotopy(const BetheSystem &sys, const AdmissibleIndex &a, const BetheParams &target,
                                       const HomotopyControls &hc = {})
{
    const ModelKind kind = sys.kind();
    const int N = sys.N(), n = sys.n();
    const std::vector<Complex> zs = kind == ModelKind::xxx ? seed_points(N, n) : target.z;
    BetheSolution sol;
    sol.seed = a;
    auto seed = seeds(kind, a, N, zs, hc.q_start);
    CVector x = seed.flat();
    if (x.size() == 0) {
        sol.variables = BetheVariables::shaped(sys.l(), x);
        sol.off_diagonal = true;
        return sol;
    }
    BetheParams p0{zs, special_twist(kind, N, hc.q_start)};
    double res = 0.0;
    if (!detail::newton(sys, x, p0, hc.polish_iterations, hc.polish_tol, &res) && res > 1e-8)
        throw path_failure("seed refinement did not converge (residual " + std::to_string(res) + ")");

    auto leg1 = [&](double s) {
        double q = hc.q_start * std::pow(hc.q_end / hc.q_start, s);
        return BetheParams{zs, special_twist(kind, N, q)};
    };
    if (!detail::track(sys, x, leg1, hc, sol.stats))
        throw path_failure("path failure on the special family");

    std::mt19937_64 rng(hc.detour_seed);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    const auto tw0 = special_twist(kind, N, hc.q_end);
    std::vector<Complex> dz(static_cast<std::size_t>(n)), dt(static_cast<std::size_t>(N));
    for (auto &v : dz)
        v = hc.detour * std::polar(1.0, std::numbers::pi * U(rng));
    for (auto &v : dt)
        v = hc.detour * std::polar(1.0, std::numbers::pi * U(rng));
    auto leg2 = [&](double s) {
        BetheParams P;
        for (int i = 0; i < n; ++i)
            P.z.push_back((1.0 - s) * zs[static_cast<std::size_t>(i)] + s * target.z[static_cast<std::size_t>(i)] +
                          s * (1.0 - s) * dz[static_cast<std::size_t>(i)] * 4.0);
        for (int i = 0; i < N; ++i)
            P.twist.push_back((1.0 - s) * tw0[static_cast<std::size_t>(i)] + s * target.twist[static_cast<std::size_t>(i)] +
                              s * (1.0 - s) * dt[static_cast<std::size_t>(i)] * 4.0);
        return P;
    };
    if (!detail::track(sys, x, leg2, hc, sol.stats))
        throw path_failure("path failure on the deformation to the target");
    detail::newton(sys, x, target, hc.polish_iterations, hc.polish_tol, &res);
    sol.residual = res;
    if (res > hc.accept_residual)
        throw path_failure("final residual " + std::to_string(res) + " above tolerance");
    sol.variables = BetheVariables::shaped(sys.l(), x);
    sol.off_diagonal = sol.variables.off_diagonal();
    return sol;
}

// ---------------------------------------------------------------------------
// Weight function and eigenvalues
// ---------------------------------------------------------------------------

/// Universal weight function in the basis e_a v (ordered as enumerate_admissible).
/// Sites enter in mirrored order (our coproduct puts site 1 rightmost in the
/// auxiliary product) and each level is symmetrized with the factor
/// prod_{i<j} (t_i - t_j - 1)/(t_i - t_j).
inline CVector weight_function_xxx(const BetheVariables &tv, const std::vector<Complex> &z, int N,
                                   const std::vector<int> &m)
{
    const int n = static_cast<int>(z.size());
    auto adm = enumerate_admissible(N, n, m);
    auto l = l_numbers(m);
    if (tv.l() != l)
        throw invalid_input_error("weight_function_xxx: variable counts do not match the weight");
    const auto &t = tv.t;
    Complex pref = 1.0;
    if (N >= 2)
        for (int s = 0; s < n; ++s)
            for (auto x : t[0])
                pref *= x - z[static_cast<std::size_t>(s)];
    for (int b = 2; b <= N - 1; ++b)
        for (auto y : t[static_cast<std::size_t>(b - 2)])
            for (auto x : t[static_cast<std::size_t>(b - 1)])
                pref *= x - y;
    auto guard = [](Complex d) {
        if (d == Complex{})
            throw pole_error("weight function: vanishing symmetrization denominator", "t");
        return d;
    };
    CVector out = CVector::Zero(static_cast<Eigen::Index>(adm.size()));
    for (std::size_t ai = 0; ai < adm.size(); ++ai) {
        const auto &a = adm[ai];
        // position of site s in rho_{a,b}
        std::vector<std::vector<int>> pos(static_cast<std::size_t>(N), std::vector<int>(static_cast<std::size_t>(n), -1));
        for (int b = 1; b <= N - 1; ++b) {
            auto r = rho_map(a, b);
            for (std::size_t j = 0; j < r.size(); ++j)
                pos[static_cast<std::size_t>(b)][static_cast<std::size_t>(r[j])] = static_cast<int>(j);
        }
        // iterate over products of permutations of each level
        std::vector<std::vector<int>> perms(static_cast<std::size_t>(N - 1));
        for (int b = 1; b <= N - 1; ++b) {
            perms[static_cast<std::size_t>(b - 1)].resize(static_cast<std::size_t>(l[static_cast<std::size_t>(b - 1)]));
            std::iota(perms[static_cast<std::size_t>(b - 1)].begin(), perms[static_cast<std::size_t>(b - 1)].end(), 0);
        }
        Complex total{};
        auto rec = [&](auto &&self, int level) -> void {
            if (level == N - 1) {
                auto T = [&](int b, int j) {
                    return t[static_cast<std::size_t>(b - 1)][static_cast<std::size_t>(
                        perms[static_cast<std::size_t>(b - 1)][static_cast<std::size_t>(j)])];
                };
                Complex val = 1.0;
                for (int s = 0; s < n; ++s) {
                    if (a[static_cast<std::size_t>(s)] <= 1)
                        continue;
                    Complex x = T(1, pos[1][static_cast<std::size_t>(s)]);
                    val /= guard(x - z[static_cast<std::size_t>(s)]);
                    for (int r = s + 1; r < n; ++r)
                        val *= (x - z[static_cast<std::size_t>(r)] + 1.0) / guard(x - z[static_cast<std::size_t>(r)]);
                }
                for (int b = 2; b <= N - 1; ++b)
                    for (int s = 0; s < n; ++s) {
                        if (a[static_cast<std::size_t>(s)] <= b)
                            continue;
                        Complex x = T(b, pos[static_cast<std::size_t>(b)][static_cast<std::size_t>(s)]);
                        Complex y = T(b - 1, pos[static_cast<std::size_t>(b - 1)][static_cast<std::size_t>(s)]);
                        val /= guard(x - y);
                        for (int r = s + 1; r < n; ++r) {
                            if (a[static_cast<std::size_t>(r)] < b)
                                continue;
                            Complex yr = T(b - 1, pos[static_cast<std::size_t>(b - 1)][static_cast<std::size_t>(r)]);
                            val *= (x - yr + 1.0) / guard(x - yr);
                        }
                    }
                // exchange factor of the symmetrization at every level
                for (int b = 1; b <= N - 1; ++b)
                    for (int i = 0; i < l[static_cast<std::size_t>(b - 1)]; ++i)
                        for (int j = i + 1; j < l[static_cast<std::size_t>(b - 1)]; ++j) {
                            Complex d = T(b, i) - T(b, j);
                            val *= (d - 1.0) / guard(d);
                        }
                total += val;
                return;
            }
            auto &p = perms[static_cast<std::size_t>(level)];
            std::sort(p.begin(), p.end());
            do {
                self(self, level + 1);
            } while (std::next_permutation(p.begin(), p.end()));
        };
        rec(rec, 0);
        out(static_cast<Eigen::Index>(ai)) = pref * total;
    }
    return out;
}

/// Eigenvalue functions lambda_k(u), k = 0..N, of one Bethe solution.
/// Evaluation is pointwise (products of chi for xxx, scalar jets for gaudin);
/// rational() rebuilds each lambda_k against its known denominator.
class EigenvalueFunctions
{
  public:
    EigenvalueFunctions() = default;
    EigenvalueFunctions(ModelKind kind, const BetheVariables &tv, const BetheParams &P) : kind_(kind), twist_(P.twist)
    {
        N_ = static_cast<int>(P.twist.size());
        levels_.push_back(P.z);
        // solutions with trailing empty levels may store fewer than N - 1 of them
        for (int b = 1; b < N_; ++b) {
            const auto k = static_cast<std::size_t>(b - 1);
            levels_.push_back(k < tv.t.size() ? tv.t[k] : std::vector<Complex>{});
        }
        levels_.emplace_back();
    }

    int N() const { return N_; }

    /// chi^a(u), a 1-based.
    Complex chi(int a, Complex u) const
    {
        const auto &prev = levels_[static_cast<std::size_t>(a - 1)];
        const auto &cur = levels_[static_cast<std::size_t>(a)];
        if (kind_ == ModelKind::xxx) {
            Complex v = twist_[static_cast<std::size_t>(a - 1)];
            for (auto y : prev)
                v *= (u - y + 1.0) / pole_guard(u - y);
            for (auto y : cur)
                v *= (u - y - 1.0) / pole_guard(u - y);
            return v;
        }
        Complex v = twist_[static_cast<std::size_t>(a - 1)];
        for (auto y : prev)
            v += 1.0 / pole_guard(u - y);
        for (auto y : cur)
            v -= 1.0 / pole_guard(u - y);
        return v;
    }

    /// lambda_0(u) .. lambda_N(u)
    std::vector<Complex> operator()(Complex u) const
    {
        std::vector<Complex> lam(static_cast<std::size_t>(N_ + 1), Complex{});
        if (kind_ == ModelKind::xxx) {
            // (1 - chi^1 tau^-1) ... (1 - chi^N tau^-1): chi^{i_j} evaluated at u - j + 1
            std::vector<std::vector<Complex>> c(static_cast<std::size_t>(N_), std::vector<Complex>(static_cast<std::size_t>(N_)));
            for (int a = 1; a <= N_; ++a)
                for (int j = 0; j < N_; ++j)
                    c[static_cast<std::size_t>(a - 1)][static_cast<std::size_t>(j)] = chi(a, u - static_cast<double>(j));
            for (unsigned mask = 0; mask < (1u << N_); ++mask) {
                Complex term = 1.0;
                int k = 0;
                for (int i = 0; i < N_; ++i)
                    if (mask & (1u << i))
                        term *= c[static_cast<std::size_t>(i)][static_cast<std::size_t>(k++)];
                lam[static_cast<std::size_t>(k)] += term;
            }
            return lam;
        }
        // (d - chi^1) ... (d - chi^N) with Taylor jets in h at u
        using Jet = std::vector<Complex>;
        auto chi_jet = [&](int a, int order) {
            Jet j(static_cast<std::size_t>(order + 1), Complex{});
            j[0] = twist_[static_cast<std::size_t>(a - 1)];
            auto add = [&](Complex y, double sgn) {
                Complex w = 1.0 / pole_guard(u - y), p = w;
                for (int i = 0; i <= order; ++i) {
                    j[static_cast<std::size_t>(i)] += sgn * (i % 2 ? -1.0 : 1.0) * p;
                    p *= w;
                }
            };
            for (auto y : levels_[static_cast<std::size_t>(a - 1)])
                add(y, 1.0);
            for (auto y : levels_[static_cast<std::size_t>(a)])
                add(y, -1.0);
            return j;
        };
        std::vector<Jet> C{Jet(static_cast<std::size_t>(N_ + 1), Complex{})};
        C[0][0] = 1.0;
        for (int a = N_; a >= 1; --a) {
            const int ord = a - 1;
            const Jet x = chi_jet(a, ord);
            std::vector<Jet> nxt(C.size() + 1, Jet(static_cast<std::size_t>(ord + 1), Complex{}));
            for (std::size_t p = 0; p < C.size(); ++p)
                for (int i = 0; i <= ord; ++i) {
                    nxt[p][static_cast<std::size_t>(i)] += static_cast<double>(i + 1) * C[p][static_cast<std::size_t>(i + 1)];
                    nxt[p + 1][static_cast<std::size_t>(i)] += C[p][static_cast<std::size_t>(i)];
                    for (int k = 0; k <= i; ++k)
                        nxt[p][static_cast<std::size_t>(i)] -= x[static_cast<std::size_t>(k)] * C[p][static_cast<std::size_t>(i - k)];
                }
            C = std::move(nxt);
        }
        for (int k = 0; k <= N_; ++k)
            lam[static_cast<std::size_t>(k)] = (k % 2 ? -1.0 : 1.0) * C[static_cast<std::size_t>(N_ - k)][0];
        return lam;
    }

    Complex operator()(int k, Complex u) const { return (*this)(u)[static_cast<std::size_t>(k)]; }

    /// All poles of chi: the points and the Bethe variables.
    std::vector<Complex> poles() const
    {
        std::vector<Complex> p;
        for (const auto &lv : levels_)
            p.insert(p.end(), lv.begin(), lv.end());
        return p;
    }

    /// Known denominator of lambda_k.
    Poly denominator(int k) const
    {
        Poly d = Poly::constant(1.0);
        for (auto p : poles())
            for (int j = 0; j < k; ++j)
                d *= Poly::linear(kind_ == ModelKind::xxx ? p + static_cast<double>(j) : p);
        return d;
    }

    /// lambda_k as rational functions (numerator interpolated on a circle).
    std::vector<RatFn> rational() const
    {
        std::vector<RatFn> out;
        std::vector<Complex> all;
        for (auto p : poles())
            for (int j = 0; j < N_; ++j)
                all.push_back(kind_ == ModelKind::xxx ? p + static_cast<double>(j) : p);
        for (int k = 0; k <= N_; ++k) {
            Poly den = denominator(k);
            const int deg = den.degree();
            auto xs = circle_abscissas(all.empty() ? std::vector<Complex>{0.0} : all, deg + 6, 1.0);
            std::vector<std::pair<Complex, Complex>> pts;
            for (auto x : xs)
                pts.emplace_back(x, (*this)(k, x) * den(x));
            out.emplace_back(poly_interpolate(pts, deg, 1e-6), den);
        }
        return out;
    }

  private:
    static Complex pole_guard(Complex d)
    {
        if (d == Complex{})
            throw pole_error("eigenvalue function evaluated at a pole", "u");
        return d;
    }

    ModelKind kind_ = ModelKind::xxx;
    int N_ = 0;
    std::vector<Complex> twist_;
    std::vector<std::vector<Complex>> levels_; ///< z, t^(1), ..., t^(N-1), empty
};

inline EigenvalueFunctions eigenvalues(ModelKind kind, const BetheVariables &tv, const BetheParams &P)
{
    return EigenvalueFunctions(kind, tv, P);
}

/// Worst eigen-residual ||Te_k(u) w - lambda_k(u) w|| / (||w|| max(1, ||Te_k(u)||)) over probes.
inline double eigen_residual(const ModelSpec &spec, const WeightSubspace &W, const CVector &w,
                             const EigenvalueFunctions &lam, const std::vector<Complex> &probes)
{
    double worst = 0.0;
    for (auto u : probes) {
        auto te = transfer(spec, W, u);
        auto lv = lam(u);
        for (std::size_t k = 0; k < te.size(); ++k) {
            CVector r = te[k] * w - lv[k] * w;
            double sc = w.norm() * std::max(1.0, te[k].norm());
            worst = std::max(worst, r.norm() / sc);
        }
    }
    return worst;
}

/// Probe points away from all poles, drawn from a fixed generator.
inline std::vector<Complex> probe_points(const std::vector<Complex> &avoid, int count, std::uint64_t seed,
                                         double radius = 3.0, double clearance = 0.3)
{
    std::mt19937_64 rng(seed);
    Complex c{};
    for (auto a : avoid)
        c += a;
    if (!avoid.empty())
        c /= static_cast<double>(avoid.size());
    double R = radius;
    for (auto a : avoid)
        R = std::max(R, std::abs(a - c) + 1.0);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    std::vector<Complex> out;
    while (static_cast<int>(out.size()) < count) {
        Complex u = c + R * Complex(U(rng), U(rng));
        bool ok = true;
        for (auto a : avoid)
            for (int j = -1; j <= 4; ++j)
                if (std::abs(u - a - static_cast<double>(j)) < clearance)
                    ok = false;
        for (auto a : avoid)
            if (std::abs(u - a) < clearance)
                ok = false;
        if (ok)
            out.push_back(u);
    }
    return out;
}

/// Poles of chi functions and transfer matrices that probes must avoid.
inline std::vector<Complex> singular_points(const BetheVariables &tv, const std::vector<Complex> &z)
{
    std::vector<Complex> s = z;
    for (const auto &lv : tv.t)
        s.insert(s.end(), lv.begin(), lv.end());
    return s;
}

struct BetheVectorResult {
    CVector vector;          ///< in W coordinates
    bool zero = false;
    bool degenerate = false; ///< gaudin: ambiguous spectral match
    double eigen_residual = 0.0;
};

/// Joint eigenvector whose spectrum matches lambda at several probes (gaudin route).
inline BetheVectorResult spectral_match(const ModelSpec &spec, const WeightSubspace &W, const EigenvalueFunctions &lam,
                                        const std::vector<Complex> &probes, std::uint64_t seed, double tol = 1e-6)
{
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> G;
    const Eigen::Index d = W.dim();
    CMatrix comb = CMatrix::Zero(d, d);
    Complex mu{};
    for (auto u : probes) {
        auto te = transfer(spec, W, u);
        for (int k = 1; k <= spec.N; ++k) {
            Complex c(G(rng), G(rng));
            comb += c * te[static_cast<std::size_t>(k)];
            mu += c * lam(k, u);
        }
    }
    auto ed = eig(comb);
    BetheVectorResult r;
    const double sc = std::max(1.0, comb.norm());
    int matches = 0;
    for (const auto &p : ed.pairs)
        if (std::abs(p.value - mu) <= tol * sc) {
            if (matches == 0)
                r.vector = p.vector;
            ++matches;
        }
    if (matches == 0)
        r.zero = true;
    r.degenerate = matches > 1;
    return r;
}

struct CensusEntry {
    BetheSolution solution;
    CVector bethe_vector;
    double eigen_residual = 0.0;
    bool zero_vector = false;
    bool degenerate = false;
};

struct CensusReport {
    int dimension = 0;
    int seeds = 0;
    int tracked = 0;
    int distinct = 0;
    int path_failures = 0;
    int collisions = 0;
    int zero_vectors = 0;
    int degenerate = 0;
    Complex gram_determinant{};
    double max_residual = 0.0;
    double max_eigen_residual = 0.0;
    double spectrum_mismatch = 0.0;
    std::vector<CensusEntry> entries;
    std::vector<std::string> notes;
    bool complete() const
    {
        return distinct == dimension && std::abs(gram_determinant) >= 1e-8 && zero_vectors == 0 && degenerate == 0;
    }
};

/// Distance between solutions as per-level multisets (greedy matching).
inline double solution_distance(const BetheVariables &x, const BetheVariables &y)
{
    double worst = 0.0;
    for (std::size_t a = 0; a < x.t.size(); ++a) {
        std::vector<bool> used(y.t[a].size(), false);
        for (auto v : x.t[a]) {
            double best = std::numeric_limits<double>::infinity();
            std::size_t bi = 0;
            for (std::size_t j = 0; j < y.t[a].size(); ++j)
                if (!used[j] && std::abs(v - y.t[a][j]) < best) {
                    best = std::abs(v - y.t[a][j]);
                    bi = j;
                }
            if (!y.t[a].empty())
                used[bi] = true;
            worst = std::max(worst, best);
        }
    }
    return worst;
}

/// Max over probes of the mismatch between sorted spectra of Te_k(u0) and the multiset of lambda_k(u0).
inline double spectrum_consistency(const ModelSpec &spec, const WeightSubspace &W,
                                   const std::vector<EigenvalueFunctions> &lams, const std::vector<Complex> &probes)
{
    double worst = 0.0;
    for (auto u : probes) {
        auto te = transfer(spec, W, u);
        for (int k = 1; k <= spec.N; ++k) {
            auto ev = eig(te[static_cast<std::size_t>(k)]).values;
            std::vector<Complex> pred;
            for (const auto &l : lams)
                pred.push_back(l(k, u));
            if (pred.size() != ev.size())
                return std::numeric_limits<double>::infinity();
            std::vector<bool> used(ev.size(), false);
            const double sc = std::max(1.0, te[static_cast<std::size_t>(k)].norm());
            for (auto p : pred) {
                double best = std::numeric_limits<double>::infinity();
                std::size_t bi = 0;
                for (std::size_t j = 0; j < ev.size(); ++j)
                    if (!used[j] && std::abs(p - ev[j]) < best) {
                        best = std::abs(p - ev[j]);
                        bi = j;
                    }
                used[bi] = true;
                worst = std::max(worst, best / sc);
            }
        }
    }
    return worst;
}

inline int thread_count()
{
    if (const char *s = std::getenv("QEXP_NUM_THREADS")) {
        int v = std::atoi(s);
        if (v >= 1)
            return v;
    }
    return 1;
}

/// Tracks every admissible seed to the target model and collects the Bethe vectors.
inline CensusReport completeness_census(const ModelSpec &spec, const HomotopyControls &hc = {}, std::uint64_t seed = 7)
{
    auto P = params_of(spec);
    auto M = build_module(spec);
    auto W = weight_subspace(M, spec.target_weight);
    BetheSystem sys(spec.kind, spec.N, spec.n(), spec.target_weight);
    auto adm = enumerate_admissible(spec.N, spec.n(), spec.target_weight);
    CensusReport rep;
    rep.dimension = static_cast<int>(W.dim());
    rep.seeds = static_cast<int>(adm.size());

    std::vector<std::optional<BetheSolution>> sols(adm.size());
    std::vector<std::string> errs(adm.size());
    auto work = [&](std::size_t i) {
        try {
            sols[i] = continue_homotopy(sys, adm[i], P, hc);
        } catch (const error &e) {
            errs[i] = e.what();
        }
    };
    const int th = thread_count();
    if (th <= 1) {
        for (std::size_t i = 0; i < adm.size(); ++i)
            work(i);
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < th; ++t)
            pool.emplace_back([&, t] {
                for (std::size_t i = static_cast<std::size_t>(t); i < adm.size(); i += static_cast<std::size_t>(th))
                    work(i);
            });
        for (auto &t : pool)
            t.join();
    }

    std::vector<BetheSolution> distinct;
    for (std::size_t i = 0; i < adm.size(); ++i) {
        if (!sols[i]) {
            ++rep.path_failures;
            std::string a;
            for (int x : adm[i])
                a += std::to_string(x);
            rep.notes.push_back("seed " + a + ": " + errs[i]);
            continue;
        }
        ++rep.tracked;
        const auto &s = *sols[i];
        rep.max_residual = std::max(rep.max_residual, s.residual);
        bool dup = false;
        for (const auto &d : distinct) {
            double dist = solution_distance(s.variables, d.variables);
            double sc = 1.0 + s.variables.flat().norm();
            if (dist < 1e-6 * sc) {
                dup = true;
                if (dist < 1e-8 * sc)
                    ++rep.collisions;
            }
        }
        if (!dup && s.off_diagonal)
            distinct.push_back(s);
    }
    if (rep.collisions > 0)
        rep.notes.push_back("collision warning: tracked paths converged to the same solution");

    std::vector<EigenvalueFunctions> lams;
    CMatrix V(W.dim(), 0);
    for (const auto &s : distinct) {
        CensusEntry e;
        e.solution = s;
        auto lam = eigenvalues(spec.kind, s.variables, P);
        auto probes = probe_points(singular_points(s.variables, spec.z), 10, seed + 11);
        if (spec.kind == ModelKind::xxx) {
            e.bethe_vector = weight_function_xxx(s.variables, spec.z, spec.N, spec.target_weight);
        } else {
            auto few = probe_points(singular_points(s.variables, spec.z), 3, seed + 29);
            auto m = spectral_match(spec, W, lam, few, seed + 31);
            e.bethe_vector = m.vector;
            e.degenerate = m.degenerate;
            e.zero_vector = m.zero;
        }
        if (!e.zero_vector && e.bethe_vector.norm() <= 1e-12 * (1.0 + s.variables.flat().norm()))
            e.zero_vector = true;
        if (!e.zero_vector) {
            e.eigen_residual = eigen_residual(spec, W, e.bethe_vector, lam, probes);
            rep.max_eigen_residual = std::max(rep.max_eigen_residual, e.eigen_residual);
            V.conservativeResize(Eigen::NoChange, V.cols() + 1);
            V.col(V.cols() - 1) = e.bethe_vector / e.bethe_vector.norm();
            lams.push_back(lam);
        }
        rep.zero_vectors += e.zero_vector ? 1 : 0;
        rep.degenerate += e.degenerate ? 1 : 0;
        rep.entries.push_back(std::move(e));
    }
    rep.distinct = static_cast<int>(distinct.size());
    rep.gram_determinant = V.cols() ? (V.adjoint() * V).determinant() : Complex(rep.dimension == 0 ? 1.0 : 0.0);
    if (static_cast<int>(lams.size()) == rep.dimension && rep.dimension > 0) {
        std::vector<Complex> avoid = spec.z;
        for (const auto &s : distinct)
            for (const auto &lv : s.variables.t)
                avoid.insert(avoid.end(), lv.begin(), lv.end());
        rep.spectrum_mismatch = spectrum_consistency(spec, W, lams, probe_points(avoid, 3, seed + 47));
    }
    return rep;
}

} // namespace qexp

#endif
