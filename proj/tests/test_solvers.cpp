// Bethe ansatz, kernels, comparison and the run pipeline.

#include <gtest/gtest.h>

#include <random>

#include <qexp/pipeline.hpp>

using namespace qexp;

namespace
{

std::mt19937_64 &rng()
{
    static std::mt19937_64 g(777);
    return g;
}

Complex rc()
{
    std::normal_distribution<double> G;
    return {G(rng()), G(rng())};
}

ModelSpec vector_model(ModelKind kind, int N, std::vector<int> m, std::vector<Complex> z, std::vector<Complex> q)
{
    ModelSpec s;
    s.kind = kind;
    s.N = N;
    for (std::size_t i = 0; i < z.size(); ++i)
        s.weights.push_back(GlWeight::vector_rep(N));
    s.z = std::move(z);
    s.twist = CMatrix::Zero(N, N);
    for (int a = 0; a < N; ++a)
        s.twist(a, a) = q[static_cast<std::size_t>(a)];
    s.target_weight = std::move(m);
    return s;
}

ModelSpec random_vector_model(ModelKind kind, int N, std::vector<int> m)
{
    int n = 0;
    for (int x : m)
        n += x;
    std::vector<Complex> z, q;
    for (int i = 0; i < n; ++i)
        z.push_back(rc());
    for (int a = 0; a < N; ++a)
        q.push_back(rc());
    return vector_model(kind, N, m, z, q);
}

int label_index(const WeightSubspace &W, const std::string &label)
{
    for (std::size_t i = 0; i < W.labels.size(); ++i)
        if (W.labels[i] == label)
            return static_cast<int>(i);
    return -1;
}

// sum_k (-1)^k Te_k(u) f(u - k) (or Tee_k f^{(N-k)}) straight from the transfer matrices,
// relative to the size of the terms.
double direct_residual(const ModelSpec &spec, const WeightSubspace &W, const QuasiExponential &f, Complex u)
{
    auto te = transfer(spec, W, u);
    CVector acc = CVector::Zero(W.dim());
    double sc = 0.0;
    for (int k = 0; k <= spec.N; ++k) {
        CVector v = spec.kind == ModelKind::xxx ? f(u - double(k)) : f.derivative(u, spec.N - k);
        CVector t = te[static_cast<std::size_t>(k)] * v;
        acc += (k % 2 ? -1.0 : 1.0) * t;
        sc += t.norm();
    }
    return acc.norm() / sc;
}

} // namespace

// ---------------------------------------------------------------------------
// Bethe
// ---------------------------------------------------------------------------

TEST(Bethe, ClosedFormSingleVariable)
{
    const Complex z(0.3, -0.2), q1(1.2, 0.4), q2(-0.5, 0.7);
    ModelSpec x = vector_model(ModelKind::xxx, 2, {0, 1}, {z}, {q1, q2});
    BetheVariables t{{{z - q1 / (q1 - q2)}}};
    EXPECT_LT(bae_residual(ModelKind::xxx, t, x).norm(), 1e-12);
    t.t[0][0] += 0.1;
    EXPECT_GT(bae_residual(ModelKind::xxx, t, x).norm(), 1e-3);

    ModelSpec g = vector_model(ModelKind::gaudin, 2, {0, 1}, {z}, {q1, q2});
    BetheVariables s{{{z + 1.0 / (q2 - q1)}}};
    EXPECT_LT(bae_residual(ModelKind::gaudin, s, g).norm(), 1e-12);

    ModelSpec hw = vector_model(ModelKind::xxx, 2, {2, 0}, {rc(), rc()}, {q1, q2});
    BetheVariables empty{{{}}};
    EXPECT_EQ(bae_residual(ModelKind::xxx, empty, hw).size(), 0);
}

TEST(Bethe, Seeds)
{
    std::vector<Complex> z{Complex(0.5, 0.1), Complex(4.0, -0.3)};
    auto s = seeds(ModelKind::xxx, {2, 0}, 2, z, 1e-3);
    ASSERT_EQ(s.t.size(), 1u);
    ASSERT_EQ(s.t[0].size(), 1u);
    EXPECT_LT(std::abs(s.t[0][0] - (z[0] - 1.0)), 1e-14);

    auto g = seeds(ModelKind::gaudin, {2}, 2, {z[0]}, 0.01);
    EXPECT_LT(std::abs(g.t[0][0] - (z[0] + 0.01)), 1e-14);

    auto e = seeds(ModelKind::xxx, {0, 0}, 2, z, 1e-3);
    EXPECT_EQ(e.count(), 0);
}

TEST(Bethe, HomotopyReachesClosedForm)
{
    const Complex z(0.2, 0.4), q1(1.5, -0.3), q2(0.4, 0.6);
    for (auto kind : {ModelKind::xxx, ModelKind::gaudin}) {
        ModelSpec s = vector_model(kind, 2, {0, 1}, {z}, {q1, q2});
        BetheSystem sys(kind, 2, 1, {0, 1});
        auto sol = continue_homotopy(sys, {2}, params_of(s), {});
        const Complex expect = kind == ModelKind::xxx ? z - q1 / (q1 - q2) : z + 1.0 / (q2 - q1);
        EXPECT_LT(std::abs(sol.variables.t[0][0] - expect), 1e-9);
    }
}

TEST(Bethe, WeightFunctionTwoSites)
{
    // mirrored site order: coefficient (t - z_2 + 1) on e21 v (x) v and (t - z_1) on v (x) e21 v
    std::vector<Complex> z{Complex(0.3, 0.0), Complex(1.7, 0.2)};
    BetheVariables b{{{Complex(0.37, 0.2)}}};
    auto w = weight_function_xxx(b, z, 2, {1, 1});
    auto W = weight_subspace(build_vector_module(2, 2), {1, 1});
    const Complex t = b.t[0][0];
    EXPECT_LT(std::abs(w(label_index(W, "21")) - (t - z[1] + 1.0)), 1e-12);
    EXPECT_LT(std::abs(w(label_index(W, "12")) - (t - z[0])), 1e-12);

    BetheVariables none{{{}}};
    auto one = weight_function_xxx(none, z, 2, {2, 0});
    ASSERT_EQ(one.size(), 1);
    EXPECT_LT(std::abs(one(0) - 1.0), 1e-14);
}

TEST(Bethe, WeightFunctionIsEigenvectorAtSolution)
{
    // independent of the census: solve the single equation, check against the transfer matrices
    const Complex q1(1.1, 0.2), q2(-0.4, 0.5);
    std::vector<Complex> z{rc(), rc()};
    ModelSpec s = vector_model(ModelKind::xxx, 2, {1, 1}, z, {q1, q2});
    BetheSystem sys(ModelKind::xxx, 2, 2, {1, 1});
    auto W = weight_subspace(build_module(s), {1, 1});
    for (auto a : enumerate_admissible(2, 2, {1, 1})) {
        auto sol = continue_homotopy(sys, a, params_of(s), {});
        auto w = weight_function_xxx(sol.variables, z, 2, {1, 1});
        for (int trial = 0; trial < 3; ++trial) {
            auto te = transfer(s, W, rc() * 2.0);
            CVector tw = te[1] * w;
            Complex lam = w.dot(tw) / w.squaredNorm();
            EXPECT_LT((tw - lam * w).norm() / (w.norm() * te[1].norm()), 1e-9);
        }
    }
}

TEST(Bethe, EigenvalueFunctionBasics)
{
    const Complex q(0.7, 0.3);
    std::vector<Complex> z{rc(), rc()};
    ModelSpec s = vector_model(ModelKind::xxx, 1, {2}, z, {q});
    BetheVariables none;
    auto lam = eigenvalues(ModelKind::xxx, none, params_of(s));
    const Complex u = rc();
    EXPECT_LT(std::abs(lam(0, u) - 1.0), 1e-14);
    EXPECT_LT(std::abs(lam(1, u) - q * (u - z[0] + 1.0) / (u - z[0]) * (u - z[1] + 1.0) / (u - z[1])), 1e-12);

    // gaudin N = 2, n = 1: eigenvalue of the 1 x 1 Tee_1
    const Complex k1(0.3, -0.8), k2(1.1, 0.4), zz(0.2, 0.1);
    ModelSpec g = vector_model(ModelKind::gaudin, 2, {0, 1}, {zz}, {k1, k2});
    BetheVariables t{{{zz + 1.0 / (k2 - k1)}}};
    auto lg = eigenvalues(ModelKind::gaudin, t, params_of(g));
    auto W = weight_subspace(build_module(g), {0, 1});
    for (int trial = 0; trial < 3; ++trial) {
        const Complex v = rc();
        auto tee = transfer(g, W, v);
        EXPECT_LT(std::abs(tee[1](0, 0) - lg(1, v)), 1e-9);
        EXPECT_LT(std::abs(tee[2](0, 0) - lg(2, v)), 1e-9);
    }
}

TEST(Bethe, CensusSmallModels)
{
    for (auto kind : {ModelKind::xxx, ModelKind::gaudin}) {
        ModelSpec s = random_vector_model(kind, 2, {1, 1});
        auto c = completeness_census(s);
        EXPECT_EQ(c.dimension, 2);
        EXPECT_EQ(c.distinct, 2);
        EXPECT_GT(std::abs(c.gram_determinant), 1e-8);
        EXPECT_LT(c.max_eigen_residual, 1e-8);
        EXPECT_LT(c.spectrum_mismatch, 1e-7);
    }
    ModelSpec hw = random_vector_model(ModelKind::xxx, 2, {2, 0});
    auto c = completeness_census(hw);
    EXPECT_EQ(c.distinct, 1);
    EXPECT_LT(c.max_eigen_residual, 1e-13);
}

TEST(Bethe, CensusLargerModels)
{
    for (auto kind : {ModelKind::xxx, ModelKind::gaudin})
        for (auto m : std::vector<std::vector<int>>{{2, 1}, {1, 1, 1}, {2, 1, 1}}) {
            ModelSpec s = random_vector_model(kind, static_cast<int>(m.size()), m);
            auto c = completeness_census(s);
            EXPECT_TRUE(c.complete()) << to_string(kind) << " dim " << c.dimension << " distinct " << c.distinct;
            EXPECT_LT(c.max_eigen_residual, 1e-8);
        }
}

// ---------------------------------------------------------------------------
// kernel
// ---------------------------------------------------------------------------

TEST(Kernel, SingleSiteDifference)
{
    const Complex z(0.4, -0.1), q(1.3, 0.5);
    ModelSpec s = vector_model(ModelKind::xxx, 1, {1}, {z}, {q});
    auto W = weight_subspace(build_module(s), {1});
    auto P = universal_pencil(s, W);
    auto bk = solve_quasiexp(P, q, 1);
    ASSERT_EQ(bk.elements.size(), 1u);
    auto c = bk.elements[0].coefficients();
    ASSERT_EQ(c.size(), 2u);
    EXPECT_LT(std::abs(c[1](0) / c[0](0) - (1.0 - z)), 1e-10); // q^u (u - z + 1)
    EXPECT_LT(direct_residual(s, W, bk.elements[0], rc()), 1e-10);

    EXPECT_TRUE(solve_quasiexp(P, q * 1.7, 3).elements.empty());
}

TEST(Kernel, SingleSiteDifferential)
{
    const Complex z(0.4, -0.1), K(-0.3, 0.9);
    ModelSpec s = vector_model(ModelKind::gaudin, 1, {1}, {z}, {K});
    auto W = weight_subspace(build_module(s), {1});
    auto P = universal_pencil(s, W);
    auto bk = solve_quasiexp(P, K, 2);
    ASSERT_EQ(bk.elements.size(), 1u);
    auto c = bk.elements[0].coefficients();
    ASSERT_EQ(c.size(), 2u);
    EXPECT_LT(std::abs(c[1](0) / c[0](0) + z), 1e-10); // e^{Ku} (u - z)
    EXPECT_TRUE(solve_quasiexp(P, K + 0.5, 3).elements.empty());
}

TEST(Kernel, FramesForDistinctTwist)
{
    for (auto kind : {ModelKind::xxx, ModelKind::gaudin})
        for (auto m : std::vector<std::vector<int>>{{1, 1}, {2, 1}, {1, 1, 1}}) {
            ModelSpec s = random_vector_model(kind, static_cast<int>(m.size()), m);
            auto W = weight_subspace(build_module(s), m);
            auto P = universal_pencil(s, W);
            auto F = kernel_frame(P, kernel_plan(kind, s.twist, m, P.dim()));
            EXPECT_EQ(F.elements.size(), static_cast<std::size_t>(s.N * W.dim()));
            for (std::size_t b = 0; b < F.per_base.size(); ++b)
                for (int d : F.per_base[b].degrees)
                    EXPECT_EQ(d, m[b]);
            EXPECT_LT(F.max_residual, 1e-8);
            EXPECT_LT(certify(F, P).condition, 1e8);
            for (const auto &f : F.elements)
                EXPECT_LT(direct_residual(s, W, f, rc() * 2.0), 1e-8);
        }
}

TEST(Kernel, PolynomialFramesForTrivialTwist)
{
    struct Case {
        ModelKind kind;
        std::vector<int> m;
        std::vector<int> degrees;
    };
    for (const auto &c : std::vector<Case>{{ModelKind::xxx, {1, 1}, {1, 2}},
                                           {ModelKind::gaudin, {1, 1}, {1, 2}},
                                           {ModelKind::xxx, {3, 0}, {0, 4}},
                                           {ModelKind::xxx, {2}, {2}},
                                           {ModelKind::gaudin, {1, 1, 1}, {1, 2, 3}}}) {
        const int N = static_cast<int>(c.m.size());
        ModelSpec s = random_vector_model(c.kind, N, c.m);
        s.twist = c.kind == ModelKind::xxx ? CMatrix(CMatrix::Identity(N, N)) : CMatrix(CMatrix::Zero(N, N));
        auto S = singular_subspace(weight_subspace(build_module(s), c.m));
        ASSERT_EQ(S.dim(), 1);
        auto P = universal_pencil(s, S);
        auto F = kernel_frame(P, kernel_plan(c.kind, s.twist, c.m, 1, true));
        EXPECT_EQ(F.per_base[0].degrees, c.degrees);
        EXPECT_LT(F.max_residual, 1e-8);
        EXPECT_LT(certify(F, P).condition, 1e8);
    }
}

TEST(Kernel, CasoratianOfTwoExponentials)
{
    const Complex q1(1.2, 0.3), q2(-0.7, 0.5), u0(0.4, 0.2);
    KernelFrame F;
    F.kind = ModelKind::xxx;
    F.N = 2;
    F.dim = 1;
    for (auto q : {q1, q2}) {
        QuasiExponential e;
        e.base = q;
        e.log_base = std::log(q);
        e.scaled = {CVector::Ones(1)};
        F.elements.push_back(e);
    }
    auto c = casorati_certificate(F, u0);
    EXPECT_TRUE(c.ok);
    // undo the column normalisation and compare with the closed form
    Complex det = c.matrix.determinant();
    for (const auto &e : F.elements) {
        CVector col(2);
        col << e(u0)(0), e(u0 - 1.0)(0);
        det *= col.norm();
    }
    const Complex expect = std::exp(u0 * std::log(q1)) * std::exp(u0 * std::log(q2)) * (1.0 / q2 - 1.0 / q1);
    EXPECT_LT(std::abs(det - expect) / std::abs(expect), 1e-12);

    F.elements[1] = F.elements[0];
    EXPECT_FALSE(casorati_certificate(F, u0).ok);
}

TEST(Kernel, MixedBaseSplit)
{
    for (auto kind : {ModelKind::xxx, ModelKind::gaudin}) {
        ModelSpec s = random_vector_model(kind, 2, {2, 1});
        auto P = universal_pencil(s, weight_subspace(build_module(s), {2, 1}));
        auto r = mixed_base_split(P, s.twist_diagonal(), 3);
        EXPECT_EQ(r.joint_nullity, r.per_base_total);
        EXPECT_EQ(r.joint_nullity, 6);
        EXPECT_LT(r.max_part_residual, 1e-7);
    }
}

TEST(Kernel, LocalDataDifference)
{
    ModelSpec s = random_vector_model(ModelKind::xxx, 2, {1, 1});
    auto P = universal_pencil(s, weight_subspace(build_module(s), {1, 1}));
    auto F = kernel_frame(P, kernel_plan(ModelKind::xxx, s.twist, {1, 1}, P.dim()));
    for (int i = 0; i < 2; ++i) {
        auto L = local_data_xxx(F, s, i);
        EXPECT_LT(L.condition, 1e6);
        EXPECT_LT(L.cascade_max, 1e-7);
    }
    // zero weight at a site: S_i is z_i - 1, ..., z_i - N
    ModelSpec t = s;
    t.N = 3;
    t.weights = {GlWeight{{0, 0, 0}}};
    t.z = {Complex(0.5, 0.5)};
    auto pts = s_points(t, 0);
    std::set<double> offs;
    for (auto p : pts)
        offs.insert(std::round((t.z[0] - p).real()));
    EXPECT_EQ(offs, (std::set<double>{1.0, 2.0, 3.0}));
}

TEST(Kernel, LocalExponentsDifferential)
{
    ModelSpec s = random_vector_model(ModelKind::gaudin, 3, {1, 1, 1});
    auto P = universal_pencil(s, weight_subspace(build_module(s), {1, 1, 1}));
    auto F = kernel_frame(P, kernel_plan(ModelKind::gaudin, s.twist, {1, 1, 1}, P.dim()));
    for (int r = 0; r < 3; ++r) {
        auto E = local_exponents_gaudin(F, s, r);
        EXPECT_EQ(E.taylor, E.expected);
        EXPECT_LT(E.worst_fit_error, 0.05);
        Poly ind = point_indicial_rhs(s.weights[static_cast<std::size_t>(r)]);
        for (int e : E.taylor)
            EXPECT_LT(std::abs(ind(double(e))), 1e-12);
    }
}

TEST(Kernel, FundamentalOperators)
{
    for (auto kind : {ModelKind::xxx, ModelKind::gaudin}) {
        ModelSpec s = random_vector_model(kind, 2, {1, 1});
        auto W = weight_subspace(build_module(s), {1, 1});
        auto P = universal_pencil(s, W);
        auto c = completeness_census(s);
        ASSERT_EQ(c.entries.size(), 2u);
        for (const auto &e : c.entries) {
            auto lam = eigenvalues(kind, e.solution.variables, params_of(s));
            auto S = scalar_pencil_from(kind, 2, s.z, [&](Complex u) { return lam(u); });
            auto F = kernel_frame(S, kernel_plan(kind, s.twist, {1, 1}, 1));
            ASSERT_EQ(F.elements.size(), 2u);
            EXPECT_EQ(F.per_base[0].degrees, std::vector<int>{1});
            EXPECT_EQ(F.per_base[1].degrees, std::vector<int>{1});
            auto Fv = kernel_frame(scalar_pencil(P, e.bethe_vector), kernel_plan(kind, s.twist, {1, 1}, 1));
            EXPECT_LT(Fv.max_residual, 1e-8);
        }
    }
    // N = 1: the scalar pencil of the only vector is the universal one
    ModelSpec one = random_vector_model(ModelKind::xxx, 1, {2});
    auto P1 = universal_pencil(one, weight_subspace(build_module(one), {2}));
    auto S1 = scalar_pencil(P1, CVector::Ones(1));
    const Complex u = rc();
    EXPECT_LT(std::abs(S1(1, u)(0, 0) - P1(1, u)(0, 0)), 1e-12);
}

TEST(Kernel, FundamentalOperatorTrivialTwist)
{
    // Q = 1 singular eigenvector: polynomial kernel of degrees m_1 + N - 1, ..., m_N
    ModelSpec s = random_vector_model(ModelKind::xxx, 2, {2, 2});
    s.twist = CMatrix::Identity(2, 2);
    auto S = singular_subspace(weight_subspace(build_module(s), {2, 2}));
    ASSERT_EQ(S.dim(), 2);
    auto P = universal_pencil(s, S);
    auto ed = eig(transfer(s, S, rc())[1]);
    for (const auto &p : ed.pairs) {
        auto F = kernel_frame(scalar_pencil(P, p.vector), kernel_plan(ModelKind::xxx, s.twist, {2, 2}, 1, true));
        EXPECT_EQ(F.per_base[0].degrees, (std::vector<int>{2, 3}));
    }
}

// ---------------------------------------------------------------------------
// compare
// ---------------------------------------------------------------------------

TEST(Compare, Multipliers)
{
    const Complex z(0.3, 0.4), u(1.7, -0.2);
    EXPECT_LT(poly_distance(multiplier_xxx({{1}}, {0.0}), Poly::linear(0.0)), 1e-14);
    EXPECT_EQ(multiplier_xxx({{0, 0}}, {z, u}).degree(), 0);
    EXPECT_LT(poly_distance(multiplier_xxx({{2}}, {z}), Poly::linear(z) * Poly::linear(z + 1.0)), 1e-14);
    EXPECT_LT(poly_distance(multiplier_gaudin({{2}}, {z}), Poly::linear(z) * Poly::linear(z)), 1e-14);
    EXPECT_EQ(multiplier_gaudin({{0}}, {z}).degree(), 0);
    EXPECT_LT(poly_distance(multiplier_gaudin({{1, 1}}, {z, u}), Poly::linear(z) * Poly::linear(u)), 1e-14);
    EXPECT_THROW(multiplier_xxx({{-1}}, {z}), invalid_input_error);

    // Gamma-ratio telescoping against std::tgamma on the real line
    const double zr = 0.25, x = 3.6;
    const double gam = std::tgamma(x - zr + 1.0) / std::tgamma(x - zr - 2.0 + 1.0);
    EXPECT_NEAR(multiplier_xxx({{2}}, {zr})(x).real(), gam, 1e-12 * gam);

    std::vector<Complex> probes{rc(), rc(), rc()};
    EXPECT_LT(functional_equation_residual({{2, 0, 1}}, {rc(), rc(), rc()}, probes), 1e-12);
}

TEST(Compare, SingleSiteByHand)
{
    // shifted model: weight (1) at z + 1; its pencil is 1 - q (u - z)/(u - z - 1) tau^-1
    const Complex z(0.2, 0.3), q(0.8, -0.6);
    ModelSpec base = vector_model(ModelKind::xxx, 1, {0}, {z}, {q});
    base.weights = {GlWeight{{0}}};
    auto sh = shifted_model(base, {{1}});
    auto Ps = universal_pencil(sh, weight_subspace(build_module(sh), sh.target_weight));
    const Complex u(1.9, 0.7);
    EXPECT_LT(std::abs(Ps(1, u)(0, 0) - q * (u - z) / (u - z - 1.0)), 1e-10);
    auto h = [&](Complex v, Complex r) { return (v - r) * std::exp(v * std::log(q)); };
    auto res = [&](Complex r) { return std::abs(h(u, r) - Ps(1, u)(0, 0) * h(u - 1.0, r)) / std::abs(h(u, r)); };
    EXPECT_LT(res(z), 1e-10);
    EXPECT_GT(res(z + 1.0), 1e-2); // a wrong multiplier leaves the kernel

    auto rep = verify_comparison(base, {{1}});
    EXPECT_TRUE(rep.ok);

    ModelSpec gb = base;
    gb.kind = ModelKind::gaudin;
    auto rg = verify_comparison(gb, {{1}});
    EXPECT_TRUE(rg.ok);
    EXPECT_EQ(rg.base_kernel_dim, 1);
}

TEST(Compare, ShiftPlans)
{
    struct Case {
        ModelKind kind;
        std::vector<int> m;
        std::vector<int> a;
    };
    for (const auto &c : std::vector<Case>{{ModelKind::xxx, {1, 1}, {0, 0}},
                                           {ModelKind::xxx, {1, 1}, {2, 1}},
                                           {ModelKind::gaudin, {1, 1}, {1, 2}},
                                           {ModelKind::xxx, {2, 1}, {0, 2, 1}},
                                           {ModelKind::gaudin, {1, 1, 1}, {1, 0, 1}}}) {
        ModelSpec s = random_vector_model(c.kind, static_cast<int>(c.m.size()), c.m);
        auto rep = verify_comparison(s, {c.a});
        EXPECT_TRUE(rep.ok);
        EXPECT_EQ(rep.base_kernel_dim, rep.shifted_kernel_dim);
        EXPECT_LT(rep.forward_residual, 1e-7);
        EXPECT_LT(rep.converse_residual, 1e-7);
    }
}

// ---------------------------------------------------------------------------
// pipeline
// ---------------------------------------------------------------------------

namespace
{

json base_config()
{
    return json::parse(R"({
      "model": {"kind": "xxx", "N": 2, "weights": [[1, 0], [1, 0]],
                "z": [[0.3, 0.1], [1.7, -0.4]], "twist_diagonal": [[1.3, 0.0], [0.6, 0.0]],
                "target_weight": [1, 1]},
      "pipeline": "pencil", "rng_seed": 5})");
}

} // namespace

TEST(Pipeline, ConfigValidation)
{
    EXPECT_NO_THROW(config_from_json(base_config()));
    auto bad = base_config();
    bad["model"]["weights"][0] = {0, 1};
    EXPECT_THROW(config_from_json(bad), invalid_input_error);
    bad = base_config();
    bad["model"]["target_weight"] = {2, 1};
    EXPECT_THROW(config_from_json(bad), invalid_input_error);
    bad = base_config();
    bad["model"]["z"][1] = bad["model"]["z"][0];
    EXPECT_THROW(config_from_json(bad), invalid_input_error);
    bad = base_config();
    bad["pipeline"] = "everything";
    EXPECT_THROW(config_from_json(bad), invalid_input_error);
    bad = base_config();
    bad["tolerances"]["residual"] = 1e-20;
    EXPECT_THROW(config_from_json(bad), invalid_input_error);
    bad = base_config();
    bad["model"].erase("twist_diagonal");
    EXPECT_THROW(config_from_json(bad), invalid_input_error);
    bad = base_config();
    bad["model"]["z"][0] = {1.0};
    EXPECT_THROW(config_from_json(bad), invalid_input_error);
}

TEST(Pipeline, PencilReportHasTwistRoots)
{
    auto rep = run(config_from_json(base_config()));
    EXPECT_TRUE(rep.passed());
    bool found = false;
    for (const auto &c : rep.checks)
        if (c.tag == "leading-coefficients") {
            found = true;
            std::vector<double> re;
            for (const auto &r : c.data.at("roots"))
                re.push_back(r[0].get<double>());
            std::sort(re.begin(), re.end());
            EXPECT_NEAR(re[0], 0.6, 1e-9);
            EXPECT_NEAR(re[1], 1.3, 1e-9);
        }
    EXPECT_TRUE(found);
}

TEST(Pipeline, CensusAndDeterminism)
{
    auto j = base_config();
    j["pipeline"] = "census";
    auto cfg = config_from_json(j);
    auto a = run(cfg), b = run(cfg);
    ASSERT_EQ(a.checks.size(), 1u);
    EXPECT_EQ(a.checks[0].status, CheckStatus::pass);
    EXPECT_EQ(a.checks[0].data.at("distinct").get<int>(), 2);
    EXPECT_EQ(a.to_json(false).dump(), b.to_json(false).dump());
    EXPECT_EQ(a.to_json().at("rng_seed").get<std::uint64_t>(), 5u);
}

TEST(Pipeline, AllPipelinesOnGaudin)
{
    auto j = base_config();
    j["model"]["kind"] = "gaudin";
    j["pipeline"] = "all";
    j["shift_plan"] = {2, 1};
    auto rep = run(config_from_json(j));
    for (const auto &c : rep.checks)
        EXPECT_NE(c.status, CheckStatus::fail) << c.name << " " << c.data.dump();
    EXPECT_TRUE(rep.passed());
}
