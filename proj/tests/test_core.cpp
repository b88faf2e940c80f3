// Algebra helpers, representations and the operator pencils.

#include <gtest/gtest.h>

#include <random>

#include <qexp/gaudin_op.hpp>

using namespace qexp;

namespace
{

std::mt19937_64 &rng()
{
    static std::mt19937_64 g(20261016);
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

// Matrix unit E_ab on C^N.
CMatrix unit(int N, int a, int b)
{
    CMatrix E = CMatrix::Zero(N, N);
    E(a, b) = 1.0;
    return E;
}

// E_ab acting on site i of (C^N)^{(x)n}, built directly with Kronecker products.
CMatrix site_unit(int N, int n, int i, int a, int b)
{
    CMatrix r = CMatrix::Identity(1, 1);
    for (int s = 0; s < n; ++s)
        r = kron(r, s == i ? unit(N, a, b) : CMatrix(CMatrix::Identity(N, N)));
    return r;
}

// T_ab(u) from the explicit product L^{(n-1)} ... L^{(0)} in the auxiliary space.
std::vector<CMatrix> brute_t(int N, const std::vector<Complex> &z, Complex u)
{
    const int n = static_cast<int>(z.size());
    const Eigen::Index D = static_cast<Eigen::Index>(std::pow(N, n));
    std::vector<CMatrix> T(static_cast<std::size_t>(N * N));
    for (int a = 0; a < N; ++a)
        for (int b = 0; b < N; ++b)
            T[static_cast<std::size_t>(a * N + b)] = a == b ? CMatrix(CMatrix::Identity(D, D)) : CMatrix(CMatrix::Zero(D, D));
    for (int i = 0; i < n; ++i) {
        std::vector<CMatrix> next(static_cast<std::size_t>(N * N));
        // (L T)_ab = sum_c L_ac T_cb, L_ac = delta_ac + e_ca/(u - z)
        for (int a = 0; a < N; ++a)
            for (int b = 0; b < N; ++b) {
                CMatrix acc = CMatrix::Zero(D, D);
                for (int c = 0; c < N; ++c) {
                    CMatrix L = site_unit(N, n, i, c, a) / (u - z[static_cast<std::size_t>(i)]);
                    if (a == c)
                        L += CMatrix::Identity(D, D);
                    acc += L * T[static_cast<std::size_t>(c * N + b)];
                }
                next[static_cast<std::size_t>(a * N + b)] = acc;
            }
        T = next;
    }
    return T;
}

double rel(const CMatrix &X, const CMatrix &Y) { return (X - Y).norm() / std::max({X.norm(), Y.norm(), 1e-300}); }

} // namespace

// ---------------------------------------------------------------------------
// algebra
// ---------------------------------------------------------------------------

TEST(Algebra, InterpolateLinear)
{
    std::vector<std::pair<Complex, Complex>> pts{{0.0, 1.0}, {1.0, 2.0}};
    Poly p = poly_interpolate(pts, 1);
    EXPECT_NEAR(std::abs(p.coeff(0) - 1.0), 0.0, 1e-12);
    EXPECT_NEAR(std::abs(p.coeff(1) - 1.0), 0.0, 1e-12);
}

TEST(Algebra, InterpolateConstant)
{
    const Complex c(0.4, -2.5);
    std::vector<std::pair<Complex, Complex>> pts{{0.0, c}, {1.0, c}, {2.0, c}};
    Poly p = poly_interpolate(pts, 2);
    EXPECT_LT(std::abs(p.coeff(0) - c), 1e-12);
    EXPECT_LT(std::abs(p.coeff(1)), 1e-12);
    EXPECT_LT(std::abs(p.coeff(2)), 1e-12);
}

TEST(Algebra, InterpolateQuadratic)
{
    std::vector<std::pair<Complex, Complex>> pts;
    for (int x = 0; x < 4; ++x)
        pts.emplace_back(x, double(x * x - 3 * x + 2));
    Poly p = poly_interpolate(pts, 3);
    EXPECT_LT(poly_distance(p, Poly(std::vector<Complex>{2.0, -3.0, 1.0})), 1e-12);
}

TEST(Algebra, InterpolationRecoversRandomPolynomials)
{
    for (int trial = 0; trial < 10; ++trial) {
        std::vector<Complex> c;
        for (int j = 0; j <= 6; ++j)
            c.push_back(rc());
        Poly truth(c);
        std::vector<std::pair<Complex, Complex>> pts;
        for (auto x : circle_abscissas(std::vector<Complex>{0.0}, 12, 1.0))
            pts.emplace_back(x, truth(x));
        EXPECT_LT(poly_distance(poly_interpolate(pts, 8), truth), 1e-10);
    }
}

TEST(Algebra, NullspaceExamples)
{
    CMatrix A(2, 2);
    A << 1.0, 0.0, 0.0, 0.0;
    auto ns = nullspace(A, 1e-10);
    ASSERT_EQ(ns.size(), 1u);
    EXPECT_NEAR(std::abs(ns[0](1)), 1.0, 1e-12);
    EXPECT_NEAR(std::abs(ns[0](0)), 0.0, 1e-12);

    EXPECT_TRUE(nullspace(CMatrix::Identity(3, 3), 1e-10).empty());

    CVector v(2);
    v << 1.0, 2.0;
    CMatrix R = v * v.transpose();
    auto nr = nullspace(R, 1e-10);
    ASSERT_EQ(nr.size(), 1u);
    CVector expect(2);
    expect << 2.0 / std::sqrt(5.0), -1.0 / std::sqrt(5.0);
    EXPECT_NEAR(std::abs(nr[0].dot(expect)), 1.0, 1e-12);
}

TEST(Algebra, NullspaceDimensionOfRandomLowRank)
{
    for (int r = 0; r <= 5; ++r) {
        CMatrix A = CMatrix::Zero(7, 6);
        for (int k = 0; k < r; ++k) {
            CVector x(7), y(6);
            for (auto &e : x)
                e = rc();
            for (auto &e : y)
                e = rc();
            A += x * y.adjoint();
        }
        auto ns = nullspace(A, 1e-9);
        EXPECT_EQ(static_cast<int>(ns.size()), 6 - r);
        for (const auto &v : ns)
            EXPECT_LT((A * v).norm(), 1e-9 * std::max(1.0, A.norm()));
    }
}

TEST(Algebra, EigenExamples)
{
    CMatrix D(2, 2);
    D << 2.0, 0.0, 0.0, 3.0;
    auto e = eig(D);
    std::vector<double> re;
    for (auto x : e.values)
        re.push_back(x.real());
    std::sort(re.begin(), re.end());
    EXPECT_NEAR(re[0], 2.0, 1e-12);
    EXPECT_NEAR(re[1], 3.0, 1e-12);

    CMatrix X(2, 2);
    X << 0.0, 1.0, 1.0, 0.0;
    auto ex = eig(X);
    re.clear();
    for (auto x : ex.values)
        re.push_back(x.real());
    std::sort(re.begin(), re.end());
    EXPECT_NEAR(re[0], -1.0, 1e-12);
    EXPECT_NEAR(re[1], 1.0, 1e-12);

    CMatrix J(2, 2);
    J << 0.0, 1.0, 0.0, 0.0;
    auto ej = eig(J);
    for (auto x : ej.values)
        EXPECT_LT(std::abs(x), 1e-6);
}

TEST(Algebra, RatFnShiftAndProduct)
{
    RatFn f(Poly::linear(1.0), Poly::linear(-2.0)); // (u-1)/(u+2)
    RatFn g = f.shifted(1.0);
    const Complex u(0.3, 0.8);
    EXPECT_LT(std::abs(g(u) - f(u + 1.0)), 1e-12);
    EXPECT_LT(std::abs((f * f)(u) - f(u) * f(u)), 1e-12);
}

// ---------------------------------------------------------------------------
// repcore
// ---------------------------------------------------------------------------

TEST(Repcore, AdmissibleEnumeration)
{
    EXPECT_EQ(enumerate_admissible(2, 1, {1, 0}), (std::vector<AdmissibleIndex>{{0}}));
    auto two = enumerate_admissible(2, 2, {1, 1});
    std::set<AdmissibleIndex> got(two.begin(), two.end());
    EXPECT_EQ(got, (std::set<AdmissibleIndex>{{0, 2}, {2, 0}}));
    auto six = enumerate_admissible(3, 3, {1, 1, 1});
    EXPECT_EQ(six.size(), 6u);
    for (auto a : six) {
        std::sort(a.begin(), a.end());
        EXPECT_EQ(a, (AdmissibleIndex{0, 2, 3}));
    }
}

TEST(Repcore, AdmissibleCountMatchesMultinomial)
{
    // n! / prod m_i!
    auto fact = [](int k) { return std::tgamma(k + 1.0); };
    for (auto m : std::vector<std::vector<int>>{{2, 1}, {2, 2}, {1, 1, 1}, {2, 1, 1}, {3, 0, 1}}) {
        int n = 0;
        double den = 1.0;
        for (int x : m) {
            n += x;
            den *= fact(x);
        }
        EXPECT_EQ(static_cast<double>(enumerate_admissible(static_cast<int>(m.size()), n, m).size()), fact(n) / den);
    }
}

TEST(Repcore, VectorWeightSubspaces)
{
    auto W = weight_subspace(build_vector_module(2, 2), {1, 1});
    ASSERT_EQ(W.dim(), 2);
    std::set<std::string> labels(W.labels.begin(), W.labels.end());
    EXPECT_EQ(labels, (std::set<std::string>{"21", "12"}));
    EXPECT_EQ(weight_subspace(build_vector_module(2, 1), {0, 1}).dim(), 1);
    EXPECT_EQ(weight_subspace(build_vector_module(3, 2), {2, 0, 0}).dim(), 1);
}

TEST(Repcore, IrreducibleDimensions)
{
    EXPECT_EQ(build_irreducible(GlWeight{{1, 0, 0}}).dim, 3);
    EXPECT_EQ(build_irreducible(GlWeight{{2, 0}}).dim, 3);
    EXPECT_EQ(build_irreducible(GlWeight{{1, 1}}).dim, 1);
    for (auto w : std::vector<std::vector<int>>{{2, 1, 0}, {3, 1, 0}, {2, 2, 1}, {2, 0, 0}, {3, 0}})
        EXPECT_EQ(build_irreducible(GlWeight{w}).dim, weyl_dimension(GlWeight{w}));
}

TEST(Repcore, IrreducibleCommutationRelations)
{
    auto s = build_irreducible(GlWeight{{2, 1, 0}});
    const int N = 3;
    double worst = 0.0;
    for (int a = 0; a < N; ++a)
        for (int b = 0; b < N; ++b)
            for (int c = 0; c < N; ++c)
                for (int d = 0; d < N; ++d) {
                    CMatrix lhs = commutator(s.gen(a, b), s.gen(c, d));
                    CMatrix rhs = CMatrix::Zero(s.dim, s.dim);
                    if (b == c)
                        rhs += s.gen(a, d);
                    if (a == d)
                        rhs -= s.gen(c, b);
                    worst = std::max(worst, (lhs - rhs).norm());
                }
    EXPECT_LT(worst, 1e-10);
}

TEST(Repcore, SingularSubspaces)
{
    auto W = weight_subspace(build_vector_module(2, 2), {1, 1});
    auto S = singular_subspace(W);
    ASSERT_EQ(S.dim(), 1);
    // e21 v (x) v - v (x) e21 v in full coordinates: words (1,0) and (0,1) are indices 2 and 1
    CVector x = S.basis.col(0);
    EXPECT_NEAR(std::abs(x(1) + x(2)), 0.0, 1e-12);
    EXPECT_NEAR(std::abs(x(1)), 1.0 / std::sqrt(2.0), 1e-12);

    EXPECT_EQ(singular_subspace(weight_subspace(build_vector_module(2, 3), {3, 0})).dim(), 1);
    EXPECT_EQ(singular_subspace(weight_subspace(build_vector_module(2, 2), {0, 2})).dim(), 0);
}

TEST(Repcore, HighestWeightSeriesAndDrinfeld)
{
    ModelSpec s = vector_model(ModelKind::xxx, 2, {1, 0}, {Complex(0.4, 0.1)}, {1.0, 1.0});
    auto c = highest_weight_series(s);
    const Complex u(1.3, -0.6), z = s.z[0];
    EXPECT_LT(std::abs(c[0](u) - (u - z + 1.0) / (u - z)), 1e-12);
    EXPECT_LT(std::abs(c[1](u) - 1.0), 1e-12);

    ModelSpec t = s;
    t.weights = {GlWeight{{0, 0}}};
    for (auto &f : highest_weight_series(t))
        EXPECT_LT(std::abs(f(u) - 1.0), 1e-12);
    for (auto &p : drinfeld_polynomials(t))
        EXPECT_EQ(p.degree(), 0);

    t.weights = {GlWeight{{2, 1}}};
    auto P = drinfeld_polynomials(t);
    EXPECT_LT(poly_distance(P[0], Poly::linear(z - 1.0)), 1e-12);
    EXPECT_LT(poly_distance(P[1], Poly::linear(z + 1.0)), 1e-12);
}

// ---------------------------------------------------------------------------
// xxx operators
// ---------------------------------------------------------------------------

TEST(Xxx, SingleSiteEntries)
{
    // N = 1: T_11 = (u - z + 1)/(u - z)
    auto W1 = full_space(build_vector_module(1, 1));
    const Complex z(0.3, 0.2), u(1.1, -0.7);
    EXPECT_LT(std::abs(t_action(W1, {z}, 0, 0, u)(0, 0) - (u - z + 1.0) / (u - z)), 1e-12);

    // vector rep: T_ab = delta + E_ba/(u - z) on C^3
    auto W3 = full_space(build_vector_module(3, 1));
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) {
            CMatrix expect = unit(3, b, a) / (u - z);
            if (a == b)
                expect += CMatrix::Identity(3, 3);
            EXPECT_LT((t_action(W3, {z}, a, b, u) - expect).norm(), 1e-12);
        }
}

TEST(Xxx, EntriesMatchExplicitProduct)
{
    for (auto [N, n] : std::vector<std::pair<int, int>>{{2, 2}, {2, 3}, {3, 2}}) {
        std::vector<Complex> z;
        for (int i = 0; i < n; ++i)
            z.push_back(rc());
        auto W = full_space(build_vector_module(N, n));
        const Complex u = rc() * 2.0;
        auto T = brute_t(N, z, u);
        for (int a = 0; a < N; ++a)
            for (int b = 0; b < N; ++b)
                EXPECT_LT(rel(t_action(W, z, a, b, u), T[static_cast<std::size_t>(a * N + b)]), 1e-12);
    }
}

TEST(Xxx, HighestWeightEigenvalues)
{
    ModelSpec s = random_vector_model(ModelKind::xxx, 3, {2, 0, 0});
    auto W = weight_subspace(build_module(s), s.target_weight);
    auto c = highest_weight_series(s);
    const Complex u = rc();
    for (int a = 0; a < 3; ++a)
        EXPECT_LT(std::abs(t_action(W, s.z, a, a, u)(0, 0) - c[static_cast<std::size_t>(a)](u)), 1e-12);
}

TEST(Xxx, FirstCoefficientIsTwistedTrace)
{
    ModelSpec s = random_vector_model(ModelKind::xxx, 3, {1, 1, 1});
    auto W = weight_subspace(build_module(s), s.target_weight);
    const Complex u = rc();
    auto te = xxx_transfer(W, s.z, s.twist, u);
    CMatrix tr = CMatrix::Zero(W.dim(), W.dim());
    for (int a = 0; a < 3; ++a)
        tr += s.twist(a, a) * t_action(W, s.z, a, a, u);
    EXPECT_LT(rel(te[1], tr), 1e-12);
    EXPECT_LT(rel(te[0], CMatrix::Identity(W.dim(), W.dim())), 1e-14);
}

TEST(Xxx, PencilSingleSite)
{
    const Complex z(0.2, -0.3), q(1.4, 0.5);
    ModelSpec s = vector_model(ModelKind::xxx, 1, {1}, {z}, {q});
    auto P = universal_pencil(s, weight_subspace(build_module(s), {1}));
    const Complex u(2.1, 0.4);
    EXPECT_LT(std::abs(P(0, u)(0, 0) - 1.0), 1e-12);
    EXPECT_LT(std::abs(P(1, u)(0, 0) - q * (u - z + 1.0) / (u - z)), 1e-10);
}

TEST(Xxx, TopCoefficientFormula)
{
    for (auto m : std::vector<std::vector<int>>{{1, 1}, {2, 1}, {1, 1, 1}, {2, 1, 1}}) {
        ModelSpec s = random_vector_model(ModelKind::xxx, static_cast<int>(m.size()), m);
        auto W = weight_subspace(build_module(s), m);
        const Complex u = rc();
        auto te = xxx_transfer(W, s.z, s.twist, u);
        CMatrix expect = te_n_formula(s, u) * CMatrix::Identity(W.dim(), W.dim());
        EXPECT_LT(rel(te.back(), expect), 1e-11);
    }
}

TEST(Xxx, CharacteristicPolynomial)
{
    for (auto m : std::vector<std::vector<int>>{{1}, {1, 1}, {2, 1}, {1, 1, 1}}) {
        const int N = static_cast<int>(m.size());
        ModelSpec s = random_vector_model(ModelKind::xxx, N, m);
        auto P = universal_pencil(s, weight_subspace(build_module(s), m));
        auto cd = characteristic_data(P);
        auto q = s.twist_diagonal();
        std::vector<Complex> w;
        for (int j = 0; j < N; ++j)
            w.push_back(double(m[static_cast<std::size_t>(j)]) * q[static_cast<std::size_t>(j)]);
        auto [full, sub] = expected_characteristic(q, w);
        EXPECT_LT(poly_distance(cd.char_poly, full), 1e-7);
        EXPECT_LT(poly_distance(cd.sub_poly, sub), 1e-7);
        if (N == 1) {
            EXPECT_LT(poly_distance(cd.char_poly, Poly::linear(q[0])), 1e-10);
        }
    }
}

TEST(Xxx, SeIndicialAtInfinity)
{
    ModelSpec s = random_vector_model(ModelKind::xxx, 2, {1, 1});
    s.twist = CMatrix::Identity(2, 2);
    auto S = singular_subspace(weight_subspace(build_module(s), {1, 1}));
    auto se = modified_pencil_Se(universal_pencil(s, S));
    EXPECT_LT(std::abs(se.se0[0] - 1.0), 1e-10);
    // (d - 2)(d - 1)
    Poly rhs = Poly::linear(2.0) * Poly::linear(1.0);
    EXPECT_LT(poly_distance(se.rhs, rhs), 1e-14);
    for (int d = 0; d <= 4; ++d)
        EXPECT_LT(std::abs(se.lhs(double(d)) - rhs(double(d))), 1e-6);
    EXPECT_LT(se.lower_order_max, 1e-6);
}

TEST(Xxx, QuantumDeterminant)
{
    ModelSpec s = random_vector_model(ModelKind::xxx, 2, {2, 0});
    auto W = weight_subspace(build_module(s), {2, 0});
    auto c = highest_weight_series(s);
    const Complex u = rc();
    EXPECT_LT(std::abs(qdet(W, s.z, u)(0, 0) - c[0](u) * c[1](u - 1.0)), 1e-12);
    auto F = full_space(build_module(s));
    const Complex far(1e6, 3e5);
    EXPECT_LT((qdet(F, s.z, far) - CMatrix::Identity(F.dim(), F.dim())).norm(), 1e-5);
}

TEST(Xxx, CommutingFamilyProperty)
{
    for (auto m : std::vector<std::vector<int>>{{1, 1}, {2, 1}, {1, 1, 1}}) {
        ModelSpec s = random_vector_model(ModelKind::xxx, static_cast<int>(m.size()), m);
        CMatrix Q(s.N, s.N);
        for (Eigen::Index i = 0; i < Q.size(); ++i)
            Q.data()[i] = rc(); // a full twist does not preserve weight spaces
        auto W = full_space(build_module(s));
        for (int trial = 0; trial < 4; ++trial) {
            auto a = xxx_transfer(W, s.z, Q, rc()), b = xxx_transfer(W, s.z, Q, rc());
            for (int k = 1; k <= s.N; ++k)
                for (int l = 1; l <= s.N; ++l)
                    EXPECT_LT((a[k] * b[l] - b[l] * a[k]).norm() / (a[k].norm() * b[l].norm()), 1e-9);
        }
    }
}

TEST(Xxx, EquivarianceAndRtt)
{
    ModelSpec s = random_vector_model(ModelKind::xxx, 2, {1, 1});
    auto M = build_module(s);
    EXPECT_LT(xxx_conjugation_check(M, s.z, s.twist, CMatrix::Identity(2, 2), rc()), 1e-13);
    for (int t = 0; t < 5; ++t) {
        CMatrix A(2, 2);
        for (Eigen::Index i = 0; i < 4; ++i)
            A.data()[i] = rc();
        EXPECT_LT(xxx_conjugation_check(M, s.z, s.twist, A, rc()), 1e-9);
        EXPECT_LT(rtt_check(full_space(M), s.z, rc(), rc()), 1e-9);
    }
}

// ---------------------------------------------------------------------------
// gaudin operators
// ---------------------------------------------------------------------------

TEST(Gaudin, LEntries)
{
    auto W = full_space(build_vector_module(2, 1));
    const Complex z(0.5, 0.5), u(-0.7, 1.2);
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
            EXPECT_LT((l_action(W, {z}, a, b, u) - unit(2, b, a) / (u - z)).norm(), 1e-12);

    // large u: u L_ab -> sum_i e_ba
    auto F = full_space(build_vector_module(2, 2));
    std::vector<Complex> zz{rc(), rc()};
    const Complex big(1e7, 0.0);
    CMatrix lim = big * l_action(F, zz, 0, 1, big);
    CMatrix expect = site_unit(2, 2, 0, 1, 0) + site_unit(2, 2, 1, 1, 0);
    EXPECT_LT((lim - expect).norm(), 1e-5);
}

TEST(Gaudin, TraceOfLOnWeightSpace)
{
    ModelSpec s = random_vector_model(ModelKind::gaudin, 2, {2, 1});
    auto W = weight_subspace(build_module(s), {2, 1});
    const Complex u = rc();
    CMatrix tr = l_action(W, s.z, 0, 0, u) + l_action(W, s.z, 1, 1, u);
    Complex expect{};
    for (auto z : s.z)
        expect += 1.0 / (u - z);
    EXPECT_LT((tr - expect * CMatrix::Identity(W.dim(), W.dim())).norm(), 1e-12);
}

TEST(Gaudin, PencilSingleSite)
{
    const Complex z(0.1, 0.9), K(-0.6, 0.2);
    ModelSpec s = vector_model(ModelKind::gaudin, 1, {1}, {z}, {K});
    auto P = universal_pencil(s, weight_subspace(build_module(s), {1}));
    const Complex u(1.4, -0.3);
    EXPECT_LT(std::abs(P(0, u)(0, 0) - 1.0), 1e-12);
    EXPECT_LT(std::abs(P(1, u)(0, 0) - (K + 1.0 / (u - z))), 1e-10);
}

TEST(Gaudin, CharacteristicPolynomial)
{
    for (auto m : std::vector<std::vector<int>>{{1, 1}, {2, 1}, {1, 1, 1}}) {
        const int N = static_cast<int>(m.size());
        ModelSpec s = random_vector_model(ModelKind::gaudin, N, m);
        auto cd = characteristic_data(universal_pencil(s, weight_subspace(build_module(s), m)));
        auto q = s.twist_diagonal();
        std::vector<Complex> w;
        for (int j = 0; j < N; ++j)
            w.push_back(double(m[static_cast<std::size_t>(j)]));
        auto [full, sub] = expected_characteristic(q, w);
        EXPECT_LT(poly_distance(cd.char_poly, full), 1e-7);
        EXPECT_LT(poly_distance(cd.sub_poly, sub), 1e-7);
    }
}

TEST(Gaudin, IndicialPolynomials)
{
    ModelSpec s = random_vector_model(ModelKind::gaudin, 2, {1, 1});
    auto P = universal_pencil(s, weight_subspace(build_module(s), {1, 1}));
    auto id = indicial_data(s, P);
    Poly dd = Poly::linear(2.0) * Poly::linear(0.0); // (d - 2) d
    for (const auto &p : id.points) {
        EXPECT_LT(poly_distance(p.rhs, dd), 1e-14);
        for (int d = 0; d <= 4; ++d)
            EXPECT_LT(std::abs(p.lhs(double(d)) - dd(double(d))), 1e-5);
    }
    // zero weight at a point: d (d - 1)
    EXPECT_LT(poly_distance(point_indicial_rhs(GlWeight{{0, 0}}), Poly::linear(0.0) * Poly::linear(1.0)), 1e-14);

    ModelSpec k0 = s;
    k0.twist = CMatrix::Zero(2, 2);
    auto S = singular_subspace(weight_subspace(build_module(k0), {1, 1}));
    auto ik = indicial_data(k0, universal_pencil(k0, S));
    Poly inf = Poly::linear(2.0) * Poly::linear(1.0);
    for (int d = 0; d <= 4; ++d)
        EXPECT_LT(std::abs(ik.infinity_lhs(double(d)) - inf(double(d))), 1e-6);
}

TEST(Gaudin, EmptyChainIsConstantCoefficient)
{
    // K with no sites: Tee_1 = tr K, Tee_2 = det K
    CMatrix K(2, 2);
    K << rc(), rc(), rc(), rc();
    auto M = build_tensor(2, {});
    auto W = full_space(M);
    auto tee = gaudin_transfer(W, {}, K, rc());
    EXPECT_LT(std::abs(tee[1](0, 0) - K.trace()), 1e-12);
    EXPECT_LT(std::abs(tee[2](0, 0) - K.determinant()), 1e-12);
}

TEST(Gaudin, CommutingFamilyAndEquivariance)
{
    ModelSpec s = random_vector_model(ModelKind::gaudin, 3, {1, 1, 1});
    auto M = build_module(s);
    auto W = full_space(M);
    CMatrix K(3, 3);
    for (Eigen::Index i = 0; i < 9; ++i)
        K.data()[i] = rc();
    for (int trial = 0; trial < 3; ++trial) {
        auto a = gaudin_transfer(W, s.z, K, rc()), b = gaudin_transfer(W, s.z, K, rc());
        for (int k = 1; k <= 3; ++k)
            for (int l = 1; l <= 3; ++l)
                EXPECT_LT((a[k] * b[l] - b[l] * a[k]).norm() / (a[k].norm() * b[l].norm()), 1e-9);
    }
    EXPECT_LT(gaudin_conjugation_check(M, s.z, s.twist, CMatrix::Identity(3, 3), rc()), 1e-13);
    CMatrix A(3, 3);
    for (Eigen::Index i = 0; i < 9; ++i)
        A.data()[i] = rc();
    EXPECT_LT(gaudin_conjugation_check(M, s.z, K, A, rc()), 1e-9);
}
