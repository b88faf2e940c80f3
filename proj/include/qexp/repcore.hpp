#ifndef QEXP_REPCORE_HPP
#define QEXP_REPCORE_HPP

// gl_N evaluation modules, tensor products, weight and singular subspaces,
// admissible indices.

#include <algorithm>
#include <map>
#include <memory>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Sparse>

#include "algebra.hpp"

namespace qexp
{

using SpMat = Eigen::SparseMatrix<Complex, Eigen::RowMajor>;

struct GlWeight {
    std::vector<int> entries;

    int rank() const { return static_cast<int>(entries.size()); }
    int size() const { return std::accumulate(entries.begin(), entries.end(), 0); }
    bool dominant() const
    {
        for (std::size_t i = 1; i < entries.size(); ++i)
            if (entries[i - 1] < entries[i])
                return false;
        return true;
    }
    bool polynomial() const { return dominant() && (entries.empty() || entries.back() >= 0); }
    bool is_vector() const
    {
        if (entries.empty() || entries[0] != 1)
            return false;
        for (std::size_t i = 1; i < entries.size(); ++i)
            if (entries[i] != 0)
                return false;
        return true;
    }
    static GlWeight vector_rep(int N)
    {
        GlWeight w{std::vector<int>(static_cast<std::size_t>(N), 0)};
        w.entries[0] = 1;
        return w;
    }
};

enum class ModelKind { xxx, gaudin };

inline std::string to_string(ModelKind k) { return k == ModelKind::xxx ? "xxx" : "gaudin"; }

struct ModelSpec {
    ModelKind kind = ModelKind::xxx;
    int N = 1;
    std::vector<GlWeight> weights;
    std::vector<Complex> z;
    CMatrix twist; ///< Q for xxx, K for gaudin
    std::vector<int> target_weight;

    int n() const { return static_cast<int>(z.size()); }

    bool twist_is_diagonal(double tol = 0.0) const
    {
        for (Eigen::Index a = 0; a < twist.rows(); ++a)
            for (Eigen::Index b = 0; b < twist.cols(); ++b)
                if (a != b && std::abs(twist(a, b)) > tol)
                    return false;
        return true;
    }
    std::vector<Complex> twist_diagonal() const
    {
        std::vector<Complex> d;
        for (Eigen::Index a = 0; a < twist.rows(); ++a)
            d.push_back(twist(a, a));
        return d;
    }

    /// Throws invalid_input_error on any structural inconsistency.
    void validate() const
    {
        if (N < 1)
            throw invalid_input_error("rank N must be positive");
        if (weights.size() != z.size())
            throw invalid_input_error("number of weights differs from number of points");
        for (const auto &w : weights) {
            if (w.rank() != N)
                throw invalid_input_error("weight of wrong length");
            if (!w.dominant())
                throw invalid_input_error("weight is not dominant");
            if (!w.polynomial())
                throw invalid_input_error("weight is not polynomial (last entry negative)");
        }
        if (twist.rows() != N || twist.cols() != N)
            throw invalid_input_error("twist must be N x N");
        if (!target_weight.empty()) {
            if (static_cast<int>(target_weight.size()) != N)
                throw invalid_input_error("target weight of wrong length");
            int total = 0;
            for (auto m : target_weight) {
                if (m < 0)
                    throw invalid_input_error("target weight entries must be non-negative");
                total += m;
            }
            int have = 0;
            for (const auto &w : weights)
                have += w.size();
            if (total != have)
                throw invalid_input_error("target weight sum differs from total module weight");
        }
    }
};

/// A single gl_N-module with a weight basis and local generator matrices.
struct SiteModule {
    int N = 0;
    GlWeight highest;
    Eigen::Index dim = 0;
    std::vector<CMatrix> e;                      ///< e[a*N+b], 0-based
    std::vector<std::vector<int>> basis_weights; ///< weight of each basis vector

    const CMatrix &gen(int a, int b) const { return e[static_cast<std::size_t>(a * N + b)]; }
};

inline SiteModule vector_site(int N)
{
    SiteModule s;
    s.N = N;
    s.highest = GlWeight::vector_rep(N);
    s.dim = N;
    for (int a = 0; a < N; ++a)
        for (int b = 0; b < N; ++b) {
            CMatrix m = CMatrix::Zero(N, N);
            m(a, b) = 1.0;
            s.e.push_back(m);
        }
    for (int a = 0; a < N; ++a) {
        std::vector<int> w(static_cast<std::size_t>(N), 0);
        w[static_cast<std::size_t>(a)] = 1;
        s.basis_weights.push_back(w);
    }
    return s;
}

inline long weyl_dimension(const GlWeight &w)
{
    const int N = w.rank();
    double num = 1.0, den = 1.0;
    for (int i = 0; i < N; ++i)
        for (int j = i + 1; j < N; ++j) {
            num *= w.entries[static_cast<std::size_t>(i)] - w.entries[static_cast<std::size_t>(j)] + j - i;
            den *= j - i;
        }
    return std::lround(num / den);
}

namespace detail
{

/// Total gl_N generator e_ab acting on (C^N)^{(x)L}, as a sparse matrix.
inline SpMat total_generator(int N, int L, int a, int b)
{
    Eigen::Index D = 1;
    for (int i = 0; i < L; ++i)
        D *= N;
    std::vector<Eigen::Triplet<Complex>> trip;
    std::vector<int> digits(static_cast<std::size_t>(L));
    for (Eigen::Index g = 0; g < D; ++g) {
        Eigen::Index r = g;
        for (int p = L - 1; p >= 0; --p) {
            digits[static_cast<std::size_t>(p)] = static_cast<int>(r % N);
            r /= N;
        }
        Eigen::Index stride = 1;
        for (int p = L - 1; p >= 0; --p) {
            if (digits[static_cast<std::size_t>(p)] == b) {
                Eigen::Index target = g + (a - b) * stride;
                trip.emplace_back(target, g, 1.0);
            }
            stride *= N;
        }
    }
    SpMat m(D, D);
    m.setFromTriplets(trip.begin(), trip.end());
    return m;
}

} // namespace detail

inline constexpr int irreducible_cap = 6;

/// M_Lambda realized inside (C^N)^{(x)|Lambda'|}, where Lambda' = Lambda - Lambda_N.
/// The Lambda_N part is restored by adding Lambda_N to every e_aa.
inline SiteModule build_irreducible(const GlWeight &lambda, int cap = irreducible_cap)
{
    const int N = lambda.rank();
    if (N < 1 || !lambda.dominant())
        throw invalid_input_error("build_irreducible: weight is not dominant");
    if (!lambda.polynomial())
        throw invalid_input_error("build_irreducible: weight is not polynomial");
    const int shift = lambda.entries.back();
    std::vector<int> red(lambda.entries);
    for (auto &x : red)
        x -= shift;
    const int L = std::accumulate(red.begin(), red.end(), 0);
    if (L > cap)
        throw resource_error("build_irreducible: |Lambda| exceeds the cap of " + std::to_string(cap));

    SiteModule s;
    s.N = N;
    s.highest = lambda;
    if (L == 0) {
        s.dim = 1;
        for (int a = 0; a < N; ++a)
            for (int b = 0; b < N; ++b)
                s.e.push_back(CMatrix::Constant(1, 1, a == b ? Complex(shift) : Complex{}));
        s.basis_weights.push_back(lambda.entries);
        return s;
    }

    Eigen::Index D = 1;
    for (int i = 0; i < L; ++i)
        D *= N;
    // column heights of the Young diagram
    std::vector<int> heights;
    for (int c = 0; c < red[0]; ++c) {
        int h = 0;
        for (int r = 0; r < N; ++r)
            if (red[static_cast<std::size_t>(r)] > c)
                ++h;
        heights.push_back(h);
    }
    // highest-weight vector: tensor product over columns of e_1 ^ ... ^ e_h
    CVector hw = CVector::Ones(1);
    for (int h : heights) {
        Eigen::Index dh = 1;
        for (int i = 0; i < h; ++i)
            dh *= N;
        CVector wedge = CVector::Zero(dh);
        std::vector<int> perm(static_cast<std::size_t>(h));
        std::iota(perm.begin(), perm.end(), 0);
        do {
            int inv = 0;
            for (int i = 0; i < h; ++i)
                for (int j = i + 1; j < h; ++j)
                    if (perm[static_cast<std::size_t>(i)] > perm[static_cast<std::size_t>(j)])
                        ++inv;
            Eigen::Index idx = 0;
            for (int i = 0; i < h; ++i)
                idx = idx * N + perm[static_cast<std::size_t>(i)];
            wedge(idx) += (inv % 2 ? -1.0 : 1.0);
        } while (std::next_permutation(perm.begin(), perm.end()));
        CVector next(hw.size() * dh);
        for (Eigen::Index i = 0; i < hw.size(); ++i)
            next.segment(i * dh, dh) = hw(i) * wedge;
        hw = next;
    }
    hw.normalize();

    std::vector<SpMat> gens;
    for (int a = 0; a < N; ++a)
        for (int b = 0; b < N; ++b)
            gens.push_back(detail::total_generator(N, L, a, b));

    // breadth-first span under lowering operators, Gram-Schmidt per weight
    std::vector<CVector> basis;
    std::vector<std::vector<int>> weights;
    std::map<std::vector<int>, std::vector<std::size_t>> by_weight;
    auto try_add = [&](CVector v, const std::vector<int> &w) {
        double n0 = v.norm();
        if (n0 == 0.0)
            return false;
        for (int pass = 0; pass < 2; ++pass)
            for (auto k : by_weight[w])
                v -= basis[k].dot(v) * basis[k];
        if (v.norm() <= 1e-10 * n0)
            return false;
        by_weight[w].push_back(basis.size());
        basis.push_back(v / v.norm());
        weights.push_back(w);
        return true;
    };
    try_add(hw, red);
    for (std::size_t head = 0; head < basis.size(); ++head) {
        for (int a = 0; a + 1 < N; ++a) {
            CVector v = gens[static_cast<std::size_t>((a + 1) * N + a)] * basis[head];
            std::vector<int> w = weights[head];
            w[static_cast<std::size_t>(a)] -= 1;
            w[static_cast<std::size_t>(a + 1)] += 1;
            try_add(v, w);
        }
    }
    const long expected = weyl_dimension(lambda);
    if (static_cast<long>(basis.size()) != expected)
        throw theorem_violation("build_irreducible: dimension " + std::to_string(basis.size()) +
                                    " differs from the Weyl dimension " + std::to_string(expected),
                                "weyl-dimension");
    CMatrix B(D, static_cast<Eigen::Index>(basis.size()));
    for (std::size_t k = 0; k < basis.size(); ++k)
        B.col(static_cast<Eigen::Index>(k)) = basis[k];
    s.dim = B.cols();
    for (int a = 0; a < N; ++a)
        for (int b = 0; b < N; ++b) {
            CMatrix local = B.adjoint() * (gens[static_cast<std::size_t>(a * N + b)] * B);
            if (a == b)
                local += Complex(shift) * CMatrix::Identity(s.dim, s.dim);
            s.e.push_back(local);
        }
    for (auto w : weights) {
        for (auto &x : w)
            x += shift;
        s.basis_weights.push_back(w);
    }
    return s;
}

/// Tensor product of site modules; site 0 is the most significant tensor factor.
struct TensorModule {
    int N = 0;
    std::vector<SiteModule> sites;
    Eigen::Index dim = 1;
    std::vector<std::vector<SpMat>> E; ///< E[i][a*N+b]
    std::vector<std::vector<int>> basis_weights;

    int n() const { return static_cast<int>(sites.size()); }
    const SpMat &gen(int i, int a, int b) const
    {
        return E[static_cast<std::size_t>(i)][static_cast<std::size_t>(a * N + b)];
    }
    SpMat total(int a, int b) const
    {
        SpMat t(dim, dim);
        for (int i = 0; i < n(); ++i)
            t += gen(i, a, b);
        return t;
    }
    std::vector<int> word(Eigen::Index g) const
    {
        std::vector<int> w(sites.size());
        for (int i = n() - 1; i >= 0; --i) {
            w[static_cast<std::size_t>(i)] = static_cast<int>(g % sites[static_cast<std::size_t>(i)].dim);
            g /= sites[static_cast<std::size_t>(i)].dim;
        }
        return w;
    }
};

inline std::shared_ptr<const TensorModule> build_tensor(int N, std::vector<SiteModule> sites)
{
    auto M = std::make_shared<TensorModule>();
    M->N = N;
    M->sites = std::move(sites);
    M->dim = 1;
    for (const auto &s : M->sites) {
        if (s.N != N)
            throw invalid_input_error("build_tensor: site of different rank");
        M->dim *= s.dim;
    }
    const int n = M->n();
    for (int i = 0; i < n; ++i) {
        const auto &s = M->sites[static_cast<std::size_t>(i)];
        Eigen::Index pre = 1, post = 1;
        for (int j = 0; j < i; ++j)
            pre *= M->sites[static_cast<std::size_t>(j)].dim;
        for (int j = i + 1; j < n; ++j)
            post *= M->sites[static_cast<std::size_t>(j)].dim;
        std::vector<SpMat> gens;
        for (int ab = 0; ab < N * N; ++ab) {
            const CMatrix &loc = s.e[static_cast<std::size_t>(ab)];
            std::vector<Eigen::Triplet<Complex>> trip;
            for (Eigen::Index p = 0; p < s.dim; ++p)
                for (Eigen::Index q = 0; q < s.dim; ++q) {
                    Complex v = loc(p, q);
                    if (std::abs(v) < 1e-14)
                        continue;
                    for (Eigen::Index x = 0; x < pre; ++x)
                        for (Eigen::Index y = 0; y < post; ++y)
                            trip.emplace_back((x * s.dim + p) * post + y, (x * s.dim + q) * post + y, v);
                }
            SpMat m(M->dim, M->dim);
            m.setFromTriplets(trip.begin(), trip.end());
            gens.push_back(std::move(m));
        }
        M->E.push_back(std::move(gens));
    }
    for (Eigen::Index g = 0; g < M->dim; ++g) {
        auto w = M->word(g);
        std::vector<int> wt(static_cast<std::size_t>(N), 0);
        for (int i = 0; i < n; ++i)
            for (int a = 0; a < N; ++a)
                wt[static_cast<std::size_t>(a)] +=
                    M->sites[static_cast<std::size_t>(i)].basis_weights[static_cast<std::size_t>(w[static_cast<std::size_t>(i)])]
                                                                        [static_cast<std::size_t>(a)];
        M->basis_weights.push_back(wt);
    }
    return M;
}

/// (C^N)^{(x)n}
inline std::shared_ptr<const TensorModule> build_vector_module(int N, int n)
{
    return build_tensor(N, std::vector<SiteModule>(static_cast<std::size_t>(n), vector_site(N)));
}

/// Tensor module of the evaluation modules named in a model spec.
inline std::shared_ptr<const TensorModule> build_module(const ModelSpec &spec)
{
    std::vector<SiteModule> sites;
    for (const auto &w : spec.weights)
        sites.push_back(w.is_vector() ? vector_site(spec.N) : build_irreducible(w));
    return build_tensor(spec.N, std::move(sites));
}

/// A subspace of a tensor module, given by an orthonormal basis of columns.
struct WeightSubspace {
    std::shared_ptr<const TensorModule> module;
    CMatrix basis;               ///< D x d
    std::vector<int> weight;     ///< empty when not a single weight space
    std::vector<std::string> labels;
    bool singular = false;

    Eigen::Index dim() const { return basis.cols(); }
    int N() const { return module->N; }
    /// Compression B^H e^{(i)}_{ab} B; equals the action when e_ab preserves the subspace.
    CMatrix action(int i, int a, int b) const { return basis.adjoint() * (module->gen(i, a, b) * basis); }
    CMatrix total_action(int a, int b) const
    {
        CMatrix r = CMatrix::Zero(dim(), dim());
        for (int i = 0; i < module->n(); ++i)
            r += action(i, a, b);
        return r;
    }
};

inline WeightSubspace full_space(std::shared_ptr<const TensorModule> M)
{
    WeightSubspace W;
    W.basis = CMatrix::Identity(M->dim, M->dim);
    for (Eigen::Index g = 0; g < M->dim; ++g) {
        std::string s;
        for (auto x : M->word(g))
            s += std::to_string(x + 1);
        W.labels.push_back(s);
    }
    W.module = std::move(M);
    return W;
}

using AdmissibleIndex = std::vector<int>;

/// Order of admissible indices: compare from the last coordinate backwards.
inline bool admissible_less(const AdmissibleIndex &x, const AdmissibleIndex &y)
{
    return std::lexicographical_compare(x.rbegin(), x.rend(), y.rbegin(), y.rend());
}

/// Coordinate value 0 codes the letter 1.
inline int admissible_letter(int a) { return a == 0 ? 1 : a; }

inline std::vector<int> l_numbers(const std::vector<int> &m)
{
    std::vector<int> l;
    for (std::size_t j = 1; j < m.size(); ++j) {
        int s = 0;
        for (std::size_t k = j; k < m.size(); ++k)
            s += m[k];
        l.push_back(s);
    }
    return l;
}

inline std::vector<AdmissibleIndex> enumerate_admissible(int N, int n, const std::vector<int> &m)
{
    if (static_cast<int>(m.size()) != N)
        throw invalid_input_error("enumerate_admissible: weight of wrong length");
    int total = 0;
    for (auto x : m) {
        if (x < 0)
            throw invalid_input_error("enumerate_admissible: negative weight entry");
        total += x;
    }
    if (total != n)
        throw invalid_input_error("enumerate_admissible: weight does not sum to n");
    std::vector<AdmissibleIndex> out;
    AdmissibleIndex cur(static_cast<std::size_t>(n));
    std::vector<int> left(m);
    auto rec = [&](auto &&self, int pos) -> void {
        if (pos == n) {
            out.push_back(cur);
            return;
        }
        for (int letter = 1; letter <= N; ++letter) {
            if (left[static_cast<std::size_t>(letter - 1)] == 0)
                continue;
            --left[static_cast<std::size_t>(letter - 1)];
            cur[static_cast<std::size_t>(pos)] = letter == 1 ? 0 : letter;
            self(self, pos + 1);
            ++left[static_cast<std::size_t>(letter - 1)];
        }
    };
    rec(rec, 0);
    std::sort(out.begin(), out.end(), admissible_less);
    return out;
}

/// Weight subspace M[m]. For vector tensors the basis is e_a v ordered by admissible index.
inline WeightSubspace weight_subspace(std::shared_ptr<const TensorModule> M, const std::vector<int> &m)
{
    if (static_cast<int>(m.size()) != M->N)
        throw invalid_input_error("weight_subspace: weight of wrong length");
    std::vector<Eigen::Index> idx;
    for (Eigen::Index g = 0; g < M->dim; ++g)
        if (M->basis_weights[static_cast<std::size_t>(g)] == m)
            idx.push_back(g);
    bool all_vector = true;
    for (const auto &s : M->sites)
        all_vector = all_vector && s.highest.is_vector() && s.dim == M->N;
    if (all_vector) {
        auto code = [&](Eigen::Index g) {
            auto w = M->word(g);
            for (auto &x : w)
                x = x == 0 ? 0 : x + 1;
            return w;
        };
        std::sort(idx.begin(), idx.end(), [&](auto x, auto y) { return admissible_less(code(x), code(y)); });
    }
    WeightSubspace W;
    W.basis = CMatrix::Zero(M->dim, static_cast<Eigen::Index>(idx.size()));
    for (std::size_t k = 0; k < idx.size(); ++k) {
        W.basis(idx[k], static_cast<Eigen::Index>(k)) = 1.0;
        std::string s;
        for (auto x : M->word(idx[k]))
            s += std::to_string(x + 1);
        W.labels.push_back(s);
    }
    W.weight = m;
    W.module = std::move(M);
    return W;
}

/// Joint kernel of the raising operators sum_i e^{(i)}_{ab}, a < b, inside W.
inline WeightSubspace singular_subspace(const WeightSubspace &W, double tol = 1e-9)
{
    const int N = W.N();
    const Eigen::Index D = W.module->dim, d = W.dim();
    WeightSubspace S;
    S.module = W.module;
    S.weight = W.weight;
    S.singular = true;
    if (d == 0) {
        S.basis = CMatrix::Zero(D, 0);
        return S;
    }
    std::vector<CMatrix> blocks;
    for (int a = 0; a < N; ++a)
        for (int b = a + 1; b < N; ++b)
            blocks.push_back(W.module->total(a, b) * W.basis);
    CMatrix stack(static_cast<Eigen::Index>(blocks.size()) * D, d);
    for (std::size_t k = 0; k < blocks.size(); ++k)
        stack.middleRows(static_cast<Eigen::Index>(k) * D, D) = blocks[k];
    CMatrix Z = blocks.empty() ? CMatrix(CMatrix::Identity(d, d)) : nullspace_matrix(stack, tol);
    S.basis = W.basis * Z;
    for (Eigen::Index k = 0; k < S.basis.cols(); ++k)
        S.labels.push_back("sing" + std::to_string(k));
    return S;
}

/// c_a(u) = prod_i (u - z_i + Lambda_a^{(i)}) / (u - z_i)
inline std::vector<RatFn> highest_weight_series(const ModelSpec &spec)
{
    std::vector<RatFn> out;
    for (int a = 0; a < spec.N; ++a) {
        Poly num = Poly::constant(1.0), den = Poly::constant(1.0);
        for (int i = 0; i < spec.n(); ++i) {
            const auto &w = spec.weights[static_cast<std::size_t>(i)].entries;
            num *= Poly::linear(spec.z[static_cast<std::size_t>(i)] - static_cast<double>(w[static_cast<std::size_t>(a)]));
            den *= Poly::linear(spec.z[static_cast<std::size_t>(i)]);
        }
        out.emplace_back(num, den);
    }
    return out;
}

/// P_1..P_N with 1-based a in the factors (u - z_i + s - a).
inline std::vector<Poly> drinfeld_polynomials(const ModelSpec &spec)
{
    std::vector<Poly> out;
    const int N = spec.N;
    for (int a = 1; a <= N; ++a) {
        Poly p = Poly::constant(1.0);
        for (int i = 0; i < spec.n(); ++i) {
            const auto &w = spec.weights[static_cast<std::size_t>(i)].entries;
            int lo = a < N ? w[static_cast<std::size_t>(a)] + 1 : 1;
            int hi = w[static_cast<std::size_t>(a - 1)];
            for (int s = lo; s <= hi; ++s)
                p *= Poly::linear(spec.z[static_cast<std::size_t>(i)] - static_cast<double>(s - a));
        }
        out.push_back(p);
    }
    return out;
}

} // namespace qexp

#endif
