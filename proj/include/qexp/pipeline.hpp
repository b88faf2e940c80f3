#ifndef QEXP_PIPELINE_HPP
#define QEXP_PIPELINE_HPP

// Named checks shared by the CLI and the acceptance suite, plus JSON config / report plumbing.

#include <chrono>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "bethe.hpp"
#include "compare.hpp"

namespace qexp
{

using json = nlohmann::json;

enum class CheckStatus { pass, fail, degenerate };

inline std::string to_string(CheckStatus s)
{
    switch (s) {
    case CheckStatus::pass:
        return "pass";
    case CheckStatus::fail:
        return "fail";
    default:
        return "degenerate";
    }
}

struct CheckRecord {
    std::string name;
    std::string tag;
    CheckStatus status = CheckStatus::pass;
    double max_residual = 0.0;
    json data = json::object();
};

/// Raised when a stage fails for numerical (not structural) reasons.
class numerical_failure : public error
{
  public:
    numerical_failure(const std::string &stage, const std::string &what) : error(stage + ": " + what), stage_(stage) {}
    const std::string &stage() const noexcept { return stage_; }

  private:
    std::string stage_;
};

struct CheckOptions {
    std::uint64_t seed = 7;
    double tol_residual = 1e-8;
    HomotopyControls homotopy;
};

// ---------------------------------------------------------------------------
// JSON helpers
// ---------------------------------------------------------------------------

inline json to_json(Complex c) { return json::array({c.real(), c.imag()}); }

inline Complex complex_from_json(const json &j)
{
    if (j.is_number())
        return Complex(j.get<double>(), 0.0);
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
        throw invalid_input_error("complex numbers must be [re, im] pairs");
    return Complex(j[0].get<double>(), j[1].get<double>());
}

inline json to_json(const std::vector<Complex> &v)
{
    json a = json::array();
    for (auto c : v)
        a.push_back(to_json(c));
    return a;
}

inline json to_json(const Poly &p) { return to_json(p.coeffs()); }

inline json finite_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

inline json to_json(const CheckRecord &r)
{
    return json{{"name", r.name},
                {"tag", r.tag},
                {"status", to_string(r.status)},
                {"max_residual", finite_or_null(r.max_residual)},
                {"data", r.data}};
}

inline json model_to_json(const ModelSpec &s)
{
    json w = json::array();
    for (const auto &g : s.weights)
        w.push_back(g.entries);
    json tw = json::array();
    for (Eigen::Index a = 0; a < s.twist.rows(); ++a) {
        json row = json::array();
        for (Eigen::Index b = 0; b < s.twist.cols(); ++b)
            row.push_back(to_json(s.twist(a, b)));
        tw.push_back(row);
    }
    return json{{"kind", to_string(s.kind)}, {"N", s.N},        {"weights", w},
                {"z", to_json(s.z)},         {"twist", tw},      {"target_weight", s.target_weight}};
}

/// Model from JSON. The twist may be a full matrix ("twist") or a diagonal ("twist_diagonal").
inline ModelSpec model_from_json(const json &j)
{
    try {
        ModelSpec s;
        const std::string kind = j.at("kind").get<std::string>();
        if (kind == "xxx")
            s.kind = ModelKind::xxx;
        else if (kind == "gaudin")
            s.kind = ModelKind::gaudin;
        else
            throw invalid_input_error("model kind must be xxx or gaudin");
        s.N = j.at("N").get<int>();
        if (s.N < 1)
            throw invalid_input_error("rank N must be positive");
        for (const auto &w : j.at("weights"))
            s.weights.push_back(GlWeight{w.get<std::vector<int>>()});
        for (const auto &z : j.at("z"))
            s.z.push_back(complex_from_json(z));
        if (j.contains("twist")) {
            const auto &t = j.at("twist");
            if (!t.is_array() || static_cast<int>(t.size()) != s.N)
                throw invalid_input_error("twist must be an N x N array");
            s.twist = CMatrix::Zero(s.N, s.N);
            for (int a = 0; a < s.N; ++a) {
                if (!t[static_cast<std::size_t>(a)].is_array() || static_cast<int>(t[static_cast<std::size_t>(a)].size()) != s.N)
                    throw invalid_input_error("twist must be an N x N array");
                for (int b = 0; b < s.N; ++b)
                    s.twist(a, b) = complex_from_json(t[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)]);
            }
        } else if (j.contains("twist_diagonal")) {
            const auto &t = j.at("twist_diagonal");
            if (!t.is_array() || static_cast<int>(t.size()) != s.N)
                throw invalid_input_error("twist_diagonal must have N entries");
            s.twist = CMatrix::Zero(s.N, s.N);
            for (int a = 0; a < s.N; ++a)
                s.twist(a, a) = complex_from_json(t[static_cast<std::size_t>(a)]);
        } else {
            throw invalid_input_error("model needs twist or twist_diagonal");
        }
        if (j.contains("target_weight"))
            s.target_weight = j.at("target_weight").get<std::vector<int>>();
        s.validate();
        for (std::size_t a = 0; a < s.z.size(); ++a)
            for (std::size_t b = a + 1; b < s.z.size(); ++b)
                if (std::abs(s.z[a] - s.z[b]) < 1e-12)
                    throw invalid_input_error("evaluation points must be pairwise distinct");
        if (s.target_weight.empty())
            throw invalid_input_error("target_weight is required");
        return s;
    } catch (const json::exception &e) {
        throw invalid_input_error(std::string("malformed model: ") + e.what());
    }
}

// ---------------------------------------------------------------------------
// Helpers
// ---------------------------------------------------------------------------

namespace detail
{

inline std::vector<Complex> random_points(const std::vector<Complex> &avoid, int count, std::uint64_t seed)
{
    return lattice_free_points(avoid, count, seed);
}

inline bool vector_model(const ModelSpec &s)
{
    for (const auto &w : s.weights)
        if (!w.is_vector())
            return false;
    return true;
}

/// Same model with Q = 1 (xxx) or K = 0 (gaudin).
inline ModelSpec trivial_twist(const ModelSpec &s)
{
    ModelSpec t = s;
    t.twist = s.kind == ModelKind::xxx ? CMatrix(CMatrix::Identity(s.N, s.N)) : CMatrix(CMatrix::Zero(s.N, s.N));
    return t;
}

inline double poly_error_on_grid(const Poly &a, const Poly &b, int dmax)
{
    double worst = 0.0;
    for (int d = 0; d <= dmax; ++d) {
        Complex x = static_cast<double>(d);
        worst = std::max(worst, std::abs(a(x) - b(x)) / std::max(1.0, std::abs(b(x))));
    }
    return worst;
}

inline CheckRecord record(std::string name, std::string tag)
{
    CheckRecord r;
    r.name = std::move(name);
    r.tag = std::move(tag);
    return r;
}

inline void judge(CheckRecord &r, double tol)
{
    r.status = std::isfinite(r.max_residual) && r.max_residual <= tol ? CheckStatus::pass : CheckStatus::fail;
    r.data["tolerance"] = tol;
}

} // namespace detail

// ---------------------------------------------------------------------------
// Checks
// ---------------------------------------------------------------------------

/// [Te_k(u), Te_l(v)] on the target weight subspace, relative to the product of norms.
inline CheckRecord check_commutativity(const ModelSpec &spec, const CheckOptions &opt, int pairs = 20)
{
    auto r = detail::record("commutativity", "commuting-family");
    auto W = weight_subspace(build_module(spec), spec.target_weight);
    auto pts = detail::random_points(spec.z, 2 * pairs, opt.seed + 1);
    for (int p = 0; p < pairs; ++p) {
        auto a = transfer(spec, W, pts[static_cast<std::size_t>(2 * p)]);
        auto b = transfer(spec, W, pts[static_cast<std::size_t>(2 * p + 1)]);
        for (int k = 1; k <= spec.N; ++k)
            for (int l = 1; l <= spec.N; ++l) {
                const auto &A = a[static_cast<std::size_t>(k)];
                const auto &B = b[static_cast<std::size_t>(l)];
                double s = std::max(A.norm() * B.norm(), 1e-300);
                r.max_residual = std::max(r.max_residual, (A * B - B * A).norm() / s);
            }
    }
    r.data["dimension"] = W.dim();
    r.data["pairs"] = pairs;
    detail::judge(r, 1e-9);
    return r;
}

/// Characteristic polynomial prod (x - q_i) and the subleading identity with weights m_j q_j (xxx) or m_j.
inline CheckRecord check_leading(const ModelSpec &spec, const CheckOptions &)
{
    auto r = detail::record("leading coefficients", "leading-coefficients");
    if (!spec.twist_is_diagonal()) {
        r.status = CheckStatus::degenerate;
        r.data["note"] = "twist is not diagonal";
        return r;
    }
    auto W = weight_subspace(build_module(spec), spec.target_weight);
    if (W.dim() == 0) {
        r.status = CheckStatus::degenerate;
        r.data["note"] = "empty weight subspace";
        return r;
    }
    auto P = universal_pencil(spec, W);
    auto cd = characteristic_data(P);
    auto q = spec.twist_diagonal();
    std::vector<Complex> w;
    for (int j = 0; j < spec.N; ++j)
        w.push_back(static_cast<double>(spec.target_weight[static_cast<std::size_t>(j)]) *
                    (spec.kind == ModelKind::xxx ? q[static_cast<std::size_t>(j)] : Complex(1.0)));
    auto [full, sub] = expected_characteristic(q, w);
    double e1 = poly_distance(cd.char_poly, full), e2 = poly_distance(cd.sub_poly, sub);
    r.max_residual = std::max({e1, e2, cd.scalar_deviation});
    r.data["char_poly"] = to_json(cd.char_poly);
    r.data["roots"] = to_json(cd.roots);
    r.data["char_poly_error"] = e1;
    r.data["subleading_error"] = e2;
    r.data["scalar_deviation"] = cd.scalar_deviation;
    detail::judge(r, 1e-7);
    return r;
}

/// Indicial identity at infinity for Q = 1 / K = 0 on the singular part of the weight space.
inline CheckRecord check_infinity_indicial(const ModelSpec &spec, const CheckOptions &)
{
    auto r = detail::record("indicial identity at infinity", "infinity-indicial");
    auto t = detail::trivial_twist(spec);
    auto S = singular_subspace(weight_subspace(build_module(t), t.target_weight));
    if (S.dim() == 0) {
        r.status = CheckStatus::degenerate;
        r.data["note"] = "no singular vectors of this weight";
        return r;
    }
    auto P = universal_pencil(t, S);
    Poly lhs, rhs;
    double low = 0.0, dev = 0.0;
    if (t.kind == ModelKind::xxx) {
        auto se = modified_pencil_Se(P);
        lhs = se.lhs;
        rhs = se.rhs;
        low = se.lower_order_max;
        dev = se.scalar_deviation;
    } else {
        auto id = indicial_data(t, P);
        lhs = id.infinity_lhs;
        rhs = id.infinity_rhs;
        low = id.infinity_lower_order;
        dev = id.infinity_scalar_deviation;
    }
    double e = detail::poly_error_on_grid(lhs, rhs, spec.N + 2);
    r.max_residual = std::max({e, low, dev});
    r.data["singular_dimension"] = S.dim();
    r.data["lhs"] = to_json(lhs);
    r.data["rhs"] = to_json(rhs);
    r.data["lower_order"] = low;
    detail::judge(r, 1e-6);
    return r;
}

/// Indicial identity at each z_r (differential kind only).
inline CheckRecord check_point_indicial(const ModelSpec &spec, const CheckOptions &)
{
    auto r = detail::record("indicial identity at the points", "point-indicial");
    if (spec.kind != ModelKind::gaudin) {
        r.status = CheckStatus::degenerate;
        r.data["note"] = "differential kind only";
        return r;
    }
    auto W = weight_subspace(build_module(spec), spec.target_weight);
    auto P = universal_pencil(spec, W);
    auto id = indicial_data(spec, P);
    json pts = json::array();
    for (const auto &p : id.points) {
        double e = detail::poly_error_on_grid(p.lhs, p.rhs, spec.N + 2);
        r.max_residual = std::max(r.max_residual, e);
        pts.push_back(json{{"site", p.r}, {"error", e}, {"scalar_deviation", p.scalar_deviation}, {"lhs", to_json(p.lhs)}});
    }
    r.data["points"] = pts;
    detail::judge(r, 1e-5);
    return r;
}

/// Conjugation equivariance, qdet centrality and RTT at random matrices and points.
inline CheckRecord check_equivariance(const ModelSpec &spec, const CheckOptions &opt)
{
    auto r = detail::record("equivariance and RTT", "equivariance");
    auto M = build_module(spec);
    std::mt19937_64 rng(opt.seed + 3);
    std::normal_distribution<double> G;
    auto pts = detail::random_points(spec.z, 10, opt.seed + 5);
    double conj = 0.0, central = 0.0, rtt = 0.0;
    if (detail::vector_model(spec)) {
        for (int t = 0; t < 5; ++t) {
            CMatrix A(spec.N, spec.N);
            for (Eigen::Index a = 0; a < A.size(); ++a)
                A.data()[a] = Complex(G(rng), G(rng));
            Complex u = pts[static_cast<std::size_t>(t)];
            conj = std::max(conj, spec.kind == ModelKind::xxx ? xxx_conjugation_check(M, spec.z, spec.twist, A, u)
                                                              : gaudin_conjugation_check(M, spec.z, spec.twist, A, u));
        }
    } else {
        r.data["conjugation_note"] = "group action implemented for vector sites only";
    }
    auto F = full_space(M);
    if (spec.kind == ModelKind::xxx) {
        for (int t = 0; t < 5; ++t) {
            Complex u = pts[static_cast<std::size_t>(t)], v = pts[static_cast<std::size_t>(t + 5)];
            rtt = std::max(rtt, rtt_check(F, spec.z, u, v));
            CMatrix q = qdet(F, spec.z, u);
            auto [s, dev] = scalar_part(q);
            central = std::max(central, dev / std::max(1e-300, std::abs(s) * std::sqrt(static_cast<double>(q.rows()))));
        }
    }
    r.max_residual = std::max({conj, central, rtt});
    r.data["conjugation"] = conj;
    r.data["qdet_scalar_deviation"] = central;
    r.data["rtt"] = rtt;
    detail::judge(r, 1e-9);
    return r;
}

namespace detail
{

inline bool bethe_ready(const ModelSpec &spec, CheckRecord &r)
{
    if (!vector_model(spec) || !spec.twist_is_diagonal()) {
        r.status = CheckStatus::degenerate;
        r.data["note"] = "Bethe ansatz implemented for vector sites and diagonal twist";
        return false;
    }
    return true;
}

inline json census_json(const CensusReport &c)
{
    json sols = json::array();
    for (const auto &e : c.entries) {
        json t = json::array();
        for (const auto &lvl : e.solution.variables.t)
            t.push_back(to_json(lvl));
        sols.push_back(json{{"t", t},
                            {"residual", e.solution.residual},
                            {"eigen_residual", e.eigen_residual},
                            {"zero_vector", e.zero_vector},
                            {"degenerate", e.degenerate}});
    }
    return json{{"dimension", c.dimension},
                {"seeds", c.seeds},
                {"tracked", c.tracked},
                {"distinct", c.distinct},
                {"path_failures", c.path_failures},
                {"collisions", c.collisions},
                {"zero_vectors", c.zero_vectors},
                {"degenerate", c.degenerate},
                {"gram_determinant", to_json(c.gram_determinant)},
                {"max_bae_residual", c.max_residual},
                {"spectrum_mismatch", finite_or_null(c.spectrum_mismatch)},
                {"solutions", sols},
                {"notes", c.notes}};
}

} // namespace detail

/// Every tracked Bethe solution gives an eigenvector (explicit weight function or spectral match).
inline CheckRecord check_bethe(const ModelSpec &spec, const CheckOptions &opt)
{
    auto r = detail::record("Bethe eigenvectors", "bethe-eigen");
    if (!detail::bethe_ready(spec, r))
        return r;
    auto c = completeness_census(spec, opt.homotopy, opt.seed);
    r.max_residual = c.max_eigen_residual;
    r.data = detail::census_json(c);
    detail::judge(r, opt.tol_residual);
    if (c.zero_vectors > 0 || c.distinct == 0)
        r.status = CheckStatus::fail;
    return r;
}

/// Distinct off-diagonal solutions = dim W and the Bethe vectors are independent.
inline CheckRecord check_census(const ModelSpec &spec, const CheckOptions &opt)
{
    auto r = detail::record("completeness census", "completeness");
    if (!detail::bethe_ready(spec, r))
        return r;
    auto c = completeness_census(spec, opt.homotopy, opt.seed);
    r.max_residual = c.max_eigen_residual;
    r.data = detail::census_json(c);
    if (c.complete())
        r.status = CheckStatus::pass;
    else if (c.degenerate > 0 || c.collisions > 0)
        r.status = CheckStatus::degenerate;
    else
        r.status = CheckStatus::fail;
    return r;
}

namespace detail
{

inline json frame_json(const KernelFrame &F, const Certificate &c)
{
    json bases = json::array();
    for (const auto &b : F.per_base)
        bases.push_back(json{{"base", to_json(b.base)}, {"degrees", b.degrees}, {"degree_bound", b.degree_bound}});
    return json{{"size", F.elements.size()},
                {"bases", bases},
                {"census_ok", F.census_ok},
                {"certified_plan", F.plan.certified},
                {"residual", F.max_residual},
                {"certificate_condition", finite_or_null(c.condition)},
                {"notes", F.notes}};
}

} // namespace detail

/// Frame for the given twist plus the polynomial frame of the trivial-twist singular part.
inline CheckRecord check_kernel(const ModelSpec &spec, const CheckOptions &opt)
{
    auto r = detail::record("kernel frames", "kernel-frame");
    bool ok = true;
    if (spec.twist_is_diagonal()) {
        auto W = weight_subspace(build_module(spec), spec.target_weight);
        auto P = universal_pencil(spec, W);
        auto plan = kernel_plan(spec.kind, spec.twist, spec.target_weight, P.dim());
        auto F = kernel_frame(P, plan, false);
        Certificate c;
        try {
            c = certify(F, P, 3, opt.seed + 17);
        } catch (const independence_failure &) {
            c = casorati_certificate(F, detail::lattice_free_points(detail::pencil_poles(P), 1, opt.seed + 17)[0]);
            ok = false;
        }
        ok = ok && F.census_ok && F.elements.size() == static_cast<std::size_t>(spec.N * P.dim());
        r.max_residual = F.max_residual;
        r.data["twisted"] = detail::frame_json(F, c);
        r.data["dimension"] = P.dim();
        if (!plan.certified)
            r.data["note"] = "coinciding twist eigenvalues: frame computed, degrees not certified";
    } else {
        r.data["twisted_note"] = "twist is not diagonal";
    }
    auto t = detail::trivial_twist(spec);
    auto S = singular_subspace(weight_subspace(build_module(t), t.target_weight));
    if (S.dim() > 0) {
        auto P = universal_pencil(t, S);
        auto F = kernel_frame(P, kernel_plan(t.kind, t.twist, t.target_weight, P.dim(), true), false);
        Certificate c;
        try {
            c = certify(F, P, 3, opt.seed + 19);
        } catch (const independence_failure &) {
            c = casorati_certificate(F, detail::lattice_free_points(detail::pencil_poles(P), 1, opt.seed + 19)[0]);
            ok = false;
        }
        ok = ok && F.census_ok && F.elements.size() == static_cast<std::size_t>(spec.N * P.dim());
        r.max_residual = std::max(r.max_residual, F.max_residual);
        r.data["singular"] = detail::frame_json(F, c);
    }
    detail::judge(r, opt.tol_residual);
    if (!ok)
        r.status = CheckStatus::fail;
    return r;
}

/// Local data: evaluation at S_i and vanishing cascade (xxx), local exponents (gaudin).
inline CheckRecord check_local_data(const ModelSpec &spec, const CheckOptions &opt)
{
    auto r = detail::record("local data", "local-data");
    if (!spec.twist_is_diagonal()) {
        r.status = CheckStatus::degenerate;
        r.data["note"] = "twist is not diagonal";
        return r;
    }
    auto W = weight_subspace(build_module(spec), spec.target_weight);
    auto P = universal_pencil(spec, W);
    auto F = kernel_frame(P, kernel_plan(spec.kind, spec.twist, spec.target_weight, P.dim()), false);
    json sites = json::array();
    bool ok = true;
    int used = 0;
    for (int i = 0; i < spec.n(); ++i) {
        try {
            if (spec.kind == ModelKind::xxx) {
                auto L = local_data_xxx(F, spec, i, opt.seed + static_cast<std::uint64_t>(i));
                r.max_residual = std::max(r.max_residual, L.cascade_max);
                sites.push_back(json{{"site", i}, {"points", to_json(L.points)}, {"condition", L.condition},
                                     {"cascade", L.cascade_max}, {"collision", L.collision}});
            } else {
                auto E = local_exponents_gaudin(F, spec, i);
                const bool match = E.taylor == E.expected && E.worst_fit_error <= 0.05;
                ok = ok && match;
                sites.push_back(json{{"site", i}, {"taylor", E.taylor}, {"expected", E.expected},
                                     {"fitted", E.fitted}, {"fit_error", E.worst_fit_error}});
            }
            ++used;
        } catch (const precondition_error &e) {
            sites.push_back(json{{"site", i}, {"skipped", e.what()}});
        } catch (const theorem_violation &e) {
            ok = false;
            sites.push_back(json{{"site", i}, {"violation", e.what()}});
        }
    }
    r.data["sites"] = sites;
    detail::judge(r, 1e-7);
    if (!ok)
        r.status = CheckStatus::fail;
    else if (used == 0)
        r.status = CheckStatus::degenerate;
    return r;
}

/// Kernel comparison under the shift plan a (default: a_0 = 1, others 0).
inline CheckRecord check_comparison(const ModelSpec &spec, const CheckOptions &opt, ShiftPlan plan = {})
{
    auto r = detail::record("comparison", "comparison");
    if (plan.a.empty()) {
        plan.a.assign(static_cast<std::size_t>(spec.n()), 0);
        if (!plan.a.empty())
            plan.a[0] = 1;
    }
    if (!spec.twist_is_diagonal()) {
        r.status = CheckStatus::degenerate;
        r.data["note"] = "twist is not diagonal";
        return r;
    }
    auto rep = verify_comparison(spec, plan, 1e-7, false, opt.seed + 29);
    r.max_residual = std::max(rep.forward_residual, rep.converse_residual);
    r.data = json{{"plan", plan.a},
                  {"multiplier", to_json(rep.C)},
                  {"base_kernel_dim", rep.base_kernel_dim},
                  {"shifted_kernel_dim", rep.shifted_kernel_dim},
                  {"forward", rep.forward_residual},
                  {"converse", rep.converse_residual},
                  {"functional_equation", rep.functional_equation}};
    r.status = rep.ok ? CheckStatus::pass : CheckStatus::fail;
    return r;
}

// ---------------------------------------------------------------------------
// Run
// ---------------------------------------------------------------------------

struct RunConfig {
    ModelSpec model;
    std::string pipeline = "all";
    CheckOptions options;
    ShiftPlan shift;
    std::string output;
};

inline const std::set<std::string> &pipeline_names()
{
    static const std::set<std::string> names{"pencil", "bae", "kernel", "census", "compare", "all"};
    return names;
}

inline RunConfig config_from_json(const json &j)
{
    RunConfig c;
    if (!j.is_object())
        throw invalid_input_error("config must be a JSON object");
    if (!j.contains("model"))
        throw invalid_input_error("config has no model");
    c.model = model_from_json(j.at("model"));
    try {
        if (j.contains("pipeline"))
            c.pipeline = j.at("pipeline").get<std::string>();
        if (j.contains("rng_seed"))
            c.options.seed = j.at("rng_seed").get<std::uint64_t>();
        if (j.contains("tolerances")) {
            const auto &t = j.at("tolerances");
            if (t.contains("residual"))
                c.options.tol_residual = t.at("residual").get<double>();
        }
        if (j.contains("shift_plan"))
            c.shift.a = j.at("shift_plan").get<std::vector<int>>();
        if (j.contains("output"))
            c.output = j.at("output").get<std::string>();
    } catch (const json::exception &e) {
        throw invalid_input_error(std::string("malformed config: ") + e.what());
    }
    if (!pipeline_names().count(c.pipeline))
        throw invalid_input_error("unknown pipeline " + c.pipeline);
    if (!(c.options.tol_residual >= std::numeric_limits<double>::epsilon()))
        throw invalid_input_error("tolerance override below machine epsilon");
    if (!c.shift.a.empty())
        check_plan(c.shift, c.model.z.size());
    return c;
}

inline RunConfig load_config(const std::string &path)
{
    std::ifstream in(path);
    if (!in)
        throw invalid_input_error("cannot open config " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception &e) {
        throw invalid_input_error(std::string("config is not valid JSON: ") + e.what());
    }
    return config_from_json(j);
}

struct Report {
    std::uint64_t seed = 0;
    std::string pipeline;
    ModelSpec model;
    std::vector<CheckRecord> checks;
    double runtime = 0.0;

    bool passed() const
    {
        for (const auto &c : checks)
            if (c.status == CheckStatus::fail)
                return false;
        return true;
    }

    /// Without the runtime field the payload is deterministic in the seed.
    json to_json(bool with_runtime = true) const
    {
        json cs = json::array();
        int np = 0, nf = 0, nd = 0;
        for (const auto &c : checks) {
            cs.push_back(qexp::to_json(c));
            (c.status == CheckStatus::pass ? np : c.status == CheckStatus::fail ? nf : nd)++;
        }
        json j{{"schema_version", 1},
               {"rng_seed", seed},
               {"pipeline", pipeline},
               {"model", model_to_json(model)},
               {"checks", cs},
               {"summary", {{"pass", np}, {"fail", nf}, {"degenerate", nd}}}};
        if (with_runtime)
            j["runtime_seconds"] = runtime;
        return j;
    }
};

/// Runs the checks of one stage; violations become failed records,
/// unmet preconditions degenerate ones, numerical breakdowns a numerical_failure.
template <typename Fn>
inline CheckRecord guarded(const std::string &stage, const std::string &name, const std::string &tag, Fn &&fn)
{
    try {
        return fn();
    } catch (const theorem_violation &e) {
        auto r = detail::record(name, e.tag().empty() ? tag : e.tag());
        r.status = CheckStatus::fail;
        r.max_residual = std::numeric_limits<double>::infinity();
        r.data["error"] = e.what();
        return r;
    } catch (const independence_failure &e) {
        auto r = detail::record(name, tag);
        r.status = CheckStatus::fail;
        r.max_residual = std::numeric_limits<double>::infinity();
        r.data["error"] = e.what();
        return r;
    } catch (const precondition_error &e) {
        auto r = detail::record(name, tag);
        r.status = CheckStatus::degenerate;
        r.data["note"] = e.what();
        return r;
    } catch (const invalid_input_error &) {
        throw;
    } catch (const error &e) {
        throw numerical_failure(stage, e.what());
    }
}

inline Report run(const RunConfig &cfg)
{
    const auto t0 = std::chrono::steady_clock::now();
    Report rep;
    rep.seed = cfg.options.seed;
    rep.pipeline = cfg.pipeline;
    rep.model = cfg.model;
    const auto &m = cfg.model;
    const auto &o = cfg.options;
    const bool all = cfg.pipeline == "all";
    if (all || cfg.pipeline == "pencil") {
        rep.checks.push_back(guarded("pencil", "commutativity", "commuting-family", [&] { return check_commutativity(m, o); }));
        rep.checks.push_back(guarded("pencil", "leading coefficients", "leading-coefficients", [&] { return check_leading(m, o); }));
        rep.checks.push_back(guarded("pencil", "indicial identity at infinity", "infinity-indicial",
                                     [&] { return check_infinity_indicial(m, o); }));
        if (m.kind == ModelKind::gaudin)
            rep.checks.push_back(guarded("pencil", "indicial identity at the points", "point-indicial",
                                         [&] { return check_point_indicial(m, o); }));
        rep.checks.push_back(guarded("pencil", "equivariance and RTT", "equivariance", [&] { return check_equivariance(m, o); }));
    }
    if (all || cfg.pipeline == "bae")
        rep.checks.push_back(guarded("bae", "Bethe eigenvectors", "bethe-eigen", [&] { return check_bethe(m, o); }));
    if (all || cfg.pipeline == "census")
        rep.checks.push_back(guarded("census", "completeness census", "completeness", [&] { return check_census(m, o); }));
    if (all || cfg.pipeline == "kernel") {
        rep.checks.push_back(guarded("kernel", "kernel frames", "kernel-frame", [&] { return check_kernel(m, o); }));
        rep.checks.push_back(guarded("kernel", "local data", "local-data", [&] { return check_local_data(m, o); }));
    }
    if (all || cfg.pipeline == "compare")
        rep.checks.push_back(guarded("compare", "comparison", "comparison", [&] { return check_comparison(m, o, cfg.shift); }));
    rep.runtime = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rep;
}

} // namespace qexp

#endif
