#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <random>
#include <sstream>

#include "iadmm/errors.hpp"
#include "iadmm/oracle.hpp"
#include "iadmm/verify.hpp"

namespace iadmm {

namespace {

using Clock = std::chrono::steady_clock;
constexpr double kInfEps = std::numeric_limits<double>::infinity();

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string num(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

Vector random_vector(std::mt19937_64& eng, Index n) {
    std::normal_distribution<double> nd;
    Vector v(n);
    for (Index j = 0; j < n; ++j) v(j) = nd(eng);
    return v;
}

BlockVector random_block(std::mt19937_64& eng, const std::vector<Index>& dims) {
    Index n = 0;
    for (Index d : dims) n += d;
    return BlockVector(dims, random_vector(eng, n));
}

// Convex-mode runs reused by the decay and ergodic suites.
const SolveReport& convex_run(const std::string& id) {
    static std::map<std::string, SolveReport> cache;
    auto it = cache.find(id);
    if (it != cache.end()) return it->second;
    const CorpusEntry e = load_corpus(id);
    SolverParams p = default_params(e);
    p.tol = 0.0;
    p.max_outer = 2000;
    SolveOptions o;
    o.reference = e.reference;
    return cache.emplace(id, solve(e.problem, p, o)).first->second;
}

} // namespace

std::size_t SuiteReport::failures() const {
    return static_cast<std::size_t>(
        std::count_if(rows.begin(), rows.end(), [](const CheckRow& r) { return !r.pass; }));
}

void SuiteReport::append(const std::vector<CheckRow>& more) {
    rows.insert(rows.end(), more.begin(), more.end());
}

// ---------------------------------------------------------------- run checks

std::vector<CheckRow> decay_checks(const SolveReport& rep) {
    std::vector<CheckRow> rows;
    const double alpha = rep.params.alpha, sigma = rep.params.sigma;
    for (std::size_t j = 0; j + 1 < rep.history.size(); ++j) {
        const auto& r = rep.history[j];
        const auto& n = rep.history[j + 1];
        // Step 3 of a safeguard iteration ran with the rejected gamma.
        if (!r.E || !n.E || !r.delta_gap || r.gamma_changed) continue;
        const double Ek = r.E_rebased ? *r.E_rebased : *r.E;
        const double need = alpha * (2.0 * *r.delta_gap + sigma * r.R +
                                     r.rho * (1.0 - alpha) * (r.yz_Q_sq + r.feas * r.feas));
        rows.push_back(check_le("decay", static_cast<double>(r.k), need, Ek - *n.E,
                                1e-8 * (1.0 + std::abs(*r.E))));
    }
    return rows;
}

std::vector<CheckRow> gap_sign_checks(const SolveReport& rep) {
    std::vector<CheckRow> rows;
    for (const auto& r : rep.history)
        if (r.delta_gap)
            rows.push_back(check_le("gap-sign", static_cast<double>(r.k), -*r.delta_gap, 0.0, 1e-9));
    return rows;
}

std::vector<CheckRow> ergodic_checks(const SolveReport& rep) {
    std::vector<CheckRow> rows;
    if (rep.history.empty() || !rep.history.front().E) return rows;
    const double E1 = *rep.history.front().E;
    for (const auto& r : rep.history) {
        if (!r.ergodic_gap) continue;
        const double t = static_cast<double>(r.k);
        rows.push_back(check_le("ergodic", t, *r.ergodic_gap, E1 / (2.0 * rep.params.alpha * t), 1e-8));
    }
    return rows;
}

std::vector<CheckRow> strong_checks(const SolveReport& rep) {
    std::vector<CheckRow> rows;
    if (!rep.cbar || !rep.schedule) return rows;
    const double c = *rep.cbar, a = rep.params.alpha;
    const double k0 = rep.schedule->k0, th = rep.schedule->theta;
    const double slack = 1e-8 * (1.0 + c);
    for (const auto& r : rep.history) {
        const double t = static_cast<double>(r.k);
        if (r.weighted_gap)
            rows.push_back(check_le("acc-rate", t, *r.weighted_gap,
                                    2.0 * c / (a * (t * (t + 1.0) + 2.0 * k0 * t)), slack));
        const double ybound = c / ((t + k0) * (t + k0) * th);
        if (r.y_next_err_sq) rows.push_back(check_le("y-error", t, *r.y_next_err_sq, ybound, slack));
        if (r.y_next_err_P_sq)
            rows.push_back(check_le("y-error-P", t, *r.y_next_err_P_sq, ybound, slack));
    }
    return rows;
}

std::vector<CheckRow> strong_gamma_checks(const SolveReport& rep) {
    std::vector<CheckRow> rows;
    for (std::size_t j = 0; j + 1 < rep.history.size(); ++j) {
        const auto& r = rep.history[j];
        const auto& n = rep.history[j + 1];
        for (std::size_t i = 0; i < r.Gamma.size(); ++i) {
            if (std::isinf(r.Gamma[i])) continue;
            const double k = static_cast<double>(r.k);
            rows.push_back(check_le("strong-gamma", k, (k + 1.0) / n.Gamma[i], k / r.Gamma[i],
                                    1e-12 * k / r.Gamma[i]));
        }
    }
    return rows;
}

std::vector<CheckRow> gamma_monotone_checks(const SolveReport& rep) {
    std::vector<CheckRow> rows;
    for (std::size_t j = 0; j + 1 < rep.history.size(); ++j)
        for (std::size_t i = 0; i < rep.history[j].Gamma.size(); ++i)
            rows.push_back(check_le("gamma-monotone", static_cast<double>(rep.history[j + 1].k),
                                    rep.history[j].Gamma[i], rep.history[j + 1].Gamma[i], 0.0));
    return rows;
}

std::optional<double> stationarity_ratio(const SolveReport& rep) {
    std::optional<double> best;
    for (std::size_t j = 1; j < rep.history.size(); ++j) {
        const auto& r = rep.history[j];
        const auto& p = rep.history[j - 1];
        if (!r.stationarity_y_next) continue;
        const double d = r.yz_gap + r.feas + std::sqrt(r.R) + p.yz_gap + p.feas + std::sqrt(p.R);
        if (!(d > 0.0)) continue;
        const double q = *r.stationarity_y_next / d;
        if (!best || q > *best) best = q;
    }
    return best;
}

std::vector<double> energy_series(const SolveReport& rep) {
    std::vector<double> out;
    for (const auto& r : rep.history)
        if (r.E) out.push_back(*r.E);
    return out;
}

namespace {

std::vector<std::pair<double, double>> series_of(
    const SolveReport& rep, const std::function<std::optional<double>(const IterationRecord&)>& get) {
    std::vector<std::pair<double, double>> out;
    for (const auto& r : rep.history)
        if (auto v = get(r)) out.emplace_back(static_cast<double>(r.k), *v);
    return out;
}

} // namespace

std::vector<std::pair<double, double>> ergodic_gap_series(const SolveReport& rep) {
    return series_of(rep, [](const IterationRecord& r) { return r.ergodic_gap; });
}

std::vector<std::pair<double, double>> weighted_gap_series(const SolveReport& rep) {
    return series_of(rep, [](const IterationRecord& r) { return r.weighted_gap; });
}

std::vector<std::pair<double, double>> y_error_series(const SolveReport& rep) {
    return series_of(rep, [](const IterationRecord& r) { return r.y_next_err_sq; });
}

// ---------------------------------------------------------------- inner checks

std::vector<CheckRow> xi_checks(const InnerTrace& trace, const std::string& label) {
    std::vector<CheckRow> rows;
    for (const auto& r : trace.rows)
        rows.push_back(check_le("xi " + label, static_cast<double>(r.l), std::abs(r.xi - 1.0), 0.0, 1e-9));
    return rows;
}

std::vector<CheckRow> ag_converge_checks(const SubproblemView& sub, const Vector& x_k,
                                         const InnerTrace& trace, const Vector& xbar, double sigma,
                                         const std::string& label) {
    if (!trace.keep_vectors) throw ConfigError("ag_converge_checks: trace without vectors");
    std::vector<CheckRow> rows;
    const double start = (x_k - xbar).squaredNorm();
    for (const auto& r : trace.rows) {
        const double lhs = sub.rho * sub.gamma * (r.a - xbar).squaredNorm() + sigma / r.gamma * r.xi_sum_sq;
        rows.push_back(check_le("ag-converge " + label, static_cast<double>(r.l), lhs, start / r.gamma, 1e-8));
    }
    return rows;
}

std::vector<CheckRow> convex_combination_checks(const InnerTrace& trace, const std::string& label) {
    if (!trace.keep_vectors) throw ConfigError("convex_combination_checks: trace without vectors");
    std::vector<CheckRow> rows;
    if (trace.rows.empty()) return rows;
    Vector acc = Vector::Zero(trace.rows.front().u.size());
    for (const auto& r : trace.rows) {
        acc += r.gamma * r.alpha * r.u;
        const double err = (acc / r.gamma - r.a).norm();
        rows.push_back(check_le("convex-combination " + label, static_cast<double>(r.l), err, 0.0,
                                1e-10 * (1.0 + r.a.norm())));
    }
    return rows;
}

std::vector<CheckRow> constant_rule_checks(const InnerTrace& trace, double zeta, double sigma,
                                           const std::string& label) {
    std::vector<CheckRow> rows;
    for (const auto& r : trace.rows) {
        const double l = static_cast<double>(r.l);
        const double want = (1.0 - sigma) * l * (l + 1.0) / (4.0 * zeta);
        rows.push_back(check_le("constant-gamma " + label, l, std::abs(r.gamma - want), 0.0, 1e-10 * want));
    }
    return rows;
}

SubproblemFixture random_subproblem(const ProblemSpec& problem, Index i, std::uint64_t seed,
                                    double rho) {
    std::mt19937_64 eng(seed);
    const auto dims = problem.dims();
    SubproblemFixture fx;
    fx.state.x = random_block(eng, dims);
    fx.state.y = random_block(eng, dims);
    fx.state.z = random_block(eng, dims);
    fx.state.lambda = random_vector(eng, problem.rows());
    fx.state.rho = rho;
    fx.state.gamma = initial_gamma(problem, SolverParams{});
    fx.state.Gamma.assign(dims.size(), 0.0);
    fx.sub = make_subproblem(problem, fx.state, i);
    fx.x_k = fx.state.x.block(i);
    return fx;
}

// ---------------------------------------------------------------- operators

std::vector<CheckRow> operator_checks(const CorpusEntry& entry, std::uint64_t seed) {
    std::vector<CheckRow> rows;
    std::mt19937_64 eng(seed);
    const ProblemSpec& p = entry.problem;
    const std::string& id = entry.id;

    for (Index i = 0; i < p.num_blocks(); ++i) {
        const LinearMap& A = p.blocks[static_cast<std::size_t>(i)].A;
        double worst = 0.0;
        for (int t = 0; t < 100; ++t) {
            const Vector x = random_vector(eng, A.cols());
            const Vector w = random_vector(eng, A.rows());
            const Vector Ax = A.apply(x), Atw = A.adjoint(w);
            const double scale = Ax.norm() * w.norm() + x.norm() * Atw.norm();
            if (scale > 0.0) worst = std::max(worst, std::abs(Ax.dot(w) - x.dot(Atw)) / scale);
        }
        rows.push_back(check_le("adjoint " + id, static_cast<double>(i + 1), worst, 1e-10, 0.0));
    }

    if (entry.imaging) {
        const Index side = entry.imaging->side;
        const LinearMap PsiT = LinearMap::haar_2d(side, 4);
        double worst = 0.0;
        for (int t = 0; t < 10; ++t) {
            const Vector w = random_vector(eng, PsiT.rows());
            worst = std::max(worst, (PsiT.adjoint(PsiT.apply(w)) - w).norm() / w.norm());
            worst = std::max(worst, (PsiT.apply(PsiT.adjoint(w)) - w).norm() / w.norm());
        }
        rows.push_back(check_le("orthonormal " + id, 0.0, worst, 1e-12, 0.0));
    }

    const auto dims = p.dims();
    std::vector<double> gamma;
    std::uniform_real_distribution<double> ud(1.0, 5.0);
    for (std::size_t i = 0; i < dims.size(); ++i) gamma.push_back(ud(eng));
    const BlockTriangular M(p.operators(), gamma);
    const double alpha = 0.5;

    // Back substitution: M^T (y+ - y) = alpha Q (z - y).
    for (int t = 0; t < 3; ++t) {
        const BlockVector y = random_block(eng, dims), z = random_block(eng, dims);
        const BlockVector yp = back_substitute(M, y, z, alpha);
        const BlockVector lhs = M.apply_transpose(yp - y);
        BlockVector rhs = z - y;
        for (Index i = 0; i < rhs.num_blocks(); ++i) rhs.block(i) *= alpha * gamma[static_cast<std::size_t>(i)];
        rows.push_back(check_le("back-substitution " + id, t, (lhs - rhs).norm(), 1e-10 * (1.0 + rhs.norm()), 0.0));
    }

    // P norm against a dense assembly of M.
    const Matrix Md = M.to_dense();
    Vector qinv(Md.rows());
    for (Index i = 0, off = 0; i < static_cast<Index>(dims.size()); off += dims[static_cast<std::size_t>(i)], ++i)
        qinv.segment(off, dims[static_cast<std::size_t>(i)]).setConstant(1.0 / gamma[static_cast<std::size_t>(i)]);
    const bool full_P = Md.rows() <= 1500;
    Matrix Pd;
    if (full_P) Pd = Md * qinv.asDiagonal() * Md.transpose();
    for (int t = 0; t < 3; ++t) {
        const BlockVector x = random_block(eng, dims);
        double want;
        if (full_P) {
            want = x.flat().dot(Pd * x.flat());
        } else {
            const Vector v = Md.transpose() * x.flat();
            want = v.dot(qinv.asDiagonal() * v);
        }
        const double got = p_norm_sq(M, x);
        rows.push_back(check_le("p-norm " + id, t, std::abs(got - want), 1e-10 * std::max(1.0, want), 0.0));
    }
    return rows;
}

// ---------------------------------------------------------------- corpora

std::vector<std::string> qp_corpus() {
    std::vector<std::string> ids;
    for (int s = 0; s < 10; ++s) ids.push_back(qp_id(static_cast<std::uint64_t>(s), 3));
    return ids;
}

std::vector<std::string> strong_corpus() {
    std::vector<std::string> ids;
    for (int s = 0; s < 5; ++s) ids.push_back(qp_id(static_cast<std::uint64_t>(s), 3, 0.5));
    return ids;
}

std::vector<std::string> lasso_corpus() {
    std::vector<std::string> ids;
    for (int s = 0; s < 5; ++s) ids.push_back("lasso-" + std::to_string(s));
    return ids;
}

std::vector<std::string> mixed_corpus() {
    return {qp_id(0, 3),      qp_id(1, 3),      qp_id(2, 4),  qp_id(3, 2),  qp_id(0, 3, 0.5),
            qp_id(1, 3, 0.5), "lasso-0",        "lasso-1",    "img-0-s16",  "img-1-s16"};
}

SolverParams default_params(const CorpusEntry& entry) {
    SolverParams p;
    if (entry.has_tag("imaging")) {
        p.gamma_init = GammaInit::safeguard;
        p.rho = 30.0;
        p.alpha = 0.9;
        p.tol = 1e-6;
    }
    return p;
}

double imaging_objective(const CorpusEntry& entry, const Vector& u) {
    if (!entry.imaging) throw ConfigError("imaging_objective: not an imaging entry");
    const ImagingData& d = *entry.imaging;
    const LinearMap F = LinearMap::separable_convolution(d.side, d.kernel);
    const LinearMap B = LinearMap::finite_difference_2d(d.side);
    const LinearMap PsiT = LinearMap::haar_2d(d.side, 4);
    const Vector r = F.apply(u) - d.observed;
    const Vector g = B.apply(u);
    double tv = 0.0;
    for (Index j = 0; j + 1 < g.size(); j += 2) tv += std::hypot(g(j), g(j + 1));
    return 0.5 * r.squaredNorm() + d.alpha_tv * tv + d.beta_l1 * PsiT.apply(u).lpNorm<1>();
}

// ---------------------------------------------------------------- rates

std::optional<RateFit> fit_until_floor(const std::vector<std::pair<double, double>>& series,
                                       double lo, double hi, double floor) {
    std::vector<std::pair<double, double>> kept;
    for (const auto& [k, v] : series) {
        if (k < lo || k > hi) continue;
        if (!(v > floor)) break;
        kept.emplace_back(k, v);
    }
    if (kept.size() < 2) return std::nullopt;
    return rate_fit(kept, lo, hi);
}

RateStudy rate_study(const SolveReport& rep, const CorpusEntry& entry, double lo, double hi) {
    RateStudy st;
    auto add = [&](const std::string& name, const std::vector<std::pair<double, double>>& s) {
        if (s.empty()) return;
        if (auto f = fit_until_floor(s, lo, hi)) {
            st.fits.emplace_back(name, *f);
            if (f->hi < hi && f->hi < s.back().first)
                st.notes.push_back(name + ": series reached zero after k = " + num(f->hi));
        } else {
            st.notes.push_back(name + ": fewer than two positive points in the window");
        }
    };
    if (rep.schedule) {
        add("weighted-gap", weighted_gap_series(rep));
        add("y-error", y_error_series(rep));
    } else {
        add("ergodic-gap", ergodic_gap_series(rep));
    }
    if (entry.has_tag("polyhedral")) {
        st.ratios = two_step_ratio(energy_series(rep));
        st.notes.push_back("two-step tail max " + num(st.ratios->tail_max) + " over " +
                           std::to_string(st.ratios->tail) + " pairs");
    }
    if (auto q = stationarity_ratio(rep)) st.notes.push_back("stationarity ratio sup " + num(*q));
    return st;
}

// ---------------------------------------------------------------- suites

namespace {

SuiteReport suite_inner_xi() {
    SuiteReport rep;
    long total = 0;
    for (const auto& id : mixed_corpus()) {
        const CorpusEntry e = load_corpus(id);
        for (ParamRule rule : {ParamRule::adaptive, ParamRule::constant}) {
            for (Index i = 0; i < e.problem.num_blocks(); ++i) {
                const auto& f = e.problem.blocks[static_cast<std::size_t>(i)].f;
                if (rule == ParamRule::constant && !f.is_zero && !f.lipschitz) continue;
                const auto fx = random_subproblem(e.problem, i, 100 + static_cast<std::uint64_t>(i));
                InnerParams ip;
                ip.rule = rule;
                ip.fixed_iters = e.has_tag("imaging") ? 20 : 60;
                InnerTrace tr;
                run_inner(fx.sub, fx.x_k, 0.0, kInfEps, ip, &tr);
                total += static_cast<long>(tr.rows.size());
                rep.append(xi_checks(tr, id + " block " + std::to_string(i + 1) + " " + to_string(rule)));
            }
        }
    }
    rep.notes.push_back("inner iterations checked: " + std::to_string(total));
    return rep;
}

std::vector<std::pair<std::string, Index>> strongly_convex_subproblems() {
    std::vector<std::pair<std::string, Index>> out;
    const auto s = strong_corpus();
    const auto l = lasso_corpus();
    for (int j = 0; j < 10; ++j) out.emplace_back(s[static_cast<std::size_t>(j % 5)], j / 5);
    for (int j = 0; j < 10; ++j) out.emplace_back(l[static_cast<std::size_t>(j % 5)], 1 + j / 5);
    return out;
}

SuiteReport suite_inner_ag() {
    SuiteReport rep;
    std::uint64_t seed = 7;
    for (const auto& [id, i] : strongly_convex_subproblems()) {
        const CorpusEntry e = load_corpus(id);
        const auto fx = random_subproblem(e.problem, i, seed++);
        const Vector xbar = subproblem_minimizer(fx.sub, 1e-13);
        InnerParams ip;
        ip.fixed_iters = 200;
        InnerTrace tr;
        tr.keep_vectors = true;
        run_inner(fx.sub, fx.x_k, 0.0, kInfEps, ip, &tr);
        const std::string label = id + " block " + std::to_string(i + 1);
        rep.append(ag_converge_checks(fx.sub, fx.x_k, tr, xbar, ip.sigma, label));
    }
    return rep;
}

SuiteReport suite_inner_props() {
    SuiteReport rep;
    for (const auto& id : {qp_id(0, 3), qp_id(1, 3, 0.5), std::string("lasso-0")}) {
        const CorpusEntry e = load_corpus(id);
        for (Index i = 0; i < e.problem.num_blocks(); ++i) {
            const auto fx = random_subproblem(e.problem, i, 31 + static_cast<std::uint64_t>(i));
            const auto& f = e.problem.blocks[static_cast<std::size_t>(i)].f;
            const std::string label = id + " block " + std::to_string(i + 1);
            for (ParamRule rule : {ParamRule::adaptive, ParamRule::constant}) {
                InnerParams ip;
                ip.rule = rule;
                ip.fixed_iters = 200;
                InnerTrace tr;
                tr.keep_vectors = true;
                run_inner(fx.sub, fx.x_k, 0.0, kInfEps, ip, &tr);
                rep.append(convex_combination_checks(tr, label + " " + to_string(rule)));
                if (rule == ParamRule::constant)
                    rep.append(constant_rule_checks(tr, *f.lipschitz, ip.sigma, label));
                // gamma^l >= l^2 / (4 max_j delta^j / alpha^j), from sqrt(gamma^l) >=
                // sqrt(gamma^{l-1}) + 1/(2 sqrt(delta^l / alpha^l)) when xi = 1.
                double cmax = 0.0;
                std::vector<std::pair<double, double>> g;
                for (const auto& r : tr.rows) {
                    const double l = static_cast<double>(r.l);
                    cmax = std::max(cmax, r.delta / r.alpha);
                    const double floor = l * l / (4.0 * cmax);
                    rep.rows.push_back(check_le("gamma-floor " + label + " " + to_string(rule), l, floor,
                                                r.gamma, 1e-12 * floor));
                    g.emplace_back(l, r.gamma);
                }
                const RateFit fit = rate_fit(g, 20.0, 1e9);
                if (rule == ParamRule::constant)
                    rep.rows.push_back(check_le("gamma-growth " + label, 0.0, -fit.slope, -(2.0 - 0.05), 0.0));
                else
                    rep.notes.push_back("gamma growth slope " + label + " adaptive " + num(fit.slope));
            }
        }
    }
    return rep;
}

SuiteReport suite_decay() {
    SuiteReport rep;
    for (const auto& id : qp_corpus()) {
        const SolveReport& r = convex_run(id);
        rep.append(decay_checks(r));
        rep.append(gap_sign_checks(r));
        rep.append(gamma_monotone_checks(r));
        if (auto q = stationarity_ratio(r)) rep.notes.push_back(id + " stationarity ratio sup " + num(*q));
    }
    return rep;
}

SuiteReport suite_ergodic() {
    SuiteReport rep;
    for (const auto& id : qp_corpus()) {
        const SolveReport& r = convex_run(id);
        rep.append(ergodic_checks(r));
        const auto fit = fit_until_floor(ergodic_gap_series(r), 50.0, 2000.0);
        if (!fit) {
            rep.rows.push_back({"ergodic-slope " + id, 0.0, 0.0, 0.0, 0.0, false});
            rep.notes.push_back(id + ": no positive ergodic gaps in [50, 2000]");
            continue;
        }
        rep.rows.push_back(check_le("ergodic-slope " + id, fit->hi, fit->slope, -1.0 + 0.15, 0.0));
        rep.notes.push_back(id + " ergodic slope " + num(fit->slope) + " over [" + num(fit->lo) +
                            ", " + num(fit->hi) + "]");
    }
    return rep;
}

SuiteReport suite_strong() {
    SuiteReport rep;
    for (const auto& id : strong_corpus()) {
        const CorpusEntry e = load_corpus(id);
        SolverParams p = default_params(e);
        p.mode = Mode::strong;
        p.tol = 0.0;
        p.max_outer = 2000;
        SolveOptions o;
        o.reference = e.reference;
        const SolveReport r = solve(e.problem, p, o);
        rep.append(strong_checks(r));
        rep.append(strong_gamma_checks(r));
        for (const auto& [name, s] : {std::pair{"weighted-gap", weighted_gap_series(r)},
                                      std::pair{"y-error", y_error_series(r)}}) {
            const auto fit = fit_until_floor(s, 50.0, 2000.0);
            if (!fit) {
                rep.rows.push_back({std::string(name) + "-slope " + id, 0.0, 0.0, 0.0, 0.0, false});
                continue;
            }
            rep.rows.push_back(check_le(std::string(name) + "-slope " + id, fit->hi, fit->slope,
                                        -2.0 + 0.2, 0.0));
            rep.notes.push_back(id + " " + name + " slope " + num(fit->slope) + " over [" +
                                num(fit->lo) + ", " + num(fit->hi) + "]");
        }
        rep.notes.push_back(id + " cbar " + num(*r.cbar) + " k0 " + num(r.schedule->k0) +
                            " theta " + num(r.schedule->theta));
    }
    return rep;
}

SuiteReport suite_fixed_point() {
    SuiteReport rep;
    for (const auto& id : qp_corpus()) {
        const CorpusEntry e = load_corpus(id);
        SolverParams p = default_params(e);
        p.tol = 1e-12;
        p.max_outer = 5;
        SolveOptions o;
        o.x0 = e.reference->x;
        o.lambda0 = e.reference->lambda;
        const SolveReport r = solve(e.problem, p, o);
        const double k = static_cast<double>(r.iterations());
        rep.rows.push_back(check_le("fixed-point-k " + id, k, k, 1.0, 0.0));
        rep.rows.push_back(check_le("fixed-point-eps " + id, k, r.history.front().eps, 1e-12, 0.0));
        rep.rows.push_back(check_le("fixed-point-kkt " + id, k, r.final_kkt.value_or(kInfEps), 1e-8, 0.0));
    }

    // min 1/2 ||x||^2 s.t. x_1 + x_2 = 2: every quantity is exactly representable.
    ProblemSpec fx;
    fx.b = Vector::Constant(1, 2.0);
    for (int i = 0; i < 2; ++i)
        fx.blocks.push_back({quadratic_form(Matrix::Identity(1, 1), Vector::Zero(1), 1.0), zero_prox(),
                             LinearMap::dense(Matrix::Ones(1, 1))});
    SolverParams p;
    p.rule = ParamRule::constant;
    p.gamma = {1.0, 1.0};
    p.tol = 0.0;
    p.max_outer = 5;
    SolveOptions o;
    o.x0 = BlockVector({1, 1}, Vector::Ones(2));
    o.lambda0 = Vector::Constant(1, -1.0);
    const SolveReport r = solve(fx, p, o);
    rep.rows.push_back(check_le("fixed-point-exact-zero", static_cast<double>(r.iterations()),
                                r.cause == Termination::exact_zero ? 0.0 : 1.0, 0.0, 0.0));
    rep.rows.push_back(check_le("fixed-point-exact-zero-kkt", 1.0, r.final_kkt.value_or(kInfEps), 0.0, 0.0));
    return rep;
}

SuiteReport suite_linear() {
    SuiteReport rep;
    for (const auto& id : lasso_corpus()) {
        const CorpusEntry e = load_corpus(id);
        SolverParams p = default_params(e);
        p.tol = 1e-9;
        p.max_outer = 20000;
        SolveOptions o;
        o.reference = e.reference;
        const SolveReport r = solve(e.problem, p, o);
        // The solution set is a singleton (strongly convex blocks), so E*_k = E_k.
        const TwoStepRatios tr = two_step_ratio(energy_series(r));
        rep.rows.push_back(check_le("two-step-tail " + id, static_cast<double>(tr.tail), tr.tail_max, 1.0, 0.0));
        rep.rows.back().pass = tr.tail > 0 && tr.tail_max < 1.0;
        std::ostringstream os;
        os << id << " iterations " << r.iterations() << " tail max " << tr.tail_max << " ratios";
        for (double q : tr.ratios) os << ' ' << q;
        rep.notes.push_back(os.str());
        if (auto q = stationarity_ratio(r)) rep.notes.push_back(id + " stationarity ratio sup " + num(*q));
    }
    return rep;
}

SuiteReport suite_cross_mode() {
    SuiteReport rep;
    for (const auto& id : {qp_id(0, 3), qp_id(1, 3), qp_id(2, 3), std::string("lasso-0"),
                           std::string("lasso-1")}) {
        const CorpusEntry e = load_corpus(id);
        SolverParams p = default_params(e);
        p.tol = 1e-10;
        p.max_outer = 100000;
        const SolveReport inexact = solve(e.problem, p);
        p.mode = Mode::exact;
        p.exact_tol = 1e-13;
        const SolveReport exact = solve(e.problem, p);
        const double d = (inexact.final_state.z - exact.final_state.z).norm();
        rep.rows.push_back(check_le("cross-mode " + id, static_cast<double>(inexact.iterations()), d, 1e-6, 0.0));
        rep.rows.back().pass = rep.rows.back().pass && inexact.converged() && exact.converged();
        rep.notes.push_back(id + " inexact " + to_string(inexact.cause) + " k=" +
                            std::to_string(inexact.iterations()) + ", exact " + to_string(exact.cause) +
                            " k=" + std::to_string(exact.iterations()));
    }
    return rep;
}

SuiteReport suite_imaging() {
    SuiteReport rep;
    const CorpusEntry e = load_corpus("img-0-s32");
    SolverParams p = default_params(e);
    p.tol = 1e-6;
    p.max_outer = 1000000;
    p.max_seconds = 60.0;
    SolveOptions o;
    o.ergodic_every = 10;
    o.ergodic_metric = [&](const BlockVector& zbar) { return imaging_objective(e, zbar.block(0)); };
    const SolveReport r = solve(e.problem, p, o);
    const double k = static_cast<double>(r.iterations());
    const double eps = r.history.empty() ? kInfEps : r.history.back().eps;
    rep.rows.push_back(check_le("imaging-eps", k, eps, 1e-6, 0.0));
    rep.rows.push_back(check_le("imaging-seconds", k, r.seconds, 60.0, 0.0));
    rep.rows.push_back(check_le("imaging-safeguard", k, static_cast<double>(r.safeguard_events.size()), 10.0, 0.0));
    std::optional<double> prev;
    long bumps = 0;
    double worst = 0.0;
    for (const auto& h : r.history) {
        if (!h.ergodic_metric) continue;
        if (prev) {
            const double rise = *h.ergodic_metric - *prev;
            const double noise = 1e-10 * (1.0 + std::abs(*prev));
            if (rise > noise) ++bumps;
            worst = std::max(worst, rise - noise);
        }
        prev = h.ergodic_metric;
    }
    rep.rows.push_back(check_le("imaging-ergodic-monotone", k, worst, 0.0, 0.0));
    rep.notes.push_back("img-0-s32 " + to_string(r.cause) + " k=" + std::to_string(r.iterations()) +
                        " eps=" + num(eps) + " seconds=" + num(r.seconds) + " safeguard=" +
                        std::to_string(r.safeguard_events.size()) + " ergodic rises=" +
                        std::to_string(bumps) + " objective=" + num(prev.value_or(0.0)));
    return rep;
}

SuiteReport suite_operators() {
    SuiteReport rep;
    std::vector<std::string> ids = qp_corpus();
    for (const auto& v : {strong_corpus(), lasso_corpus()}) ids.insert(ids.end(), v.begin(), v.end());
    ids.push_back("img-0-s16");
    ids.push_back("img-0-s32");
    for (const auto& id : ids) rep.append(operator_checks(load_corpus(id)));
    return rep;
}

const std::map<std::string, SuiteReport (*)()>& registry() {
    static const std::map<std::string, SuiteReport (*)()> r = {
        {"inner-xi", suite_inner_xi},       {"inner-ag", suite_inner_ag},
        {"inner-props", suite_inner_props}, {"decay", suite_decay},
        {"ergodic", suite_ergodic},         {"strong", suite_strong},
        {"fixed-point", suite_fixed_point}, {"linear", suite_linear},
        {"cross-mode", suite_cross_mode},   {"imaging", suite_imaging},
        {"operators", suite_operators},
    };
    return r;
}

} // namespace

std::vector<std::string> suite_names() {
    std::vector<std::string> out{"inner"};
    for (const auto& [k, v] : registry()) out.push_back(k);
    return out;
}

SuiteReport run_suite(const std::string& name) {
    const auto t0 = Clock::now();
    SuiteReport rep;
    if (name == "inner") {
        for (const char* part : {"inner-xi", "inner-ag", "inner-props"}) {
            SuiteReport s = registry().at(part)();
            rep.append(s.rows);
            rep.notes.insert(rep.notes.end(), s.notes.begin(), s.notes.end());
        }
    } else {
        auto it = registry().find(name);
        if (it == registry().end()) throw ConfigError("unknown suite '" + name + "'");
        rep = it->second();
    }
    rep.name = name;
    rep.seconds = seconds_since(t0);
    return rep;
}

} // namespace iadmm
