#include <chrono>
#include <cmath>
#include <limits>
#include <ostream>

#include "iadmm/errors.hpp"
#include "iadmm/oracle.hpp"
#include "iadmm/outer.hpp"

namespace iadmm {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double yz_q_norm_sq(const BlockVector& y, const BlockVector& z, const std::vector<double>& gamma) {
    double s = 0.0;
    for (Index i = 0; i < y.num_blocks(); ++i)
        s += gamma[static_cast<std::size_t>(i)] * (y.block(i) - z.block(i)).squaredNorm();
    return s;
}

} // namespace

std::string to_string(Mode m) {
    switch (m) {
    case Mode::convex: return "convex";
    case Mode::strong: return "strong";
    case Mode::exact: return "exact";
    }
    return "?";
}

std::string to_string(ParamRule r) { return r == ParamRule::constant ? "constant" : "adaptive"; }

std::string to_string(Termination t) {
    switch (t) {
    case Termination::tolerance: return "tolerance";
    case Termination::exact_zero: return "exact-zero";
    case Termination::max_iterations: return "max-iterations";
    case Termination::time_limit: return "time-limit";
    case Termination::numeric_error: return "numeric-error";
    }
    return "?";
}

Mode parse_mode(const std::string& s) {
    if (s == "convex") return Mode::convex;
    if (s == "strong") return Mode::strong;
    if (s == "exact") return Mode::exact;
    throw ConfigError("unknown mode '" + s + "'");
}

ParamRule parse_rule(const std::string& s) {
    if (s == "constant") return ParamRule::constant;
    if (s == "adaptive") return ParamRule::adaptive;
    throw ConfigError("unknown rule '" + s + "'");
}

void SolverParams::validate() const {
    if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
    if (!(sigma > 0.0 && sigma < 1.0)) throw ConfigError("sigma must lie in (0, 1)");
    if (!(theta1 > 0.0 && theta2 > 0.0 && theta3 > 0.0)) throw ConfigError("theta_i must be > 0");
    if (!(rho > 0.0)) throw ConfigError("rho must be > 0");
    if (!(delta_min > 0.0 && delta_min <= delta_max)) throw ConfigError("need 0 < delta_min <= delta_max");
    if (!(eta > 1.0)) throw ConfigError("eta must be > 1");
    if (!(c_psi > 0.0)) throw ConfigError("c_psi must be > 0");
    if (!(tol >= 0.0)) throw ConfigError("tol must be >= 0");
    if (max_outer < 1 || max_inner < 1) throw ConfigError("iteration caps must be >= 1");
    if (!(safeguard_start > 0.0 && safeguard_factor > 1.0))
        throw ConfigError("safeguard needs a positive start and a factor > 1");
    for (double g : gamma)
        if (!(g > 0.0)) throw ConfigError("gamma_i must be > 0");
}

InnerParams SolverParams::inner(long outer_k) const {
    InnerParams p;
    p.rule = rule;
    p.sigma = sigma;
    p.delta_min = delta_min;
    p.delta_max = delta_max;
    p.eta = eta;
    p.c_psi = c_psi;
    p.max_iters = max_inner;
    p.one_step = one_step;
    p.strong_gamma = mode == Mode::strong;
    p.outer_k = outer_k;
    return p;
}

StrongSchedule rho_strong_from_norms(double mu, double alpha, double P_norm, double scaled_P_norm) {
    if (!(mu > 0.0)) throw ConfigError("strong mode needs mu > 0");
    if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
    if (!(P_norm > 0.0) || !(scaled_P_norm > 0.0)) throw ConfigError("strong mode: degenerate P");
    StrongSchedule s;
    s.mu = mu;
    s.P_norm = P_norm;
    s.scaled_P_norm = scaled_P_norm;
    s.theta = alpha * mu / (8.0 * P_norm);
    s.k0 = 4.0 * scaled_P_norm / (alpha * (1.0 - alpha));
    return s;
}

StrongSchedule rho_strong(double mu, double alpha, const BlockTriangular& M) {
    const auto dims = M.dims();
    Index n = 0;
    for (Index d : dims) n += d;
    auto wrap = [&](auto&& f) {
        return [&, f](const Vector& v) { return f(BlockVector(dims, v)).flat(); };
    };
    const double P = spectral_norm_sym(wrap([&](const BlockVector& b) { return M.apply_P(b); }), n);
    const double S =
        spectral_norm_sym(wrap([&](const BlockVector& b) { return M.apply_scaled_P(b); }), n);
    return rho_strong_from_norms(mu, alpha, P, S);
}

double step2_epsilon(const BlockVector& z, const BlockVector& y, const Vector& Az_minus_b, double R,
                     double theta1, double theta2, double theta3) {
    if (!(R >= 0.0)) throw ConfigError("step2_epsilon: R must be >= 0");
    return theta1 * (z - y).norm() + theta2 * Az_minus_b.norm() + theta3 * std::sqrt(R);
}

DualPrimalUpdate step3_update(const OuterState& state, const BlockTriangular& M,
                              const ProblemSpec& problem, double alpha) {
    DualPrimalUpdate out;
    out.y = back_substitute(M, state.y, state.z, alpha);
    out.lambda = state.lambda + alpha * state.rho * (apply_A(problem, state.z) - problem.b);
    return out;
}

double gamma_safeguard(double gamma, const Vector& d, const LinearMap& A, double factor) {
    if (!(gamma > 0.0)) throw ConfigError("gamma_safeguard: gamma must be > 0");
    return gamma * d.squaredNorm() >= A.apply(d).squaredNorm() ? gamma : factor * gamma;
}

InnerResult exact_block_step(Index i, const OuterState& state, const ProblemSpec& problem,
                             double tol_inner) {
    const SubproblemView sub = make_subproblem(problem, state, i);
    InnerResult res;
    res.x_next = subproblem_minimizer(sub, tol_inner);
    res.z = res.x_next;
    res.Gamma = kInf;
    res.r = 0.0;
    res.iters = 0;
    return res;
}

std::vector<double> initial_gamma(const ProblemSpec& problem, const SolverParams& params) {
    const auto m = static_cast<std::size_t>(problem.num_blocks());
    if (!params.gamma.empty()) {
        if (params.gamma.size() != m) throw ConfigError("gamma needs one entry per block");
        return params.gamma;
    }
    std::vector<double> g(m);
    for (std::size_t i = 0; i < m; ++i) {
        if (params.gamma_init == GammaInit::safeguard) {
            g[i] = params.safeguard_start;
            continue;
        }
        const auto& A = problem.blocks[i].A;
        double nrm;
        switch (A.kind()) {
        case MapKind::identity:
        case MapKind::negated_identity: nrm = 1.0; break;
        case MapKind::zero: nrm = 0.0; break;
        default: nrm = gram_norm(A);
        }
        g[i] = nrm > 0.0 ? nrm * (1.0 + params.gamma_margin) : 1.0;
    }
    return g;
}

SolveReport solve(const ProblemSpec& problem, const SolverParams& params,
                  const SolveOptions& options) {
    const auto t_start = std::chrono::steady_clock::now();
    problem.validate();
    params.validate();
    const Index m = problem.num_blocks();
    const auto dims = problem.dims();
    const double alpha = params.alpha;

    if (params.rule == ParamRule::constant)
        for (Index i = 0; i < m; ++i) {
            const auto& f = problem.blocks[static_cast<std::size_t>(i)].f;
            if (!f.is_zero && !f.lipschitz)
                throw ConfigError("constant rule needs a Lipschitz constant for f_" +
                                  std::to_string(i + 1));
        }

    OuterState st;
    st.x = options.x0 ? *options.x0 : BlockVector(dims);
    if (st.x.dims() != dims) throw StructuralError("solve: x0 does not match the block dims");
    st.y = st.x;
    st.z = st.x;
    st.lambda = options.lambda0 ? *options.lambda0 : Vector::Zero(problem.rows());
    if (st.lambda.size() != problem.rows()) throw StructuralError("solve: lambda0 has the wrong length");
    st.Gamma.assign(static_cast<std::size_t>(m), 0.0);
    st.gamma = initial_gamma(problem, params);
    st.rho = params.rho;

    BlockTriangular M(problem.operators(), st.gamma);

    SolveReport rep;
    rep.params = params;
    rep.guaranteed = !params.one_step;
    const auto& ref = options.reference;
    if (ref && (!ref->x.conforms(st.x) || ref->lambda.size() != problem.rows()))
        throw StructuralError("solve: reference pair does not match the problem");

    double mu = 0.0;
    if (params.mode == Mode::strong) {
        mu = params.mu > 0.0 ? params.mu : problem.strong_modulus();
        if (!(mu > 0.0)) throw ConfigError("strong mode unavailable: aggregated modulus is 0");
        rep.schedule = rho_strong(mu, alpha, M);
    }

    const double phi_star = ref ? objective(problem, ref->x) : 0.0;
    BlockVector z_sum(dims), z_wsum(dims);
    double w_sum = 0.0;

    for (long k = 1; k <= params.max_outer; ++k) {
        st.k = k;
        if (rep.schedule) st.rho = rep.schedule->rho(k);

        // Step 1: Gauss-Seidel sweep.
        BlockVector x_next(dims);
        std::vector<double> Gamma_new(static_cast<std::size_t>(m));
        std::vector<long> iters(static_cast<std::size_t>(m));
        double R = 0.0;
        const InnerParams ip = params.inner(k);
        for (Index i = 0; i < m; ++i) {
            const auto s = static_cast<std::size_t>(i);
            InnerResult res;
            try {
                if (params.mode == Mode::exact) {
                    res = exact_block_step(i, st, problem, params.exact_tol);
                } else {
                    res = run_inner(make_subproblem(problem, st, i), st.x.block(i), st.Gamma[s],
                                    st.eps, ip);
                }
            } catch (const NumericError& e) {
                NumericError ctx = e.with_context(k, i + 1);
                if (!params.capture_errors) throw ctx;
                rep.cause = Termination::numeric_error;
                rep.message = ctx.what();
                rep.final_state = st;
                rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
                return rep;
            }
            x_next.block(i) = res.x_next;
            st.z.block(i) = res.z;
            Gamma_new[s] = res.Gamma;
            iters[s] = res.iters;
            R += res.r;
        }

        // Step 2.
        const Vector r_primal = apply_A(problem, st.z) - problem.b;
        const double eps = step2_epsilon(st.z, st.y, r_primal, R, params.theta1, params.theta2,
                                         params.theta3);
        if (!std::isfinite(eps)) {
            NumericError e("non-finite epsilon");
            e.k = k;
            if (!params.capture_errors) throw e;
            rep.cause = Termination::numeric_error;
            rep.message = e.what();
            rep.final_state = st;
            return rep;
        }

        IterationRecord rec;
        rec.k = k;
        rec.eps = eps;
        rec.feas = r_primal.norm();
        rec.yz_gap = (st.y - st.z).norm();
        rec.yz_Q_sq = yz_q_norm_sq(st.y, st.z, st.gamma);
        rec.R = R;
        rec.obj = objective(problem, st.z);
        rec.rho = st.rho;
        rec.gamma = st.gamma;
        rec.Gamma = Gamma_new;
        rec.inner_iters = iters;

        z_sum += st.z;
        const double wk = rep.schedule ? rep.schedule->k0 + static_cast<double>(k) : 1.0;
        z_wsum += wk * st.z;
        w_sum += wk;
        if (params.keep_iterates && rep.iterates.size() < params.history_cap)
            rep.iterates.push_back(st.z);

        if (options.ergodic_metric && (k % std::max(1L, options.ergodic_every) == 0 || k == 1))
            rec.ergodic_metric = options.ergodic_metric((1.0 / static_cast<double>(k)) * z_sum);

        if (ref) {
            const EnergyTerms et = energy_terms(st.x, st.y, st.lambda, *ref, Gamma_new, M);
            rec.E_y = et.y_term;
            rec.E_lambda = et.lambda_term;
            rec.E_x = et.x_term;
            rec.E = et.total(st.rho, alpha);
            rec.delta_gap = lagrangian_gap(st.z, *ref, problem).value;
            const BlockVector zbar = (1.0 / static_cast<double>(k)) * z_sum;
            rec.ergodic_gap = lagrangian(problem, zbar, ref->lambda) - phi_star;
            if (rep.schedule) {
                const BlockVector ztil = (1.0 / w_sum) * z_wsum;
                rec.weighted_gap = lagrangian(problem, ztil, ref->lambda) - phi_star;
                if (k == 1) {
                    const double th = rep.schedule->theta, k0 = rep.schedule->k0;
                    rep.cbar = et.lambda_term / th + alpha * (k0 + 1.0) * et.x_term +
                               k0 * k0 * th * et.y_term;
                }
            }
        }

        // Step 3.
        const DualPrimalUpdate up = step3_update(st, M, problem, alpha);

        if (ref) {
            const BlockVector ey = up.y - ref->x;
            rec.y_next_err_sq = ey.squared_norm();
            rec.y_next_err_P_sq = p_norm_sq(M, ey);
            rec.stationarity_y_next = stationarity_error(problem, up.y, up.lambda);
            rec.kkt = (apply_A(problem, up.y) - problem.b).norm() + *rec.stationarity_y_next;
        }

        // Safeguard on gamma_i, effective from the next iteration.
        if (params.gamma_init == GammaInit::safeguard && params.gamma.empty()) {
            for (Index i = 0; i < m; ++i) {
                const auto s = static_cast<std::size_t>(i);
                const Vector d = st.z.block(i) - st.y.block(i);
                const auto& A = problem.blocks[s].A;
                for (;;) {
                    const double g = gamma_safeguard(st.gamma[s], d, A, params.safeguard_factor);
                    if (g == st.gamma[s]) break;
                    rep.safeguard_events.push_back({k, i, st.gamma[s], g});
                    st.gamma[s] = g;
                    rec.gamma_changed = true;
                }
            }
            if (rec.gamma_changed) {
                M = BlockTriangular(problem.operators(), st.gamma);
                if (rep.schedule) rep.schedule = rho_strong(mu, alpha, M);
                if (ref) rec.E_rebased = energy(st.x, st.y, st.lambda, *ref, Gamma_new, st.rho, alpha, M);
            }
        }

        const bool zero = eps == 0.0;
        const BlockVector x_k = st.x;
        const Vector lambda_k = st.lambda;
        st.x = std::move(x_next);
        st.y = up.y;
        st.lambda = up.lambda;
        st.Gamma = Gamma_new;
        st.eps = eps;
        st.R = R;

        if (options.observer) options.observer(rec);
        rep.history.push_back(std::move(rec));

        if (zero) {
            rep.cause = Termination::exact_zero;
            rep.final_kkt = kkt_error(problem, x_k, lambda_k);
            break;
        }
        if (eps <= params.tol) {
            rep.cause = Termination::tolerance;
            break;
        }
        if (params.max_seconds > 0.0 &&
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count() >
                params.max_seconds) {
            rep.cause = Termination::time_limit;
            break;
        }
    }

    if (!rep.final_kkt) rep.final_kkt = kkt_error(problem, st.z, st.lambda);
    const long t = rep.iterations();
    if (t > 0) {
        rep.ergodic = (1.0 / static_cast<double>(t)) * z_sum;
        rep.weighted_ergodic = (1.0 / w_sum) * z_wsum;
    }
    rep.final_state = std::move(st);
    rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    return rep;
}

void write_history_csv(std::ostream& out, const SolveReport& report) {
    out << "k,eps,feas,yz_gap,R,obj,E,kkt,rho,gamma1\n";
    out.precision(17);
    for (const auto& r : report.history) {
        out << r.k << ',' << r.eps << ',' << r.feas << ',' << r.yz_gap << ',' << r.R << ','
            << r.obj << ',';
        if (r.E) out << *r.E;
        out << ',';
        if (r.kkt) out << *r.kkt;
        out << ',' << r.rho << ',' << (r.gamma.empty() ? 0.0 : r.gamma.front()) << '\n';
    }
}

} // namespace iadmm
