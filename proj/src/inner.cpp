#include <algorithm>
#include <cmath>
#include <limits>

#include "iadmm/errors.hpp"
#include "iadmm/inner.hpp"

namespace iadmm {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

// rho gamma y - A^T (rho (A y - b) + lambda): the part of the prox argument
// that does not change across inner iterations.
Vector prox_anchor(const SubproblemView& sub) {
    const auto& A = sub.block->A;
    return sub.rho * sub.gamma * sub.y - A.adjoint(sub.rho * (A.apply(sub.y) - sub.b) + sub.lambda);
}

Vector prox_from_anchor(const Vector& anchor, const Vector& grad, const Vector& u_prev,
                        double delta, double rho_gamma, const ProxTerm& h) {
    const double denom = delta + rho_gamma;
    Vector v = (delta * u_prev + anchor - grad) / denom;
    if (!v.allFinite()) throw NumericError("inner prox step: non-finite prox argument");
    return checked_prox(h, v, 1.0 / denom);
}

} // namespace

StepParams params_constant(long l, double zeta, double sigma) {
    if (l < 1) throw ConfigError("params_constant: l must be >= 1");
    if (!(zeta > 0.0)) throw ConfigError("params_constant: needs a positive Lipschitz constant");
    if (!(sigma >= 0.0 && sigma < 1.0)) throw ConfigError("params_constant: sigma in [0, 1)");
    const double ld = static_cast<double>(l);
    return {2.0 * zeta / ((1.0 - sigma) * ld), 2.0 / (ld + 1.0)};
}

AdaptiveStep params_adaptive(double Lambda_prev, double delta0, double eta,
                             const std::function<bool(double, double)>& accept, int max_j) {
    if (!(Lambda_prev >= 0.0)) throw ConfigError("params_adaptive: Lambda must be >= 0");
    if (!(delta0 > 0.0)) throw ConfigError("params_adaptive: delta0 must be > 0");
    if (!(eta > 1.0)) throw ConfigError("params_adaptive: eta must be > 1");
    double scale = delta0;  // delta0 * eta^j
    for (int j = 0; j <= max_j; ++j, scale *= eta) {
        const double theta = 1.0 / scale;
        const double delta =
            2.0 / (theta + std::sqrt(theta * theta + 4.0 * theta * Lambda_prev));
        const double alpha = 1.0 / (1.0 + delta * Lambda_prev);
        if (accept(delta, alpha)) return {delta, alpha, j};
    }
    NumericError err("line search diverged after " + std::to_string(max_j) +
                     " backtracks (broken gradient oracle?)");
    throw err;
}

Vector inner_prox_step(const Vector& grad_abar, const Vector& u_prev, const SubproblemView& sub,
                       double delta) {
    if (!(delta > 0.0) || !(sub.rho > 0.0)) throw ConfigError("inner_prox_step: delta, rho > 0");
    return prox_from_anchor(prox_anchor(sub), grad_abar, u_prev, delta, sub.rho * sub.gamma,
                            sub.block->h);
}

bool line_search_accept(const SmoothTerm& f, const Vector& abar, const Vector& a, double delta,
                        double alpha, double sigma) {
    return line_search_accept(f.eval(abar), f.grad(abar), f, abar, a, delta, alpha, sigma);
}

bool line_search_accept(double f_abar, const Vector& grad_abar, const SmoothTerm& f,
                        const Vector& abar, const Vector& a, double delta, double alpha,
                        double sigma) {
    const Vector d = a - abar;
    const double fa = f.eval(a);
    const double fb = f_abar;
    const double lin = grad_abar.dot(d);
    const double lhs = fb + lin + (1.0 - sigma) * delta / (2.0 * alpha) * d.squaredNorm();
    const double slack = 8.0 * kEps * (std::abs(fa) + std::abs(fb) + std::abs(lin));
    return lhs >= fa - slack;
}

bool step1b_check(double gamma_l, double Gamma_prev, const Vector& a_l, const Vector& x_k,
                  const PsiFn& psi, double eps_prev) {
    if (gamma_l < Gamma_prev) return false;
    if (std::isinf(eps_prev)) return true;
    return (a_l - x_k).norm() / std::sqrt(gamma_l) <= psi(eps_prev);
}

InnerResult run_inner(const SubproblemView& sub, const Vector& x_k, double Gamma_prev,
                      double eps_prev, const InnerParams& params, InnerTrace* trace) {
    if (sub.block == nullptr) throw StructuralError("run_inner: subproblem has no block");
    const SmoothTerm& f = sub.block->f;
    const ProxTerm& h = sub.block->h;
    if (x_k.size() != sub.block->A.cols()) throw StructuralError("run_inner: x_k dimension");
    if (!(params.sigma > 0.0 && params.sigma < 1.0)) throw ConfigError("run_inner: sigma in (0,1)");
    if (params.rule == ParamRule::constant && !f.is_zero &&
        !(f.lipschitz && *f.lipschitz > 0.0))
        throw ConfigError("run_inner: constant rule needs a Lipschitz constant");

    const double rho_gamma = sub.rho * sub.gamma;
    const Vector anchor = prox_anchor(sub);
    const PsiFn psi = [c = params.c_psi](double t) { return c * t; };
    // Strongly convex schedule: Gamma^k >= Gamma^{k-1} k/(k-1).
    const double Gamma_floor =
        (params.strong_gamma && params.outer_k >= 2)
            ? Gamma_prev * static_cast<double>(params.outer_k) /
                  static_cast<double>(params.outer_k - 1)
            : Gamma_prev;

    InnerState s;
    s.u_prev = x_k;
    s.a_prev = x_k;
    double delta0 = std::clamp(1.0, params.delta_min, params.delta_max);
    double xi_sum_sq = 0.0;

    Vector g;
    auto candidate = [&](double delta, double alpha) {
        s.abar = (1.0 - alpha) * s.a_prev + alpha * s.u_prev;
        g = f.is_zero ? Vector::Zero(x_k.size()) : f.grad(s.abar);
        s.u = prox_from_anchor(anchor, g, s.u_prev, delta, rho_gamma, h);
        s.a = (1.0 - alpha) * s.a_prev + alpha * s.u;
    };

    for (long l = 1; l <= params.max_iters; ++l) {
        int backtracks = 0;
        try {
            if (f.is_zero) {
                // Line search holds trivially; pin delta and keep xi = 1.
                s.delta = params.delta_min;
                s.alpha = 1.0 / (1.0 + s.delta * s.Lambda);
                candidate(s.delta, s.alpha);
            } else if (params.rule == ParamRule::constant) {
                const StepParams p = params_constant(l, *f.lipschitz, params.sigma);
                s.delta = p.delta;
                s.alpha = p.alpha;
                candidate(s.delta, s.alpha);
            } else {
                const AdaptiveStep p = params_adaptive(
                    s.Lambda, delta0, params.eta,
                    [&](double delta, double alpha) {
                        candidate(delta, alpha);
                        return line_search_accept(f.eval(s.abar), g, f, s.abar, s.a, delta, alpha,
                                                  params.sigma);
                    },
                    params.max_backtracks);
                s.delta = p.delta;
                s.alpha = p.alpha;
                backtracks = p.j;
                delta0 = std::clamp(s.delta / s.alpha / params.eta, params.delta_min,
                                    params.delta_max);
            }
        } catch (NumericError& e) {
            e.l = l;
            throw;
        }

        s.l = l;
        s.gamma = (l == 1) ? 1.0 / s.delta : s.gamma / (1.0 - s.alpha);
        s.Lambda += 1.0 / s.delta;
        const double step_sq = (s.u - s.u_prev).squaredNorm();
        s.sum_sq += step_sq;
        const double xi = s.delta * s.alpha * s.gamma;
        xi_sum_sq += xi * step_sq;

        if (trace != nullptr) {
            InnerTraceRow row;
            row.l = l;
            row.delta = s.delta;
            row.alpha = s.alpha;
            row.gamma = s.gamma;
            row.xi = xi;
            row.Lambda = s.Lambda;
            row.backtracks = backtracks;
            row.sum_sq = s.sum_sq;
            row.xi_sum_sq = xi_sum_sq;
            if (trace->keep_vectors) {
                row.u = s.u;
                row.a = s.a;
            }
            trace->rows.push_back(std::move(row));
        }

        const bool stop = params.fixed_iters > 0 ? l >= params.fixed_iters
                       : (params.one_step || step1b_check(s.gamma, Gamma_floor, s.a, x_k, psi, eps_prev));
        if (stop) {
            InnerResult res;
            res.x_next = s.u;
            res.z = s.a;
            res.Gamma = s.gamma;
            res.r = s.sum_sq / s.gamma;
            res.iters = l;
            return res;
        }
        s.u_prev.swap(s.u);
        s.a_prev.swap(s.a);
    }
    NumericError err("inner loop hit its safety cap of " + std::to_string(params.max_iters) +
                     " iterations");
    err.l = params.max_iters;
    throw err;
}

} // namespace iadmm
