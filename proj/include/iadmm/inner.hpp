#pragma once

#include <functional>
#include <vector>

#include "iadmm/problem.hpp"

namespace iadmm {

/// How delta^l and alpha^l are chosen in the inner loop.
enum class ParamRule {
    constant,  ///< needs a Lipschitz constant: delta = 2 zeta / ((1 - sigma) l), alpha = 2/(l+1)
    adaptive,  ///< backtracking on delta_0 eta^j, no Lipschitz constant needed
};

struct InnerParams {
    ParamRule rule = ParamRule::adaptive;
    double sigma = 0.99;
    double delta_min = 1e-6;
    double delta_max = 1e6;
    double eta = 2.0;
    double c_psi = 1.0;  ///< psi(t) = c_psi * t
    long max_iters = 10000;
    int max_backtracks = 60;
    /// Stop after a single step regardless of the stopping test. Benchmarking only:
    /// carries no convergence guarantee.
    bool one_step = false;
    /// When > 0, run exactly this many steps and skip Step 1b (diagnostics).
    long fixed_iters = 0;
    /// Enforce gamma^l >= Gamma_prev * k / (k - 1) (strongly convex schedule).
    bool strong_gamma = false;
    long outer_k = 1;
};

struct StepParams {
    double delta;
    double alpha;
};

struct AdaptiveStep {
    double delta;
    double alpha;
    int j;
};

/// Running quantities of the inner loop for one block.
struct InnerState {
    Vector u_prev, u, a_prev, a, abar;
    double delta = 0.0;
    double alpha = 1.0;
    double gamma = 0.0;   ///< gamma^l = (1/delta^1) prod_{j=2}^l (1 - alpha^j)^{-1}
    double Lambda = 0.0;  ///< sum_{j<=l} 1/delta^j
    long l = 0;
    double sum_sq = 0.0;  ///< sum_j ||u^j - u^{j-1}||^2
};

struct InnerResult {
    Vector x_next;  ///< u^{l*}
    Vector z;       ///< a^{l*}
    double Gamma = 0.0;
    double r = 0.0;
    long iters = 0;
};

/// Per-step record, filled when a trace is requested.
struct InnerTraceRow {
    long l = 0;
    double delta = 0.0, alpha = 0.0, gamma = 0.0, xi = 0.0, Lambda = 0.0;
    int backtracks = 0;
    double sum_sq = 0.0;
    double xi_sum_sq = 0.0;  ///< sum_j xi^j ||u^j - u^{j-1}||^2
    Vector u, a;             ///< only with keep_vectors
};

struct InnerTrace {
    bool keep_vectors = false;
    std::vector<InnerTraceRow> rows;
};

StepParams params_constant(long l, double zeta, double sigma);

/// Smallest j >= 0 whose candidate passes `accept`; throws NumericError past max_j.
AdaptiveStep params_adaptive(double Lambda_prev, double delta0, double eta,
                             const std::function<bool(double delta, double alpha)>& accept,
                             int max_j = 60);

/// Exact minimizer of the linearized block model:
/// prox_h(v, 1/(delta + rho gamma)) with
/// v = [delta u_prev + rho gamma y - grad - rho A^T (A y - b + lambda/rho)] / (delta + rho gamma).
Vector inner_prox_step(const Vector& grad_abar, const Vector& u_prev, const SubproblemView& sub,
                       double delta);

/// f(abar) + <grad f(abar), a - abar> + (1-sigma) delta / (2 alpha) ||a - abar||^2 >= f(a),
/// evaluated with a rounding allowance of a few ulps of the terms involved.
bool line_search_accept(const SmoothTerm& f, const Vector& abar, const Vector& a, double delta,
                        double alpha, double sigma);
/// Same test with f(abar) and grad f(abar) already evaluated.
bool line_search_accept(double f_abar, const Vector& grad_abar, const SmoothTerm& f,
                        const Vector& abar, const Vector& a, double delta, double alpha,
                        double sigma);

using PsiFn = std::function<double(double)>;

/// gamma_l >= Gamma_prev and ||a_l - x_k|| / sqrt(gamma_l) <= psi(eps_prev); psi(inf) = inf.
bool step1b_check(double gamma_l, double Gamma_prev, const Vector& a_l, const Vector& x_k,
                  const PsiFn& psi, double eps_prev);

/// Runs the accelerated inner loop from x_k on the given subproblem.
InnerResult run_inner(const SubproblemView& sub, const Vector& x_k, double Gamma_prev,
                      double eps_prev, const InnerParams& params, InnerTrace* trace = nullptr);

} // namespace iadmm
