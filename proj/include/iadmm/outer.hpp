#pragma once

#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "iadmm/diagnostics.hpp"
#include "iadmm/inner.hpp"
#include "iadmm/state.hpp"

namespace iadmm {

enum class Mode { convex, strong, exact };
enum class GammaInit { power_iteration, safeguard };
enum class Termination { tolerance, exact_zero, max_iterations, time_limit, numeric_error };

std::string to_string(Mode m);
std::string to_string(ParamRule r);
std::string to_string(Termination t);
Mode parse_mode(const std::string& s);
ParamRule parse_rule(const std::string& s);

struct SolverParams {
    Mode mode = Mode::convex;
    ParamRule rule = ParamRule::adaptive;
    double rho = 1.0;
    double mu = 0.0;  ///< strong mode; 0 means use the problem's aggregated modulus
    double alpha = 0.5;
    double sigma = 0.99;
    double theta1 = 1.0, theta2 = 1.0, theta3 = 1.0;
    double delta_min = 1e-6, delta_max = 1e6;
    double eta = 2.0;
    double c_psi = 1.0;
    double tol = 1e-8;
    long max_outer = 100000;
    long max_inner = 10000;
    GammaInit gamma_init = GammaInit::power_iteration;
    double gamma_margin = 1e-6;    ///< gamma_i = (1 + margin) ||A_i^T A_i||
    double safeguard_start = 4.0;
    double safeguard_factor = 3.0;
    std::vector<double> gamma;     ///< explicit Q diagonal; overrides gamma_init
    double exact_tol = 1e-10;      ///< subgradient residual for exact mode
    /// One inner step per block, Step 1b bypassed. No convergence guarantee.
    bool one_step = false;
    std::size_t history_cap = 50000;  ///< z^k kept for replay (running sums are always kept)
    bool keep_iterates = false;
    bool capture_errors = false;  ///< report numeric errors instead of throwing
    double max_seconds = 0.0;     ///< wall-clock budget; 0 means none

    void validate() const;
    InnerParams inner(long outer_k) const;
};

/// rho_k = (k0 + k) theta with theta = alpha mu / (8 ||P||) and
/// k0 = 4 ||Q^{-1/2} P Q^{-1/2}|| / (alpha (1 - alpha)).
struct StrongSchedule {
    double mu = 0.0;
    double theta = 0.0;
    double k0 = 0.0;
    double P_norm = 0.0;
    double scaled_P_norm = 0.0;

    double rho(long k) const { return (k0 + static_cast<double>(k)) * theta; }
};

StrongSchedule rho_strong(double mu, double alpha, const BlockTriangular& M);
StrongSchedule rho_strong_from_norms(double mu, double alpha, double P_norm, double scaled_P_norm);

double step2_epsilon(const BlockVector& z, const BlockVector& y, const Vector& Az_minus_b, double R,
                     double theta1 = 1.0, double theta2 = 1.0, double theta3 = 1.0);

struct DualPrimalUpdate {
    BlockVector y;
    Vector lambda;
};

/// y+ from back substitution, lambda+ = lambda + alpha rho (A z - b).
DualPrimalUpdate step3_update(const OuterState& state, const BlockTriangular& M,
                              const ProblemSpec& problem, double alpha);

/// factor * gamma when gamma ||d||^2 < ||A d||^2 with d = z_i - y_i, else gamma.
double gamma_safeguard(double gamma, const Vector& d, const LinearMap& A, double factor = 3.0);

/// x_i^{k+1} = z_i^k = exact subproblem minimizer, r = 0, Gamma = +inf.
InnerResult exact_block_step(Index i, const OuterState& state, const ProblemSpec& problem,
                             double tol_inner = 1e-10);

/// Initial Q diagonal per the parameters.
std::vector<double> initial_gamma(const ProblemSpec& problem, const SolverParams& params);

struct IterationRecord {
    long k = 0;
    double eps = 0.0;
    double feas = 0.0;    ///< ||A z^k - b||
    double yz_gap = 0.0;  ///< ||y^k - z^k||
    double yz_Q_sq = 0.0; ///< ||y^k - z^k||_Q^2
    double R = 0.0;
    double obj = 0.0;     ///< Phi(z^k)
    double rho = 0.0;
    std::vector<double> gamma;
    std::vector<double> Gamma;
    std::vector<long> inner_iters;
    bool gamma_changed = false;  ///< safeguard fired at the end of this iteration

    // With a reference pair.
    std::optional<double> E;       ///< E_k (start-of-iteration x, y, lambda; this iteration's Gamma)
    std::optional<double> E_y, E_lambda, E_x;
    std::optional<double> E_rebased;  ///< E_k under the rebuilt P after a safeguard event
    std::optional<double> delta_gap;  ///< L(z^k, lambda*) - Phi(x*)
    std::optional<double> ergodic_gap;   ///< at z_bar^k
    std::optional<double> weighted_gap;  ///< at z_tilde^k (strong mode)
    std::optional<double> y_next_err_sq;    ///< ||y^{k+1} - x*||^2
    std::optional<double> y_next_err_P_sq;  ///< ||y^{k+1} - x*||_P^2
    std::optional<double> kkt;              ///< K(y^{k+1}, lambda^{k+1})
    std::optional<double> stationarity_y_next;  ///< sum_i e_i(y^{k+1}, lambda^{k+1})
    std::optional<double> ergodic_metric;       ///< user metric at z_bar^k
};

struct SafeguardEvent {
    long k = 0;
    Index block = 0;
    double old_gamma = 0.0;
    double new_gamma = 0.0;
};

struct SolveReport {
    OuterState final_state;
    Termination cause = Termination::max_iterations;
    std::string message;
    SolverParams params;
    std::vector<IterationRecord> history;
    std::vector<SafeguardEvent> safeguard_events;
    std::optional<StrongSchedule> schedule;
    std::optional<double> cbar;  ///< strong mode with a reference pair
    std::vector<BlockVector> iterates;  ///< z^k, when keep_iterates
    BlockVector ergodic;           ///< z_bar^t at the last iteration
    BlockVector weighted_ergodic;  ///< z_tilde^t (strong mode)
    std::optional<double> final_kkt;  ///< K(x^{k+1}, lambda^k) on exact-zero termination
    double seconds = 0.0;
    bool guaranteed = true;  ///< false in one-step mode

    long iterations() const { return static_cast<long>(history.size()); }
    bool converged() const {
        return cause == Termination::tolerance || cause == Termination::exact_zero;
    }
};

struct SolveOptions {
    std::optional<BlockVector> x0;
    std::optional<Vector> lambda0;
    std::optional<ReferencePair> reference;
    std::function<void(const IterationRecord&)> observer;
    /// Evaluated on z_bar^k every `ergodic_every` iterations (and at the last one).
    std::function<double(const BlockVector&)> ergodic_metric;
    long ergodic_every = 1;
};

SolveReport solve(const ProblemSpec& problem, const SolverParams& params,
                  const SolveOptions& options = {});

/// History CSV: k,eps,feas,yz_gap,R,obj,E,kkt,rho,gamma1.
void write_history_csv(std::ostream& out, const SolveReport& report);

} // namespace iadmm
