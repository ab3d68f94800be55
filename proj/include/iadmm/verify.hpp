#pragma once

#include <optional>
#include <string>
#include <vector>

#include "iadmm/outer.hpp"
#include "iadmm/problems.hpp"

namespace iadmm {

/// Rows produced by one property suite.
struct SuiteReport {
    std::string name;
    std::vector<CheckRow> rows;
    std::vector<std::string> notes;
    double seconds = 0.0;

    std::size_t failures() const;
    bool passed() const { return !rows.empty() && failures() == 0; }
    void append(const std::vector<CheckRow>& more);
};

// ---- inequality checks on finished runs (need a reference pair) ----

/// E_k - E_{k+1} >= alpha (2 Delta^k + sigma R^k + rho (1 - alpha)(||y - z||_Q^2 + ||Az - b||^2))
/// with slack 1e-8 (1 + E_k).
std::vector<CheckRow> decay_checks(const SolveReport& rep);
/// Delta^k >= -1e-9.
std::vector<CheckRow> gap_sign_checks(const SolveReport& rep);
/// L(z_bar^t, lambda*) - Phi(x*) <= E_1 / (2 alpha t) + 1e-8.
std::vector<CheckRow> ergodic_checks(const SolveReport& rep);
/// Gap at z_tilde^t and ||y^{t+1} - x*||^2 against the strong-mode bounds, slack 1e-8 (1 + cbar).
/// The y bound is checked both in the Euclidean norm and in the P norm.
std::vector<CheckRow> strong_checks(const SolveReport& rep);
/// k / Gamma_i^k >= (k+1) / Gamma_i^{k+1}.
std::vector<CheckRow> strong_gamma_checks(const SolveReport& rep);
/// Gamma_i^k >= Gamma_i^{k-1}.
std::vector<CheckRow> gamma_monotone_checks(const SolveReport& rep);
/// sup_k sum_i e_i(y^{k+1}, lambda^{k+1}) / (d_k + d_{k-1}); reported, never asserted.
std::optional<double> stationarity_ratio(const SolveReport& rep);

/// Energies along the run (the reference must describe the whole solution set
/// for these to equal E*_k; otherwise they are an upper bound).
std::vector<double> energy_series(const SolveReport& rep);
/// (k, value) pairs of a history field for rate fits.
std::vector<std::pair<double, double>> ergodic_gap_series(const SolveReport& rep);
std::vector<std::pair<double, double>> weighted_gap_series(const SolveReport& rep);
std::vector<std::pair<double, double>> y_error_series(const SolveReport& rep);

// ---- inner-loop checks ----

std::vector<CheckRow> xi_checks(const InnerTrace& trace, const std::string& label);
/// Needs a trace with vectors; xbar is the oracle minimizer.
std::vector<CheckRow> ag_converge_checks(const SubproblemView& sub, const Vector& x_k,
                                         const InnerTrace& trace, const Vector& xbar,
                                         double sigma, const std::string& label);
std::vector<CheckRow> convex_combination_checks(const InnerTrace& trace, const std::string& label);
std::vector<CheckRow> constant_rule_checks(const InnerTrace& trace, double zeta, double sigma,
                                           const std::string& label);

/// A subproblem for block i of a corpus problem at a seeded random state.
struct SubproblemFixture {
    OuterState state;
    SubproblemView sub;
    Vector x_k;
};
SubproblemFixture random_subproblem(const ProblemSpec& problem, Index i, std::uint64_t seed,
                                    double rho = 1.0);

// ---- operator checks ----

/// Adjoint identity, back substitution residual, P-norm agreement with a dense
/// assembly, Haar orthonormality for imaging entries.
std::vector<CheckRow> operator_checks(const CorpusEntry& entry, std::uint64_t seed = 1);

// ---- corpora and default parameters ----

std::vector<std::string> qp_corpus();      ///< 10 convex QPs
std::vector<std::string> strong_corpus();  ///< 5 strongly convex QPs
std::vector<std::string> lasso_corpus();   ///< 5 polyhedral problems
std::vector<std::string> mixed_corpus();   ///< 10 problems across the families

/// Solver parameters used by the suites and the CLI for a corpus entry.
SolverParams default_params(const CorpusEntry& entry);

/// 1/2 ||F u - f||^2 + alpha ||B u||_{1,2} + beta ||Psi^T u||_1 on the u block.
double imaging_objective(const CorpusEntry& entry, const Vector& u);

/// Fitted slopes of the rate series of a finished run.
struct RateStudy {
    std::vector<std::pair<std::string, RateFit>> fits;
    std::optional<TwoStepRatios> ratios;  ///< energy two-step ratios (polyhedral entries)
    std::vector<std::string> notes;
};

/// Fit over lo <= k <= hi, truncated where the series first drops to `floor` or below.
std::optional<RateFit> fit_until_floor(const std::vector<std::pair<double, double>>& series,
                                       double lo, double hi, double floor = 0.0);

/// Ergodic-gap slope (convex), weighted-gap and y-error slopes (strong), two-step
/// energy ratios (polyhedral). Needs a run with a reference pair.
RateStudy rate_study(const SolveReport& rep, const CorpusEntry& entry, double lo = 50.0,
                     double hi = 2000.0);

std::vector<std::string> suite_names();
SuiteReport run_suite(const std::string& name);

} // namespace iadmm
