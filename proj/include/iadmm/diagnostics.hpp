#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "iadmm/blockspace.hpp"
#include "iadmm/problem.hpp"

namespace iadmm {

/// A certified solution/multiplier pair (x*, lambda*).
struct ReferencePair {
    BlockVector x;
    Vector lambda;
    std::string source;
};

/// Affine description of the solution set:
/// {x0 + X s} x {lambda0 + L t}. Empty direction matrices mean a unique pair.
struct SolutionSet {
    BlockVector x0;
    Matrix x_dirs;
    Vector lambda0;
    Matrix lambda_dirs;

    static SolutionSet singleton(const ReferencePair& ref);
};

/// e_i(x, lambda) = ||x_i - prox_{h_i}(x_i - grad f_i(x_i) - A_i^T lambda)|| (unit prox).
double block_stationarity(const ProblemSpec& problem, Index i, const BlockVector& x,
                          const Vector& lambda);
/// sum_i e_i(x, lambda).
double stationarity_error(const ProblemSpec& problem, const BlockVector& x, const Vector& lambda);
/// ||Ax - b|| + sum_i e_i(x, lambda).
double kkt_error(const ProblemSpec& problem, const BlockVector& x, const Vector& lambda);

struct EnergyTerms {
    double y_term = 0.0;       ///< ||y - x*||_P^2
    double lambda_term = 0.0;  ///< ||lambda - lambda*||^2
    double x_term = 0.0;       ///< sum_i ||x_i - x_i*||^2 / Gamma_i

    double total(double rho, double alpha) const {
        return rho * y_term + lambda_term / rho + alpha * x_term;
    }
};

/// Components of E = rho ||y - x*||_P^2 + ||lambda - lambda*||^2 / rho + alpha sum ||x_i - x_i*||^2 / Gamma_i.
/// Gamma_i = +inf drops block i from the last sum; Gamma_i <= 0 is a structural error.
EnergyTerms energy_terms(const BlockVector& x, const BlockVector& y, const Vector& lambda,
                         const ReferencePair& ref, const std::vector<double>& Gamma,
                         const BlockTriangular& M);
double energy(const BlockVector& x, const BlockVector& y, const Vector& lambda,
              const ReferencePair& ref, const std::vector<double>& Gamma, double rho,
              double alpha, const BlockTriangular& M);

struct GapResult {
    double value = 0.0;
    bool negative = false;  ///< below -1e-9: the reference pair is suspect
};

/// L(z, lambda*) - Phi(x*).
GapResult lagrangian_gap(const BlockVector& z, const ReferencePair& ref,
                         const ProblemSpec& problem);

BlockVector ergodic_average(const std::vector<BlockVector>& history, long t);
BlockVector weighted_ergodic(const std::vector<BlockVector>& history, long t, double k0);
/// Weights 2(k0 + k) / (t(t+1) + 2 k0 t), k = 1..t.
std::vector<double> weighted_ergodic_weights(long t, double k0);

struct RateFit {
    double slope = 0.0;
    double intercept = 0.0;
    double lo = 0.0, hi = 0.0;  ///< window in k
    double residual = 0.0;      ///< RMS misfit of the log-log fit
    std::size_t count = 0;
};

/// Least-squares slope of log(value) against log(k) over lo <= k <= hi.
RateFit rate_fit(const std::vector<std::pair<double, double>>& series, double lo, double hi);

struct TwoStepRatios {
    std::vector<double> ratios;  ///< kappa_k = E_{k+2} / E_k on the positive prefix
    double tail_max = 0.0;
    std::size_t tail = 0;
    std::size_t usable = 0;  ///< length of the positive prefix of the input
};

TwoStepRatios two_step_ratio(const std::vector<double>& energies, std::size_t tail = 50);

/// min over the solution set of the energy; nullopt when no description is supplied.
std::optional<double> distance_energy_star(const BlockVector& x, const BlockVector& y,
                                           const Vector& lambda,
                                           const std::optional<SolutionSet>& set,
                                           const std::vector<double>& Gamma, double rho,
                                           double alpha, const BlockTriangular& M);

/// One row of an inequality-check report.
struct CheckRow {
    std::string name;
    double index = 0.0;  ///< k or t
    double lhs = 0.0;
    double rhs = 0.0;
    double slack = 0.0;
    bool pass = false;
};

/// lhs <= rhs + slack.
CheckRow check_le(std::string name, double index, double lhs, double rhs, double slack);

void write_check_csv(std::ostream& out, const std::vector<CheckRow>& rows);
void write_rate_csv(std::ostream& out, const std::vector<std::pair<std::string, RateFit>>& fits);

} // namespace iadmm
