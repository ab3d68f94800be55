#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "iadmm/diagnostics.hpp"
#include "iadmm/errors.hpp"
#include "iadmm/state.hpp"

namespace iadmm {

/// min sum_i 1/2 x_i^T H_i x_i + c_i^T x_i  s.t.  sum_i A_i x_i = b.
struct QPInstance {
    std::vector<Matrix> H;
    std::vector<Vector> c;
    std::vector<Matrix> A;
    Vector b;
    std::vector<double> mu;  ///< convexity modulus recorded per block (0 when unknown)

    Index num_blocks() const { return static_cast<Index>(H.size()); }
    std::vector<Index> dims() const;
    Matrix H_full() const;
    Vector c_full() const;
    Matrix A_full() const;
    void validate() const;
};

/// Blocks f_i = quadratic_form(H_i, c_i), h_i = 0, A_i dense.
ProblemSpec to_problem(const QPInstance& qp);

/// Dense pivoted solve of [[H, A^T], [A, 0]] [x; lambda] = [-c; b].
/// Throws StructuralError when the KKT matrix is singular.
ReferencePair solve_qp_kkt(const QPInstance& qp);

/// Affine description of all KKT pairs, from the KKT nullspace.
/// Works for singular KKT systems as long as they are consistent.
SolutionSet qp_solution_set(const QPInstance& qp);

/// Minimizer of L_bar(u) = f(u) + h(u) + rho/2 ||A u - b_i + lambda/rho||^2
///                        + rho/2 (u - y)^T (gamma I - A^T A)(u - y).
/// Dense solve when h = 0 and f is quadratic with n <= 500; otherwise an
/// accelerated proximal gradient run until the prox-gradient residual is <= tol.
Vector subproblem_minimizer(const SubproblemView& sub, double tol = 1e-12,
                            long max_iter = 1000000);
Vector subproblem_minimizer(Index i, const OuterState& state, const ProblemSpec& problem,
                            double tol = 1e-12);

/// ||u - prox_h(u - grad L_smooth(u), 1)||, zero exactly at the subproblem minimizer.
double subproblem_residual(const SubproblemView& sub, const Vector& u);

/// Rejection from certify_reference; carries the measured KKT error.
class CertificationError : public Error {
public:
    CertificationError(const std::string& what, double kkt) : Error(what), kkt(kkt) {}
    double kkt;
};

/// Accepts the pair iff kkt_error <= tol.
ReferencePair certify_reference(const ProblemSpec& problem, const BlockVector& x,
                                const Vector& lambda, double tol = 1e-9,
                                std::string source = "candidate");

/// Three plain-text matrices: block dims (m x 1), x (n x 1), lambda (N x 1).
void write_reference(std::ostream& out, const ReferencePair& ref);
ReferencePair read_reference(std::istream& in, std::string source = "file");

} // namespace iadmm
