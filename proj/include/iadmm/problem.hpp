#pragma once

#include <string>
#include <vector>

#include "iadmm/blockspace.hpp"
#include "iadmm/prox.hpp"

namespace iadmm {

/// One separable block: f_i(x_i) + h_i(x_i) with constraint column A_i.
struct Block {
    SmoothTerm f;
    ProxTerm h;
    LinearMap A;
};

/// min sum_i f_i(x_i) + h_i(x_i)  subject to  sum_i A_i x_i = b.
struct ProblemSpec {
    std::vector<Block> blocks;
    Vector b;

    Index num_blocks() const { return static_cast<Index>(blocks.size()); }
    Index rows() const { return b.size(); }
    std::vector<Index> dims() const;
    std::vector<LinearMap> operators() const;

    /// Throws StructuralError when shapes disagree.
    void validate() const;

    /// Aggregated strong-convexity modulus min_i (mu_f,i + 3 mu_h,i).
    double strong_modulus() const;
};

/// sum_i A_i x_i.
Vector apply_A(const ProblemSpec& problem, const BlockVector& x);

/// Phi(x) = sum_i f_i(x_i) + h_i(x_i); may be +inf.
double objective(const ProblemSpec& problem, const BlockVector& x);

/// Ordinary Lagrangian L(x, lambda) = Phi(x) + <lambda, Ax - b>.
double lagrangian(const ProblemSpec& problem, const BlockVector& x, const Vector& lambda);

/// Data of the block-i subproblem at an outer iterate:
/// L_bar(u) = f(u) + h(u) + rho/2 ||A u - b_i + lambda/rho||^2
///            + rho/2 (u - y_i)^T (gamma I - A^T A) (u - y_i).
struct SubproblemView {
    const Block* block = nullptr;
    double gamma = 1.0;
    double rho = 1.0;
    Vector y;       // y_i^k
    Vector b;       // b_i^k
    Vector lambda;  // lambda^k
};

/// b_i^k = b - sum_{j<i} A_j z_j - sum_{j>i} A_j y_j.
Vector partial_rhs(const ProblemSpec& problem, Index i, const BlockVector& z, const BlockVector& y);

} // namespace iadmm
