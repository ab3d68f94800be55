#pragma once

#include <limits>
#include <vector>

#include "iadmm/problem.hpp"

namespace iadmm {

/// One outer iterate (x^k, y^k, z^k, lambda^k, Gamma^k, eps^k, R^k, rho_k, gamma).
struct OuterState {
    BlockVector x, y, z;
    Vector lambda;
    std::vector<double> Gamma;  ///< Gamma_i of the last completed sweep (0 before the first)
    double eps = std::numeric_limits<double>::infinity();
    double R = 0.0;
    double rho = 1.0;
    std::vector<double> gamma;  ///< Q_i = gamma_i I
    long k = 1;
};

/// Block-i subproblem at the current state; z must already hold z_j^k for j < i.
SubproblemView make_subproblem(const ProblemSpec& problem, const OuterState& state, Index i);

} // namespace iadmm
