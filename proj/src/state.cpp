#include "iadmm/errors.hpp"
#include "iadmm/state.hpp"

namespace iadmm {

SubproblemView make_subproblem(const ProblemSpec& problem, const OuterState& state, Index i) {
    if (i < 0 || i >= problem.num_blocks()) throw StructuralError("make_subproblem: bad block index");
    SubproblemView sub;
    sub.block = &problem.blocks[static_cast<std::size_t>(i)];
    sub.gamma = state.gamma.at(static_cast<std::size_t>(i));
    sub.rho = state.rho;
    sub.y = state.y.block(i);
    sub.b = partial_rhs(problem, i, state.z, state.y);
    sub.lambda = state.lambda;
    return sub;
}

} // namespace iadmm
