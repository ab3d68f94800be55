#include <algorithm>
#include <limits>

#include "iadmm/errors.hpp"
#include "iadmm/problem.hpp"

namespace iadmm {

std::vector<Index> ProblemSpec::dims() const {
    std::vector<Index> d;
    d.reserve(blocks.size());
    for (const auto& blk : blocks) d.push_back(blk.A.cols());
    return d;
}

std::vector<LinearMap> ProblemSpec::operators() const {
    std::vector<LinearMap> ops;
    ops.reserve(blocks.size());
    for (const auto& blk : blocks) ops.push_back(blk.A);
    return ops;
}

void ProblemSpec::validate() const {
    if (blocks.empty()) throw StructuralError("problem has no blocks");
    for (std::size_t i = 0; i < blocks.size(); ++i) {
        const auto& blk = blocks[i];
        if (blk.A.rows() != b.size())
            throw StructuralError("block " + std::to_string(i + 1) + ": A_i has " +
                                  std::to_string(blk.A.rows()) + " rows, b has " +
                                  std::to_string(b.size()));
        if (!blk.f.eval || !blk.f.grad || !blk.h.eval || !blk.h.prox)
            throw StructuralError("block " + std::to_string(i + 1) + ": missing oracle");
    }
}

double ProblemSpec::strong_modulus() const {
    double mu = std::numeric_limits<double>::infinity();
    for (const auto& blk : blocks) mu = std::min(mu, blk.f.modulus + 3.0 * blk.h.modulus);
    return blocks.empty() ? 0.0 : mu;
}

Vector apply_A(const ProblemSpec& problem, const BlockVector& x) {
    if (x.num_blocks() != problem.num_blocks())
        throw StructuralError("apply_A: block count mismatch");
    Vector out = Vector::Zero(problem.rows());
    for (Index i = 0; i < problem.num_blocks(); ++i) {
        const auto& A = problem.blocks[static_cast<std::size_t>(i)].A;
        if (x.dim(i) != A.cols())
            throw StructuralError("apply_A: block " + std::to_string(i + 1) + " has length " +
                                  std::to_string(x.dim(i)) + ", expected " +
                                  std::to_string(A.cols()));
        out += A.apply(x.block(i));
    }
    return out;
}

double objective(const ProblemSpec& problem, const BlockVector& x) {
    double s = 0.0;
    for (Index i = 0; i < problem.num_blocks(); ++i) {
        const auto& blk = problem.blocks[static_cast<std::size_t>(i)];
        const Vector xi = x.block(i);
        s += blk.f.eval(xi) + blk.h.eval(xi);
    }
    return s;
}

double lagrangian(const ProblemSpec& problem, const BlockVector& x, const Vector& lambda) {
    return objective(problem, x) + lambda.dot(apply_A(problem, x) - problem.b);
}

Vector partial_rhs(const ProblemSpec& problem, Index i, const BlockVector& z,
                   const BlockVector& y) {
    Vector bi = problem.b;
    for (Index j = 0; j < problem.num_blocks(); ++j) {
        if (j == i) continue;
        const auto& A = problem.blocks[static_cast<std::size_t>(j)].A;
        bi -= A.apply(j < i ? z.block(j) : y.block(j));
    }
    return bi;
}

} // namespace iadmm
