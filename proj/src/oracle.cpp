#include <cmath>
#include <istream>
#include <limits>
#include <ostream>

#include <Eigen/LU>

#include "iadmm/oracle.hpp"

namespace iadmm {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

Matrix kkt_matrix(const QPInstance& qp) {
    const Matrix H = qp.H_full();
    const Matrix A = qp.A_full();
    const Index n = H.rows(), N = A.rows();
    Matrix K = Matrix::Zero(n + N, n + N);
    K.topLeftCorner(n, n) = H;
    K.topRightCorner(n, N) = A.transpose();
    K.bottomLeftCorner(N, n) = A;
    return K;
}

Vector kkt_rhs(const QPInstance& qp) {
    const Index n = qp.c_full().size();
    Vector r(n + qp.b.size());
    r << -qp.c_full(), qp.b;
    return r;
}

// Smooth part of L_bar, written out term by term from its definition.
struct SmoothPart {
    const SubproblemView& sub;

    double value(const Vector& u) const {
        const auto& A = sub.block->A;
        const Vector d = u - sub.y;
        const Vector Ad = A.apply(d);
        double v = 0.5 * sub.rho * (A.apply(u) - sub.b + sub.lambda / sub.rho).squaredNorm() +
                   0.5 * sub.rho * (sub.gamma * d.squaredNorm() - Ad.squaredNorm());
        if (!sub.block->f.is_zero) v += sub.block->f.eval(u);
        return v;
    }

    Vector grad(const Vector& u) const {
        const auto& A = sub.block->A;
        const Vector d = u - sub.y;
        Vector g = sub.rho * A.adjoint(A.apply(u) - sub.b + sub.lambda / sub.rho) +
                   sub.rho * (sub.gamma * d - A.gram(d));
        if (!sub.block->f.is_zero) g += sub.block->f.grad(u);
        return g;
    }
};

} // namespace

std::vector<Index> QPInstance::dims() const {
    std::vector<Index> d;
    for (const auto& h : H) d.push_back(h.rows());
    return d;
}

Matrix QPInstance::H_full() const {
    Index n = 0;
    for (const auto& h : H) n += h.rows();
    Matrix out = Matrix::Zero(n, n);
    Index off = 0;
    for (const auto& h : H) {
        out.block(off, off, h.rows(), h.cols()) = h;
        off += h.rows();
    }
    return out;
}

Vector QPInstance::c_full() const {
    Index n = 0;
    for (const auto& v : c) n += v.size();
    Vector out(n);
    Index off = 0;
    for (const auto& v : c) {
        out.segment(off, v.size()) = v;
        off += v.size();
    }
    return out;
}

Matrix QPInstance::A_full() const {
    Index n = 0;
    for (const auto& a : A) n += a.cols();
    Matrix out(b.size(), n);
    Index off = 0;
    for (const auto& a : A) {
        out.middleCols(off, a.cols()) = a;
        off += a.cols();
    }
    return out;
}

void QPInstance::validate() const {
    if (H.empty() || H.size() != c.size() || H.size() != A.size())
        throw StructuralError("QPInstance: H, c, A must have one entry per block");
    for (std::size_t i = 0; i < H.size(); ++i) {
        if (H[i].rows() != H[i].cols() || c[i].size() != H[i].rows() || A[i].cols() != H[i].rows() ||
            A[i].rows() != b.size())
            throw StructuralError("QPInstance: block " + std::to_string(i + 1) + " has bad shapes");
        if ((H[i] - H[i].transpose()).norm() > 1e-12 * (1.0 + H[i].norm()))
            throw StructuralError("QPInstance: H_" + std::to_string(i + 1) + " is not symmetric");
    }
}

ProblemSpec to_problem(const QPInstance& qp) {
    qp.validate();
    ProblemSpec p;
    p.b = qp.b;
    for (Index i = 0; i < qp.num_blocks(); ++i) {
        const auto s = static_cast<std::size_t>(i);
        const double mu = s < qp.mu.size() ? qp.mu[s] : 0.0;
        p.blocks.push_back({quadratic_form(qp.H[s], qp.c[s], mu), zero_prox(), LinearMap::dense(qp.A[s])});
    }
    p.validate();
    return p;
}

ReferencePair solve_qp_kkt(const QPInstance& qp) {
    qp.validate();
    const Matrix K = kkt_matrix(qp);
    Eigen::FullPivLU<Matrix> lu(K);
    lu.setThreshold(1e-12);
    if (!lu.isInvertible()) throw StructuralError("solve_qp_kkt: singular KKT matrix");
    const Vector sol = lu.solve(kkt_rhs(qp));
    const Index n = qp.H_full().rows();
    ReferencePair ref;
    ref.x = BlockVector(qp.dims(), sol.head(n));
    ref.lambda = sol.tail(qp.b.size());
    ref.source = "qp-kkt";
    return ref;
}

SolutionSet qp_solution_set(const QPInstance& qp) {
    qp.validate();
    const Matrix K = kkt_matrix(qp);
    const Vector rhs = kkt_rhs(qp);
    Eigen::CompleteOrthogonalDecomposition<Matrix> cod(K);
    cod.setThreshold(1e-12);
    const Vector sol = cod.solve(rhs);
    if ((K * sol - rhs).norm() > 1e-9 * (1.0 + rhs.norm()))
        throw StructuralError("qp_solution_set: KKT system is inconsistent");

    Eigen::FullPivLU<Matrix> lu(K);
    lu.setThreshold(1e-12);
    const Matrix ker = lu.dimensionOfKernel() > 0 ? Matrix(lu.kernel()) : Matrix(K.rows(), 0);
    const Index n = K.rows() - qp.b.size();

    auto basis = [](const Matrix& m) {
        if (m.cols() == 0) return Matrix(m.rows(), 0);
        Eigen::ColPivHouseholderQR<Matrix> qr(m);
        qr.setThreshold(1e-10);
        const Index r = qr.rank();
        return Matrix(Matrix(qr.householderQ()).leftCols(r));
    };

    SolutionSet s;
    s.x0 = BlockVector(qp.dims(), sol.head(n));
    s.lambda0 = sol.tail(qp.b.size());
    s.x_dirs = basis(ker.topRows(n));
    s.lambda_dirs = basis(ker.bottomRows(qp.b.size()));
    return s;
}

double subproblem_residual(const SubproblemView& sub, const Vector& u) {
    const SmoothPart sp{sub};
    return (u - sub.block->h.prox(u - sp.grad(u), 1.0)).norm();
}

Vector subproblem_minimizer(const SubproblemView& sub, double tol, long max_iter) {
    if (sub.block == nullptr) throw StructuralError("subproblem_minimizer: no block");
    const SmoothPart sp{sub};
    const auto& blk = *sub.block;
    const Index n = blk.A.cols();

    if (blk.h.is_zero && (blk.f.is_zero || blk.f.quadratic) && n <= 500) {
        // Affine gradient: assemble the Hessian column by column and solve.
        const Vector g0 = sp.grad(Vector::Zero(n));
        Matrix Hs(n, n);
        for (Index j = 0; j < n; ++j) Hs.col(j) = sp.grad(Vector::Unit(n, j)) - g0;
        Hs = 0.5 * (Hs + Hs.transpose()).eval();
        Eigen::FullPivLU<Matrix> lu(Hs);
        if (!lu.isInvertible()) throw NumericError("subproblem_minimizer: singular subproblem Hessian");
        return lu.solve(-g0);
    }

    // Accelerated proximal gradient with backtracking and gradient-based restart.
    double L = sub.rho * sub.gamma + (blk.f.lipschitz ? *blk.f.lipschitz : 1.0);
    Vector u = sub.y;
    Vector v = u;
    double t = 1.0;
    for (long it = 0; it < max_iter; ++it) {
        const Vector gv = sp.grad(v);
        const double fv = sp.value(v);
        Vector u_next;
        for (int bt = 0;; ++bt) {
            u_next = blk.h.prox(v - gv / L, 1.0 / L);
            const Vector d = u_next - v;
            const double fu = sp.value(u_next);
            const double bound = fv + gv.dot(d) + 0.5 * L * d.squaredNorm();
            if (fu <= bound + 16.0 * kEps * (std::abs(fu) + std::abs(fv)) || bt >= 100) break;
            L *= 2.0;
        }
        if (!u_next.allFinite()) throw NumericError("subproblem_minimizer: non-finite iterate");
        const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
        if ((v - u_next).dot(u_next - u) > 0.0) {
            v = u_next;
            t = 1.0;
        } else {
            v = u_next + ((t - 1.0) / t_next) * (u_next - u);
            t = t_next;
        }
        u = std::move(u_next);
        if (it % 10 == 0 && subproblem_residual(sub, u) <= tol) return u;
    }
    NumericError err("subproblem_minimizer: no convergence within " + std::to_string(max_iter) +
                     " iterations");
    err.estimate = subproblem_residual(sub, u);
    throw err;
}

Vector subproblem_minimizer(Index i, const OuterState& state, const ProblemSpec& problem,
                            double tol) {
    return subproblem_minimizer(make_subproblem(problem, state, i), tol);
}

ReferencePair certify_reference(const ProblemSpec& problem, const BlockVector& x,
                                const Vector& lambda, double tol, std::string source) {
    if (!x.flat().allFinite() || !lambda.allFinite())
        throw CertificationError("certify_reference: non-finite candidate",
                                 std::numeric_limits<double>::infinity());
    const double k = kkt_error(problem, x, lambda);
    if (!(k <= tol))
        throw CertificationError("certify_reference: KKT error " + std::to_string(k) +
                                     " exceeds " + std::to_string(tol),
                                 k);
    return {x, lambda, std::move(source)};
}

void write_reference(std::ostream& out, const ReferencePair& ref) {
    const auto& d = ref.x.dims();
    Matrix dims(static_cast<Index>(d.size()), 1);
    for (std::size_t i = 0; i < d.size(); ++i) dims(static_cast<Index>(i), 0) = static_cast<double>(d[i]);
    write_matrix(out, dims);
    write_matrix(out, ref.x.flat());
    write_matrix(out, ref.lambda);
}

ReferencePair read_reference(std::istream& in, std::string source) {
    const Matrix dims = read_matrix(in);
    const Matrix x = read_matrix(in);
    const Matrix lam = read_matrix(in);
    if (dims.cols() != 1 || x.cols() != 1 || lam.cols() != 1)
        throw StructuralError("read_reference: expected column vectors");
    std::vector<Index> d;
    for (Index i = 0; i < dims.rows(); ++i) d.push_back(static_cast<Index>(std::llround(dims(i, 0))));
    return {BlockVector(d, x.col(0)), lam.col(0), std::move(source)};
}

} // namespace iadmm
