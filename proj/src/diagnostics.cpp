#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "iadmm/diagnostics.hpp"
#include "iadmm/errors.hpp"

namespace iadmm {

SolutionSet SolutionSet::singleton(const ReferencePair& ref) {
    SolutionSet s;
    s.x0 = ref.x;
    s.x_dirs = Matrix(ref.x.size(), 0);
    s.lambda0 = ref.lambda;
    s.lambda_dirs = Matrix(ref.lambda.size(), 0);
    return s;
}

double block_stationarity(const ProblemSpec& problem, Index i, const BlockVector& x,
                          const Vector& lambda) {
    const auto& blk = problem.blocks[static_cast<std::size_t>(i)];
    const Vector xi = x.block(i);
    Vector g = blk.A.adjoint(lambda);
    if (!blk.f.is_zero) g += blk.f.grad(xi);
    return (xi - blk.h.prox(xi - g, 1.0)).norm();
}

double stationarity_error(const ProblemSpec& problem, const BlockVector& x, const Vector& lambda) {
    double s = 0.0;
    for (Index i = 0; i < problem.num_blocks(); ++i) s += block_stationarity(problem, i, x, lambda);
    return s;
}

double kkt_error(const ProblemSpec& problem, const BlockVector& x, const Vector& lambda) {
    if (lambda.size() != problem.rows()) throw StructuralError("kkt_error: multiplier length");
    return (apply_A(problem, x) - problem.b).norm() + stationarity_error(problem, x, lambda);
}

EnergyTerms energy_terms(const BlockVector& x, const BlockVector& y, const Vector& lambda,
                         const ReferencePair& ref, const std::vector<double>& Gamma,
                         const BlockTriangular& M) {
    if (!x.conforms(ref.x) || !y.conforms(ref.x))
        throw StructuralError("energy: iterate does not conform to the reference");
    if (static_cast<Index>(Gamma.size()) != x.num_blocks())
        throw StructuralError("energy: Gamma has the wrong length");
    EnergyTerms t;
    t.y_term = p_norm_sq(M, y - ref.x);
    t.lambda_term = (lambda - ref.lambda).squaredNorm();
    for (Index i = 0; i < x.num_blocks(); ++i) {
        const double G = Gamma[static_cast<std::size_t>(i)];
        if (!(G > 0.0))
            throw StructuralError("energy: Gamma_" + std::to_string(i + 1) + " must be positive");
        if (std::isinf(G)) continue;
        t.x_term += (x.block(i) - ref.x.block(i)).squaredNorm() / G;
    }
    return t;
}

double energy(const BlockVector& x, const BlockVector& y, const Vector& lambda,
              const ReferencePair& ref, const std::vector<double>& Gamma, double rho,
              double alpha, const BlockTriangular& M) {
    return energy_terms(x, y, lambda, ref, Gamma, M).total(rho, alpha);
}

GapResult lagrangian_gap(const BlockVector& z, const ReferencePair& ref,
                         const ProblemSpec& problem) {
    const double phi_z = objective(problem, z);
    if (!std::isfinite(phi_z)) throw DomainError("lagrangian_gap: z outside the domain of Phi");
    GapResult g;
    g.value = phi_z + ref.lambda.dot(apply_A(problem, z) - problem.b) - objective(problem, ref.x);
    g.negative = g.value < -1e-9;
    return g;
}

BlockVector ergodic_average(const std::vector<BlockVector>& history, long t) {
    if (t < 1 || t > static_cast<long>(history.size()))
        throw StructuralError("ergodic_average: t outside the stored history");
    BlockVector avg(history.front().dims());
    for (long k = 0; k < t; ++k) avg.flat() += history[static_cast<std::size_t>(k)].flat();
    avg.flat() /= static_cast<double>(t);
    return avg;
}

std::vector<double> weighted_ergodic_weights(long t, double k0) {
    if (t < 1) throw StructuralError("weighted_ergodic: t must be >= 1");
    const double td = static_cast<double>(t);
    const double denom = td * (td + 1.0) + 2.0 * k0 * td;
    std::vector<double> w(static_cast<std::size_t>(t));
    for (long k = 1; k <= t; ++k)
        w[static_cast<std::size_t>(k - 1)] = 2.0 * (k0 + static_cast<double>(k)) / denom;
    return w;
}

BlockVector weighted_ergodic(const std::vector<BlockVector>& history, long t, double k0) {
    if (t < 1 || t > static_cast<long>(history.size()))
        throw StructuralError("weighted_ergodic: t outside the stored history");
    const auto w = weighted_ergodic_weights(t, k0);
    double total = 0.0;
    for (double v : w) total += v;
    if (std::abs(total - 1.0) > 1e-12) throw NumericError("weighted_ergodic: weights do not sum to 1");
    BlockVector avg(history.front().dims());
    for (long k = 0; k < t; ++k)
        avg.flat() += w[static_cast<std::size_t>(k)] * history[static_cast<std::size_t>(k)].flat();
    return avg;
}

RateFit rate_fit(const std::vector<std::pair<double, double>>& series, double lo, double hi) {
    std::vector<double> lx, ly;
    for (const auto& [k, v] : series) {
        if (k < lo || k > hi) continue;
        if (!(v > 0.0) || !(k > 0.0)) throw DomainError("rate_fit: nonpositive value in window");
        lx.push_back(std::log(k));
        ly.push_back(std::log(v));
    }
    if (lx.size() < 2) throw DomainError("rate_fit: fewer than two points in window");
    const auto n = static_cast<double>(lx.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t j = 0; j < lx.size(); ++j) {
        mx += lx[j];
        my += ly[j];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t j = 0; j < lx.size(); ++j) {
        sxx += (lx[j] - mx) * (lx[j] - mx);
        sxy += (lx[j] - mx) * (ly[j] - my);
    }
    if (!(sxx > 0.0)) throw DomainError("rate_fit: degenerate window");
    RateFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    fit.lo = lo;
    fit.hi = hi;
    fit.count = lx.size();
    double ss = 0.0;
    for (std::size_t j = 0; j < lx.size(); ++j) {
        const double r = ly[j] - (fit.intercept + fit.slope * lx[j]);
        ss += r * r;
    }
    fit.residual = std::sqrt(ss / n);
    return fit;
}

TwoStepRatios two_step_ratio(const std::vector<double>& energies, std::size_t tail) {
    TwoStepRatios out;
    while (out.usable < energies.size() && energies[out.usable] >= 1e-300 &&
           std::isfinite(energies[out.usable]))
        ++out.usable;
    for (std::size_t k = 0; k + 2 < out.usable; ++k)
        out.ratios.push_back(energies[k + 2] / energies[k]);
    out.tail = std::min(tail, out.ratios.size());
    if (out.tail > 0)
        out.tail_max = *std::max_element(out.ratios.end() - static_cast<std::ptrdiff_t>(out.tail),
                                         out.ratios.end());
    return out;
}

std::optional<double> distance_energy_star(const BlockVector& x, const BlockVector& y,
                                           const Vector& lambda,
                                           const std::optional<SolutionSet>& set,
                                           const std::vector<double>& Gamma, double rho,
                                           double alpha, const BlockTriangular& M) {
    if (!set) return std::nullopt;
    ReferencePair best{set->x0, set->lambda0, "solution-set"};

    // Multiplier family: least squares in t.
    if (set->lambda_dirs.cols() > 0) {
        const Vector t = set->lambda_dirs.completeOrthogonalDecomposition().solve(lambda - set->lambda0);
        best.lambda += set->lambda_dirs * t;
    }

    // Primal family: the x- and y-terms share s, so solve the normal equations
    // of  rho ||y - x0 - V s||_P^2 + alpha sum_i ||x_i - x0_i - (V s)_i||^2 / Gamma_i.
    const Index p = set->x_dirs.cols();
    if (p > 0) {
        const auto dims = x.dims();
        Vector dinv(x.size());
        for (Index i = 0; i < x.num_blocks(); ++i) {
            const double G = Gamma[static_cast<std::size_t>(i)];
            dinv.segment(x.offset(i), x.dim(i)).setConstant(std::isinf(G) ? 0.0 : 1.0 / G);
        }
        Matrix PV(x.size(), p);
        for (Index c = 0; c < p; ++c)
            PV.col(c) = M.apply_P(BlockVector(dims, set->x_dirs.col(c))).flat();
        const Matrix& V = set->x_dirs;
        const Matrix H = rho * V.transpose() * PV + alpha * V.transpose() * dinv.asDiagonal() * V;
        const Vector ey = y.flat() - set->x0.flat();
        const Vector ex = x.flat() - set->x0.flat();
        const Vector g = rho * PV.transpose() * ey + alpha * V.transpose() * dinv.cwiseProduct(ex);
        const Vector s = H.completeOrthogonalDecomposition().solve(g);
        best.x.flat() += V * s;
    }
    return energy(x, y, lambda, best, Gamma, rho, alpha, M);
}

CheckRow check_le(std::string name, double index, double lhs, double rhs, double slack) {
    CheckRow r;
    r.name = std::move(name);
    r.index = index;
    r.lhs = lhs;
    r.rhs = rhs;
    r.slack = slack;
    r.pass = lhs <= rhs + slack;
    return r;
}

void write_check_csv(std::ostream& out, const std::vector<CheckRow>& rows) {
    out << "check,index,lhs,rhs,slack,pass\n";
    out.precision(17);
    for (const auto& r : rows)
        out << r.name << ',' << r.index << ',' << r.lhs << ',' << r.rhs << ',' << r.slack << ','
            << (r.pass ? 1 : 0) << '\n';
}

void write_rate_csv(std::ostream& out, const std::vector<std::pair<std::string, RateFit>>& fits) {
    out << "series,slope,intercept,lo,hi,residual,count\n";
    out.precision(17);
    for (const auto& [name, f] : fits)
        out << name << ',' << f.slope << ',' << f.intercept << ',' << f.lo << ',' << f.hi << ','
            << f.residual << ',' << f.count << '\n';
}

} // namespace iadmm
