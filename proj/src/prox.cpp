#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>

#include "iadmm/errors.hpp"
#include "iadmm/prox.hpp"

namespace iadmm {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

void require_positive_tau(double tau, const char* who) {
    if (!(tau > 0.0)) throw ConfigError(std::string(who) + ": tau must be > 0");
}
} // namespace

Vector soft_threshold(const Vector& y, double tau) {
    require_positive_tau(tau, "soft_threshold");
    return y.array().sign() * (y.array().abs() - tau).max(0.0);
}

Vector soft_threshold(const Vector& y, const Vector& tau) {
    if (tau.size() != y.size()) throw StructuralError("soft_threshold: threshold length");
    if ((tau.array() < 0.0).any()) throw ConfigError("soft_threshold: negative threshold");
    return y.array().sign() * (y.array().abs() - tau.array()).max(0.0);
}

Vector group_shrink(const Vector& y, double tau, Index group_size) {
    require_positive_tau(tau, "group_shrink");
    if (group_size < 1 || y.size() % group_size != 0)
        throw StructuralError("group_shrink: groups must partition the index set");
    Vector out(y.size());
    for (Index g = 0; g < y.size(); g += group_size) {
        const auto seg = y.segment(g, group_size);
        const double nrm = seg.norm();
        const double factor = nrm > 0.0 ? std::max(1.0 - tau / nrm, 0.0) : 0.0;
        out.segment(g, group_size) = factor * seg;
    }
    return out;
}

Vector box_indicator_prox(const Vector& y, const Vector& lo, const Vector& hi) {
    if (lo.size() != y.size() || hi.size() != y.size())
        throw StructuralError("box_indicator_prox: bound length");
    if ((lo.array() > hi.array()).any()) throw ConfigError("box_indicator_prox: lo > hi");
    return y.cwiseMax(lo).cwiseMin(hi);
}

SmoothTerm zero_smooth() {
    SmoothTerm t;
    t.eval = [](const Vector&) { return 0.0; };
    t.grad = [](const Vector& x) { return Vector::Zero(x.size()).eval(); };
    t.lipschitz = 0.0;
    t.quadratic = true;
    t.is_zero = true;
    return t;
}

SmoothTerm quadratic_smooth(const LinearMap& F, Vector data) {
    if (data.size() != F.rows()) throw StructuralError("quadratic_smooth: data length");
    SmoothTerm t;
    t.eval = [F, data](const Vector& u) { return 0.5 * (F.apply(u) - data).squaredNorm(); };
    t.grad = [F, data](const Vector& u) { return F.adjoint(F.apply(u) - data); };
    t.quadratic = true;

    // Small operators get an exact spectrum; large ones use power iteration,
    // with the smallest eigenvalue from the shifted operator zeta I - F^T F.
    if (F.cols() <= 512) {
        const Matrix dense = F.to_dense();
        Eigen::SelfAdjointEigenSolver<Matrix> eig(dense.transpose() * dense,
                                                  Eigen::EigenvaluesOnly);
        const double hi = eig.eigenvalues().maxCoeff();
        const double lo = eig.eigenvalues().minCoeff();
        t.lipschitz = hi;
        t.modulus = lo > 1e-12 * std::max(hi, 1.0) ? lo : 0.0;
    } else {
        const double hi = gram_norm(F);
        t.lipschitz = hi * (1.0 + 1e-6);
        const double shifted = spectral_norm_sym(
            [&](const Vector& x) { return (hi * x - F.gram(x)).eval(); }, F.cols());
        const double lo = hi - shifted;
        t.modulus = lo > 1e-8 * hi ? lo : 0.0;
    }
    return t;
}

SmoothTerm quadratic_form(Matrix H, Vector c, double modulus) {
    if (H.rows() != H.cols() || H.rows() != c.size())
        throw StructuralError("quadratic_form: H must be square and match c");
    SmoothTerm t;
    Eigen::SelfAdjointEigenSolver<Matrix> eig(H, Eigen::EigenvaluesOnly);
    t.lipschitz = std::max(0.0, eig.eigenvalues().maxCoeff());
    t.eval = [H, c](const Vector& x) { return 0.5 * x.dot(H * x) + c.dot(x); };
    t.grad = [H, c](const Vector& x) { return (H * x + c).eval(); };
    t.modulus = modulus;
    t.quadratic = true;
    return t;
}

ProxTerm zero_prox() {
    ProxTerm h;
    h.name = "zero";
    h.eval = [](const Vector&) { return 0.0; };
    h.prox = [](const Vector& y, double) { return y; };
    h.is_zero = true;
    return h;
}

ProxTerm weighted_l1(Vector weights) {
    if ((weights.array() < 0.0).any()) throw ConfigError("weighted_l1: negative weight");
    ProxTerm h;
    h.name = "weighted-l1";
    h.eval = [weights](const Vector& x) { return weights.dot(x.cwiseAbs()); };
    h.prox = [weights](const Vector& y, double tau) {
        require_positive_tau(tau, "weighted_l1");
        return soft_threshold(y, (tau * weights).eval());
    };
    h.is_zero = (weights.array() == 0.0).all();
    return h;
}

ProxTerm l1_norm(double weight, Index n) {
    ProxTerm h = weighted_l1(Vector::Constant(n, weight));
    h.name = "l1";
    return h;
}

ProxTerm group_l2(double weight, Index group_size) {
    if (weight < 0.0) throw ConfigError("group_l2: negative weight");
    ProxTerm h;
    h.name = "group-l2";
    h.eval = [weight, group_size](const Vector& w) {
        double s = 0.0;
        for (Index g = 0; g < w.size(); g += group_size) s += w.segment(g, group_size).norm();
        return weight * s;
    };
    h.prox = [weight, group_size](const Vector& y, double tau) {
        require_positive_tau(tau, "group_l2");
        if (weight == 0.0) return y;
        return group_shrink(y, tau * weight, group_size);
    };
    h.is_zero = weight == 0.0;
    return h;
}

ProxTerm box_indicator(Vector lo, Vector hi) {
    if (lo.size() != hi.size()) throw StructuralError("box_indicator: bound length");
    if ((lo.array() > hi.array()).any()) throw ConfigError("box_indicator: lo > hi");
    ProxTerm h;
    h.name = "box";
    h.eval = [lo, hi](const Vector& x) {
        return ((x.array() < lo.array()).any() || (x.array() > hi.array()).any()) ? kInf : 0.0;
    };
    h.prox = [lo, hi](const Vector& y, double) { return box_indicator_prox(y, lo, hi); };
    return h;
}

Vector checked_prox(const ProxTerm& h, const Vector& y, double tau) {
    Vector p = h.prox(y, tau);
    if (!p.allFinite()) throw NumericError("prox of " + h.name + " returned non-finite values");
    return p;
}

} // namespace iadmm
