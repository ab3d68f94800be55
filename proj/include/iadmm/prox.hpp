#pragma once

#include <functional>
#include <optional>
#include <string>

#include "iadmm/blockspace.hpp"

namespace iadmm {

/// Smooth convex term f_i with gradient oracle.
struct SmoothTerm {
    std::function<double(const Vector&)> eval;
    std::function<Vector(const Vector&)> grad;
    /// Lipschitz constant of grad, when known.
    std::optional<double> lipschitz;
    /// Convexity modulus mu_f (metadata, never inferred).
    double modulus = 0.0;
    /// Gradient is affine; the Hessian can be read off by differencing grad.
    bool quadratic = false;
    /// f == 0 identically.
    bool is_zero = false;
};

/// Proper closed convex term h_i with an exact prox.
struct ProxTerm {
    std::string name;
    /// Value, possibly +inf outside the domain.
    std::function<double(const Vector&)> eval;
    /// argmin_x h(x) + ||x - y||^2 / (2 tau).
    std::function<Vector(const Vector&, double)> prox;
    double modulus = 0.0;
    bool is_zero = false;
};

Vector soft_threshold(const Vector& y, double tau);
/// Componentwise thresholds tau_j >= 0 (weighted l1 prox).
Vector soft_threshold(const Vector& y, const Vector& tau);
/// Block shrinkage over consecutive groups of `group_size` entries.
Vector group_shrink(const Vector& y, double tau, Index group_size = 2);
Vector box_indicator_prox(const Vector& y, const Vector& lo, const Vector& hi);

SmoothTerm zero_smooth();
/// f(u) = 1/2 ||F u - f||^2.
SmoothTerm quadratic_smooth(const LinearMap& F, Vector data);
/// f(x) = 1/2 x^T H x + c^T x with H symmetric PSD.
SmoothTerm quadratic_form(Matrix H, Vector c, double modulus = 0.0);

ProxTerm zero_prox();
/// h(x) = sum_j w_j |x_j|.
ProxTerm weighted_l1(Vector weights);
/// h(x) = weight * ||x||_1.
ProxTerm l1_norm(double weight, Index n);
/// h(w) = weight * sum_g ||w_g||_2 over consecutive pairs.
ProxTerm group_l2(double weight, Index group_size = 2);
/// Indicator of the box [lo, hi].
ProxTerm box_indicator(Vector lo, Vector hi);

/// Checks a prox output and raises NumericError on non-finite entries.
Vector checked_prox(const ProxTerm& h, const Vector& y, double tau);

} // namespace iadmm
