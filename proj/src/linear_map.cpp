#include <algorithm>
#include <cmath>
#include <numeric>

#include "iadmm/blockspace.hpp"
#include "iadmm/errors.hpp"

namespace iadmm {

namespace detail {

struct MapImpl {
    MapImpl(Index r, Index c) : rows(r), cols(c) {}
    virtual ~MapImpl() = default;
    virtual MapKind kind() const = 0;
    virtual Vector apply(ConstVecRef x) const = 0;
    virtual Vector adjoint(ConstVecRef w) const = 0;

    Index rows;
    Index cols;
};

namespace {

struct DenseImpl final : MapImpl {
    explicit DenseImpl(Matrix m) : MapImpl(m.rows(), m.cols()), mat(std::move(m)) {}
    MapKind kind() const override { return MapKind::dense; }
    Vector apply(ConstVecRef x) const override { return mat * x; }
    Vector adjoint(ConstVecRef w) const override { return mat.transpose() * w; }
    Matrix mat;
};

struct IdentityImpl final : MapImpl {
    IdentityImpl(Index n, double s) : MapImpl(n, n), sign(s) {}
    MapKind kind() const override {
        return sign > 0 ? MapKind::identity : MapKind::negated_identity;
    }
    Vector apply(ConstVecRef x) const override { return sign * x; }
    Vector adjoint(ConstVecRef w) const override { return sign * w; }
    double sign;
};

struct ZeroImpl final : MapImpl {
    using MapImpl::MapImpl;
    MapKind kind() const override { return MapKind::zero; }
    Vector apply(ConstVecRef) const override { return Vector::Zero(rows); }
    Vector adjoint(ConstVecRef) const override { return Vector::Zero(cols); }
};

struct FiniteDifferenceImpl final : MapImpl {
    explicit FiniteDifferenceImpl(Index s) : MapImpl(2 * s * s, s * s), side(s) {}
    MapKind kind() const override { return MapKind::finite_difference_2d; }

    Vector apply(ConstVecRef u) const override {
        Vector w = Vector::Zero(rows);
        for (Index r = 0; r < side; ++r) {
            for (Index c = 0; c < side; ++c) {
                const Index p = r * side + c;
                if (c + 1 < side) w[2 * p] = u[p + 1] - u[p];
                if (r + 1 < side) w[2 * p + 1] = u[p + side] - u[p];
            }
        }
        return w;
    }

    Vector adjoint(ConstVecRef w) const override {
        Vector u = Vector::Zero(cols);
        for (Index r = 0; r < side; ++r) {
            for (Index c = 0; c < side; ++c) {
                const Index p = r * side + c;
                if (c + 1 < side) {
                    u[p + 1] += w[2 * p];
                    u[p] -= w[2 * p];
                }
                if (r + 1 < side) {
                    u[p + side] += w[2 * p + 1];
                    u[p] -= w[2 * p + 1];
                }
            }
        }
        return u;
    }

    Index side;
};

struct HaarImpl final : MapImpl {
    HaarImpl(Index s, int lv) : MapImpl(s * s, s * s), side(s), levels(lv) {}
    MapKind kind() const override { return MapKind::orthonormal_wavelet; }

    // One analysis step along a strided line of length n (even).
    static void forward_line(double* x, Index n, Index stride, double* tmp) {
        const double h = M_SQRT1_2;
        const Index half = n / 2;
        for (Index j = 0; j < half; ++j) {
            const double a = x[(2 * j) * stride];
            const double b = x[(2 * j + 1) * stride];
            tmp[j] = h * (a + b);
            tmp[half + j] = h * (a - b);
        }
        for (Index j = 0; j < n; ++j) x[j * stride] = tmp[j];
    }

    static void inverse_line(double* x, Index n, Index stride, double* tmp) {
        const double h = M_SQRT1_2;
        const Index half = n / 2;
        for (Index j = 0; j < half; ++j) {
            const double s = x[j * stride];
            const double d = x[(half + j) * stride];
            tmp[2 * j] = h * (s + d);
            tmp[2 * j + 1] = h * (s - d);
        }
        for (Index j = 0; j < n; ++j) x[j * stride] = tmp[j];
    }

    Vector apply(ConstVecRef u) const override {
        Vector x = u;
        std::vector<double> tmp(static_cast<std::size_t>(side));
        Index cur = side;
        for (int lv = 0; lv < levels; ++lv, cur /= 2) {
            for (Index r = 0; r < cur; ++r) forward_line(x.data() + r * side, cur, 1, tmp.data());
            for (Index c = 0; c < cur; ++c) forward_line(x.data() + c, cur, side, tmp.data());
        }
        return x;
    }

    Vector adjoint(ConstVecRef w) const override {
        Vector x = w;
        std::vector<double> tmp(static_cast<std::size_t>(side));
        Index cur = side >> (levels - 1);
        for (int lv = 0; lv < levels; ++lv, cur *= 2) {
            for (Index c = 0; c < cur; ++c) inverse_line(x.data() + c, cur, side, tmp.data());
            for (Index r = 0; r < cur; ++r) inverse_line(x.data() + r * side, cur, 1, tmp.data());
        }
        return x;
    }

    Index side;
    int levels;
};

struct ConvolutionImpl final : MapImpl {
    ConvolutionImpl(Index s, Vector k) : MapImpl(s * s, s * s), side(s), kernel(std::move(k)) {}
    MapKind kind() const override { return MapKind::separable_convolution; }

    // out(r, c) = sum_t k[t] in(r, c + t - h) along rows, then the same along columns.
    Vector pass(ConstVecRef in, bool flip) const {
        const Index h = kernel.size() / 2;
        const Index len = kernel.size();
        Vector k = kernel;
        if (flip) k.reverseInPlace();
        Vector tmp(in.size());
        for (Index r = 0; r < side; ++r) {
            const double* row = in.data() + r * side;
            for (Index c = 0; c < side; ++c) {
                const Index t0 = std::max<Index>(0, h - c);
                const Index t1 = std::min<Index>(len, side + h - c);
                double acc = 0.0;
                for (Index t = t0; t < t1; ++t) acc += k[t] * row[c + t - h];
                tmp[r * side + c] = acc;
            }
        }
        Vector out = Vector::Zero(in.size());
        for (Index r = 0; r < side; ++r) {
            const Index t0 = std::max<Index>(0, h - r);
            const Index t1 = std::min<Index>(len, side + h - r);
            for (Index t = t0; t < t1; ++t)
                out.segment(r * side, side) += k[t] * tmp.segment((r + t - h) * side, side);
        }
        return out;
    }

    Vector apply(ConstVecRef x) const override { return pass(x, false); }
    Vector adjoint(ConstVecRef w) const override { return pass(w, true); }

    Index side;
    Vector kernel;
};

struct StackImpl final : MapImpl {
    explicit StackImpl(std::vector<LinearMap> p, Index r, Index c)
        : MapImpl(r, c), parts(std::move(p)) {}
    MapKind kind() const override { return MapKind::vertical_stack; }

    Vector apply(ConstVecRef x) const override {
        Vector out(rows);
        Index off = 0;
        for (const auto& p : parts) {
            out.segment(off, p.rows()) = p.apply(x);
            off += p.rows();
        }
        return out;
    }

    Vector adjoint(ConstVecRef w) const override {
        Vector out = Vector::Zero(cols);
        Index off = 0;
        for (const auto& p : parts) {
            out += p.adjoint(w.segment(off, p.rows()));
            off += p.rows();
        }
        return out;
    }

    std::vector<LinearMap> parts;
};

struct ComposeImpl final : MapImpl {
    ComposeImpl(LinearMap o, LinearMap i)
        : MapImpl(o.rows(), i.cols()), outer(std::move(o)), inner(std::move(i)) {}
    MapKind kind() const override { return MapKind::composition; }
    Vector apply(ConstVecRef x) const override { return outer.apply(inner.apply(x)); }
    Vector adjoint(ConstVecRef w) const override { return inner.adjoint(outer.adjoint(w)); }
    LinearMap outer;
    LinearMap inner;
};

} // namespace
} // namespace detail

std::string to_string(MapKind kind) {
    switch (kind) {
    case MapKind::dense: return "dense";
    case MapKind::identity: return "identity";
    case MapKind::negated_identity: return "negated-identity";
    case MapKind::zero: return "zero";
    case MapKind::finite_difference_2d: return "finite-difference-2D";
    case MapKind::orthonormal_wavelet: return "orthonormal-wavelet";
    case MapKind::separable_convolution: return "separable-convolution";
    case MapKind::vertical_stack: return "vertical-stack";
    case MapKind::composition: return "composition";
    }
    return "unknown";
}

LinearMap LinearMap::dense(Matrix m) {
    return LinearMap(std::make_shared<detail::DenseImpl>(std::move(m)));
}

LinearMap LinearMap::identity(Index n) {
    return LinearMap(std::make_shared<detail::IdentityImpl>(n, 1.0));
}

LinearMap LinearMap::negated_identity(Index n) {
    return LinearMap(std::make_shared<detail::IdentityImpl>(n, -1.0));
}

LinearMap LinearMap::zero(Index rows, Index cols) {
    return LinearMap(std::make_shared<detail::ZeroImpl>(rows, cols));
}

LinearMap LinearMap::finite_difference_2d(Index side) {
    if (side < 2) throw ConfigError("finite_difference_2d: side must be >= 2");
    return LinearMap(std::make_shared<detail::FiniteDifferenceImpl>(side));
}

LinearMap LinearMap::haar_2d(Index side, int levels) {
    if (levels < 1 || side % (Index{1} << levels) != 0)
        throw ConfigError("haar_2d: side must be divisible by 2^levels");
    return LinearMap(std::make_shared<detail::HaarImpl>(side, levels));
}

LinearMap LinearMap::separable_convolution(Index side, Vector kernel) {
    if (kernel.size() % 2 == 0) throw ConfigError("separable_convolution: kernel length must be odd");
    return LinearMap(std::make_shared<detail::ConvolutionImpl>(side, std::move(kernel)));
}

LinearMap LinearMap::vertical_stack(std::vector<LinearMap> parts) {
    if (parts.empty()) throw StructuralError("vertical_stack: no parts");
    const Index cols = parts.front().cols();
    Index rows = 0;
    for (const auto& p : parts) {
        if (p.cols() != cols) throw StructuralError("vertical_stack: column mismatch");
        rows += p.rows();
    }
    return LinearMap(std::make_shared<detail::StackImpl>(std::move(parts), rows, cols));
}

LinearMap LinearMap::compose(LinearMap outer, LinearMap inner) {
    if (outer.cols() != inner.rows()) throw StructuralError("compose: dimension mismatch");
    return LinearMap(std::make_shared<detail::ComposeImpl>(std::move(outer), std::move(inner)));
}

Index LinearMap::rows() const { return impl_->rows; }
Index LinearMap::cols() const { return impl_->cols; }
MapKind LinearMap::kind() const { return impl_->kind(); }

Vector LinearMap::apply(ConstVecRef x) const {
    if (x.size() != impl_->cols)
        throw StructuralError("LinearMap::apply: expected length " + std::to_string(impl_->cols) +
                              ", got " + std::to_string(x.size()));
    return impl_->apply(x);
}

Vector LinearMap::adjoint(ConstVecRef w) const {
    if (w.size() != impl_->rows)
        throw StructuralError("LinearMap::adjoint: expected length " +
                              std::to_string(impl_->rows) + ", got " + std::to_string(w.size()));
    return impl_->adjoint(w);
}

Matrix LinearMap::to_dense() const {
    Matrix out(rows(), cols());
    Vector e = Vector::Zero(cols());
    for (Index j = 0; j < cols(); ++j) {
        e[j] = 1.0;
        out.col(j) = apply(e);
        e[j] = 0.0;
    }
    return out;
}

} // namespace iadmm
