#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <random>

#include "iadmm/blockspace.hpp"
#include "iadmm/errors.hpp"

namespace iadmm {

// ---------------------------------------------------------------- BlockVector

BlockVector::BlockVector(std::vector<Index> dims) : dims_(std::move(dims)) {
    build_offsets();
    data_ = Vector::Zero(offsets_.empty() ? 0 : offsets_.back() + dims_.back());
}

BlockVector::BlockVector(std::vector<Index> dims, Vector flat)
    : dims_(std::move(dims)), data_(std::move(flat)) {
    build_offsets();
    const Index n = offsets_.empty() ? 0 : offsets_.back() + dims_.back();
    if (n != data_.size())
        throw StructuralError("BlockVector: block sizes sum to " + std::to_string(n) +
                              " but data has length " + std::to_string(data_.size()));
}

void BlockVector::build_offsets() {
    offsets_.resize(dims_.size());
    Index off = 0;
    for (std::size_t i = 0; i < dims_.size(); ++i) {
        if (dims_[i] < 0) throw StructuralError("BlockVector: negative block size");
        offsets_[i] = off;
        off += dims_[i];
    }
}

BlockVector& BlockVector::operator+=(const BlockVector& o) {
    if (!conforms(o)) throw StructuralError("BlockVector: nonconforming operands");
    data_ += o.data_;
    return *this;
}

BlockVector& BlockVector::operator-=(const BlockVector& o) {
    if (!conforms(o)) throw StructuralError("BlockVector: nonconforming operands");
    data_ -= o.data_;
    return *this;
}

BlockVector& BlockVector::operator*=(double s) {
    data_ *= s;
    return *this;
}

// ----------------------------------------------------------- BlockTriangular

BlockTriangular::BlockTriangular(std::vector<LinearMap> ops, std::vector<double> gamma)
    : ops_(std::move(ops)), gamma_(std::move(gamma)) {
    if (ops_.size() != gamma_.size())
        throw StructuralError("BlockTriangular: one gamma per block required");
    for (std::size_t i = 0; i < ops_.size(); ++i) {
        if (!(gamma_[i] > 0.0))
            throw ConfigError("BlockTriangular: gamma_" + std::to_string(i + 1) + " must be > 0");
        if (ops_[i].rows() != ops_.front().rows())
            throw StructuralError("BlockTriangular: operators must share their row count");
    }
}

std::vector<Index> BlockTriangular::dims() const {
    std::vector<Index> d;
    d.reserve(ops_.size());
    for (const auto& op : ops_) d.push_back(op.cols());
    return d;
}

void BlockTriangular::set_gamma(Index i, double g) {
    if (!(g > 0.0)) throw ConfigError("BlockTriangular: gamma must be > 0");
    gamma_[static_cast<std::size_t>(i)] = g;
}

void BlockTriangular::check(const BlockVector& x) const {
    if (x.num_blocks() != num_blocks()) throw StructuralError("BlockTriangular: block count");
    for (Index i = 0; i < num_blocks(); ++i)
        if (x.dim(i) != ops_[static_cast<std::size_t>(i)].cols())
            throw StructuralError("BlockTriangular: block " + std::to_string(i) + " dimension");
}

BlockVector BlockTriangular::apply(const BlockVector& x) const {
    check(x);
    BlockVector out(x.dims());
    Vector acc = Vector::Zero(ops_.front().rows());  // sum_{j<i} A_j x_j
    for (Index i = 0; i < num_blocks(); ++i) {
        const auto& Ai = ops_[static_cast<std::size_t>(i)];
        out.block(i) = gamma_[static_cast<std::size_t>(i)] * x.block(i);
        if (i > 0) out.block(i) += Ai.adjoint(acc);
        acc += Ai.apply(x.block(i));
    }
    return out;
}

BlockVector BlockTriangular::apply_transpose(const BlockVector& x) const {
    check(x);
    BlockVector out(x.dims());
    Vector acc = Vector::Zero(ops_.front().rows());  // sum_{j>i} A_j x_j
    for (Index i = num_blocks() - 1; i >= 0; --i) {
        const auto& Ai = ops_[static_cast<std::size_t>(i)];
        out.block(i) = gamma_[static_cast<std::size_t>(i)] * x.block(i);
        if (i + 1 < num_blocks()) out.block(i) += Ai.adjoint(acc);
        acc += Ai.apply(x.block(i));
    }
    return out;
}

BlockVector BlockTriangular::apply_P(const BlockVector& x) const {
    BlockVector t = apply_transpose(x);
    for (Index i = 0; i < num_blocks(); ++i) t.block(i) /= gamma_[static_cast<std::size_t>(i)];
    return apply(t);
}

BlockVector BlockTriangular::apply_scaled_P(const BlockVector& x) const {
    BlockVector s = x;
    for (Index i = 0; i < num_blocks(); ++i)
        s.block(i) /= std::sqrt(gamma_[static_cast<std::size_t>(i)]);
    s = apply_P(s);
    for (Index i = 0; i < num_blocks(); ++i)
        s.block(i) /= std::sqrt(gamma_[static_cast<std::size_t>(i)]);
    return s;
}

Matrix BlockTriangular::to_dense() const {
    BlockVector e(dims());
    Matrix out(e.size(), e.size());
    for (Index j = 0; j < e.size(); ++j) {
        e.flat().setZero();
        e.flat()[j] = 1.0;
        out.col(j) = apply(e).flat();
    }
    return out;
}

BlockVector back_substitute(const BlockTriangular& M, const BlockVector& y,
                            const BlockVector& z, double alpha) {
    if (!y.conforms(z)) throw StructuralError("back_substitute: y and z do not conform");
    const auto& gamma = M.gamma();
    for (double g : gamma)
        if (!(g > 0.0)) throw ConfigError("back_substitute: gamma_i must be > 0");
    BlockVector yp = y;
    const auto& ops = M.ops();
    Vector acc = Vector::Zero(ops.front().rows());  // sum_{j>i} A_j d_j
    for (Index i = M.num_blocks() - 1; i >= 0; --i) {
        const auto idx = static_cast<std::size_t>(i);
        Vector d = alpha * (z.block(i) - y.block(i));
        if (i + 1 < M.num_blocks()) d -= ops[idx].adjoint(acc) / gamma[idx];
        acc += ops[idx].apply(d);
        yp.block(i) += d;
    }
    return yp;
}

double p_norm_sq(const BlockTriangular& M, const BlockVector& x) {
    const BlockVector t = M.apply_transpose(x);
    double s = 0.0;
    for (Index i = 0; i < M.num_blocks(); ++i)
        s += t.block(i).squaredNorm() / M.gamma()[static_cast<std::size_t>(i)];
    return s;
}

// ----------------------------------------------------------- power iteration

double spectral_norm_sym(const std::function<Vector(const Vector&)>& op, Index n,
                         const PowerIterationOptions& opts) {
    if (n == 0) return 0.0;
    std::mt19937_64 rng(opts.seed);
    std::normal_distribution<double> normal;
    Vector v(n);
    for (Index i = 0; i < n; ++i) v[i] = normal(rng);
    v.normalize();

    double est = 0.0;
    for (int it = 0; it < opts.max_iter; ++it) {
        Vector w = op(v);
        const double rq = v.dot(w);
        const double wn = w.norm();
        if (wn == 0.0) return 0.0;
        if (!std::isfinite(wn)) throw NumericError("spectral_norm: non-finite operator output");
        v = w / wn;
        if (it > 0 && std::abs(rq - est) <= opts.tol * std::abs(rq)) return rq;
        est = rq;
    }
    NumericError err("spectral_norm: power iteration did not converge in " +
                     std::to_string(opts.max_iter) + " iterations");
    err.estimate = est;
    throw err;
}

double gram_norm(const LinearMap& op, const PowerIterationOptions& opts) {
    return spectral_norm_sym([&](const Vector& x) { return op.gram(x); }, op.cols(), opts);
}

double spectral_norm(const LinearMap& op, const PowerIterationOptions& opts) {
    return std::sqrt(std::max(0.0, gram_norm(op, opts)));
}

// ------------------------------------------------------------------------ io

Matrix read_matrix(std::istream& in) {
    Index rows = 0, cols = 0;
    if (!(in >> rows >> cols) || rows < 0 || cols < 0)
        throw StructuralError("read_matrix: missing or invalid 'rows cols' header");
    Matrix m(rows, cols);
    for (Index r = 0; r < rows; ++r)
        for (Index c = 0; c < cols; ++c)
            if (!(in >> m(r, c)))
                throw StructuralError("read_matrix: expected " + std::to_string(rows * cols) +
                                      " entries");
    return m;
}

void write_matrix(std::ostream& out, const Matrix& m) {
    out << m.rows() << ' ' << m.cols() << '\n';
    const auto old = out.precision(17);
    for (Index r = 0; r < m.rows(); ++r) {
        for (Index c = 0; c < m.cols(); ++c) out << (c ? " " : "") << m(r, c);
        out << '\n';
    }
    out.precision(old);
}

Matrix load_matrix(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw StructuralError("load_matrix: cannot open " + path);
    return read_matrix(in);
}

} // namespace iadmm
