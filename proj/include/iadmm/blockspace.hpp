#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace iadmm {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using ConstVecRef = Eigen::Ref<const Vector>;

/// Partitioned point x = (x_1, ..., x_m) stored contiguously.
class BlockVector {
public:
    BlockVector() = default;
    explicit BlockVector(std::vector<Index> dims);
    BlockVector(std::vector<Index> dims, Vector flat);

    Index num_blocks() const { return static_cast<Index>(dims_.size()); }
    Index size() const { return data_.size(); }
    Index dim(Index i) const { return dims_[static_cast<std::size_t>(i)]; }
    Index offset(Index i) const { return offsets_[static_cast<std::size_t>(i)]; }
    const std::vector<Index>& dims() const { return dims_; }

    Eigen::VectorBlock<Vector> block(Index i) { return data_.segment(offset(i), dim(i)); }
    Eigen::VectorBlock<const Vector> block(Index i) const {
        return data_.segment(offset(i), dim(i));
    }

    const Vector& flat() const { return data_; }
    Vector& flat() { return data_; }

    bool conforms(const BlockVector& other) const { return dims_ == other.dims_; }

    double norm() const { return data_.norm(); }
    double squared_norm() const { return data_.squaredNorm(); }

    BlockVector& operator+=(const BlockVector& o);
    BlockVector& operator-=(const BlockVector& o);
    BlockVector& operator*=(double s);

    friend BlockVector operator+(BlockVector a, const BlockVector& b) { return a += b; }
    friend BlockVector operator-(BlockVector a, const BlockVector& b) { return a -= b; }
    friend BlockVector operator*(double s, BlockVector a) { return a *= s; }

private:
    void build_offsets();

    std::vector<Index> dims_;
    std::vector<Index> offsets_;
    Vector data_;
};

enum class MapKind {
    dense,
    identity,
    negated_identity,
    zero,
    finite_difference_2d,
    orthonormal_wavelet,
    separable_convolution,
    vertical_stack,
    composition,
};

std::string to_string(MapKind kind);

namespace detail {
struct MapImpl;
}

/// Immutable linear map R^cols -> R^rows with an exact adjoint.
///
/// Structured kinds (differences, wavelets, convolutions) are applied
/// matrix-free; `to_dense` assembles the matrix column by column.
class LinearMap {
public:
    static LinearMap dense(Matrix m);
    static LinearMap identity(Index n);
    static LinearMap negated_identity(Index n);
    static LinearMap zero(Index rows, Index cols);
    /// Forward differences of a side x side image, two per pixel (x then y),
    /// with zero rows on the last column / last row.
    static LinearMap finite_difference_2d(Index side);
    /// Orthonormal 2-D Haar analysis transform (the map u -> Psi^T u).
    static LinearMap haar_2d(Index side, int levels);
    /// Zero-padded separable 2-D convolution with a 1-D kernel of odd length.
    static LinearMap separable_convolution(Index side, Vector kernel);
    /// [parts[0]; parts[1]; ...], all with the same column count.
    static LinearMap vertical_stack(std::vector<LinearMap> parts);
    /// outer o inner.
    static LinearMap compose(LinearMap outer, LinearMap inner);

    Index rows() const;
    Index cols() const;
    MapKind kind() const;

    Vector apply(ConstVecRef x) const;
    Vector adjoint(ConstVecRef w) const;
    /// A^T A x.
    Vector gram(ConstVecRef x) const { return adjoint(apply(x)); }

    Matrix to_dense() const;

private:
    explicit LinearMap(std::shared_ptr<const detail::MapImpl> impl) : impl_(std::move(impl)) {}
    std::shared_ptr<const detail::MapImpl> impl_;
};

/// M from the back-substitution step: Q_i = gamma_i I on the diagonal,
/// A_i^T A_j below it (j < i), zero above. Never assembled densely.
class BlockTriangular {
public:
    BlockTriangular(std::vector<LinearMap> ops, std::vector<double> gamma);

    Index num_blocks() const { return static_cast<Index>(ops_.size()); }
    const std::vector<double>& gamma() const { return gamma_; }
    const std::vector<LinearMap>& ops() const { return ops_; }
    std::vector<Index> dims() const;

    void set_gamma(Index i, double g);

    BlockVector apply(const BlockVector& x) const;            // M x
    BlockVector apply_transpose(const BlockVector& x) const;  // M^T x
    BlockVector apply_P(const BlockVector& x) const;          // M Q^{-1} M^T x
    /// Q^{-1/2} P Q^{-1/2} x.
    BlockVector apply_scaled_P(const BlockVector& x) const;

    Matrix to_dense() const;

private:
    void check(const BlockVector& x) const;

    std::vector<LinearMap> ops_;
    std::vector<double> gamma_;
};

/// Solves M^T (y+ - y) = alpha Q (z - y) from the last block upward.
BlockVector back_substitute(const BlockTriangular& M, const BlockVector& y,
                            const BlockVector& z, double alpha);

/// ||x||_P^2 with P = M Q^{-1} M^T, computed as ||Q^{-1/2} M^T x||^2.
double p_norm_sq(const BlockTriangular& M, const BlockVector& x);

struct PowerIterationOptions {
    std::uint64_t seed = 0x5EED;
    double tol = 1e-8;
    int max_iter = 10000;
};

/// Largest eigenvalue of a symmetric PSD operator of size n.
double spectral_norm_sym(const std::function<Vector(const Vector&)>& op, Index n,
                         const PowerIterationOptions& opts = {});
/// Largest singular value of a general map.
double spectral_norm(const LinearMap& op, const PowerIterationOptions& opts = {});
/// ||A^T A|| = sigma_max(A)^2.
double gram_norm(const LinearMap& op, const PowerIterationOptions& opts = {});

/// Plain-text dense matrix: first line "rows cols", then row-major entries.
Matrix read_matrix(std::istream& in);
void write_matrix(std::ostream& out, const Matrix& m);
Matrix load_matrix(const std::string& path);

} // namespace iadmm
