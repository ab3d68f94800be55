#include <doctest.h>

#include <random>
#include <sstream>

#include "iadmm/blockspace.hpp"
#include "iadmm/errors.hpp"
#include "iadmm/problem.hpp"
#include "iadmm/prox.hpp"

using namespace iadmm;

namespace {

Vector randn(std::mt19937_64& g, Index n) {
    std::normal_distribution<double> nd;
    Vector v(n);
    for (Index j = 0; j < n; ++j) v(j) = nd(g);
    return v;
}

Matrix randn(std::mt19937_64& g, Index r, Index c) {
    Matrix m(r, c);
    for (Index j = 0; j < c; ++j) m.col(j) = randn(g, r);
    return m;
}

double adjoint_gap(const LinearMap& A, std::mt19937_64& g) {
    double worst = 0.0;
    for (int t = 0; t < 100; ++t) {
        const Vector x = randn(g, A.cols()), w = randn(g, A.rows());
        const Vector Ax = A.apply(x), Atw = A.adjoint(w);
        const double scale = Ax.norm() * w.norm() + x.norm() * Atw.norm();
        if (scale > 0) worst = std::max(worst, std::abs(Ax.dot(w) - x.dot(Atw)) / scale);
    }
    return worst;
}

ProblemSpec three_blocks(std::mt19937_64& g) {
    ProblemSpec p;
    p.b = randn(g, 4);
    for (Index n : {2, 3, 1})
        p.blocks.push_back({zero_smooth(), zero_prox(), LinearMap::dense(randn(g, 4, n))});
    return p;
}

} // namespace

TEST_CASE("BlockVector partitions a flat vector") {
    BlockVector x({2, 3}, (Vector(5) << 1, 2, 3, 4, 5).finished());
    CHECK(x.num_blocks() == 2);
    CHECK(x.size() == 5);
    CHECK(x.block(1)(0) == 3.0);
    CHECK(x.offset(1) == 2);
    CHECK_THROWS_AS(BlockVector({2, 2}, Vector::Zero(5)), StructuralError);
    BlockVector y({5}, Vector::Zero(5));
    CHECK_THROWS_AS(x += y, StructuralError);
}

TEST_CASE("apply_A sums block products") {
    ProblemSpec p;
    p.b = Vector::Zero(1);
    p.blocks.push_back({zero_smooth(), zero_prox(), LinearMap::dense(Matrix::Ones(1, 1))});
    p.blocks.push_back({zero_smooth(), zero_prox(), LinearMap::dense(Matrix::Ones(1, 1))});
    CHECK(apply_A(p, BlockVector({1, 1}, Vector::Ones(2)))(0) == doctest::Approx(2.0));
    CHECK(apply_A(p, BlockVector({1, 1})).norm() == 0.0);
    CHECK_THROWS_AS(apply_A(p, BlockVector({2}, Vector::Ones(2))), StructuralError);

    std::mt19937_64 g(3);
    const ProblemSpec q = three_blocks(g);
    Matrix A(4, 6);
    A << q.blocks[0].A.to_dense(), q.blocks[1].A.to_dense(), q.blocks[2].A.to_dense();
    const BlockVector x({2, 3, 1}, randn(g, 6));
    CHECK((apply_A(q, x) - A * x.flat()).norm() <= 1e-12);
}

TEST_CASE("every map kind passes the adjoint test") {
    std::mt19937_64 g(11);
    const Index side = 16;
    std::vector<LinearMap> maps = {
        LinearMap::dense(randn(g, 7, 4)),
        LinearMap::identity(6),
        LinearMap::negated_identity(6),
        LinearMap::zero(3, 5),
        LinearMap::finite_difference_2d(side),
        LinearMap::haar_2d(side, 4),
        LinearMap::separable_convolution(side, (Vector(5) << 0.1, 0.2, 0.4, 0.2, 0.1).finished()),
        LinearMap::vertical_stack({LinearMap::identity(4), LinearMap::dense(randn(g, 2, 4))}),
        LinearMap::compose(LinearMap::dense(randn(g, 3, 5)), LinearMap::dense(randn(g, 5, 4))),
    };
    for (const auto& A : maps) {
        CAPTURE(to_string(A.kind()));
        CHECK(adjoint_gap(A, g) <= 1e-10);
        const Matrix D = A.to_dense();
        const Vector x = randn(g, A.cols());
        CHECK((A.apply(x) - D * x).norm() <= 1e-12 * (1.0 + x.norm() * D.norm()));
    }
}

TEST_CASE("Haar transform is orthonormal") {
    std::mt19937_64 g(5);
    for (Index side : {16, 32}) {
        const LinearMap H = LinearMap::haar_2d(side, 4);
        for (int t = 0; t < 5; ++t) {
            const Vector w = randn(g, side * side);
            CHECK((H.apply(H.adjoint(w)) - w).norm() <= 1e-12 * w.norm());
            CHECK((H.adjoint(H.apply(w)) - w).norm() <= 1e-12 * w.norm());
        }
    }
}

TEST_CASE("finite differences vanish on constant images") {
    const LinearMap B = LinearMap::finite_difference_2d(16);
    CHECK(B.apply(Vector::Constant(256, 3.5)).norm() == 0.0);
    CHECK(B.rows() == 512);
}

TEST_CASE("back substitution") {
    SUBCASE("z = y leaves y unchanged") {
        BlockTriangular M({LinearMap::identity(2), LinearMap::identity(2)}, {2.0, 3.0});
        const BlockVector y({2, 2}, (Vector(4) << 1, 2, 3, 4).finished());
        CHECK((back_substitute(M, y, y, 0.5) - y).norm() == 0.0);
    }
    SUBCASE("single block is a damped step") {
        BlockTriangular M({LinearMap::identity(3)}, {4.0});
        const BlockVector y({3}, Vector::Ones(3)), z({3}, Vector::Constant(3, 3.0));
        CHECK((back_substitute(M, y, z, 0.25).flat() - Vector::Constant(3, 1.5)).norm() <= 1e-15);
    }
    SUBCASE("two scalar blocks against a dense solve") {
        const LinearMap one = LinearMap::dense(Matrix::Ones(1, 1));
        BlockTriangular M({one, one}, {2.0, 2.0});
        const BlockVector y({1, 1}), z({1, 1}, Vector::Constant(2, 2.0));
        const BlockVector yp = back_substitute(M, y, z, 0.5);
        Matrix Md(2, 2);
        Md << 2, 0, 1, 2;
        const Vector want = Md.transpose().lu().solve(Vector::Constant(2, 2.0));
        CHECK((yp.flat() - want).norm() <= 1e-14);
        CHECK(yp.flat()(0) == doctest::Approx(0.5));
        CHECK(yp.flat()(1) == doctest::Approx(1.0));
    }
    SUBCASE("residual on random instances") {
        std::mt19937_64 g(9);
        const ProblemSpec p = three_blocks(g);
        BlockTriangular M(p.operators(), {1.5, 2.5, 0.7});
        for (int t = 0; t < 10; ++t) {
            const BlockVector y({2, 3, 1}, randn(g, 6)), z({2, 3, 1}, randn(g, 6));
            const BlockVector yp = back_substitute(M, y, z, 0.3);
            const Vector lhs = M.to_dense().transpose() * (yp - y).flat();
            Vector rhs = (z - y).flat();
            rhs.head(2) *= 0.3 * 1.5;
            rhs.segment(2, 3) *= 0.3 * 2.5;
            rhs.tail(1) *= 0.3 * 0.7;
            CHECK((lhs - rhs).norm() <= 1e-10 * (1.0 + rhs.norm()));
        }
    }
    SUBCASE("nonpositive gamma is rejected") {
        CHECK_THROWS_AS(BlockTriangular({LinearMap::identity(1)}, {0.0}), ConfigError);
    }
}

TEST_CASE("M is block lower triangular") {
    std::mt19937_64 g(2);
    const ProblemSpec p = three_blocks(g);
    BlockTriangular M(p.operators(), {1.0, 2.0, 3.0});
    const Matrix D = M.to_dense();
    CHECK(D.block(0, 2, 2, 4).norm() == 0.0);
    CHECK(D.block(2, 5, 3, 1).norm() == 0.0);
    const Matrix A1 = p.blocks[0].A.to_dense(), A2 = p.blocks[1].A.to_dense();
    CHECK((D.block(2, 0, 3, 2) - A2.transpose() * A1).norm() <= 1e-12);
    CHECK((D.block(0, 0, 2, 2) - Matrix::Identity(2, 2)).norm() == 0.0);
}

TEST_CASE("P norm") {
    std::mt19937_64 g(4);
    BlockTriangular M1({LinearMap::identity(3)}, {2.5});
    const BlockVector x1({3}, randn(g, 3));
    CHECK(p_norm_sq(M1, x1) == doctest::Approx(2.5 * x1.squared_norm()).epsilon(1e-14));
    CHECK(p_norm_sq(M1, BlockVector({3})) == 0.0);

    ProblemSpec p;
    p.b = Vector::Zero(3);
    p.blocks.push_back({zero_smooth(), zero_prox(), LinearMap::dense(randn(g, 3, 2))});
    p.blocks.push_back({zero_smooth(), zero_prox(), LinearMap::dense(randn(g, 3, 2))});
    BlockTriangular M(p.operators(), {1.3, 0.4});
    const Matrix D = M.to_dense();
    const Vector qinv = (Vector(4) << 1 / 1.3, 1 / 1.3, 1 / 0.4, 1 / 0.4).finished();
    const Matrix P = D * qinv.asDiagonal() * D.transpose();
    for (int t = 0; t < 20; ++t) {
        const BlockVector x({2, 2}, randn(g, 4));
        const double want = x.flat().dot(P * x.flat());
        CHECK(std::abs(p_norm_sq(M, x) - want) <= 1e-10 * want);
        CHECK(p_norm_sq(M, x) > 0.0);
        CHECK((M.apply_P(x).flat() - P * x.flat()).norm() <= 1e-10 * (1.0 + P.norm() * x.norm()));
    }
}

TEST_CASE("spectral norms") {
    CHECK(spectral_norm_sym([](const Vector& v) { return v; }, 5) == doctest::Approx(1.0).epsilon(1e-8));
    const Vector d = (Vector(3) << 1, 2, 3).finished();
    CHECK(spectral_norm_sym([&](const Vector& v) { return Vector(d.cwiseProduct(v)); }, 3) ==
          doctest::Approx(3.0).epsilon(1e-6));

    std::mt19937_64 g(8);
    const Matrix G = randn(g, 20, 20);
    const Matrix S = G.transpose() * G;
    const double want = Eigen::SelfAdjointEigenSolver<Matrix>(S).eigenvalues().maxCoeff();
    CHECK(spectral_norm_sym([&](const Vector& v) { return Vector(S * v); }, 20) ==
          doctest::Approx(want).epsilon(1e-6));
    const LinearMap A = LinearMap::dense(G);
    CHECK(gram_norm(A) == doctest::Approx(want).epsilon(1e-6));
    CHECK(spectral_norm(A) == doctest::Approx(std::sqrt(want)).epsilon(1e-6));
    // Deterministic for a fixed seed.
    CHECK(gram_norm(A) == gram_norm(A));
}

TEST_CASE("plain-text matrices round trip") {
    std::mt19937_64 g(1);
    const Matrix m = randn(g, 3, 4);
    std::stringstream ss;
    write_matrix(ss, m);
    CHECK((read_matrix(ss) - m).norm() == 0.0);
    std::stringstream bad("2 2\n1 2 3");
    CHECK_THROWS_AS(read_matrix(bad), StructuralError);
}
