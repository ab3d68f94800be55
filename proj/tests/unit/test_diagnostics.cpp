#include <doctest.h>

#include <random>
#include <sstream>

#include "iadmm/errors.hpp"
#include "iadmm/oracle.hpp"
#include "iadmm/problems.hpp"

using namespace iadmm;

namespace {

Vector randn(std::mt19937_64& g, Index n) {
    std::normal_distribution<double> nd;
    Vector v(n);
    for (Index j = 0; j < n; ++j) v(j) = nd(g);
    return v;
}

// Two blocks, the single constraint written twice: the multipliers form a line.
QPInstance duplicated_row_qp() {
    QPInstance qp;
    std::mt19937_64 g(77);
    Matrix a(1, 3);
    a << 1.0, -0.5, 2.0;
    for (int i = 0; i < 2; ++i) {
        const Matrix G = randn(g, 9).reshaped(3, 3);
        qp.H.push_back(G.transpose() * G + 0.5 * Matrix::Identity(3, 3));
        qp.c.push_back(randn(g, 3));
        Matrix Ai(2, 3);
        Ai << a * (i + 1.0), a * (i + 1.0);
        qp.A.push_back(Ai);
    }
    qp.b = Vector::Constant(2, 0.7);
    qp.mu = {0.5, 0.5};
    return qp;
}

} // namespace

TEST_CASE("KKT error") {
    const CorpusEntry e = load_corpus("qp-2-m3");
    const ReferencePair& ref = *e.reference;
    CHECK(kkt_error(e.problem, ref.x, ref.lambda) <= 1e-9);

    std::mt19937_64 g(3);
    const Vector lam = randn(g, e.problem.rows());
    const BlockVector x(e.problem.dims(), randn(g, 15));
    for (Index i = 0; i < 3; ++i) {
        const auto& blk = e.problem.blocks[static_cast<std::size_t>(i)];
        const double want = (blk.f.grad(x.block(i)) + blk.A.adjoint(lam)).norm();
        CHECK(block_stationarity(e.problem, i, x, lam) == doctest::Approx(want).epsilon(1e-12));
    }

    const BlockVector d(e.problem.dims(), randn(g, 15));
    double prev = 1e300;
    for (double s : {1e-1, 1e-3, 1e-5, 1e-7}) {
        const double K = kkt_error(e.problem, ref.x + s * d, ref.lambda);
        CHECK(K > 0.0);
        CHECK(K < prev);
        prev = K;
    }
    CHECK(prev <= 1e-5);
}

TEST_CASE("energy") {
    const CorpusEntry e = load_corpus("qp-5-m3");
    const ReferencePair& ref = *e.reference;
    const BlockTriangular M(e.problem.operators(), {2.0, 1.5, 3.0});
    const std::vector<double> Gamma = {4.0, 5.0, 6.0};
    CHECK(energy(ref.x, ref.x, ref.lambda, ref, Gamma, 1.2, 0.5, M) == 0.0);

    std::mt19937_64 g(4);
    const Vector d = randn(g, e.problem.rows());
    CHECK(energy(ref.x, ref.x, ref.lambda + d, ref, Gamma, 1.2, 0.5, M) ==
          doctest::Approx(d.squaredNorm() / 1.2));

    const BlockVector x(e.problem.dims(), randn(g, 15)), y(e.problem.dims(), randn(g, 15));
    const Vector lam = randn(g, e.problem.rows());
    const Matrix D = M.to_dense();
    Vector qinv(15);
    qinv << Vector::Constant(5, 1 / 2.0), Vector::Constant(5, 1 / 1.5), Vector::Constant(5, 1 / 3.0);
    const Matrix P = D * qinv.asDiagonal() * D.transpose();
    const Vector ey = (y - ref.x).flat();
    double want = 1.2 * ey.dot(P * ey) + (lam - ref.lambda).squaredNorm() / 1.2;
    for (Index i = 0; i < 3; ++i)
        want += 0.5 * (x.block(i) - ref.x.block(i)).squaredNorm() / Gamma[static_cast<std::size_t>(i)];
    CHECK(energy(x, y, lam, ref, Gamma, 1.2, 0.5, M) == doctest::Approx(want).epsilon(1e-10));

    CHECK_THROWS_AS(energy(x, y, lam, ref, {1.0, 0.0, 1.0}, 1.2, 0.5, M), StructuralError);
    const double inf = std::numeric_limits<double>::infinity();
    const EnergyTerms t = energy_terms(x, y, lam, ref, {inf, inf, inf}, M);
    CHECK(t.x_term == 0.0);
}

TEST_CASE("Lagrangian gap") {
    const CorpusEntry e = load_corpus("qp-7-m3");
    const ReferencePair& ref = *e.reference;
    CHECK(std::abs(lagrangian_gap(ref.x, ref, e.problem).value) <= 1e-12);

    const QPInstance& qp = *e.qp;
    const Matrix A = qp.A_full(), H = qp.H_full();
    const Vector c = qp.c_full();
    // Feasible direction from the nullspace of A.
    const Matrix N = Eigen::FullPivLU<Matrix>(A).kernel();
    std::mt19937_64 g(5);
    const BlockVector zf(e.problem.dims(), ref.x.flat() + N * randn(g, N.cols()));
    const double gap = lagrangian_gap(zf, ref, e.problem).value;
    CHECK(gap == doctest::Approx(objective(e.problem, zf) - objective(e.problem, ref.x)).epsilon(1e-10));
    CHECK(gap >= 0.0);

    const auto phi = [&](const Vector& x) { return 0.5 * x.dot(H * x) + c.dot(x); };
    for (int t = 0; t < 10; ++t) {
        const Vector z = randn(g, 15);
        const GapResult r = lagrangian_gap(BlockVector(e.problem.dims(), z), ref, e.problem);
        const double want = phi(z) + ref.lambda.dot(A * z - qp.b) - phi(ref.x.flat());
        CHECK(r.value == doctest::Approx(want).epsilon(1e-10));
        CHECK(r.value >= -1e-12);
        CHECK_FALSE(r.negative);
    }

    ProblemSpec boxed = e.problem;
    boxed.blocks[0].h = box_indicator(Vector::Zero(5), Vector::Ones(5));
    CHECK_THROWS_AS(lagrangian_gap(BlockVector(e.problem.dims(), Vector::Constant(15, 5.0)), ref, boxed),
                    DomainError);
}

TEST_CASE("ergodic averages") {
    const std::vector<Index> dims = {2};
    std::vector<BlockVector> h = {BlockVector(dims, Vector::Zero(2)), BlockVector(dims, Vector::Constant(2, 2.0))};
    CHECK(ergodic_average(h, 1).flat().norm() == 0.0);
    CHECK((ergodic_average(h, 2).flat() - Vector::Ones(2)).norm() == 0.0);
    CHECK_THROWS_AS(ergodic_average(h, 3), StructuralError);

    std::vector<BlockVector> c(5, BlockVector(dims, Vector::Constant(2, 1.25)));
    CHECK((ergodic_average(c, 5).flat() - Vector::Constant(2, 1.25)).norm() <= 1e-15);
    CHECK((weighted_ergodic(c, 5, 3.0).flat() - Vector::Constant(2, 1.25)).norm() <= 1e-15);
    CHECK((weighted_ergodic(h, 1, 7.0).flat() - h[0].flat()).norm() == 0.0);

    const auto w = weighted_ergodic_weights(2, 0.0);
    CHECK(w[0] == doctest::Approx(1.0 / 3.0));
    CHECK(w[1] == doctest::Approx(2.0 / 3.0));
    for (long t : {1L, 2L, 17L, 1000L})
        for (double k0 : {0.0, 1.5, 44.7}) {
            double s = 0.0;
            for (double v : weighted_ergodic_weights(t, k0)) s += v;
            CHECK(std::abs(s - 1.0) <= 1e-12);
        }
}

TEST_CASE("rate fits") {
    std::vector<std::pair<double, double>> a, b, c;
    std::mt19937_64 g(9);
    std::uniform_real_distribution<double> u(-0.1, 0.1);
    for (int k = 1; k <= 2000; ++k) {
        a.emplace_back(k, 3.0 / k);
        b.emplace_back(k, 3.0 / (double(k) * k));
        c.emplace_back(k, 3.0 / k * (1.0 + u(g)));
    }
    CHECK(rate_fit(a, 50, 2000).slope == doctest::Approx(-1.0).epsilon(1e-6));
    CHECK(rate_fit(b, 50, 2000).slope == doctest::Approx(-2.0).epsilon(1e-6));
    CHECK(std::abs(rate_fit(c, 50, 2000).slope + 1.0) <= 0.1);
    CHECK(rate_fit(a, 50, 2000).count == 1951);
    a[100].second = 0.0;
    CHECK_THROWS_AS(rate_fit(a, 50, 2000), DomainError);
}

TEST_CASE("two-step ratios") {
    std::vector<double> E;
    for (int k = 0; k < 80; ++k) E.push_back(5.0 * std::pow(0.9, k));
    const TwoStepRatios r = two_step_ratio(E);
    CHECK(r.ratios.size() == 78);
    for (double q : r.ratios) CHECK(q == doctest::Approx(0.81).epsilon(1e-12));
    CHECK(r.tail == 50);

    std::vector<double> z = {1.0, 0.5, 0.25, 0.0, 0.0};
    const TwoStepRatios t = two_step_ratio(z);
    CHECK(t.usable == 3);
    CHECK(t.ratios.size() == 1);
    CHECK(t.ratios[0] == doctest::Approx(0.25));
}

TEST_CASE("distance to the solution set") {
    std::mt19937_64 g(10);
    const CorpusEntry e = load_corpus("qp-1-m3-mu0.5");
    const BlockTriangular M(e.problem.operators(), {2.0, 2.0, 2.0});
    const std::vector<double> Gamma = {3.0, 3.0, 3.0};
    const BlockVector x(e.problem.dims(), randn(g, 15)), y(e.problem.dims(), randn(g, 15));
    const Vector lam = randn(g, e.problem.rows());
    CHECK(*distance_energy_star(x, y, lam, SolutionSet::singleton(*e.reference), Gamma, 1.0, 0.5, M) ==
          doctest::Approx(energy(x, y, lam, *e.reference, Gamma, 1.0, 0.5, M)).epsilon(1e-12));
    CHECK_FALSE(distance_energy_star(x, y, lam, std::nullopt, Gamma, 1.0, 0.5, M).has_value());

    const QPInstance qp = duplicated_row_qp();
    const ProblemSpec p = to_problem(qp);
    const SolutionSet W = qp_solution_set(qp);
    REQUIRE(W.lambda_dirs.cols() == 1);
    CHECK(W.x_dirs.cols() == 0);
    const BlockTriangular M2(p.operators(), {30.0, 30.0});
    const std::vector<double> G2 = {2.0, 2.0};
    const ReferencePair member{W.x0, W.lambda0 + 0.8 * W.lambda_dirs.col(0), "member"};
    CHECK(kkt_error(p, member.x, member.lambda) <= 1e-9);
    CHECK(*distance_energy_star(member.x, member.x, member.lambda, W, G2, 1.0, 0.5, M2) <= 1e-20);

    const BlockVector x2(p.dims(), randn(g, 6)), y2(p.dims(), randn(g, 6));
    const Vector l2 = randn(g, 2);
    const double got = *distance_energy_star(x2, y2, l2, W, G2, 1.3, 0.5, M2);
    double best = 1e300;
    for (int j = -200000; j <= 200000; ++j) {
        const double t = j * 1e-4;
        const ReferencePair r{W.x0, W.lambda0 + t * W.lambda_dirs.col(0), "grid"};
        best = std::min(best, energy(x2, y2, l2, r, G2, 1.3, 0.5, M2));
    }
    CHECK(std::abs(got - best) <= 1e-6);
    CHECK(got <= best + 1e-12);
}

TEST_CASE("check rows and CSV") {
    const CheckRow ok = check_le("a", 1, 1.0, 1.0, 0.0);
    const CheckRow bad = check_le("b", 2, 1.1, 1.0, 0.05);
    CHECK(ok.pass);
    CHECK_FALSE(bad.pass);
    std::ostringstream os;
    write_check_csv(os, {ok, bad});
    CHECK(os.str().rfind("check,index,lhs,rhs,slack,pass\n", 0) == 0);
    std::ostringstream rs;
    write_rate_csv(rs, {{"s", RateFit{}}});
    CHECK(rs.str().rfind("series,slope,intercept,lo,hi,residual,count\n", 0) == 0);
}
