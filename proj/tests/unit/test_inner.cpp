#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "iadmm/errors.hpp"
#include "iadmm/inner.hpp"
#include "iadmm/oracle.hpp"
#include "iadmm/problems.hpp"
#include "iadmm/verify.hpp"

using namespace iadmm;

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

Vector randn(std::mt19937_64& g, Index n) {
    std::normal_distribution<double> nd;
    Vector v(n);
    for (Index j = 0; j < n; ++j) v(j) = nd(g);
    return v;
}

} // namespace

TEST_CASE("constant parameter rule") {
    const StepParams p1 = params_constant(1, 2.0, 0.5);
    CHECK(p1.delta == doctest::Approx(8.0));
    CHECK(p1.alpha == 1.0);

    // delta^1 = 2, gamma^3 = (1/2) / ((1 - 2/3)(1 - 1/2)) = 3
    double gamma = 0.0;
    for (long l = 1; l <= 3; ++l) {
        const StepParams p = params_constant(l, 1.0, 0.0);
        gamma = l == 1 ? 1.0 / p.delta : gamma / (1.0 - p.alpha);
        if (l == 3) {
            CHECK(p.delta == doctest::Approx(2.0 / 3.0));
            CHECK(p.alpha == doctest::Approx(0.5));
            CHECK(gamma == doctest::Approx(3.0));
            CHECK(p.delta * p.alpha * gamma == doctest::Approx(1.0));
        }
    }
    for (long l = 1; l < 100; ++l) {
        const double a = params_constant(l, 1.0, 0.9).alpha;
        CHECK(a > 0.0);
        CHECK(a <= 1.0);
    }
}

TEST_CASE("adaptive parameter rule") {
    SUBCASE("first iteration collapses to delta0") {
        const AdaptiveStep s = params_adaptive(0.0, 0.7, 2.0, [](double, double) { return true; });
        CHECK(s.delta == doctest::Approx(0.7));
        CHECK(s.alpha == 1.0);
        CHECK(s.j == 0);
    }
    SUBCASE("delta / alpha = delta0 eta^j") {
        int calls = 0;
        const AdaptiveStep s = params_adaptive(3.5, 0.1, 2.0, [&](double, double) { return ++calls > 4; });
        CHECK(s.j == 4);
        CHECK(s.delta / s.alpha == doctest::Approx(0.1 * 16.0).epsilon(1e-12));
    }
    SUBCASE("quadratic with curvature 2 accepts once (1 - sigma) delta / alpha >= 2") {
        SmoothTerm f;
        f.eval = [](const Vector& x) { return x.squaredNorm(); };
        f.grad = [](const Vector& x) { return Vector(2.0 * x); };
        const Vector abar = Vector::Zero(1), a = Vector::Ones(1);
        const double sigma = 0.9, delta0 = 1e-6;
        const AdaptiveStep s = params_adaptive(0.0, delta0, 2.0, [&](double d, double al) {
            return line_search_accept(f, abar, a, d, al, sigma);
        });
        CHECK((1.0 - sigma) * s.delta / s.alpha >= 2.0);
        CHECK((1.0 - sigma) * s.delta / s.alpha / 2.0 < 2.0);
    }
    SUBCASE("divergent line search raises") {
        CHECK_THROWS_AS(params_adaptive(0.0, 1.0, 2.0, [](double, double) { return false; }), NumericError);
    }
}

TEST_CASE("line search test") {
    const double L = 3.0;
    SmoothTerm f;
    f.eval = [&](const Vector& x) { return 0.5 * L * x.squaredNorm(); };
    f.grad = [&](const Vector& x) { return Vector(L * x); };
    std::mt19937_64 g(1);
    const Vector p = randn(g, 4);
    CHECK(line_search_accept(f, p, p, 1.0, 0.5, 0.5));
    for (int t = 0; t < 50; ++t) {
        const Vector a = randn(g, 4), abar = randn(g, 4);
        CHECK(line_search_accept(f, abar, a, L / 0.5, 1.0, 0.5));  // (1 - sigma) delta / alpha = L
    }
    // (1 - sigma) delta / alpha = L / 2 at abar = 0, a = 1: L/4 < L/2
    CHECK_FALSE(line_search_accept(f, Vector::Zero(1), Vector::Ones(1), L, 1.0, 0.5));
}

TEST_CASE("Step 1b test") {
    const PsiFn psi = [](double t) { return t; };
    const Vector x = Vector::Ones(3);
    CHECK(step1b_check(2.0, 1.0, x, x, psi, inf));
    CHECK(step1b_check(2.0, 1.0, x, x, psi, 0.0));
    CHECK_FALSE(step1b_check(0.5, 1.0, x, x, psi, inf));
    const Vector a = (Vector(3) << 2, 1, 1).finished();  // ||a - x|| = 1
    CHECK(step1b_check(400.0, 100.0, a, x, psi, 0.1));
    CHECK_FALSE(step1b_check(25.0, 10.0, a, x, psi, 0.1));
    CHECK(step1b_check(1.0, 0.0, a, x, psi, inf));
}

TEST_CASE("inner prox step") {
    std::mt19937_64 g(12);
    SUBCASE("stationary data") {
        Block blk{zero_smooth(), zero_prox(), LinearMap::dense(randn(g, 12).reshaped(3, 4))};
        SubproblemView sub;
        sub.block = &blk;
        sub.gamma = 5.0;
        sub.rho = 2.0;
        sub.y = randn(g, 4);
        sub.b = blk.A.apply(sub.y);
        sub.lambda = Vector::Zero(3);
        const Vector u = inner_prox_step(Vector::Zero(4), sub.y, sub, 0.3);
        CHECK((u - sub.y).norm() <= 1e-14);
    }
    SUBCASE("matches a direct minimization of the step objective") {
        for (int t = 0; t < 5; ++t) {
            const Matrix A = randn(g, 15).reshaped(3, 5);
            Block blk{zero_smooth(), l1_norm(0.4, 5), LinearMap::dense(A)};
            SubproblemView sub;
            sub.block = &blk;
            sub.gamma = A.squaredNorm();  // >= ||A^T A||
            sub.rho = 1.5;
            sub.y = randn(g, 5);
            sub.b = randn(g, 3);
            sub.lambda = randn(g, 3);
            const Vector grad = randn(g, 5), u_prev = randn(g, 5);
            const double delta = 0.8;
            const Vector u = inner_prox_step(grad, u_prev, sub, delta);

            // <grad, u> + delta/2 ||u - u_prev||^2 as a smooth term, minimized by the oracle.
            Block lin{quadratic_form(delta * Matrix::Identity(5, 5), grad - delta * u_prev), l1_norm(0.4, 5),
                      LinearMap::dense(A)};
            SubproblemView ref = sub;
            ref.block = &lin;
            CHECK((subproblem_minimizer(ref, 1e-13) - u).norm() <= 1e-8);
        }
    }
}

TEST_CASE("run_inner at a fixed point") {
    const CorpusEntry e = load_corpus("qp-3-m3");
    OuterState st;
    st.x = e.reference->x;
    st.y = st.x;
    st.z = st.x;
    st.lambda = e.reference->lambda;
    st.gamma = initial_gamma(e.problem, SolverParams{});
    st.Gamma.assign(3, 0.0);
    for (Index i = 0; i < 3; ++i) {
        const SubproblemView sub = make_subproblem(e.problem, st, i);
        const InnerResult r = run_inner(sub, st.x.block(i), 0.0, inf, InnerParams{});
        CHECK(r.iters == 1);
        CHECK(r.r <= 1e-20);
        CHECK((r.z - st.x.block(i)).norm() <= 1e-10);
        CHECK((r.x_next - st.x.block(i)).norm() <= 1e-10);
    }
}

TEST_CASE("run_inner invariants on random subproblems") {
    std::uint64_t seed = 40;
    for (const auto& id : {"qp-0-m3-mu0.5", "lasso-2", "qp-5-m3"}) {
        const CorpusEntry e = load_corpus(id);
        for (Index i = 0; i < e.problem.num_blocks(); ++i) {
            const auto fx = random_subproblem(e.problem, i, seed++);
            for (ParamRule rule : {ParamRule::adaptive, ParamRule::constant}) {
                CAPTURE(id);
                CAPTURE(i);
                InnerParams ip;
                ip.rule = rule;
                ip.fixed_iters = 150;
                InnerTrace tr;
                tr.keep_vectors = true;
                const InnerResult r = run_inner(fx.sub, fx.x_k, 0.0, inf, ip, &tr);
                REQUIRE(tr.rows.size() == 150);
                for (const auto& row : xi_checks(tr, "")) CHECK(row.pass);
                for (const auto& row : convex_combination_checks(tr, "")) CHECK(row.pass);
                if (rule == ParamRule::constant) {
                    const double zeta = *e.problem.blocks[static_cast<std::size_t>(i)].f.lipschitz;
                    for (const auto& row : constant_rule_checks(tr, zeta, ip.sigma, "")) CHECK(row.pass);
                }
                CHECK(r.r >= 0.0);
                CHECK(r.Gamma == tr.rows.back().gamma);
                const Vector xbar = subproblem_minimizer(fx.sub, 1e-13);
                for (const auto& row : ag_converge_checks(fx.sub, fx.x_k, tr, xbar, ip.sigma, "")) CHECK(row.pass);
            }
        }
    }
}

TEST_CASE("run_inner approaches the oracle minimizer") {
    std::uint64_t seed = 900;
    int count = 0;
    for (const auto& id : {"qp-1-m3", "qp-2-m3-mu0.5", "lasso-0", "lasso-3", "qp-4-m3", "qp-6-m3", "lasso-1"}) {
        const CorpusEntry e = load_corpus(id);
        for (Index i = 0; i < e.problem.num_blocks() && count < 20; ++i, ++count) {
            const auto fx = random_subproblem(e.problem, i, seed++);
            InnerParams ip;
            ip.fixed_iters = 3000;
            const InnerResult r = run_inner(fx.sub, fx.x_k, 0.0, inf, ip);
            CHECK((subproblem_minimizer(fx.sub, 1e-13) - r.z).norm() <= 1e-6);
        }
    }
    CHECK(count == 20);
}

TEST_CASE("Step 1b drives termination and Gamma monotonicity") {
    const CorpusEntry e = load_corpus("qp-2-m3");
    const auto fx = random_subproblem(e.problem, 1, 5);
    const InnerResult r1 = run_inner(fx.sub, fx.x_k, 0.0, inf, InnerParams{});
    CHECK(r1.iters == 1);
    const InnerResult r2 = run_inner(fx.sub, fx.x_k, 50.0 * r1.Gamma, 1e-3, InnerParams{});
    CHECK(r2.Gamma >= 50.0 * r1.Gamma);
    CHECK((r2.z - fx.x_k).norm() / std::sqrt(r2.Gamma) <= 1e-3);

    InnerParams capped;
    capped.max_iters = 3;
    try {
        run_inner(fx.sub, fx.x_k, 1e12, 1e-12, capped);
        FAIL("expected the safety cap to trigger");
    } catch (const NumericError& err) {
        CHECK(err.l == 3);
    }
}

TEST_CASE("constant rule needs a Lipschitz constant") {
    Block blk{quadratic_form(Matrix::Identity(2, 2), Vector::Zero(2)), zero_prox(), LinearMap::identity(2)};
    blk.f.lipschitz.reset();
    SubproblemView sub{&blk, 1.0, 1.0, Vector::Zero(2), Vector::Zero(2), Vector::Zero(2)};
    InnerParams ip;
    ip.rule = ParamRule::constant;
    CHECK_THROWS_AS(run_inner(sub, Vector::Zero(2), 0.0, inf, ip), ConfigError);
}
