#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <random>
#include <regex>
#include <sstream>

#include "iadmm/outer.hpp"
#include "iadmm/problems.hpp"

namespace iadmm {

namespace {

class Gen {
public:
    explicit Gen(std::uint64_t seed) : eng_(seed) {}
    Matrix normal(Index r, Index c, double scale = 1.0) {
        Matrix m(r, c);
        for (Index j = 0; j < c; ++j)
            for (Index i = 0; i < r; ++i) m(i, j) = scale * nd_(eng_);
        return m;
    }
    Vector normal(Index n, double scale = 1.0) { return normal(n, 1, scale).col(0); }
    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(eng_); }
    Index integer(Index lo, Index hi) { return std::uniform_int_distribution<Index>(lo, hi)(eng_); }

private:
    std::mt19937_64 eng_;
    std::normal_distribution<double> nd_;
};

std::uint64_t sub_seed(std::uint64_t seed, std::uint64_t salt) {
    return seed * 0x9E3779B97F4A7C15ULL + salt;
}

std::string fmt(double v) {
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

// Solves the equality-constrained QP obtained by fixing the sign pattern of x.
void polish_lasso(const QPInstance& qp, const std::vector<Vector>& weights, ReferencePair& ref) {
    const Matrix H = qp.H_full();
    const Vector c = qp.c_full();
    const Matrix A = qp.A_full();
    Vector w(c.size());
    Index off = 0;
    for (const auto& wi : weights) {
        w.segment(off, wi.size()) = wi;
        off += wi.size();
    }
    const Vector& x = ref.x.flat();
    std::vector<Index> S;
    for (Index j = 0; j < x.size(); ++j)
        if (std::abs(x(j)) > 1e-9) S.push_back(j);
    const auto s = static_cast<Index>(S.size());
    const Index N = A.rows();
    Matrix K = Matrix::Zero(s + N, s + N);
    Vector rhs(s + N);
    for (Index a = 0; a < s; ++a) {
        for (Index b2 = 0; b2 < s; ++b2) K(a, b2) = H(S[a], S[b2]);
        K.block(a, s, 1, N) = A.col(S[a]).transpose();
        K.block(s, a, N, 1) = A.col(S[a]);
        rhs(a) = -c(S[a]) - w(S[a]) * (x(S[a]) > 0.0 ? 1.0 : -1.0);
    }
    rhs.tail(N) = qp.b;
    Eigen::CompleteOrthogonalDecomposition<Matrix> cod(K);
    const Vector sol = cod.solve(rhs);
    Vector xs = Vector::Zero(x.size());
    for (Index a = 0; a < s; ++a) xs(S[a]) = sol(a);
    ref.x = BlockVector(ref.x.dims(), xs);
    ref.lambda = sol.tail(N);
}

Vector piecewise_constant_image(Gen& g, Index side) {
    Vector img = Vector::Zero(side * side);
    const int rects = 6;
    for (int r = 0; r < rects; ++r) {
        const Index x0 = g.integer(0, side - 4), y0 = g.integer(0, side - 4);
        const Index w = g.integer(3, side / 2), h = g.integer(3, side / 2);
        const double v = g.uniform(0.2, 1.0);
        for (Index y = y0; y < std::min(side, y0 + h); ++y)
            for (Index x = x0; x < std::min(side, x0 + w); ++x) img(y * side + x) = v;
    }
    return img;
}

} // namespace

bool CorpusEntry::has_tag(const std::string& t) const {
    for (const auto& s : tags)
        if (s == t) return true;
    return false;
}

std::string qp_id(std::uint64_t seed, Index m, double mu) {
    std::string id = "qp-" + std::to_string(seed) + "-m" + std::to_string(m);
    if (mu > 0.0) {
        std::ostringstream os;
        os << mu;
        id += "-mu" + os.str();
    }
    return id;
}

CorpusEntry gen_qp(std::uint64_t seed, Index m, Index n_i, Index N, double mu) {
    if (m < 1 || n_i < 2) throw ConfigError("gen_qp: need m >= 1 and n_i >= 2");
    if (!(mu >= 0.0)) throw ConfigError("gen_qp: mu must be >= 0");
    if (N < 0) N = 2 * m + 1;
    CorpusEntry e;
    e.id = qp_id(seed, m, mu);
    e.seed = seed;
    for (std::uint64_t attempt = 0;; ++attempt) {
        Gen g(sub_seed(seed, attempt));
        QPInstance qp;
        Vector x_feas(m * n_i);
        for (Index i = 0; i < m; ++i) {
            const Matrix G = g.normal(n_i - 1, n_i, 1.0 / std::sqrt(static_cast<double>(n_i)));
            qp.H.push_back(G.transpose() * G + mu * Matrix::Identity(n_i, n_i));
            qp.c.push_back(g.normal(n_i));
            qp.A.push_back(g.normal(N, n_i, 1.0 / std::sqrt(static_cast<double>(N))));
            qp.mu.push_back(mu);
            x_feas.segment(i * n_i, n_i) = g.normal(n_i);
        }
        qp.b = Vector::Zero(N);
        for (Index i = 0; i < m; ++i) qp.b += qp.A[static_cast<std::size_t>(i)] * x_feas.segment(i * n_i, n_i);
        try {
            e.reference = solve_qp_kkt(qp);
        } catch (const StructuralError&) {
            e.log.push_back("singular KKT at attempt " + std::to_string(attempt) + ", regenerating");
            if (attempt > 20) throw;
            continue;
        }
        e.problem = to_problem(qp);
        e.solution_set = qp_solution_set(qp);
        e.qp = std::move(qp);
        break;
    }
    e.tags = {"convex"};
    if (mu > 0.0) e.tags.push_back("strongly-convex");
    return e;
}

ReferencePair reference_by_exact_run(const ProblemSpec& problem, double eps_target, long max_outer) {
    SolverParams p;
    p.mode = Mode::exact;
    p.tol = eps_target;
    p.max_outer = max_outer;
    p.exact_tol = 1e-13;
    const SolveReport rep = solve(problem, p);
    return {rep.final_state.z, rep.final_state.lambda, "exact-run"};
}

namespace {

struct LassoDraw {
    QPInstance qp;
    std::vector<Vector> weights;
    ProblemSpec problem;
};

LassoDraw draw_lasso(std::uint64_t seed, std::uint64_t attempt, Index m, Index n_i, Index N,
                     double l1_scale, double mu) {
    Gen g(sub_seed(seed, 1000 + attempt));
    LassoDraw d;
    Vector x_feas(m * n_i);
    for (Index i = 0; i < m; ++i) {
        const Matrix G = g.normal(n_i, n_i, 1.0 / std::sqrt(static_cast<double>(n_i)));
        d.qp.H.push_back(G.transpose() * G + mu * Matrix::Identity(n_i, n_i));
        d.qp.c.push_back(g.normal(n_i));
        d.qp.A.push_back(g.normal(N, n_i, 1.0 / std::sqrt(static_cast<double>(N))));
        d.qp.mu.push_back(mu);
        Vector w(n_i);
        for (Index j = 0; j < n_i; ++j) w(j) = l1_scale * g.uniform(0.2, 1.0);
        d.weights.push_back(w);
        x_feas.segment(i * n_i, n_i) = g.normal(n_i);
    }
    d.qp.b = Vector::Zero(N);
    for (Index i = 0; i < m; ++i)
        d.qp.b += d.qp.A[static_cast<std::size_t>(i)] * x_feas.segment(i * n_i, n_i);
    d.problem.b = d.qp.b;
    for (Index i = 0; i < m; ++i) {
        const auto s = static_cast<std::size_t>(i);
        d.problem.blocks.push_back({quadratic_form(d.qp.H[s], d.qp.c[s], mu),
                                    l1_scale > 0.0 ? weighted_l1(d.weights[s]) : zero_prox(),
                                    LinearMap::dense(d.qp.A[s])});
    }
    d.problem.validate();
    return d;
}

CorpusEntry lasso_entry(std::uint64_t seed, Index m, Index n_i, Index N, double l1_scale,
                        const std::optional<ReferencePair>& cached) {
    CorpusEntry e;
    e.id = "lasso-" + std::to_string(seed);
    e.seed = seed;
    const double mu = 0.1;
    for (std::uint64_t attempt = 0;; ++attempt) {
        LassoDraw d = draw_lasso(seed, attempt, m, n_i, N, l1_scale, mu);
        try {
            bool done = false;
            if (cached && cached->x.dims() == d.problem.dims()) {
                try {
                    e.reference = certify_reference(d.problem, cached->x, cached->lambda, 1e-9, "cache+gate");
                    done = true;
                } catch (const CertificationError&) {
                    e.log.push_back("cached reference rejected, recomputing");
                }
            }
            if (!done) {
                ReferencePair ref = reference_by_exact_run(d.problem, 1e-12, 20000);
                if (kkt_error(d.problem, ref.x, ref.lambda) > 1e-10) polish_lasso(d.qp, d.weights, ref);
                e.reference = certify_reference(d.problem, ref.x, ref.lambda, 1e-9, "exact-run+gate");
            }
        } catch (const Error& err) {
            e.log.push_back("attempt " + std::to_string(attempt) + " rejected: " + err.what());
            if (attempt > 5) throw;
            continue;
        }
        e.solution_set = SolutionSet::singleton(*e.reference);
        e.problem = std::move(d.problem);
        e.qp = std::move(d.qp);
        break;
    }
    e.tags = {"convex", "strongly-convex", "polyhedral"};
    return e;
}

} // namespace

CorpusEntry gen_lasso(std::uint64_t seed, Index m, Index n_i, Index N, double l1_scale) {
    if (m < 1 || n_i < 1 || N < 1) throw ConfigError("gen_lasso: bad sizes");
    return lasso_entry(seed, m, n_i, N, l1_scale, std::nullopt);
}

Vector gaussian_kernel(double width) {
    if (!(width > 0.0)) throw ConfigError("gaussian_kernel: width must be > 0");
    const auto r = static_cast<Index>(std::ceil(3.0 * width));
    Vector k(2 * r + 1);
    for (Index j = -r; j <= r; ++j)
        k(j + r) = std::exp(-0.5 * static_cast<double>(j * j) / (width * width));
    return k / k.sum();
}

CorpusEntry gen_imaging(std::uint64_t seed, Index side, double alpha_tv, double beta_l1,
                        double blur_width) {
    if (side < 16 || (side & (side - 1)) != 0)
        throw ConfigError("gen_imaging: side must be a power of 2 and at least 16");
    if (!(alpha_tv >= 0.0 && beta_l1 >= 0.0)) throw ConfigError("gen_imaging: weights must be >= 0");
    Gen g(sub_seed(seed, 7777));
    const Index n = side * side;

    ImagingData d;
    d.side = side;
    d.alpha_tv = alpha_tv;
    d.beta_l1 = beta_l1;
    d.truth = piecewise_constant_image(g, side);
    d.kernel = gaussian_kernel(blur_width);
    const LinearMap F = LinearMap::separable_convolution(side, d.kernel);
    d.observed = F.apply(d.truth) + g.normal(n, 1e-2);

    const LinearMap B = LinearMap::finite_difference_2d(side);
    const LinearMap PsiT = LinearMap::haar_2d(side, 4);

    CorpusEntry e;
    e.id = "img-" + std::to_string(seed) + "-s" + std::to_string(side);
    e.seed = seed;
    e.problem.b = Vector::Zero(3 * n);
    e.problem.blocks.push_back({quadratic_smooth(F, d.observed), zero_prox(),
                                LinearMap::vertical_stack({B, PsiT})});
    e.problem.blocks.push_back(
        {zero_smooth(), alpha_tv > 0.0 ? group_l2(alpha_tv, 2) : zero_prox(),
         LinearMap::vertical_stack({LinearMap::negated_identity(2 * n), LinearMap::zero(n, 2 * n)})});
    e.problem.blocks.push_back(
        {zero_smooth(), beta_l1 > 0.0 ? l1_norm(beta_l1, n) : zero_prox(),
         LinearMap::vertical_stack({LinearMap::zero(2 * n, n), LinearMap::negated_identity(n)})});
    e.problem.validate();
    e.imaging = std::move(d);
    e.tags = {"convex", "imaging"};
    return e;
}

CorpusEntry load_corpus(const std::string& id) {
    static const std::regex qp_re(R"(qp-(\d+)-m(\d+)(?:-mu([0-9.eE+-]+))?)");
    static const std::regex lasso_re(R"(lasso-(\d+))");
    static const std::regex img_re(R"(img-(\d+)-s(\d+))");
    std::smatch mt;
    if (std::regex_match(id, mt, qp_re)) {
        const double mu = mt[3].matched ? std::stod(mt[3].str()) : 0.0;
        return gen_qp(std::stoull(mt[1].str()), std::stol(mt[2].str()), 5, -1, mu);
    }
    if (std::regex_match(id, mt, img_re))
        return gen_imaging(std::stoull(mt[1].str()), std::stol(mt[2].str()));
    if (std::regex_match(id, mt, lasso_re)) {
        const char* dir = std::getenv("IADMM_CORPUS_DIR");
        if (dir == nullptr || *dir == '\0') return gen_lasso(std::stoull(mt[1].str()));
        namespace fs = std::filesystem;
        const fs::path cache = fs::path(dir) / (id + ".ref");
        std::optional<ReferencePair> cached;
        if (fs::exists(cache)) {
            std::ifstream in(cache);
            try {
                cached = read_reference(in, "cache");
            } catch (const Error&) {
                cached.reset();
            }
        }
        CorpusEntry e = lasso_entry(std::stoull(mt[1].str()), 3, 5, 6, 1.0, cached);
        if (!cached || e.reference->source != "cache+gate") {
            fs::create_directories(dir);
            std::ofstream out(cache);
            write_reference(out, *e.reference);
        }
        return e;
    }
    throw ConfigError("unknown corpus id '" + id + "'");
}

std::string fingerprint(const CorpusEntry& entry) {
    std::ostringstream os;
    os << "id,block,dim,Ax,f,grad,h\n";
    const auto& p = entry.problem;
    for (Index i = 0; i < p.num_blocks(); ++i) {
        const auto& blk = p.blocks[static_cast<std::size_t>(i)];
        const Index n = blk.A.cols();
        Vector probe(n);
        for (Index j = 0; j < n; ++j) probe(j) = std::sin(1.0 + static_cast<double>(j + 7 * i));
        os << entry.id << ',' << i + 1 << ',' << n << ',' << fmt(blk.A.apply(probe).sum()) << ','
           << fmt(blk.f.eval(probe)) << ',' << fmt(blk.f.grad(probe).sum()) << ','
           << fmt(blk.h.eval(probe)) << '\n';
    }
    os << entry.id << ",b,," << fmt(p.b.sum()) << ",,,\n";
    return os.str();
}

} // namespace iadmm
