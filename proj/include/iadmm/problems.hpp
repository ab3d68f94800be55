#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "iadmm/oracle.hpp"

namespace iadmm {

struct ImagingData {
    Index side = 0;
    Vector truth;     ///< piecewise-constant ground truth, row-major
    Vector observed;  ///< F truth + noise
    Vector kernel;    ///< 1-D Gaussian blur kernel
    double alpha_tv = 0.0;
    double beta_l1 = 0.0;
};

/// One generated test problem.
struct CorpusEntry {
    std::string id;
    std::uint64_t seed = 0;
    ProblemSpec problem;
    std::optional<ReferencePair> reference;
    std::optional<SolutionSet> solution_set;
    std::vector<std::string> tags;  ///< convex, strongly-convex, polyhedral, imaging
    std::optional<QPInstance> qp;
    std::optional<ImagingData> imaging;
    std::vector<std::string> log;  ///< regeneration notes

    bool has_tag(const std::string& t) const;
};

/// f_i = 1/2 x^T (G_i^T G_i + mu I) x + c_i^T x with G_i of size (n_i - 1) x n_i,
/// h_i = 0, A_i Gaussian, b = A x_feas. N < 0 means 2m + 1.
CorpusEntry gen_qp(std::uint64_t seed, Index m = 3, Index n_i = 5, Index N = -1, double mu = 0.0);

/// Strongly convex quadratic f_i plus weighted l1 h_i on every block.
/// The reference comes from an exact-mode run, polished on the active set
/// and gated by certify_reference. `l1_scale = 0` reduces to a QP.
CorpusEntry gen_lasso(std::uint64_t seed, Index m = 3, Index n_i = 5, Index N = 6,
                      double l1_scale = 1.0);

/// Three-block TV / wavelet deblurring problem with blocks (u, w, v):
/// A_1 = [B; Psi^T], A_2 = [-I; 0], A_3 = [0; -I], b = 0.
CorpusEntry gen_imaging(std::uint64_t seed, Index side = 32, double alpha_tv = 1e-2,
                        double beta_l1 = 1e-3, double blur_width = 1.0);

/// Truncated, normalized Gaussian kernel of radius ceil(3 width).
Vector gaussian_kernel(double width);

/// Parses `qp-<seed>-m<m>[-mu<val>]`, `lasso-<seed>`, `img-<seed>-s<side>`.
/// Lasso references are cached under IADMM_CORPUS_DIR when it is set.
CorpusEntry load_corpus(const std::string& id);

std::string qp_id(std::uint64_t seed, Index m, double mu = 0.0);

/// Per-block summary rows evaluated at a fixed probe point; equal for
/// bit-identical regenerations.
std::string fingerprint(const CorpusEntry& entry);

/// Exact-mode reference run followed by polishing and certification.
ReferencePair reference_by_exact_run(const ProblemSpec& problem, double eps_target = 1e-12,
                                     long max_outer = 200000);

} // namespace iadmm
