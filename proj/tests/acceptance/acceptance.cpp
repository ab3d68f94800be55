// One PASS/FAIL line per acceptance criterion; exit status 0 iff all pass.
#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include "iadmm/verify.hpp"

namespace {

struct Criterion {
    int id;
    std::vector<std::string> suites;
    double budget;  // seconds, 0 = none
    const char* what;
};

} // namespace

int main() {
    const std::vector<Criterion> criteria = {
        {1, {"inner-xi"}, 10.0, "xi = delta alpha gamma = 1 on every inner iteration"},
        {2, {"inner-ag", "inner-props"}, 30.0, "accelerated inner loop bounds against the oracle minimizer"},
        {3, {"decay"}, 60.0, "energy decay inequality on the convex corpus"},
        {4, {"ergodic"}, 0.0, "ergodic gap bound and rate"},
        {5, {"strong"}, 120.0, "strong-mode weighted gap and iterate bounds"},
        {6, {"fixed-point"}, 0.0, "termination at a KKT pair"},
        {7, {"linear"}, 0.0, "two-step energy contraction on the polyhedral family"},
        {8, {"cross-mode"}, 0.0, "inexact and exact modes reach the same point"},
        {9, {"imaging"}, 0.0, "imaging run reaches eps <= 1e-6 within 60 s"},
        {10, {"operators"}, 0.0, "adjoint, orthonormality and back-substitution checks"},
    };
    int failed = 0;
    for (const auto& c : criteria) {
        bool ok = true;
        double seconds = 0.0;
        std::size_t rows = 0, bad = 0;
        std::string err;
        for (const auto& s : c.suites) {
            try {
                const iadmm::SuiteReport r = iadmm::run_suite(s);
                ok = ok && r.passed();
                seconds += r.seconds;
                rows += r.rows.size();
                bad += r.failures();
            } catch (const std::exception& e) {
                ok = false;
                err = e.what();
            }
        }
        const bool in_time = c.budget <= 0.0 || seconds < c.budget;
        ok = ok && in_time;
        if (!ok) ++failed;
        std::printf("%s criterion %d: %s [%zu/%zu checks, %.1f s%s]%s%s\n", ok ? "PASS" : "FAIL", c.id, c.what,
                    rows - bad, rows, seconds, in_time ? "" : ", over budget", err.empty() ? "" : " error: ",
                    err.c_str());
        std::fflush(stdout);
    }
    return failed == 0 ? 0 : 1;
}
