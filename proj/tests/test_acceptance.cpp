// Acceptance suite: one line per criterion, exit 0 iff every criterion holds.

#include <cstdio>
#include <cstdlib>
#include <map>
#include <string>
#include <vector>

#include "filtlab/experiments.hpp"

using filtlab::ExperimentConfig;
using filtlab::ExperimentResult;
using filtlab::TestRow;

namespace {

std::map<std::string, ExperimentResult> g_results;

const ExperimentResult& run_default(const std::string& name) {
    auto it = g_results.find(name);
    if (it == g_results.end()) {
        std::fprintf(stderr, "  running %s at default size...\n", name.c_str());
        it = g_results.emplace(name, filtlab::run_experiment(filtlab::default_config(name))).first;
    }
    return it->second;
}

// Every row whose test name contains one of the fragments must pass, and each
// fragment must match at least one row.
bool rows_pass(const ExperimentResult& r, const std::vector<std::string>& fragments) {
    bool ok = true;
    for (const std::string& frag : fragments) {
        bool found = false;
        for (const TestRow& row : r.rows) {
            if (row.test.find(frag) == std::string::npos) continue;
            found = true;
            if (!row.pass) {
                std::fprintf(stderr, "  row failed: %s (stat %.6g not in [%.6g, %.6g])\n",
                             row.test.c_str(), row.statistic, row.lo, row.hi);
                ok = false;
            }
        }
        if (!found) {
            std::fprintf(stderr, "  missing row: %s\n", frag.c_str());
            ok = false;
        }
    }
    return ok;
}

bool criterion_determinism() {
    struct Small {
        const char* name;
        std::size_t n_paths;
        unsigned mesh_exp;
    };
    const std::vector<Small> configs = {
        {"reversed-brownian", 500, 9}, {"reversed-diffusion-ou", 500, 9},
        {"discretized-convergence", 500, 8}, {"noisy-future", 500, 8},
        {"pitman", 500, 9}, {"honest-bessel", 400, 8},
        {"transient-honest", 50, 8}, {"weakconv", 2000, 10},
        {"girsanov", 1000, 8}, {"insider-pnl", 2000, 7},
    };
    const char* old = std::getenv("FILTLAB_WORKERS");
    const std::string saved = old ? old : "";
    bool ok = true;
    for (const Small& s : configs) {
        ExperimentConfig c = filtlab::default_config(s.name);
        c.n_paths = s.n_paths;
        c.mesh_exp = s.mesh_exp;
        if (std::string(s.name) == "honest-bessel") c.eps_list = {0.2};
        std::string reference;
        for (const char* workers : {"1", "2", "8"}) {
            setenv("FILTLAB_WORKERS", workers, 1);
            const std::string csv = filtlab::run_experiment(c).to_csv();
            if (reference.empty()) {
                reference = csv;
            } else if (csv != reference) {
                std::fprintf(stderr, "  %s differs under %s workers\n", s.name, workers);
                ok = false;
            }
        }
    }
    if (old) setenv("FILTLAB_WORKERS", saved.c_str(), 1);
    else unsetenv("FILTLAB_WORKERS");
    return ok;
}

} // namespace

int main() {
    struct Criterion {
        int id;
        const char* description;
        bool (*check)();
    };

    const std::vector<Criterion> criteria = {
        {1, "reversed-Brownian decomposition: QV, drift slope, KS, uncompensated rejection",
         [] {
             return rows_pass(run_default("reversed-brownian"),
                              {"qv-ratio", "drift-slope[compensated", "ks-normal",
                               "drift-slope-uncompensated-rejects"});
         }},
        {2, "total-variation of the reversed-Brownian compensator matches the phi bound",
         [] {
             return rows_pass(run_default("reversed-brownian"),
                              {"mean-total-variation", "total-variation-phi-bound"});
         }},
        {3, "discretized compensators converge under subdivision refinement (BM and OU)",
         [] {
             return rows_pass(run_default("discretized-convergence"),
                              {"refinement-decreasing[bm]", "refinement-final-ratio[bm]",
                               "refinement-decreasing[ou]", "refinement-final-ratio[ou]"});
         }},
        {4, "noisy-future conditional-expectation slope recovery with zero intercept",
         [] {
             return rows_pass(run_default("noisy-future"),
                              {"slope-recovery[eps=0.1]", "slope-recovery[eps=1]",
                               "intercept-zero[eps=0.1]", "intercept-zero[eps=1]"});
         }},
        {5, "Pitman transform: QV, Gaussian increments, chi-3 terminal mean",
         [] {
             return rows_pass(run_default("pitman"),
                              {"qv-ratio", "ks-normal", "bessel3-terminal-mean"});
         }},
        {6, "honest-time band identity and total-variation bound",
         [] {
             return rows_pass(run_default("honest-bessel"),
                              {"band-identity[eps=0.2]", "band-identity[eps=0.1]", "tv-bound"});
         }},
        {7, "transient formula specializes to the Bessel-3 band formula within 1e-8",
         [] { return rows_pass(run_default("transient-honest"), {"bessel-specialization"}); }},
        {8, "projection error matches the bridge prediction and decreases with the mesh",
         [] {
             return rows_pass(run_default("weakconv"), {"projection-error", "error-decreasing"});
         }},
        {9, "Girsanov density normalization, martingale pricing, reweighted drift removal",
         [] {
             return rows_pass(run_default("girsanov"),
                              {"density-mean", "martingale-price", "drift-slope[reweighted]"});
         }},
        {10, "insider P&L positive, uninformed flat, monotone in signal noise",
         [] {
             return rows_pass(run_default("insider-pnl"),
                              {"insider-pnl-positive[eps=0.1]", "uninformed-pnl-zero",
                               "pnl-monotone-in-eps"});
         }},
        {11, "byte-identical results under 1, 2, and 8 workers", criterion_determinism},
    };

    bool all = true;
    for (const Criterion& c : criteria) {
        const bool pass = c.check();
        std::printf("[%s] criterion %2d: %s\n", pass ? "PASS" : "FAIL", c.id, c.description);
        std::fflush(stdout);
        all = all && pass;
    }
    return all ? 0 : 1;
}
