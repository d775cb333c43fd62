#pragma once

#include "qrel/entropy.hpp"
#include "qrel/free_sets.hpp"

#include <string>
#include <vector>

namespace qrel {

struct SolverConfig {
    int max_iter = 2000;
    double stop_gap = 1e-3;      // nats
    int line_search_evals = 60;
    OracleConfig oracle;
    double support_tol = kSupportTol;
    double faithful_blend = 1e-6;
    int init_samples = 4;
    int corrective_steps = 50;   // pairwise steps over the active atoms per iteration
    int corrective_evals = 30;   // line-search evaluations per pairwise step
    // atoms are drawn from (1 - mu) F + mu C (C = I/d or the hull centroid); mu starts
    // at mix_start and drops tenfold whenever the restricted gap closes, down to mix_min
    double mix_start = 1e-2;
    double mix_min = 1e-7;
    // optional start: free states with convex weights, e.g. the atoms of a previous solve
    std::vector<Matrix> warm_atoms;
    std::vector<double> warm_weights;
};

/// Distance from a state to a free set with a bracket [lower, upper].
///
/// `upper` is D(rho || sigma_star); `lower` is the best Frank-Wolfe lower bound
/// seen, so fw_gap = upper - lower. Lower bounds for separable models rest on a
/// heuristic oracle and are not certified.
struct SolverResult {
    ExtendedReal value;
    DensityOperator sigma_star;
    double fw_gap = 0.0;
    int iterations = 0;
    double lower = 0.0;
    double upper = 0.0;
    bool converged = false;
    bool certified = false;  // lower bound rests on exact/dual oracles only
    bool flagged = false;    // an oracle call hit its iteration cap
    std::string diagnostic;
    std::vector<double> upper_history;
    std::vector<double> gap_history;
    std::vector<Matrix> atoms;  // sigma_star = sum weights[i] atoms[i]
    std::vector<double> weights;
};

/// Gradient of sigma -> D(rho || sigma): I - Dlog_sigma(rho).
HermitianOperator relent_gradient(const DensityOperator& rho, const DensityOperator& sigma, double tol = kSupportTol);

/// D_F(rho) = inf over the model of D(rho || sigma), by conditional gradients.
SolverResult free_distance(const DensityOperator& rho, const FreeSetModel& model, const SolverConfig& cfg = {});

}  // namespace qrel
